#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bayeshead::detail {

/// Little-endian byte sink, independent of host byte order.
class ByteWriter {
 public:
  void magic(std::string_view tag);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);  // u32 length prefix

  const std::vector<unsigned char>& bytes() const { return bytes_; }
  void write_file(const std::filesystem::path& path) const;

 private:
  std::vector<unsigned char> bytes_;
};

/// Little-endian byte source with bounds checks; throws DataError on truncation.
class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string source);
  static ByteReader from_file(const std::filesystem::path& path);

  void expect_magic(std::string_view tag);
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str();

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& source() const { return source_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  void need(std::size_t n) const;

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
  std::string source_;
};

}  // namespace bayeshead::detail

#include "bayeshead/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bayeshead/error.hpp"
#include "bayeshead/random.hpp"
#include "binary_io.hpp"

namespace bayeshead {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  // Skip a UTF-8 BOM and blank leading lines; the first content line is the header.
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header_line = line;
      break;
    }
  }
  if (header_line.empty()) throw DataError(path.string() + ": empty file");
  header = split_fields(header_line);
  if (header.size() < 2 || trim(header.back()) != "label") {
    throw DataError(where(path, line_no) + "malformed header: expected feature columns followed by 'label'");
  }
  const std::size_t n_features = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < n_features; ++j) {
      const auto field = trim(fields[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(where(path, line_no) + "cannot parse feature '" + std::string(field) + "' in column " +
                        std::to_string(j));
      }
      if (!std::isfinite(v)) {
        throw DataError(where(path, line_no) + "non-finite feature in column " + std::to_string(j));
      }
      values.push_back(v);
    }
    const auto field = trim(fields.back());
    long label = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), label);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw DataError(where(path, line_no) + "label '" + std::string(field) + "' is not an integer");
    }
    if (label < 0) throw DataError(where(path, line_no) + "negative label " + std::to_string(label));
    labels.push_back(static_cast<int>(label));
  }
  if (labels.empty()) throw DataError(path.string() + ": no data rows");

  Dataset ds;
  ds.features.resize(static_cast<Index>(labels.size()), static_cast<Index>(n_features));
  for (Index i = 0; i < ds.features.rows(); ++i) {
    for (Index j = 0; j < ds.features.cols(); ++j) {
      ds.features(i, j) = values[static_cast<std::size_t>(i) * n_features + static_cast<std::size_t>(j)];
    }
  }
  ds.labels = std::move(labels);
  ds.n_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  if (ds.n_classes < 2) throw DataError(path.string() + ": labels describe fewer than 2 classes");
  return ds;
}

Dataset load_binary(const std::filesystem::path& path) {
  auto reader = detail::ByteReader::from_file(path);
  if (reader.remaining() == 0) throw DataError(path.string() + ": empty file");
  reader.expect_magic("BHFT");
  const auto version = reader.u16();
  if (version != 1) reader.fail("unsupported version " + std::to_string(version));
  const std::uint32_t n = reader.u32();
  const std::uint32_t d = reader.u32();
  const std::uint32_t c = reader.u32();
  if (n == 0 || d == 0) reader.fail("header declares an empty matrix");
  if (c < 2) reader.fail("header declares fewer than 2 classes");
  const std::uint64_t expected = std::uint64_t(n) * d * 4 + std::uint64_t(n) * 4;
  if (reader.remaining() != expected) {
    reader.fail("payload size " + std::to_string(reader.remaining()) + " does not match header (" +
                std::to_string(expected) + " bytes)");
  }
  Dataset ds;
  ds.n_classes = static_cast<int>(c);
  ds.features.resize(n, d);
  for (Index i = 0; i < ds.features.rows(); ++i) {
    for (Index j = 0; j < ds.features.cols(); ++j) {
      const float v = reader.f32();
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": row " + std::to_string(i) + ": non-finite feature in column " +
                        std::to_string(j));
      }
      ds.features(i, j) = static_cast<double>(v);
    }
  }
  ds.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t label = reader.u32();
    if (label >= c) {
      throw DataError(path.string() + ": row " + std::to_string(i) + ": label " + std::to_string(label) +
                      " out of range [0," + std::to_string(c) + ")");
    }
    ds.labels[i] = static_cast<int>(label);
  }
  return ds;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) throw DataError("dataset must have N >= 1 and D >= 1");
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw DataError("label count " + std::to_string(labels.size()) + " does not match " +
                    std::to_string(features.rows()) + " feature rows");
  }
  if (n_classes < 2) throw DataError("dataset must have at least 2 classes");
  if (!meta.empty() && static_cast<Index>(meta.size()) != features.rows()) {
    throw DataError("metadata row count does not match features");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw DataError("row " + std::to_string(i) + ": label " + std::to_string(labels[i]) + " out of range [0," +
                      std::to_string(n_classes) + ")");
    }
  }
  for (Index i = 0; i < features.rows(); ++i) {
    if (!features.row(i).allFinite()) throw DataError("row " + std::to_string(i) + ": non-finite feature");
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.n_classes = n_classes;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.features.row(static_cast<Index>(k)) = features.row(rows[k]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[k])]);
    if (!meta.empty()) out.meta.push_back(meta[static_cast<std::size_t>(rows[k])]);
  }
  return out;
}

DataFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".bhft" ? DataFormat::feature_binary : DataFormat::csv;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  Dataset ds = format == DataFormat::csv ? load_csv(path) : load_binary(path);
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_for_path(path)); }

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (Index j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[32];
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
      out << buf << ',';
    }
    out << ds.labels[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void save_feature_binary(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  detail::ByteWriter w;
  w.magic("BHFT");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(ds.dim()));
  w.u32(static_cast<std::uint32_t>(ds.n_classes));
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.dim(); ++j) w.f32(static_cast<float>(ds.features(i, j)));
  }
  for (int label : ds.labels) w.u32(static_cast<std::uint32_t>(label));
  w.write_file(path);
}

Split split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("train_fraction must lie in (0,1)");
  }
  const Index n = ds.size();
  const auto n_train = static_cast<Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train > n - 1) {
    throw DataError("train_fraction " + std::to_string(spec.train_fraction) + " on N=" + std::to_string(n) +
                    " leaves an empty partition");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(order[i], order[j]);
  }
  Split out;
  out.train_rows.assign(order.begin(), order.begin() + n_train);
  out.test_rows.assign(order.begin() + n_train, order.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = ds.subset(out.train_rows);
  out.test = ds.subset(out.test_rows);
  return out;
}

Dataset Standardization::apply(const Dataset& ds) const {
  if (ds.dim() != mean.size()) throw DataError("standardization dimension mismatch");
  Dataset out = ds;
  for (Index j = 0; j < ds.dim(); ++j) {
    out.features.col(j) = ((ds.features.col(j).array() - mean(j)) / std_dev(j)).matrix();
  }
  return out;
}

Standardized standardize(const Dataset& train, const Dataset& test) {
  if (train.size() < 2) throw DataError("standardize needs at least 2 training rows");
  if (test.dim() != train.dim()) throw DataError("train/test feature dimensions differ");
  Standardization stats;
  stats.mean = Eigen::VectorXd::Zero(train.dim());
  stats.std_dev = Eigen::VectorXd::Ones(train.dim());
  for (Index j = 0; j < train.dim(); ++j) {
    const auto col = train.features.col(j);
    if (col.maxCoeff() == col.minCoeff()) continue;
    const double m = col.mean();
    const double var = (col.array() - m).square().mean();
    stats.mean(j) = m;
    stats.std_dev(j) = std::sqrt(var);
  }
  return {stats.apply(train), stats.apply(test), stats};
}

std::vector<QaRecord> load_qa_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<QaRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where(path, line_no) + "invalid JSON: " + e.what());
    }
    try {
      QaRecord rec;
      rec.question = obj.at("question").get<std::string>();
      rec.options = obj.at("options").get<std::vector<std::string>>();
      const auto& label = obj.at("label");
      if (label.is_array()) {
        if (label.size() != 1) {
          throw DataError(where(path, line_no) + "expected exactly one correct option, got " +
                          std::to_string(label.size()));
        }
        rec.label = label.at(0).get<int>();
      } else {
        rec.label = label.get<int>();
      }
      if (rec.label < 0 || rec.label >= static_cast<int>(rec.options.size())) {
        throw DataError(where(path, line_no) + "label " + std::to_string(rec.label) + " out of range");
      }
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where(path, line_no) + "bad record: " + e.what());
    }
  }
  if (out.empty()) throw DataError(path.string() + ": empty file");
  return out;
}

void save_qa_jsonl(const std::vector<QaRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& rec : records) {
    nlohmann::json obj = {{"question", rec.question}, {"options", rec.options}, {"label", rec.label}};
    out << obj.dump() << '\n';
  }
}

QaRecord reduce_options(const QaRecord& row, std::uint64_t seed) {
  if (row.options.size() != 5) {
    throw DataError("reduce_options expects 5 options, got " + std::to_string(row.options.size()));
  }
  if (row.label < 0 || row.label >= 5) throw DataError("reduce_options: no option is marked correct");

  std::vector<std::size_t> distractors;
  for (std::size_t i = 0; i < 5; ++i) {
    if (static_cast<int>(i) != row.label) distractors.push_back(i);
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(4 - i));
    std::swap(distractors[i], distractors[j]);
  }
  const auto position = static_cast<int>(rng.uniform_index(3));

  QaRecord out;
  out.question = row.question;
  out.label = position;
  std::size_t next = 0;
  for (int slot = 0; slot < 3; ++slot) {
    if (slot == position) {
      out.options.push_back(row.options[static_cast<std::size_t>(row.label)]);
    } else {
      out.options.push_back(row.options[distractors[next++]]);
    }
  }
  return out;
}

}  // namespace bayeshead

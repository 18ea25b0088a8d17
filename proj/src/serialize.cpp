#include "bayeshead/serialize.hpp"

#include <cstdio>
#include <fstream>

#include "bayeshead/error.hpp"
#include "binary_io.hpp"

namespace bayeshead {

namespace {

void write_layout(detail::ByteWriter& w, const ParamLayout& layout) {
  w.u32(static_cast<std::uint32_t>(layout.size()));
  w.u32(static_cast<std::uint32_t>(layout.tensors().size()));
  for (const auto& t : layout.tensors()) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.rows));
    w.u32(static_cast<std::uint32_t>(t.cols));
  }
}

ParamLayout read_layout(detail::ByteReader& r) {
  const std::uint32_t p = r.u32();
  const std::uint32_t count = r.u32();
  std::vector<TensorSpec> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    TensorSpec t;
    t.name = r.str();
    t.rows = r.u32();
    t.cols = r.u32();
    if (static_cast<double>(t.rows) * static_cast<double>(t.cols) > static_cast<double>(p)) {
      r.fail("tensor '" + t.name + "' exceeds declared P");
    }
    tensors.push_back(std::move(t));
  }
  ParamLayout layout(std::move(tensors));
  if (layout.size() != static_cast<Index>(p)) r.fail("layout extents do not sum to P");
  return layout;
}

void require(const detail::ByteReader& r, Index count, Index width) {
  if (count < 0 || static_cast<double>(count) * static_cast<double>(width) > static_cast<double>(r.remaining())) {
    r.fail("declared size exceeds file length");
  }
}

void begin(detail::ByteReader& r, const char* magic) {
  r.expect_magic(magic);
  const auto version = r.u16();
  if (version != 1) r.fail("unsupported version " + std::to_string(version));
}

void finish(const detail::ByteReader& r) {
  if (r.remaining() != 0) r.fail("trailing bytes after payload");
}

}  // namespace

void save_param_vector(const ParamVector& params, const std::filesystem::path& path) {
  if (params.values.size() != params.layout.size()) throw Error("parameter values do not match layout");
  detail::ByteWriter w;
  w.magic("BHPV");
  w.u16(1);
  write_layout(w, params.layout);
  for (Index i = 0; i < params.values.size(); ++i) w.f64(params.values(i));
  w.write_file(path);
}

ParamVector load_param_vector(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  begin(r, "BHPV");
  ParamVector out;
  out.layout = read_layout(r);
  require(r, out.layout.size(), 8);
  out.values.resize(out.layout.size());
  for (Index i = 0; i < out.values.size(); ++i) out.values(i) = r.f64();
  finish(r);
  return out;
}

void save_chain(const SampleChain& chain, const std::filesystem::path& path) {
  if (chain.draws.cols() != chain.layout.size()) throw Error("chain draws do not match layout");
  const Index s = chain.n_draws();
  detail::ByteWriter w;
  w.magic("BHSC");
  w.u16(1);
  write_layout(w, chain.layout);
  w.u32(static_cast<std::uint32_t>(s));
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < chain.n_params(); ++j) w.f64(chain.draws(i, j));
  }
  for (Index i = 0; i < s; ++i) {
    w.f64(i < static_cast<Index>(chain.accept_stats.size()) ? chain.accept_stats[static_cast<std::size_t>(i)] : 0.0);
  }
  for (Index i = 0; i < s; ++i) {
    const int depth = i < static_cast<Index>(chain.tree_depths.size()) ? chain.tree_depths[static_cast<std::size_t>(i)] : 0;
    w.u32(static_cast<std::uint32_t>(depth));
  }
  w.u64(static_cast<std::uint64_t>(chain.divergences));
  w.f64(chain.step_size_final);
  for (Index j = 0; j < chain.n_params(); ++j) {
    w.f64(chain.inverse_mass.size() == chain.n_params() ? chain.inverse_mass(j) : 1.0);
  }
  w.u64(chain.seed);
  w.write_file(path);
}

SampleChain load_chain(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  begin(r, "BHSC");
  SampleChain chain;
  chain.layout = read_layout(r);
  const Index p = chain.layout.size();
  const Index s = r.u32();
  require(r, s * (p + 1), 8);
  chain.draws.resize(s, p);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < p; ++j) chain.draws(i, j) = r.f64();
  }
  for (Index i = 0; i < s; ++i) chain.accept_stats.push_back(r.f64());
  for (Index i = 0; i < s; ++i) chain.tree_depths.push_back(static_cast<int>(r.u32()));
  chain.divergences = static_cast<Index>(r.u64());
  chain.step_size_final = r.f64();
  chain.inverse_mass.resize(p);
  for (Index j = 0; j < p; ++j) chain.inverse_mass(j) = r.f64();
  chain.seed = r.u64();
  finish(r);
  return chain;
}

void save_gaussian(const GaussianPosterior& posterior, const std::filesystem::path& path) {
  const auto& mean = posterior.mean;
  if (mean.values.size() != mean.layout.size() || posterior.variance.size() != mean.values.size()) {
    throw Error("Gaussian posterior vectors do not match layout");
  }
  detail::ByteWriter w;
  w.magic("BHGP");
  w.u16(1);
  write_layout(w, mean.layout);
  for (Index i = 0; i < mean.values.size(); ++i) w.f64(mean.values(i));
  for (Index i = 0; i < posterior.variance.size(); ++i) w.f64(posterior.variance(i));
  w.write_file(path);
}

GaussianPosterior load_gaussian(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  begin(r, "BHGP");
  GaussianPosterior out;
  out.mean.layout = read_layout(r);
  const Index p = out.mean.layout.size();
  require(r, 2 * p, 8);
  out.mean.values.resize(p);
  out.variance.resize(p);
  for (Index i = 0; i < p; ++i) out.mean.values(i) = r.f64();
  for (Index i = 0; i < p; ++i) out.variance(i) = r.f64();
  finish(r);
  return out;
}

void save_chain_csv(const SampleChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (Index j = 0; j < chain.n_params(); ++j) {
    out << (j ? "," : "") << '"' << chain.layout.coordinate_name(j) << '"';
  }
  out << '\n';
  char buf[32];
  for (Index i = 0; i < chain.n_draws(); ++i) {
    for (Index j = 0; j < chain.n_params(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", chain.draws(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace bayeshead

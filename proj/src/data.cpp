#include "gpnd/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gpnd/binary_io.hpp"
#include "gpnd/errors.hpp"

namespace gpnd::data {

void validate(const Dataset& d) {
  if (d.labels.size() != d.samples.rows) throw DataError("dataset: label count does not match sample count");
  if (d.samples.data.size() != d.samples.rows * d.samples.cols) throw DataError("dataset: malformed sample matrix");
  for (double v : d.samples.data)
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("dataset: sample value outside [0, 1]");
  for (int l : d.labels)
    if (l < 0) throw DataError("dataset: negative label");
}

Dataset subset(const Dataset& d, std::span<const std::size_t> idx) {
  Dataset out;
  out.samples = gather_rows(d.samples, idx);
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(d.labels[i]);
  return out;
}

std::vector<std::size_t> indices_with_label(const Dataset& d, int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] == label) out.push_back(i);
  return out;
}

std::vector<std::size_t> indices_without_label(const Dataset& d, int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] != label) out.push_back(i);
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  Dataset out;
  out.samples = vstack(a.samples, b.samples);
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::uint8_t> read_maybe_gz(const std::filesystem::path& path) {
  if (!ends_with(path.string(), ".gz")) return io::read_file(path);
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buf(1 << 20);
  for (;;) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      gzclose(f);
      throw DataError("corrupt gzip stream in " + path.string());
    }
    if (got == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + got);
  }
  gzclose(f);
  return out;
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_maybe_gz(images);
  const auto lab = read_maybe_gz(labels);
  if (img.size() < 16) throw DataError("truncated IDX image file " + images.string());
  if (lab.size() < 8) throw DataError("truncated IDX label file " + labels.string());
  if (be32(img, 0) != 0x00000803) throw DataError("bad IDX image magic in " + images.string());
  if (be32(lab, 0) != 0x00000801) throw DataError("bad IDX label magic in " + labels.string());
  const std::size_t count = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  const std::size_t label_count = be32(lab, 4);
  if (count != label_count)
    throw DataError("IDX count mismatch: " + std::to_string(count) + " images, " + std::to_string(label_count) +
                    " labels");
  const std::size_t m = rows * cols;
  if (m == 0) throw DataError("IDX images have zero size");
  if (img.size() < 16 + count * m) throw DataError("truncated IDX image file " + images.string());
  if (lab.size() < 8 + count) throw DataError("truncated IDX label file " + labels.string());

  Dataset d;
  d.samples = Matrix(count, m);
  d.labels.resize(count);
  for (std::size_t i = 0; i < count * m; ++i) d.samples.data[i] = static_cast<double>(img[16 + i]) / 255.0;
  for (std::size_t i = 0; i < count; ++i) d.labels[i] = lab[8 + i];
  return d;
}

Dataset load_idx_directory(const std::filesystem::path& dir) {
  auto find = [&](const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
      auto p = dir / (stem + suffix);
      if (std::filesystem::exists(p)) return p;
    }
    throw DataError("missing " + stem + "[.gz] in " + dir.string());
  };
  Dataset train = load_idx(find("train-images-idx3-ubyte"), find("train-labels-idx1-ubyte"));
  Dataset test = load_idx(find("t10k-images-idx3-ubyte"), find("t10k-labels-idx1-ubyte"));
  return concat(train, test);
}

// ---------------------------------------------------------------------------
// Synthetic manifolds

void validate(const SyntheticManifoldConfig& c) {
  if (c.latent_dim == 0 || c.ambient_dim == 0) throw std::invalid_argument("synthetic: zero dimension");
  if (c.latent_dim >= c.ambient_dim) throw std::invalid_argument("synthetic: latent_dim must be below ambient_dim");
  if (!(c.noise_sigma >= 0.0) || !std::isfinite(c.noise_sigma))
    throw std::invalid_argument("synthetic: noise_sigma must be >= 0");
  if (c.count == 0 || c.classes == 0) throw std::invalid_argument("synthetic: count and classes must be >= 1");
  if (c.generator == GeneratorKind::tanh_network && c.hidden_dim == 0)
    throw std::invalid_argument("synthetic: hidden_dim must be >= 1");
  if (!c.linear_map.empty() && (c.linear_map.rows != c.ambient_dim || c.linear_map.cols != c.latent_dim))
    throw std::invalid_argument("synthetic: linear_map must be ambient_dim x latent_dim");
}

std::vector<double> Generator::operator()(std::span<const double> z) const {
  if (kind == GeneratorKind::linear) {
    std::vector<double> x(offset);
    for (std::size_t i = 0; i < w1.rows; ++i)
      for (std::size_t j = 0; j < w1.cols; ++j) x[i] += w1(i, j) * z[j];
    return x;
  }
  std::vector<double> h(w1.rows);
  for (std::size_t i = 0; i < w1.rows; ++i) {
    double s = b1[i];
    for (std::size_t j = 0; j < w1.cols; ++j) s += w1(i, j) * z[j];
    h[i] = std::tanh(s);
  }
  std::vector<double> x(offset);
  for (std::size_t i = 0; i < w2.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w2.cols; ++j) s += w2(i, j) * h[j];
    x[i] += 0.25 * s;
  }
  return x;
}

namespace {

// Gram-Schmidt on seeded Gaussian columns.
Matrix random_orthonormal(std::size_t m, std::size_t n, Rng& rng) {
  Matrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (;;) {
      std::vector<double> c(m);
      for (auto& v : c) v = rng.normal();
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < j; ++k) {
          double d = 0.0;
          for (std::size_t i = 0; i < m; ++i) d += c[i] * q(i, k);
          for (std::size_t i = 0; i < m; ++i) c[i] -= d * q(i, k);
        }
      double nrm = 0.0;
      for (double v : c) nrm += v * v;
      nrm = std::sqrt(nrm);
      if (nrm < 1e-8) continue;
      for (std::size_t i = 0; i < m; ++i) q(i, j) = c[i] / nrm;
      break;
    }
  }
  return q;
}

Generator make_generator(const SyntheticManifoldConfig& c, Rng& rng) {
  Generator g;
  g.kind = c.generator;
  g.offset.assign(c.ambient_dim, 0.5);
  if (c.generator == GeneratorKind::linear) {
    if (!c.linear_map.empty()) {
      g.w1 = c.linear_map;
    } else {
      g.w1 = random_orthonormal(c.ambient_dim, c.latent_dim, rng);
      for (auto& v : g.w1.data) v *= c.linear_scale;
    }
    return g;
  }
  g.w1 = Matrix(c.hidden_dim, c.latent_dim);
  const double s1 = 1.5 / std::sqrt(static_cast<double>(c.latent_dim));
  for (auto& v : g.w1.data) v = s1 * rng.normal();
  g.b1.resize(c.hidden_dim);
  for (auto& v : g.b1) v = 0.5 * rng.normal();
  g.w2 = Matrix(c.ambient_dim, c.hidden_dim);
  for (std::size_t i = 0; i < c.ambient_dim; ++i) {
    auto row = g.w2.row(i);
    double nrm = 0.0;
    do {
      nrm = 0.0;
      for (auto& v : row) {
        v = rng.normal();
        nrm += v * v;
      }
    } while (nrm == 0.0);
    nrm = std::sqrt(nrm);
    for (auto& v : row) v /= nrm;
  }
  return g;
}

std::string describe(const SyntheticManifoldConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "generator=" << (c.generator == GeneratorKind::linear ? "linear" : "tanh_network")
     << ";latent_dim=" << c.latent_dim << ";ambient_dim=" << c.ambient_dim << ";hidden_dim=" << c.hidden_dim
     << ";linear_scale=" << c.linear_scale << ";explicit_map=" << (c.linear_map.empty() ? 0 : 1)
     << ";noise_sigma=" << c.noise_sigma << ";count=" << c.count << ";classes=" << c.classes
     << ";seed=" << c.seed.value;
  return os.str();
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticManifoldConfig& c) {
  validate(c);
  Rng rng(derive(c.seed, SeedPurpose::synthetic));
  SyntheticData out;
  const std::size_t total = c.count * c.classes;
  out.data.samples = Matrix(total, c.ambient_dim);
  out.data.labels.resize(total);
  out.latents = Matrix(total, c.latent_dim);
  out.generator_spec = describe(c);
  for (std::size_t k = 0; k < c.classes; ++k) out.generators.push_back(make_generator(c, rng));

  std::size_t row = 0;
  for (std::size_t k = 0; k < c.classes; ++k) {
    const Generator& g = out.generators[k];
    for (std::size_t i = 0; i < c.count; ++i, ++row) {
      auto z = out.latents.row(row);
      for (auto& v : z) v = rng.normal();
      const auto clean = g(z);
      auto x = out.data.samples.row(row);
      for (std::size_t j = 0; j < c.ambient_dim; ++j) {
        double v = clean[j] + (c.noise_sigma > 0.0 ? c.noise_sigma * rng.normal() : 0.0);
        if (v < 0.0 || v > 1.0) {
          v = std::clamp(v, 0.0, 1.0);
          ++out.clipped_values;
        }
        x[j] = v;
      }
      out.data.labels[row] = static_cast<int>(k);
    }
  }
  return out;
}

namespace {
constexpr std::string_view kDatasetMagic = "GPDS";
constexpr std::uint32_t kDatasetVersion = 1;
}  // namespace

std::vector<std::uint8_t> serialize_synthetic(const SyntheticData& d) {
  io::Writer w;
  w.bytes(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(d.data.size()));
  w.u32(static_cast<std::uint32_t>(d.data.dim()));
  w.u32(static_cast<std::uint32_t>(d.latents.cols));
  w.f64s(d.data.samples.data);
  w.f64s(d.latents.data);
  for (int l : d.data.labels) w.u32(static_cast<std::uint32_t>(l));
  w.u32(static_cast<std::uint32_t>(d.generator_spec.size()));
  w.bytes(d.generator_spec);
  return std::move(w.buffer());
}

SyntheticData deserialize_synthetic(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "dataset file");
  if (r.bytes(4) != kDatasetMagic) throw DataError("not a GPDS dataset file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) throw DataError("unsupported dataset version " + std::to_string(version));
  const std::uint64_t n_samples = r.u32(), m = r.u32(), n = r.u32();
  if (n_samples * (m + n) * 8 + n_samples * 4 > r.remaining()) throw DataError("truncated dataset file");
  SyntheticData d;
  d.data.samples = Matrix(n_samples, m);
  d.latents = Matrix(n_samples, n);
  r.f64s(d.data.samples.data);
  r.f64s(d.latents.data);
  d.data.labels.resize(n_samples);
  for (auto& l : d.data.labels) l = static_cast<int>(r.u32());
  const std::uint32_t len = r.u32();
  d.generator_spec = r.bytes(len);
  if (r.remaining() != 0) throw DataError("dataset file has trailing bytes");
  validate(d.data);
  return d;
}

void save_synthetic(const SyntheticData& d, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_synthetic(d));
}

SyntheticData load_synthetic(const std::filesystem::path& path) { return deserialize_synthetic(io::read_file(path)); }

Dataset load_any(const std::string& spec) {
  if (const auto comma = spec.find(','); comma != std::string::npos)
    return load_idx(spec.substr(0, comma), spec.substr(comma + 1));
  const std::filesystem::path p(spec);
  if (std::filesystem::is_directory(p)) return load_idx_directory(p);
  if (!std::filesystem::exists(p)) throw DataError("no such dataset: " + spec);
  return load_synthetic(p).data;
}

// ---------------------------------------------------------------------------
// Splits and outlier injection

Split split(const Dataset& d, std::span<const double> fractions, Seed seed) {
  if (fractions.size() != 3) throw std::invalid_argument("split: need three fractions");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split: fractions must sum to 1");
  const std::size_t n = d.size();
  const auto a = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[0]));
  const auto b = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[1]));
  if (a + b > n) throw std::invalid_argument("split: fractions infeasible for " + std::to_string(n) + " samples");
  Rng rng(seed);
  const auto perm = permutation(n, rng);
  const std::span<const std::size_t> p(perm);
  return {subset(d, p.subspan(0, a)), subset(d, p.subspan(a, b)), subset(d, p.subspan(a + b))};
}

std::size_t outlier_count(std::size_t inliers, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("outlier ratio must be in (0, 1)");
  return static_cast<std::size_t>(std::llround(static_cast<double>(inliers) * ratio / (1.0 - ratio)));
}

std::vector<std::size_t> sample_without_replacement(std::span<const std::size_t> pool, std::size_t count, Seed seed) {
  if (pool.empty()) throw DataError("empty donor pool for outlier injection");
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(count);
  std::vector<std::size_t> work(pool.begin(), pool.end());
  while (out.size() < count) {
    const std::size_t take = std::min(count - out.size(), work.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(work[i], work[i + rng.below(work.size() - i)]);
      out.push_back(work[i]);
    }
  }
  return out;
}

LabeledSet inject_outliers(const Dataset& inliers, const Dataset& corpus, int inlier_class, double ratio, Seed seed) {
  const std::size_t k = outlier_count(inliers.size(), ratio);
  const auto pool = indices_without_label(corpus, inlier_class);
  LabeledSet out;
  out.outlier_source = sample_without_replacement(pool, k, seed);
  out.data = concat(inliers, subset(corpus, out.outlier_source));
  out.labels.assign(inliers.size(), eval::Label::inlier);
  out.labels.resize(inliers.size() + k, eval::Label::outlier);
  return out;
}

}  // namespace gpnd::data

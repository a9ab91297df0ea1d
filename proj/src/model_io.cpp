#include <cmath>
#include <fstream>
#include <limits>

#include "gpnd/binary_io.hpp"
#include "gpnd/detector.hpp"

namespace gpnd::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace gpnd::io

namespace gpnd::detector {

namespace {

constexpr std::string_view kMagic = "GPND";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagThreshold = 1u;
// Sanity bound on any single dimension read from a file.
constexpr std::uint32_t kMaxDim = 1u << 24;

const nn::DenseNetwork& net_at(const aae::AaeModel& m, int i) {
  switch (i) {
    case 0: return m.encoder;
    case 1: return m.decoder;
    case 2: return m.disc_z;
    default: return m.disc_x;
  }
}

nn::DenseNetwork& net_at(aae::AaeModel& m, int i) {
  return const_cast<nn::DenseNetwork&>(net_at(static_cast<const aae::AaeModel&>(m), i));
}

}  // namespace

std::vector<std::uint8_t> serialize(const DetectorModel& model) {
  validate(model);
  io::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.ambient_dim()));
  w.u32(static_cast<std::uint32_t>(model.latent_dim()));
  w.u32(model.threshold ? kFlagThreshold : 0u);
  w.u32(static_cast<std::uint32_t>(model.scoring_mode));
  w.u32(static_cast<std::uint32_t>(model.perp_exponent));
  w.u32(static_cast<std::uint32_t>(model.residual_hist.densities.size()));
  for (int i = 0; i < 4; ++i) {
    const auto& net = net_at(model.aae, i);
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
      w.u32(static_cast<std::uint32_t>(l.in()));
      w.u32(static_cast<std::uint32_t>(l.out()));
      w.u32(static_cast<std::uint32_t>(l.activation));
    }
  }
  for (int i = 0; i < 4; ++i)
    for (const auto& l : net_at(model.aae, i).layers) {
      w.f64s(l.weight.data);
      w.f64s(l.bias);
    }
  for (const auto& d : model.latent_density.dims) {
    w.f64(d.mu);
    w.f64(d.alpha);
    w.f64(d.beta);
  }
  w.f64s(model.residual_hist.edges);
  w.f64s(model.residual_hist.densities);
  w.f64(model.residual_hist.floor_density);
  w.f64(model.residual_hist.r_min);
  w.f64(model.jacobian_step);
  w.f64(model.threshold.value_or(0.0));
  w.u64(io::fnv1a64(w.buffer()));
  return std::move(w.buffer());
}

DetectorModel deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 + 8) throw DataError("truncated model file");
  io::Reader r(bytes, "model file");
  if (r.bytes(4) != kMagic) throw DataError("not a GPND model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw DataError("unsupported model file version " + std::to_string(version));
  const std::uint64_t stored =
      io::Reader(bytes.subspan(bytes.size() - 8), "model checksum").u64();
  if (io::fnv1a64(bytes.first(bytes.size() - 8)) != stored) throw DataError("model file checksum mismatch");

  DetectorModel model;
  const std::uint32_t m = r.u32(), n = r.u32(), flags = r.u32(), mode = r.u32(), exponent = r.u32(), bins = r.u32();
  if (m == 0 || n == 0 || m > kMaxDim || n >= m) throw DataError("model file has invalid dimensions");
  if (mode > 3) throw DataError("model file has unknown scoring mode");
  if (exponent > 1) throw DataError("model file has unknown perpendicular exponent");
  if (bins == 0 || bins > kMaxDim) throw DataError("model file has invalid histogram size");
  model.scoring_mode = static_cast<ScoringMode>(mode);
  model.perp_exponent = static_cast<density::PerpExponent>(exponent);

  for (int i = 0; i < 4; ++i) {
    auto& net = net_at(model.aae, i);
    const std::uint32_t layers = r.u32();
    if (layers == 0 || layers > 1024) throw DataError("model file has invalid layer count");
    for (std::uint32_t k = 0; k < layers; ++k) {
      const std::uint32_t in = r.u32(), out = r.u32(), act = r.u32();
      if (in == 0 || out == 0 || in > kMaxDim || out > kMaxDim || act > 4)
        throw DataError("model file has invalid layer spec");
      if (static_cast<std::uint64_t>(in) * out * 8 > r.remaining()) throw DataError("truncated model file");
      net.layers.push_back({Matrix(out, in), std::vector<double>(out), static_cast<nn::Activation>(act)});
    }
  }
  for (int i = 0; i < 4; ++i)
    for (auto& l : net_at(model.aae, i).layers) {
      r.f64s(l.weight.data);
      r.f64s(l.bias);
    }
  model.latent_density.dims.resize(n);
  for (auto& d : model.latent_density.dims) {
    d.mu = r.f64();
    d.alpha = r.f64();
    d.beta = r.f64();
  }
  model.residual_hist.edges.resize(bins + 1);
  model.residual_hist.densities.resize(bins);
  r.f64s(model.residual_hist.edges);
  r.f64s(model.residual_hist.densities);
  model.residual_hist.floor_density = r.f64();
  model.residual_hist.r_min = r.f64();
  model.jacobian_step = r.f64();
  const double gamma = r.f64();
  if (flags & kFlagThreshold) model.threshold = gamma;
  if (r.remaining() != 8) throw DataError("model file has trailing bytes");

  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file is inconsistent: ") + e.what());
  }
  if (model.ambient_dim() != m || model.latent_dim() != n)
    throw DataError("model file header dimensions disagree with the networks");
  return model;
}

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(model));
}

DetectorModel load_model(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace gpnd::detector

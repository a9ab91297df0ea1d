#include "gpnd/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "gpnd/binary_io.hpp"

namespace gpnd::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': expected a real number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"latent_dim", [](RunConfig& c, auto& k, auto& v) { c.latent_dim = to_uint(k, v); }},
      {"hidden_dim", [](RunConfig& c, auto& k, auto& v) { c.hidden_dim = to_uint(k, v); }},
      {"epochs", [](RunConfig& c, auto& k, auto& v) { c.epochs = to_uint(k, v); }},
      {"batch_size", [](RunConfig& c, auto& k, auto& v) { c.batch_size = to_uint(k, v); }},
      {"learning_rate", [](RunConfig& c, auto& k, auto& v) { c.learning_rate = to_real(k, v); }},
      {"lambda_recon", [](RunConfig& c, auto& k, auto& v) { c.lambda_recon = to_real(k, v); }},
      {"disc_z_weight", [](RunConfig& c, auto& k, auto& v) { c.disc_z_weight = to_real(k, v); }},
      {"hist_bins", [](RunConfig& c, auto& k, auto& v) { c.hist_bins = to_uint(k, v); }},
      {"jacobian_step", [](RunConfig& c, auto& k, auto& v) { c.jacobian_step = to_real(k, v); }},
      {"perp_exponent",
       [](RunConfig& c, auto& k, auto& v) {
         try {
           c.perp_exponent = density::perp_exponent_from_string(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError("config key '" + k + "': " + e.what());
         }
       }},
      {"scoring_mode",
       [](RunConfig& c, auto& k, auto& v) {
         try {
           c.scoring_mode = detector::scoring_mode_from_string(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError("config key '" + k + "': " + e.what());
         }
       }},
      {"ratios",
       [](RunConfig& c, auto& k, auto& v) {
         std::vector<double> r;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) r.push_back(to_real(k, trim(item)));
         if (r.empty()) throw ConfigError("config key '" + k + "': empty list");
         c.ratios = r;
       }},
      {"folds", [](RunConfig& c, auto& k, auto& v) { c.folds = to_uint(k, v); }},
      {"max_train", [](RunConfig& c, auto& k, auto& v) { c.max_train = to_uint(k, v); }},
      {"validation_ratio",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "match")
           c.validation_ratio.reset();
         else
           c.validation_ratio = to_real(k, v);
       }},
      {"ablation", [](RunConfig& c, auto& k, auto& v) { c.ablation = to_bool(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = Seed{to_uint(k, v)}; }},
      {"synthetic_latent_dim", [](RunConfig& c, auto& k, auto& v) { c.synthetic.latent_dim = to_uint(k, v); }},
      {"synthetic_ambient_dim", [](RunConfig& c, auto& k, auto& v) { c.synthetic.ambient_dim = to_uint(k, v); }},
      {"synthetic_hidden_dim", [](RunConfig& c, auto& k, auto& v) { c.synthetic.hidden_dim = to_uint(k, v); }},
      {"synthetic_generator",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "tanh_network")
           c.synthetic.generator = data::GeneratorKind::tanh_network;
         else if (v == "linear")
           c.synthetic.generator = data::GeneratorKind::linear;
         else
           throw ConfigError("config key '" + k + "': expected tanh_network or linear, got '" + v + "'");
       }},
      {"synthetic_linear_scale", [](RunConfig& c, auto& k, auto& v) { c.synthetic.linear_scale = to_real(k, v); }},
      {"synthetic_noise_sigma", [](RunConfig& c, auto& k, auto& v) { c.synthetic.noise_sigma = to_real(k, v); }},
      {"synthetic_count", [](RunConfig& c, auto& k, auto& v) { c.synthetic.count = to_uint(k, v); }},
      {"synthetic_classes", [](RunConfig& c, auto& k, auto& v) { c.synthetic.classes = to_uint(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

void set(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
  if (key == "seed") cfg.synthetic.seed = cfg.seed;
}

RunConfig parse(const std::string& text) {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (auto [it, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigError("config key '" + key + "' repeated on line " + std::to_string(lineno));
    set(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

std::string format(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("latent_dim", std::to_string(c.latent_dim));
  kv("hidden_dim", std::to_string(c.hidden_dim));
  kv("epochs", std::to_string(c.epochs));
  kv("batch_size", std::to_string(c.batch_size));
  kv("learning_rate", real_text(c.learning_rate));
  kv("lambda_recon", real_text(c.lambda_recon));
  kv("disc_z_weight", real_text(c.disc_z_weight));
  kv("hist_bins", std::to_string(c.hist_bins));
  kv("jacobian_step", real_text(c.jacobian_step));
  kv("perp_exponent", density::to_string(c.perp_exponent));
  kv("scoring_mode", detector::to_string(c.scoring_mode));
  std::string r;
  for (std::size_t i = 0; i < c.ratios.size(); ++i) r += (i ? "," : "") + real_text(c.ratios[i]);
  kv("ratios", r);
  kv("folds", std::to_string(c.folds));
  kv("max_train", std::to_string(c.max_train));
  kv("validation_ratio", c.validation_ratio ? real_text(*c.validation_ratio) : "match");
  kv("ablation", c.ablation ? "true" : "false");
  kv("seed", std::to_string(c.seed.value));
  kv("synthetic_latent_dim", std::to_string(c.synthetic.latent_dim));
  kv("synthetic_ambient_dim", std::to_string(c.synthetic.ambient_dim));
  kv("synthetic_hidden_dim", std::to_string(c.synthetic.hidden_dim));
  kv("synthetic_generator", c.synthetic.generator == data::GeneratorKind::linear ? "linear" : "tanh_network");
  kv("synthetic_linear_scale", real_text(c.synthetic.linear_scale));
  kv("synthetic_noise_sigma", real_text(c.synthetic.noise_sigma));
  kv("synthetic_count", std::to_string(c.synthetic.count));
  kv("synthetic_classes", std::to_string(c.synthetic.classes));
  return os.str();
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (c.latent_dim == 0) fail("latent_dim", "must be >= 1");
  if (c.hidden_dim == 0) fail("hidden_dim", "must be >= 1");
  if (c.batch_size == 0) fail("batch_size", "must be >= 1");
  if (!(c.learning_rate > 0.0)) fail("learning_rate", "must be > 0");
  if (!(c.lambda_recon >= 0.0)) fail("lambda_recon", "must be >= 0");
  if (!(c.disc_z_weight >= 0.0)) fail("disc_z_weight", "must be >= 0");
  if (c.hist_bins == 0) fail("hist_bins", "must be >= 1");
  if (!(c.jacobian_step > 0.0)) fail("jacobian_step", "must be > 0");
  for (double r : c.ratios)
    if (!(r > 0.0 && r < 1.0)) fail("ratios", "every ratio must be in (0, 1)");
  if (c.folds < 1 || c.folds > 5) fail("folds", "must be in 1..5");
  if (c.max_train != 0 && c.max_train < 100) fail("max_train", "must be 0 or >= 100");
  if (c.validation_ratio && !(*c.validation_ratio > 0.0 && *c.validation_ratio < 1.0))
    fail("validation_ratio", "must be 'match' or in (0, 1)");
  const auto& s = c.synthetic;
  if (s.latent_dim == 0) fail("synthetic_latent_dim", "must be >= 1");
  if (s.ambient_dim <= s.latent_dim) fail("synthetic_ambient_dim", "must exceed synthetic_latent_dim");
  if (s.hidden_dim == 0) fail("synthetic_hidden_dim", "must be >= 1");
  if (!(s.noise_sigma >= 0.0)) fail("synthetic_noise_sigma", "must be >= 0");
  if (!(s.linear_scale > 0.0)) fail("synthetic_linear_scale", "must be > 0");
  if (s.count == 0) fail("synthetic_count", "must be >= 1");
  if (s.classes == 0) fail("synthetic_classes", "must be >= 1");
}

aae::Architecture architecture(const RunConfig& cfg, std::size_t ambient_dim) {
  if (cfg.latent_dim >= ambient_dim)
    throw ConfigError("config key 'latent_dim': must be below the data dimension " + std::to_string(ambient_dim));
  aae::Architecture a;
  a.ambient = ambient_dim;
  a.latent = cfg.latent_dim;
  a.hidden = cfg.hidden_dim;
  return a;
}

aae::TrainingConfig training(const RunConfig& cfg, Seed model_seed) {
  aae::TrainingConfig t;
  t.epochs = cfg.epochs;
  t.batch_size = cfg.batch_size;
  t.learning_rate = cfg.learning_rate;
  t.lambda_recon = cfg.lambda_recon;
  t.disc_z_weight = cfg.disc_z_weight;
  t.seed = model_seed;
  return t;
}

}  // namespace gpnd::config

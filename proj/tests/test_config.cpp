#include <doctest.h>

#include <string>

#include "gpnd/config.hpp"

using namespace gpnd;
using namespace gpnd::config;

namespace {

std::string error_of(const std::string& text) {
  try {
    validate(parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.latent_dim == 16);
  CHECK(c.learning_rate == 0.002);
  CHECK(c.ratios == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(c.folds == 5);
  CHECK_NOTHROW(validate(c));
  CHECK(parse("") == c);
}

TEST_CASE("parse reads every kind of value") {
  const auto c = parse(
      "# comment\n"
      "latent_dim = 8\n"
      "  epochs=3  \n"
      "\n"
      "learning_rate = 1e-3   # trailing comment\n"
      "ratios = 0.1, 0.5\n"
      "perp_exponent = surface_area\n"
      "scoring_mode = parallel_only\n"
      "validation_ratio = 0.3\n"
      "ablation = false\n"
      "seed = 42\n"
      "synthetic_generator = linear\n");
  CHECK(c.latent_dim == 8);
  CHECK(c.epochs == 3);
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.ratios == std::vector<double>{0.1, 0.5});
  CHECK(c.perp_exponent == density::PerpExponent::surface_area);
  CHECK(c.scoring_mode == detector::ScoringMode::parallel_only);
  CHECK(c.validation_ratio == 0.3);
  CHECK_FALSE(c.ablation);
  CHECK(c.seed == Seed{42});
  CHECK(c.synthetic.generator == data::GeneratorKind::linear);
  CHECK_FALSE(parse("validation_ratio = match").validation_ratio.has_value());
}

TEST_CASE("format and parse round trip") {
  RunConfig c;
  CHECK(parse(format(c)) == c);
  c.latent_dim = 4;
  c.learning_rate = 0.1 + 0.2;
  c.jacobian_step = 3.3e-5;
  c.ratios = {0.15, 0.35};
  c.validation_ratio = 0.25;
  c.seed = Seed{0xFFFFFFFFFFFFFFFFull};
  c.synthetic.noise_sigma = 1.0 / 3.0;
  c.synthetic.seed = c.seed;
  CHECK(parse(format(c)) == c);
  CHECK(format(parse(format(c))) == format(c));
  for (const auto& k : known_keys()) CHECK(format(c).find(k + " = ") != std::string::npos);
}

TEST_CASE("unknown and malformed keys name the key") {
  CHECK(error_of("latnet_dim = 4").find("latnet_dim") != std::string::npos);
  CHECK(error_of("epochs = many").find("epochs") != std::string::npos);
  CHECK(error_of("epochs = -3").find("epochs") != std::string::npos);
  CHECK(error_of("ablation = maybe").find("ablation") != std::string::npos);
  CHECK(error_of("scoring_mode = all").find("scoring_mode") != std::string::npos);
  CHECK(error_of("epochs = 2\nepochs = 3").find("epochs") != std::string::npos);
  CHECK_FALSE(error_of("just words").empty());
}

TEST_CASE("validation rejects out-of-range values") {
  CHECK(error_of("folds = 6").find("folds") != std::string::npos);
  CHECK(error_of("folds = 0").find("folds") != std::string::npos);
  CHECK(error_of("ratios = 0.1, 1.0").find("ratios") != std::string::npos);
  CHECK(error_of("learning_rate = 0").find("learning_rate") != std::string::npos);
  CHECK(error_of("max_train = 50").find("max_train") != std::string::npos);
  CHECK(error_of("batch_size = 0").find("batch_size") != std::string::npos);
  CHECK(error_of("validation_ratio = 1.5").find("validation_ratio") != std::string::npos);
  CHECK(error_of("synthetic_latent_dim = 70").find("synthetic_ambient_dim") != std::string::npos);
  CHECK(error_of("max_train = 100").empty());
  RunConfig c;
  CHECK_THROWS_AS(architecture(c, 16), ConfigError);
  CHECK(architecture(c, 17).latent == 16);
}

TEST_CASE("set and derived module configs") {
  RunConfig c;
  set(c, "seed", "9");
  CHECK(c.seed == Seed{9});
  CHECK(c.synthetic.seed == Seed{9});
  CHECK_THROWS_AS(set(c, "nope", "1"), ConfigError);
  c.epochs = 7;
  c.lambda_recon = 3;
  const auto t = training(c, Seed{5});
  CHECK(t.epochs == 7);
  CHECK(t.lambda_recon == 3);
  CHECK(t.seed == Seed{5});
}

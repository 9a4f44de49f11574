#include "yatt/runconfig.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "yatt/common.hpp"

using namespace yatt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "yatt_runconfig_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = temp_dir() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

// A config with every field moved off its default, to exercise each
// formatter and parser in the round-trip tests.
RunConfig nondefault_config() {
  RunConfig c;
  c.seed = 42;
  c.granularity = Granularity::monthly;
  c.weather_vars = {WeatherVar::ap, WeatherVar::min_sur};
  c.use_weather = false;
  c.use_mg = false;
  c.use_cluster = false;
  c.static_mode = StaticMode::after_encoder;
  c.stratify_by_year = true;
  c.model = ModelKind::attention;
  c.h1 = 24;
  c.h2 = 8;
  c.dropout = 0.35;
  c.epochs = 17;
  c.batch_size = 16;
  c.learning_rate = 0.0025;
  c.grad_clip = 1.5;
  c.clusters_k = 3;
  c.metric = MetricSet::test;
  c.region = Region::north;
  c.ablation = true;
  c.ablation_seeds = {3, 5, 7};
  c.lasso_lambda_auto = false;
  c.lasso_lambda = 0.25;
  c.forest_trees = 40;
  c.forest_depth = 6;
  c.forest_min_leaf = 2;
  c.forest_feature_fraction = 0.5;
  c.forest_bootstrap = false;
  c.locations = 4;
  c.years = 2;
  c.genotypes = 30;
  c.trials_per_cell = 5;
  c.families = 3;
  c.first_year = 1999;
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  RunConfig c;
  CHECK(c.seed == 0);
  CHECK(c.granularity == Granularity::weekly);
  CHECK(c.weather_vars == all_weather_vars());
  CHECK(c.use_weather);
  CHECK(c.use_mg);
  CHECK(c.use_cluster);
  CHECK(c.static_mode == StaticMode::both);
  CHECK_FALSE(c.stratify_by_year);
  CHECK(c.model == ModelKind::stacked);
  CHECK(c.h1 == 128);
  CHECK(c.h2 == 50);
  CHECK(c.dropout == doctest::Approx(0.2));
  CHECK(c.epochs == 200);
  CHECK(c.batch_size == 64);
  CHECK(c.learning_rate == doctest::Approx(0.001));
  CHECK(c.grad_clip == 0.0);
  CHECK(c.clusters_k == 5);
  CHECK(c.metric == MetricSet::validation);
  CHECK(c.region == Region::all);
  CHECK_FALSE(c.ablation);
  CHECK(c.ablation_seeds == std::vector<std::uint64_t>{1});
  CHECK(c.lasso_lambda_auto);
  CHECK(c.forest_trees == 100);
  CHECK(c.forest_depth == 12);
  CHECK(c.forest_min_leaf == 5);
  CHECK(c.forest_bootstrap);
  CHECK(c.locations == 25);
  CHECK(c.years == 8);
  CHECK(c.genotypes == 100);
  CHECK(c.trials_per_cell == 25);
  CHECK(c.families == 5);
  CHECK(c.first_year == 2003);
}

TEST_CASE("format then load reproduces every field") {
  const RunConfig original = nondefault_config();
  const std::string dump = format_runconfig(original);
  const fs::path path = write_config("roundtrip.cfg", dump);
  const RunConfig loaded = load_runconfig(path);
  CHECK(format_runconfig(loaded) == dump);
  CHECK(loaded.weather_vars ==
        std::vector<WeatherVar>{WeatherVar::ap, WeatherVar::min_sur});
  CHECK(loaded.ablation_seeds == std::vector<std::uint64_t>{3, 5, 7});
  CHECK_FALSE(loaded.lasso_lambda_auto);
  CHECK(loaded.lasso_lambda == doctest::Approx(0.25));
  CHECK(loaded.first_year == 1999);
}

TEST_CASE("defaults round-trip through the formatter") {
  const std::string dump = format_runconfig(RunConfig{});
  const fs::path path = write_config("defaults.cfg", dump);
  CHECK(format_runconfig(load_runconfig(path)) == dump);
  CHECK(dump.find("weather_vars = all\n") != std::string::npos);
  CHECK(dump.find("lasso_lambda = auto\n") != std::string::npos);
}

TEST_CASE("comments and blank lines are ignored") {
  const fs::path path = write_config("comments.cfg",
                                     "# full-line comment\n"
                                     "\n"
                                     "h1 = 64   # trailing comment\n"
                                     "  epochs=9\n"
                                     "   \t\n");
  const RunConfig c = load_runconfig(path);
  CHECK(c.h1 == 64);
  CHECK(c.epochs == 9);
  CHECK(c.h2 == 50);  // untouched default
}

TEST_CASE("later assignments override earlier ones") {
  const fs::path path = write_config("override.cfg",
                                     "seed = 1\n"
                                     "seed = 2\n");
  CHECK(load_runconfig(path).seed == 2);
}

TEST_CASE("missing file is an io error") {
  CHECK_THROWS_AS(load_runconfig(temp_dir() / "nope.cfg"), IoError);
}

TEST_CASE("malformed lines carry path and line number") {
  const fs::path path = write_config("broken.cfg",
                                     "h1 = 64\n"
                                     "epochs\n");
  CHECK_THROWS_WITH_AS(load_runconfig(path),
                       doctest::Contains("broken.cfg:2"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(
      [] {
        RunConfig c;
        apply_config_entry(c, "frobnicate", "1");
      }(),
      doctest::Contains("unknown config key 'frobnicate'"), ConfigError);
  const fs::path path = write_config("unknown.cfg", "h1 = 4\nwat = 1\n");
  CHECK_THROWS_WITH_AS(load_runconfig(path), doctest::Contains("unknown.cfg:2"),
                       ConfigError);
}

TEST_CASE("typed value errors") {
  RunConfig c;
  CHECK_THROWS_AS(apply_config_entry(c, "use_mg", "yes"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "seed", "-3"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "seed", "12x"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "h1", "4.5"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "dropout", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "dropout", "nan"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "dropout", "inf"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "first_year", "20x3"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "granularity", "hourly"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "model", "transformer"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "metric", "train"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "region", "east"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "static_mode", "sometimes"),
                  ConfigError);
}

TEST_CASE("weather variable lists") {
  RunConfig c;
  apply_config_entry(c, "weather_vars", "AP, MDNI");
  CHECK(c.weather_vars ==
        std::vector<WeatherVar>{WeatherVar::ap, WeatherVar::mdni});
  apply_config_entry(c, "weather_vars", "all");
  CHECK(c.weather_vars == all_weather_vars());
  CHECK_THROWS_AS(apply_config_entry(c, "weather_vars", ""), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "weather_vars", "AP,XXX"), ConfigError);
}

TEST_CASE("seed lists") {
  RunConfig c;
  apply_config_entry(c, "ablation_seeds", "10, 20,30");
  CHECK(c.ablation_seeds == std::vector<std::uint64_t>{10, 20, 30});
  CHECK_THROWS_AS(apply_config_entry(c, "ablation_seeds", ","), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "ablation_seeds", "1,-2"), ConfigError);
}

TEST_CASE("lasso lambda accepts auto or a number") {
  RunConfig c;
  apply_config_entry(c, "lasso_lambda", "0.125");
  CHECK_FALSE(c.lasso_lambda_auto);
  CHECK(c.lasso_lambda == doctest::Approx(0.125));
  apply_config_entry(c, "lasso_lambda", "auto");
  CHECK(c.lasso_lambda_auto);
  CHECK_THROWS_AS(apply_config_entry(c, "lasso_lambda", "-0.1"), ConfigError);
}

TEST_CASE("prepare spec conversion") {
  const RunConfig c = nondefault_config();
  const PrepareSpec s = c.prepare_spec();
  CHECK(s.granularity == Granularity::monthly);
  CHECK(s.weather_vars == c.weather_vars);
  CHECK_FALSE(s.use_weather);
  CHECK_FALSE(s.use_mg);
  CHECK_FALSE(s.use_cluster);
  CHECK(s.static_mode == StaticMode::after_encoder);
  CHECK(s.stratify_by_year);
  CHECK(s.seed == 42);
}

TEST_CASE("model config conversion") {
  const RunConfig c = nondefault_config();
  const ModelConfig m = c.model_config(5, 2);
  CHECK(m.kind == ModelKind::attention);
  CHECK(m.encoder.input_dim == 5);
  CHECK(m.encoder.h1 == 24);
  CHECK(m.encoder.h2 == 8);
  CHECK(m.encoder.dropout_rate == doctest::Approx(0.35));
  CHECK(m.encoder.t_steps == granularity_steps(Granularity::monthly));
  CHECK(m.statics_after == 2);
  CHECK(m.epochs == 17);
  CHECK(m.batch_size == 16);
  CHECK(m.learning_rate == doctest::Approx(0.0025));
  CHECK(m.grad_clip == doctest::Approx(1.5));
}

TEST_CASE("forest and synth conversions") {
  const RunConfig c = nondefault_config();
  const ForestParams f = c.forest_params();
  CHECK(f.n_trees == 40);
  CHECK(f.max_depth == 6);
  CHECK(f.min_samples_leaf == 2);
  CHECK(f.feature_fraction == doctest::Approx(0.5));
  CHECK_FALSE(f.bootstrap);
  const SynthSpec s = c.synth_spec();
  CHECK(s.locations == 4);
  CHECK(s.years == 2);
  CHECK(s.genotypes == 30);
  CHECK(s.trials_per_cell == 5);
  CHECK(s.families == 3);
  CHECK(s.first_year == 1999);
  CHECK(s.seed == 42);
}

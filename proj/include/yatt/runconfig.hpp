#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "yatt/baselines.hpp"
#include "yatt/model.hpp"
#include "yatt/pipeline.hpp"
#include "yatt/select.hpp"
#include "yatt/synth.hpp"

namespace yatt {

/// Every tunable shared by the CLI commands, resolved from (defaults <-
/// config file <- command-line overrides). Flat key = value text format,
/// '#' starts a comment, unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;

  // dataset preparation
  Granularity granularity = Granularity::weekly;
  std::vector<WeatherVar> weather_vars = all_weather_vars();
  bool use_weather = true;
  bool use_mg = true;
  bool use_cluster = true;
  StaticMode static_mode = StaticMode::both;
  bool stratify_by_year = false;

  // model
  ModelKind model = ModelKind::stacked;
  std::size_t h1 = 128;
  std::size_t h2 = 50;
  double dropout = 0.2;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double grad_clip = 0.0;

  // genotype clustering
  std::size_t clusters_k = 5;

  // greedy search
  MetricSet metric = MetricSet::validation;
  Region region = Region::all;

  // evaluation extras
  bool ablation = false;
  std::vector<std::uint64_t> ablation_seeds = {1};

  // baselines
  bool lasso_lambda_auto = true;   // grid-searched on validation RMSE
  double lasso_lambda = 0.01;      // used when lasso_lambda_auto is false
  std::size_t forest_trees = 100;
  std::size_t forest_depth = 12;
  std::size_t forest_min_leaf = 5;
  double forest_feature_fraction = 1.0 / 3.0;
  bool forest_bootstrap = true;

  // synthetic data generation
  std::size_t locations = 25;
  std::size_t years = 8;
  std::size_t genotypes = 100;
  std::size_t trials_per_cell = 25;
  std::size_t families = 5;
  int first_year = 2003;

  PrepareSpec prepare_spec() const;
  ModelConfig model_config(std::size_t input_dim, std::size_t statics_after) const;
  ForestParams forest_params() const;
  SynthSpec synth_spec() const;
};

/// Parses one key = value assignment; ConfigError on unknown keys or
/// unparsable values.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

RunConfig load_runconfig(const std::filesystem::path& path);

/// Full resolved dump, one "key = value" line per key in fixed order;
/// re-parsing it reproduces the config exactly.
std::string format_runconfig(const RunConfig& cfg);

}  // namespace yatt

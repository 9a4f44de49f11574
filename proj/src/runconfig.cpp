#include "yatt/runconfig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "yatt/common.hpp"

namespace yatt {

PrepareSpec RunConfig::prepare_spec() const {
  PrepareSpec s;
  s.granularity = granularity;
  s.weather_vars = weather_vars;
  s.use_weather = use_weather;
  s.use_mg = use_mg;
  s.use_cluster = use_cluster;
  s.static_mode = static_mode;
  s.stratify_by_year = stratify_by_year;
  s.seed = seed;
  return s;
}

ModelConfig RunConfig::model_config(std::size_t input_dim,
                                    std::size_t statics_after) const {
  ModelConfig c;
  c.kind = model;
  c.encoder.input_dim = input_dim;
  c.encoder.h1 = h1;
  c.encoder.h2 = h2;
  c.encoder.dropout_rate = dropout;
  c.encoder.t_steps = granularity_steps(granularity);
  c.statics_after = statics_after;
  c.epochs = epochs;
  c.batch_size = batch_size;
  c.learning_rate = learning_rate;
  c.grad_clip = grad_clip;
  return c;
}

ForestParams RunConfig::forest_params() const {
  ForestParams p;
  p.n_trees = forest_trees;
  p.max_depth = forest_depth;
  p.min_samples_leaf = forest_min_leaf;
  p.feature_fraction = forest_feature_fraction;
  p.bootstrap = forest_bootstrap;
  return p;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s;
  s.locations = locations;
  s.years = years;
  s.genotypes = genotypes;
  s.trials_per_cell = trials_per_cell;
  s.families = families;
  s.first_year = first_year;
  s.seed = seed;
  return s;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    std::uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(parse_u64(key, v));
}

int parse_i32(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite");
    return r;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string format_vars(const std::vector<WeatherVar>& vars) {
  if (vars == all_weather_vars()) return "all";
  std::string out;
  for (WeatherVar v : vars) {
    if (!out.empty()) out += ',';
    out += weather_var_name(v);
  }
  return out;
}

std::string format_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::uint64_t s : seeds) {
    if (!out.empty()) out += ',';
    out += std::to_string(s);
  }
  return out;
}

struct KeySpec {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"seed",
       [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"granularity",
       [](RunConfig& c, const std::string& v) {
         c.granularity = granularity_from_name(v);
       },
       [](const RunConfig& c) { return granularity_name(c.granularity); }},
      {"weather_vars",
       [](RunConfig& c, const std::string& v) {
         if (v == "all") {
           c.weather_vars = all_weather_vars();
           return;
         }
         c.weather_vars.clear();
         for (const std::string& name : split_list(v))
           c.weather_vars.push_back(weather_var_from_name(name));
         if (c.weather_vars.empty())
           throw ConfigError("weather_vars: empty list");
       },
       [](const RunConfig& c) { return format_vars(c.weather_vars); }},
      {"use_weather",
       [](RunConfig& c, const std::string& v) {
         c.use_weather = parse_bool("use_weather", v);
       },
       [](const RunConfig& c) { return format_bool(c.use_weather); }},
      {"use_mg",
       [](RunConfig& c, const std::string& v) {
         c.use_mg = parse_bool("use_mg", v);
       },
       [](const RunConfig& c) { return format_bool(c.use_mg); }},
      {"use_cluster",
       [](RunConfig& c, const std::string& v) {
         c.use_cluster = parse_bool("use_cluster", v);
       },
       [](const RunConfig& c) { return format_bool(c.use_cluster); }},
      {"static_mode",
       [](RunConfig& c, const std::string& v) {
         c.static_mode = static_mode_from_name(v);
       },
       [](const RunConfig& c) { return static_mode_name(c.static_mode); }},
      {"stratify_by_year",
       [](RunConfig& c, const std::string& v) {
         c.stratify_by_year = parse_bool("stratify_by_year", v);
       },
       [](const RunConfig& c) { return format_bool(c.stratify_by_year); }},
      {"model",
       [](RunConfig& c, const std::string& v) {
         c.model = model_kind_from_name(v);
       },
       [](const RunConfig& c) { return model_kind_name(c.model); }},
      {"h1",
       [](RunConfig& c, const std::string& v) { c.h1 = parse_count("h1", v); },
       [](const RunConfig& c) { return std::to_string(c.h1); }},
      {"h2",
       [](RunConfig& c, const std::string& v) { c.h2 = parse_count("h2", v); },
       [](const RunConfig& c) { return std::to_string(c.h2); }},
      {"dropout",
       [](RunConfig& c, const std::string& v) {
         c.dropout = parse_real("dropout", v);
       },
       [](const RunConfig& c) { return fmt_double(c.dropout); }},
      {"epochs",
       [](RunConfig& c, const std::string& v) {
         c.epochs = parse_count("epochs", v);
       },
       [](const RunConfig& c) { return std::to_string(c.epochs); }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) {
         c.batch_size = parse_count("batch_size", v);
       },
       [](const RunConfig& c) { return std::to_string(c.batch_size); }},
      {"learning_rate",
       [](RunConfig& c, const std::string& v) {
         c.learning_rate = parse_real("learning_rate", v);
       },
       [](const RunConfig& c) { return fmt_double(c.learning_rate); }},
      {"grad_clip",
       [](RunConfig& c, const std::string& v) {
         c.grad_clip = parse_real("grad_clip", v);
       },
       [](const RunConfig& c) { return fmt_double(c.grad_clip); }},
      {"clusters_k",
       [](RunConfig& c, const std::string& v) {
         c.clusters_k = parse_count("clusters_k", v);
       },
       [](const RunConfig& c) { return std::to_string(c.clusters_k); }},
      {"metric",
       [](RunConfig& c, const std::string& v) {
         c.metric = metric_set_from_name(v);
       },
       [](const RunConfig& c) { return metric_set_name(c.metric); }},
      {"region",
       [](RunConfig& c, const std::string& v) { c.region = region_from_name(v); },
       [](const RunConfig& c) { return region_name(c.region); }},
      {"ablation",
       [](RunConfig& c, const std::string& v) {
         c.ablation = parse_bool("ablation", v);
       },
       [](const RunConfig& c) { return format_bool(c.ablation); }},
      {"ablation_seeds",
       [](RunConfig& c, const std::string& v) {
         c.ablation_seeds.clear();
         for (const std::string& s : split_list(v))
           c.ablation_seeds.push_back(parse_u64("ablation_seeds", s));
         if (c.ablation_seeds.empty())
           throw ConfigError("ablation_seeds: empty list");
       },
       [](const RunConfig& c) { return format_seeds(c.ablation_seeds); }},
      {"lasso_lambda",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.lasso_lambda_auto = true;
           return;
         }
         c.lasso_lambda_auto = false;
         c.lasso_lambda = parse_real("lasso_lambda", v);
         if (c.lasso_lambda < 0.0)
           throw ConfigError("lasso_lambda: must be >= 0");
       },
       [](const RunConfig& c) {
         return c.lasso_lambda_auto ? std::string("auto")
                                    : fmt_double(c.lasso_lambda);
       }},
      {"forest_trees",
       [](RunConfig& c, const std::string& v) {
         c.forest_trees = parse_count("forest_trees", v);
       },
       [](const RunConfig& c) { return std::to_string(c.forest_trees); }},
      {"forest_depth",
       [](RunConfig& c, const std::string& v) {
         c.forest_depth = parse_count("forest_depth", v);
       },
       [](const RunConfig& c) { return std::to_string(c.forest_depth); }},
      {"forest_min_leaf",
       [](RunConfig& c, const std::string& v) {
         c.forest_min_leaf = parse_count("forest_min_leaf", v);
       },
       [](const RunConfig& c) { return std::to_string(c.forest_min_leaf); }},
      {"forest_feature_fraction",
       [](RunConfig& c, const std::string& v) {
         c.forest_feature_fraction = parse_real("forest_feature_fraction", v);
       },
       [](const RunConfig& c) { return fmt_double(c.forest_feature_fraction); }},
      {"forest_bootstrap",
       [](RunConfig& c, const std::string& v) {
         c.forest_bootstrap = parse_bool("forest_bootstrap", v);
       },
       [](const RunConfig& c) { return format_bool(c.forest_bootstrap); }},
      {"locations",
       [](RunConfig& c, const std::string& v) {
         c.locations = parse_count("locations", v);
       },
       [](const RunConfig& c) { return std::to_string(c.locations); }},
      {"years",
       [](RunConfig& c, const std::string& v) {
         c.years = parse_count("years", v);
       },
       [](const RunConfig& c) { return std::to_string(c.years); }},
      {"genotypes",
       [](RunConfig& c, const std::string& v) {
         c.genotypes = parse_count("genotypes", v);
       },
       [](const RunConfig& c) { return std::to_string(c.genotypes); }},
      {"trials_per_cell",
       [](RunConfig& c, const std::string& v) {
         c.trials_per_cell = parse_count("trials_per_cell", v);
       },
       [](const RunConfig& c) { return std::to_string(c.trials_per_cell); }},
      {"families",
       [](RunConfig& c, const std::string& v) {
         c.families = parse_count("families", v);
       },
       [](const RunConfig& c) { return std::to_string(c.families); }},
      {"first_year",
       [](RunConfig& c, const std::string& v) {
         c.first_year = parse_i32("first_year", v);
       },
       [](const RunConfig& c) { return std::to_string(c.first_year); }},
  };
  return table;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  for (const KeySpec& spec : key_table()) {
    if (key == spec.name) {
      spec.parse(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig load_runconfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return cfg;
}

std::string format_runconfig(const RunConfig& cfg) {
  std::string out;
  for (const KeySpec& spec : key_table()) {
    out += spec.name;
    out += " = ";
    out += spec.format(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace yatt

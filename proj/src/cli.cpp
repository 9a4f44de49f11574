#include "yatt/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "yatt/baselines.hpp"
#include "yatt/checkpoint.hpp"
#include "yatt/common.hpp"
#include "yatt/eval.hpp"
#include "yatt/exec.hpp"
#include "yatt/genotype.hpp"
#include "yatt/model.hpp"
#include "yatt/pipeline.hpp"
#include "yatt/runconfig.hpp"
#include "yatt/select.hpp"
#include "yatt/synth.hpp"

namespace yatt {
namespace {

namespace fs = std::filesystem;

std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// Every command writes into one output directory: the resolved config
// (config_resolved.txt), a timestamped run.log, and its own artifacts.
// Timestamps stay confined to run.log so all other outputs are byte-stable.
struct RunContext {
  fs::path dir;
  std::ofstream log_file;
  std::ostream& echo;

  RunContext(const fs::path& out_dir, const RunConfig& cfg, std::ostream& out)
      : dir(out_dir), echo(out) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "config_resolved.txt", format_runconfig(cfg));
    log_file.open(dir / "run.log", std::ios::app);
    if (!log_file) throw IoError("cannot write " + (dir / "run.log").string());
  }

  void log(const std::string& msg) {
    log_file << '[' << timestamp_utc() << "] " << msg << '\n';
  }

  void note(const std::string& msg) {
    log(msg);
    echo << msg << '\n';
  }
};

// ---------------------------------------------------------------------------
// Shared option plumbing
// ---------------------------------------------------------------------------

struct CommonFlags {
  std::string config_file;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool serial = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file,
                  "config file (key = value lines, '#' comments)");
  cmd->add_option("--out", f.out_dir, "output directory")->required();
  cmd->add_option("--set", f.overrides,
                  "override one config key (key=value, repeatable)");
  f.seed_opt = cmd->add_option("--seed", f.seed, "override the run seed");
  cmd->add_flag("--serial", f.serial, "run every kernel single-threaded");
  cmd->add_option("--threads", f.threads, "parallel thread count (0 = default)");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg =
      f.config_file.empty() ? RunConfig{} : load_runconfig(f.config_file);
  for (const std::string& kv : f.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed_opt != nullptr && f.seed_opt->count() > 0) cfg.seed = f.seed;
  exec::set_mode(f.serial ? exec::Mode::serial : exec::Mode::openmp);
  if (f.threads > 0) exec::set_thread_count(f.threads);
  return cfg;
}

struct DataFlags {
  std::string weather;
  std::string performance;
  std::string clusters;
};

void add_data_options(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--weather", f.weather, "in-season weather CSV")->required();
  cmd->add_option("--performance", f.performance, "trial performance CSV")
      ->required();
  cmd->add_option("--clusters", f.clusters,
                  "genotype cluster assignment CSV (from the cluster command)");
}

struct LoadedData {
  WeatherStore weather;
  std::vector<PerformanceRecord> records;
  std::optional<ClusterAssignment> clusters;

  const ClusterAssignment* clusters_ptr() const {
    return clusters ? &*clusters : nullptr;
  }
};

LoadedData load_data(const DataFlags& f, const RunConfig& cfg, RunContext& ctx) {
  LoadedData d;
  d.weather = WeatherStore::load_csv(f.weather);
  PerformanceParse parsed = parse_performance_csv(f.performance);
  d.records = std::move(parsed.records);
  for (const auto& skip : parsed.skipped.entries)
    ctx.log("skipped " + f.performance + ":" + std::to_string(skip.line) + ": " +
            skip.reason);
  if (!parsed.skipped.entries.empty())
    ctx.note("skipped " + std::to_string(parsed.skipped.entries.size()) +
             " malformed performance rows (see run.log)");
  if (!f.clusters.empty()) {
    d.clusters = load_assignment_csv(f.clusters);
  } else if (cfg.use_cluster) {
    throw ConfigError(
        "--clusters is required while use_cluster = true "
        "(pass --set use_cluster=false to train without clusters)");
  }
  ctx.note("loaded " + std::to_string(d.records.size()) + " records, " +
           std::to_string(d.weather.size()) + " weather series");
  return d;
}

std::string join_years(const std::vector<int>& years) {
  std::string out;
  for (int y : years) {
    if (!out.empty()) out += ',';
    out += std::to_string(y);
  }
  return out;
}

std::vector<int> distinct_years(const std::vector<PerformanceRecord>& records) {
  std::vector<int> years;
  for (const auto& r : records) years.push_back(r.year);
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  return years;
}

Vec actual_yields(const std::vector<PreparedRecord>& records) {
  Vec y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.yield);
  return y;
}

// r2 throws on zero actual variance (e.g. a one-record split); metrics
// reports carry NaN for that case rather than failing the whole run.
double r2_or_nan(const Vec& predicted, const Vec& actual) {
  try {
    return r2(predicted, actual);
  } catch (const NumericError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

MetricReport score_split(const std::string& model_id, const std::string& split,
                         const Vec& predicted, const Vec& actual) {
  MetricReport m;
  m.model_id = model_id;
  m.split = split;
  m.n = actual.size();
  m.rmse = rmse(predicted, actual);
  m.r2 = r2_or_nan(predicted, actual);
  return m;
}

// Evaluate-style commands rebuild the dataset from the checkpoint's stored
// seed; the prepare-side settings still come from the config, so the shapes
// must line up with what the model was trained on.
DatasetSplit rebuild_split(const LoadedData& data, const RunConfig& cfg,
                           const Checkpoint& cp) {
  if (granularity_steps(cfg.granularity) != cp.config.encoder.t_steps)
    throw ConfigError(
        "granularity " + std::string(granularity_name(cfg.granularity)) +
        " yields " + std::to_string(granularity_steps(cfg.granularity)) +
        " steps but the checkpoint was trained on " +
        std::to_string(cp.config.encoder.t_steps));
  PrepareSpec spec = cfg.prepare_spec();
  spec.seed = cp.seed;
  DatasetSplit split = prepare(data.records, data.weather, data.clusters_ptr(), spec);
  if (split.input_dim != cp.config.encoder.input_dim ||
      split.statics_after_dim != cp.config.statics_after)
    throw ConfigError(
        "prepared inputs (sequence dim " + std::to_string(split.input_dim) +
        ", statics " + std::to_string(split.statics_after_dim) +
        ") do not match the checkpoint (sequence dim " +
        std::to_string(cp.config.encoder.input_dim) + ", statics " +
        std::to_string(cp.config.statics_after) + ")");
  return split;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void cmd_generate_data(const CommonFlags& common, std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const SynthData data = generate_synthetic(cfg.synth_spec());
  write_synthetic(ctx.dir, data);
  ctx.note("records: " + std::to_string(data.records.size()));
  ctx.note("weather series: " + std::to_string(data.weather.size()));
  ctx.note("genotypes: " + std::to_string(data.correlation.ids.size()));
  ctx.note("wrote performance.csv, weather.csv, correlation.csv");
}

void cmd_cluster(const CommonFlags& common, const std::string& correlation_path,
                 std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const CorrelationMatrix m = load_correlation_csv(correlation_path);
  const ClusterAssignment assign = cluster_genotypes(m, cfg.clusters_k, cfg.seed);
  write_assignment_csv(ctx.dir / "clusters.csv", assign);
  ctx.note("genotypes: " + std::to_string(assign.ids.size()));
  ctx.note("k: " + std::to_string(assign.k));
  ctx.note("inertia: " + fmt_double(assign.inertia));
  ctx.note("wrote clusters.csv");
}

void write_splits_csv(const fs::path& path, const DatasetSplit& split) {
  std::string text = "record_id,split\n";
  const auto dump = [&](const std::vector<PreparedRecord>& recs,
                        const char* name) {
    for (const auto& r : recs) text += r.record_id + "," + name + "\n";
  };
  dump(split.train, "train");
  dump(split.validation, "validation");
  dump(split.test, "test");
  write_text(path, text);
}

void write_scaler_csv(const fs::path& path, const Scaler& scaler) {
  std::string text = "feature,min,max,constant\n";
  const auto row = [&](const std::string& name, const Scaler::Range& r) {
    text += name + "," + fmt_double(r.min) + "," + fmt_double(r.max) + "," +
            (r.constant ? "1" : "0") + "\n";
  };
  for (std::size_t i = 0; i < scaler.features.size(); ++i)
    row(scaler.feature_names[i], scaler.features[i]);
  row("yield", scaler.target);
  write_text(path, text);
}

void describe_split(RunContext& ctx, const DatasetSplit& split) {
  ctx.note("train: " + std::to_string(split.train.size()));
  ctx.note("validation: " + std::to_string(split.validation.size()));
  ctx.note("test: " + std::to_string(split.test.size()));
  ctx.note("t_steps: " + std::to_string(split.t_steps));
  ctx.note("input_dim: " + std::to_string(split.input_dim));
  ctx.note("statics_after: " + std::to_string(split.statics_after_dim));
}

void cmd_prepare(const CommonFlags& common, const DataFlags& data_flags,
                 std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const LoadedData data = load_data(data_flags, cfg, ctx);
  const DatasetSplit split =
      prepare(data.records, data.weather, data.clusters_ptr(), cfg.prepare_spec());
  write_splits_csv(ctx.dir / "splits.csv", split);
  write_scaler_csv(ctx.dir / "scaler.csv", split.scaler);
  describe_split(ctx, split);
  std::string summary;
  summary += "records = " + std::to_string(data.records.size()) + "\n";
  summary += "train = " + std::to_string(split.train.size()) + "\n";
  summary += "validation = " + std::to_string(split.validation.size()) + "\n";
  summary += "test = " + std::to_string(split.test.size()) + "\n";
  summary += "t_steps = " + std::to_string(split.t_steps) + "\n";
  summary += "input_dim = " + std::to_string(split.input_dim) + "\n";
  summary += "statics_after = " + std::to_string(split.statics_after_dim) + "\n";
  write_text(ctx.dir / "summary.txt", summary);
  ctx.note("wrote splits.csv, scaler.csv, summary.txt");
}

void cmd_train(const CommonFlags& common, const DataFlags& data_flags,
               std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const LoadedData data = load_data(data_flags, cfg, ctx);
  const DatasetSplit split =
      prepare(data.records, data.weather, data.clusters_ptr(), cfg.prepare_spec());
  describe_split(ctx, split);

  const ModelConfig model_cfg =
      cfg.model_config(split.input_dim, split.statics_after_dim);
  ctx.note("model: " + std::string(model_kind_name(model_cfg.kind)));
  ctx.note("parameters: " + std::to_string(count_params(model_cfg)));

  std::ofstream history(ctx.dir / "history.csv", std::ios::binary);
  if (!history) throw IoError("cannot write " + (ctx.dir / "history.csv").string());
  history << "epoch,train_loss,val_rmse\n";
  const auto on_epoch = [&](std::size_t epoch, const TrainHistory::Epoch& e) {
    history << epoch << ',' << fmt_double(e.train_loss) << ','
            << fmt_double(e.val_rmse) << '\n';
    ctx.log("epoch " + std::to_string(epoch) +
            " train_loss=" + fmt_double(e.train_loss) +
            " val_rmse=" + fmt_double(e.val_rmse));
  };
  const TrainResult result = train_model(model_cfg, split, cfg.seed, on_epoch);
  history.close();

  Checkpoint cp;
  cp.config = model_cfg;
  cp.weights = result.weights;
  cp.scaler = split.scaler;
  cp.seed = cfg.seed;
  save_checkpoint(ctx.dir / "model.yatt", cp);
  ctx.note("best epoch: " + std::to_string(result.best_epoch));
  ctx.note("best val_rmse: " + fmt_double(result.best_val_rmse));
  ctx.note("wrote model.yatt, history.csv");
}

void cmd_evaluate(const CommonFlags& common, const DataFlags& data_flags,
                  const std::string& checkpoint_path, std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  ctx.note("checkpoint: " + std::string(model_kind_name(cp.config.kind)) +
           ", seed " + std::to_string(cp.seed));
  const LoadedData data = load_data(data_flags, cfg, ctx);
  const DatasetSplit split = rebuild_split(data, cfg, cp);

  const std::string model_id = model_kind_name(cp.config.kind);
  std::vector<MetricReport> reports;
  Vec test_pred;
  const auto score = [&](const std::vector<PreparedRecord>& recs,
                         const char* name) {
    const Vec pred = predict(cp.config, cp.weights, recs, cp.scaler);
    if (std::string(name) == "test") test_pred = pred;
    reports.push_back(score_split(model_id, name, pred, actual_yields(recs)));
  };
  score(split.train, "train");
  score(split.validation, "validation");
  score(split.test, "test");
  write_metrics_csv(ctx.dir / "metrics.csv", reports);
  for (const auto& m : reports)
    ctx.note(m.split + ": n=" + std::to_string(m.n) +
             " rmse=" + fmt_double(m.rmse) + " r2=" + fmt_double(m.r2));

  const YearwiseTable yearwise =
      yearwise_abs_error(split.test, test_pred, distinct_years(data.records));
  write_yearwise_csv(ctx.dir / "yearwise.csv", yearwise);
  if (!yearwise.omitted_years.empty())
    ctx.note("years missing from the test split: " +
             join_years(yearwise.omitted_years));

  write_heatmap_csv(ctx.dir / "heatmap.csv",
                    availability_heatmap(split, test_pred));
  ctx.note("wrote metrics.csv, yearwise.csv, heatmap.csv");

  if (cfg.ablation) {
    AblationSpec spec;
    spec.prepare = cfg.prepare_spec();
    spec.prepare.seed = cp.seed;
    spec.config = cfg.model_config(split.input_dim, split.statics_after_dim);
    spec.seeds = cfg.ablation_seeds;
    const auto on_start = [&](const std::string& label, std::uint64_t seed) {
      ctx.log("ablation " + label + " seed " + std::to_string(seed));
    };
    const std::vector<MetricReport> rows =
        ablation_grid(data.records, data.weather, data.clusters_ptr(), spec, on_start);
    write_metrics_csv(ctx.dir / "ablation.csv", rows);
    ctx.note("wrote ablation.csv (" + std::to_string(rows.size()) + " rows)");
  }
}

void cmd_greedy(const CommonFlags& common, const DataFlags& data_flags,
                std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const LoadedData data = load_data(data_flags, cfg, ctx);
  const std::vector<PerformanceRecord> records =
      filter_region(data.records, cfg.region);
  if (cfg.region != Region::all)
    ctx.note("region " + std::string(region_name(cfg.region)) + ": " +
             std::to_string(records.size()) + " records");

  // Every candidate at one step shares one derived seed, so subsets compete
  // on identical splits, initial weights, and shuffles.
  const GreedyEvaluator evaluate = [&](const std::vector<WeatherVar>& subset) {
    const std::uint64_t step_seed =
        derive_seed(cfg.seed, "greedy-step", subset.size() - 1);
    PrepareSpec spec = cfg.prepare_spec();
    spec.use_weather = true;
    spec.weather_vars = subset;
    spec.seed = step_seed;
    const DatasetSplit split =
        prepare(records, data.weather, data.clusters_ptr(), spec);
    const ModelConfig model_cfg =
        cfg.model_config(split.input_dim, split.statics_after_dim);
    const TrainResult result = train_model(model_cfg, split, step_seed);
    const std::vector<PreparedRecord>& eval_set =
        cfg.metric == MetricSet::test ? split.test : split.validation;
    const Vec pred = predict(model_cfg, result.weights, eval_set, split.scaler);
    return rmse(pred, actual_yields(eval_set));
  };

  GreedyTrace trace;
  try {
    trace = greedy_search(cfg.weather_vars, evaluate, cfg.metric);
  } catch (GreedyAborted& aborted) {
    aborted.partial.region = cfg.region;
    write_trace_csv(ctx.dir / "trace.csv", aborted.partial);
    ctx.note(std::string(aborted.what()) + "; wrote the partial trace");
    if (aborted.cause) std::rethrow_exception(aborted.cause);
    throw NumericError(aborted.what());
  }
  trace.region = cfg.region;
  write_trace_csv(ctx.dir / "trace.csv", trace);
  for (std::size_t i = 0; i < trace.steps.size(); ++i)
    ctx.note("step " + std::to_string(i + 1) + ": " +
             weather_var_name(trace.steps[i].variable) + " (" +
             std::string(metric_set_name(trace.metric_set)) +
             " rmse " + fmt_double(trace.steps[i].rmse) + ")");
  ctx.note("wrote trace.csv");
}

void cmd_baseline(const CommonFlags& common, const DataFlags& data_flags,
                  std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const LoadedData data = load_data(data_flags, cfg, ctx);
  // Flat designs take each static once; per-step copies would only duplicate
  // columns, so the head-only placement is forced here.
  PrepareSpec spec = cfg.prepare_spec();
  spec.static_mode = StaticMode::after_encoder;
  const DatasetSplit split =
      prepare(data.records, data.weather, data.clusters_ptr(), spec);
  describe_split(ctx, split);

  const FlatDataset train = flatten_features(split.train, split.scaler);
  const FlatDataset validation = flatten_features(split.validation, split.scaler);
  const FlatDataset test = flatten_features(split.test, split.scaler);
  ctx.note("flat features: " + std::to_string(train.x.cols));

  const auto original_units = [&](const Vec& scaled) {
    Vec out_v(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i)
      out_v[i] = split.scaler.invert_target(scaled[i]);
    return out_v;
  };

  double lambda = cfg.lasso_lambda;
  if (cfg.lasso_lambda_auto) {
    const double grid[] = {1e-4, 1e-3, 1e-2, 0.1, 0.5};
    double best_rmse = std::numeric_limits<double>::infinity();
    for (double candidate : grid) {
      const LassoModel m = lasso_fit(train.x, train.y, candidate);
      const double val_rmse = rmse(original_units(lasso_predict(m, validation.x)),
                                   actual_yields(split.validation));
      ctx.log("lasso lambda " + fmt_double(candidate) +
              ": val rmse " + fmt_double(val_rmse));
      if (val_rmse < best_rmse) {
        best_rmse = val_rmse;
        lambda = candidate;
      }
    }
    ctx.note("lasso lambda: " + fmt_double(lambda) + " (auto)");
  } else {
    ctx.note("lasso lambda: " + fmt_double(lambda));
  }

  std::vector<MetricReport> reports;
  const LassoModel lasso = lasso_fit(train.x, train.y, lambda);
  std::size_t nonzero = 0;
  for (double b : lasso.beta)
    if (b != 0.0) ++nonzero;
  ctx.note("lasso nonzero coefficients: " + std::to_string(nonzero) + "/" +
           std::to_string(lasso.beta.size()));
  const auto score_lasso = [&](const FlatDataset& d,
                               const std::vector<PreparedRecord>& recs,
                               const char* name) {
    reports.push_back(score_split("lasso", name,
                                  original_units(lasso_predict(lasso, d.x)),
                                  actual_yields(recs)));
  };
  score_lasso(train, split.train, "train");
  score_lasso(validation, split.validation, "validation");
  score_lasso(test, split.test, "test");

  const ForestModel forest =
      forest_fit(train.x, train.y, cfg.forest_params(), cfg.seed);
  const auto score_forest = [&](const FlatDataset& d,
                                const std::vector<PreparedRecord>& recs,
                                const char* name) {
    reports.push_back(score_split("forest", name,
                                  original_units(forest_predict(forest, d.x)),
                                  actual_yields(recs)));
  };
  score_forest(train, split.train, "train");
  score_forest(validation, split.validation, "validation");
  score_forest(test, split.test, "test");

  write_metrics_csv(ctx.dir / "baseline_metrics.csv", reports);
  for (const auto& m : reports)
    ctx.note(m.model_id + " " + m.split + ": rmse=" + fmt_double(m.rmse) +
             " r2=" + fmt_double(m.r2));
  ctx.note("wrote baseline_metrics.csv");
}

void cmd_attention_export(const CommonFlags& common, const DataFlags& data_flags,
                          const std::string& checkpoint_path,
                          const std::string& mg_list, std::size_t bands,
                          std::ostream& out) {
  const RunConfig cfg = resolve_config(common);
  RunContext ctx(common.out_dir, cfg, out);
  const Checkpoint cp = load_checkpoint(checkpoint_path, ModelKind::attention);
  const LoadedData data = load_data(data_flags, cfg, ctx);
  const DatasetSplit split = rebuild_split(data, cfg, cp);

  std::vector<int> mg_filter;
  if (!mg_list.empty()) {
    std::stringstream ss(mg_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        const int mg = std::stoi(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("trailing");
        mg_filter.push_back(mg);
      } catch (const std::exception&) {
        throw ConfigError("--mg expects a comma-separated list of integers, got '" +
                          mg_list + "'");
      }
    }
  }

  const std::vector<AttentionMap> maps =
      attention_maps(cp.config, cp.weights, split.test);
  const AttentionDistribution dist =
      attention_distribution(split.test, maps, mg_filter, bands);
  write_attention_csv(ctx.dir / "attention_dist.csv", dist);
  ctx.note("test records: " + std::to_string(split.test.size()));
  ctx.note("groups: " + std::to_string(dist.groups.size()));
  ctx.note("wrote attention_dist.csv");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"explainable crop yield modeling from weather and genotype data"};
  app.name("yatt");
  app.require_subcommand(1);

  CommonFlags generate_common;
  CLI::App* generate = app.add_subcommand(
      "generate-data", "write a synthetic performance/weather/correlation trio");
  add_common(generate, generate_common);

  CommonFlags cluster_common;
  std::string correlation_path;
  CLI::App* cluster =
      app.add_subcommand("cluster", "k-means genotype clusters from correlations");
  add_common(cluster, cluster_common);
  cluster->add_option("--correlation", correlation_path, "genotype correlation CSV")
      ->required();

  CommonFlags prepare_common;
  DataFlags prepare_data;
  CLI::App* prepare_cmd = app.add_subcommand(
      "prepare", "join, downsample, split and scale the training data");
  add_common(prepare_cmd, prepare_common);
  add_data_options(prepare_cmd, prepare_data);

  CommonFlags train_common;
  DataFlags train_data;
  CLI::App* train = app.add_subcommand("train", "train a yield model");
  add_common(train, train_common);
  add_data_options(train, train_data);

  CommonFlags eval_common;
  DataFlags eval_data;
  std::string eval_checkpoint;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a trained model and write reports");
  add_common(evaluate, eval_common);
  add_data_options(evaluate, eval_data);
  evaluate->add_option("--checkpoint", eval_checkpoint, "trained model file")
      ->required();

  CommonFlags greedy_common;
  DataFlags greedy_data;
  CLI::App* greedy = app.add_subcommand(
      "greedy", "forward selection over the weather variables");
  add_common(greedy, greedy_common);
  add_data_options(greedy, greedy_data);

  CommonFlags baseline_common;
  DataFlags baseline_data;
  CLI::App* baseline =
      app.add_subcommand("baseline", "LASSO and random-forest reference models");
  add_common(baseline, baseline_common);
  add_data_options(baseline, baseline_data);

  CommonFlags attention_common;
  DataFlags attention_data;
  std::string attention_checkpoint;
  std::string mg_list;
  std::size_t bands = 4;
  CLI::App* attention_export = app.add_subcommand(
      "attention-export", "per-week attention weights by MG and yield band");
  add_common(attention_export, attention_common);
  add_data_options(attention_export, attention_data);
  attention_export
      ->add_option("--checkpoint", attention_checkpoint, "trained attention model")
      ->required();
  attention_export->add_option("--mg", mg_list,
                               "keep only these maturity groups (e.g. 1,3)");
  attention_export->add_option("--bands", bands,
                               "yield bands per maturity group");

  try {
    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e, out, err);
      return rc == 0 ? 0 : 1;
    }
    if (generate->parsed()) cmd_generate_data(generate_common, out);
    if (cluster->parsed()) cmd_cluster(cluster_common, correlation_path, out);
    if (prepare_cmd->parsed()) cmd_prepare(prepare_common, prepare_data, out);
    if (train->parsed()) cmd_train(train_common, train_data, out);
    if (evaluate->parsed())
      cmd_evaluate(eval_common, eval_data, eval_checkpoint, out);
    if (greedy->parsed()) cmd_greedy(greedy_common, greedy_data, out);
    if (baseline->parsed()) cmd_baseline(baseline_common, baseline_data, out);
    if (attention_export->parsed())
      cmd_attention_export(attention_common, attention_data, attention_checkpoint,
                           mg_list, bands, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace yatt

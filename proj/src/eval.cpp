#include "yatt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "yatt/common.hpp"
#include "yatt/exec.hpp"

namespace yatt {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish_csv(std::ofstream& out, const std::filesystem::path& path) {
  if (!out.good()) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricReport>& reports) {
  std::ofstream out = open_csv(path);
  out << "model_id,split,n,rmse,r2\n";
  for (const MetricReport& r : reports)
    out << r.model_id << ',' << r.split << ',' << r.n << ','
        << fmt_double(r.rmse) << ',' << fmt_double(r.r2) << '\n';
  finish_csv(out, path);
}

// ---------------------------------------------------------------------------
// Input ablation
// ---------------------------------------------------------------------------

std::vector<MetricReport> ablation_grid(
    const std::vector<PerformanceRecord>& records, const WeatherStore& weather,
    const ClusterAssignment* clusters, const AblationSpec& spec,
    const std::function<void(const std::string&, std::uint64_t)>& on_start) {
  if (spec.seeds.empty())
    throw ConfigError("ablation_grid: at least one seed required");

  struct Combo {
    bool mg, cluster, weather;
  };
  const std::vector<Combo> combos = {
      {true, false, false}, {false, true, false}, {false, false, true},
      {true, true, false},  {true, false, true},  {false, true, true},
      {true, true, true}};

  std::vector<MetricReport> out;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const std::string& label = ablation_labels()[c];
    double sum_rmse = 0.0, sum_r2 = 0.0;
    std::size_t n_test = 0;
    for (std::uint64_t seed : spec.seeds) {
      if (on_start) on_start(label, seed);
      PrepareSpec ps = spec.prepare;
      ps.use_mg = combos[c].mg;
      ps.use_cluster = combos[c].cluster;
      ps.use_weather = combos[c].weather;
      ps.seed = seed;
      DatasetSplit split = prepare(records, weather, clusters, ps);

      ModelConfig cfg = spec.config;
      cfg.encoder.input_dim = split.input_dim;
      cfg.statics_after = split.statics_after_dim;

      TrainResult trained = train_model(cfg, split, seed);
      Vec pred = predict(cfg, trained.weights, split.test, split.scaler);
      Vec actual(split.test.size());
      for (std::size_t i = 0; i < split.test.size(); ++i)
        actual[i] = split.test[i].yield;
      sum_rmse += rmse(pred, actual);
      sum_r2 += r2(pred, actual);
      n_test = split.test.size();
    }
    double inv = 1.0 / static_cast<double>(spec.seeds.size());
    out.push_back({label, "test", n_test, sum_rmse * inv, sum_r2 * inv});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Year-wise absolute error
// ---------------------------------------------------------------------------

YearwiseTable yearwise_abs_error(const std::vector<PreparedRecord>& test,
                                 const Vec& predictions,
                                 const std::vector<int>& expected_years) {
  if (test.size() != predictions.size())
    throw ShapeError("yearwise_abs_error: predictions misaligned with records");

  std::map<int, std::pair<double, double>> sums;  // year -> (pred sum, actual sum)
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < test.size(); ++i) {
    sums[test[i].year].first += predictions[i];
    sums[test[i].year].second += test[i].yield;
    ++counts[test[i].year];
  }

  YearwiseTable out;
  for (const auto& [year, s] : sums) {
    double inv = 1.0 / static_cast<double>(counts[year]);
    out.rows.push_back(
        {year, counts[year], std::fabs(s.first * inv - s.second * inv)});
  }
  for (int year : std::set<int>(expected_years.begin(), expected_years.end()))
    if (!counts.contains(year)) out.omitted_years.push_back(year);
  return out;
}

void write_yearwise_csv(const std::filesystem::path& path,
                        const YearwiseTable& table) {
  std::ofstream out = open_csv(path);
  out << "year,n,abs_error\n";
  for (const YearwiseRow& r : table.rows)
    out << r.year << ',' << r.n << ',' << fmt_double(r.abs_error) << '\n';
  finish_csv(out, path);
}

// ---------------------------------------------------------------------------
// Attention distributions
// ---------------------------------------------------------------------------

namespace {

/// Nearest-rank quantile of sorted values: smallest v with rank >= p*n.
double nearest_rank(const Vec& sorted, double p) {
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

AttentionDistribution attention_distribution(
    const std::vector<PreparedRecord>& records,
    const std::vector<AttentionMap>& maps, const std::vector<int>& mg_filter,
    std::size_t n_bands) {
  if (records.size() != maps.size())
    throw ShapeError("attention_distribution: maps misaligned with records");
  if (records.empty()) throw DataError("attention_distribution: no records");
  if (n_bands == 0) throw ConfigError("attention_distribution: n_bands >= 1");

  const std::size_t t_steps = maps.front().weights.size();
  for (const AttentionMap& m : maps)
    if (m.weights.size() != t_steps)
      throw ShapeError("attention_distribution: ragged attention maps");

  std::map<int, std::vector<std::size_t>> by_mg;
  for (std::size_t i = 0; i < records.size(); ++i) {
    int mg = records[i].maturity_group;
    if (!mg_filter.empty() &&
        std::find(mg_filter.begin(), mg_filter.end(), mg) == mg_filter.end())
      continue;
    by_mg[mg].push_back(i);
  }
  if (by_mg.empty()) throw DataError("attention_distribution: filter matched nothing");

  AttentionDistribution out;
  out.t_steps = t_steps;
  for (const auto& [mg, idx] : by_mg) {
    Vec yields;
    for (std::size_t i : idx) yields.push_back(records[i].yield);
    std::sort(yields.begin(), yields.end());

    // Band b (1-based) covers (q_{b-1}, q_b], except band 1 which includes
    // its lower boundary.
    Vec bounds(n_bands + 1);
    bounds[0] = yields.front();
    for (std::size_t b = 1; b < n_bands; ++b)
      bounds[b] = nearest_rank(yields,
                               static_cast<double>(b) / static_cast<double>(n_bands));
    bounds[n_bands] = yields.back();

    for (std::size_t b = 1; b <= n_bands; ++b) {
      AttentionGroup g;
      g.mg = mg;
      g.band = b;
      g.yield_lo = bounds[b - 1];
      g.yield_hi = bounds[b];
      out.groups.push_back(g);
    }

    std::size_t base = out.groups.size() - n_bands;
    for (std::size_t i : idx) {
      double y = records[i].yield;
      std::size_t b = 1;
      while (b < n_bands && y > bounds[b]) ++b;
      AttentionGroup& g = out.groups[base + b - 1];
      if (g.curve.empty()) g.curve.assign(t_steps, 0.0);
      for (std::size_t t = 0; t < t_steps; ++t)
        g.curve[t] += maps[i].weights[t];
      ++g.n;
    }
    for (std::size_t b = 0; b < n_bands; ++b) {
      AttentionGroup& g = out.groups[base + b];
      if (g.n > 0)
        for (double& w : g.curve) w /= static_cast<double>(g.n);
    }
  }
  return out;
}

void write_attention_csv(const std::filesystem::path& path,
                         const AttentionDistribution& dist) {
  std::ofstream out = open_csv(path);
  out << "mg,band,yield_lo,yield_hi,n";
  for (std::size_t t = 1; t <= dist.t_steps; ++t) out << ",w" << t;
  out << '\n';
  for (const AttentionGroup& g : dist.groups) {
    out << g.mg << ',' << g.band << ',' << fmt_double(g.yield_lo) << ','
        << fmt_double(g.yield_hi) << ',' << g.n;
    for (std::size_t t = 0; t < dist.t_steps; ++t) {
      out << ',';
      if (!g.curve.empty()) out << fmt_double(g.curve[t]);
    }
    out << '\n';
  }
  finish_csv(out, path);
}

// ---------------------------------------------------------------------------
// Availability heatmap
// ---------------------------------------------------------------------------

Heatmap availability_heatmap(const DatasetSplit& split,
                             const Vec& test_predictions) {
  if (split.test.size() != test_predictions.size())
    throw ShapeError("availability_heatmap: predictions misaligned with test");

  struct CellAgg {
    std::size_t n_train = 0;
    std::set<std::string> locations;
    std::size_t n_test = 0;
    double sq_err = 0.0;
  };
  std::map<std::pair<int, int>, CellAgg> cells;
  for (const PreparedRecord& r : split.train) {
    CellAgg& c = cells[{r.maturity_group, r.cluster_id}];
    ++c.n_train;
    c.locations.insert(r.location_id);
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const PreparedRecord& r = split.test[i];
    CellAgg& c = cells[{r.maturity_group, r.cluster_id}];
    ++c.n_test;
    double e = test_predictions[i] - r.yield;
    c.sq_err += e * e;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  Heatmap out;
  for (const auto& [key, agg] : cells) {
    HeatmapCell cell;
    cell.mg = key.first;
    cell.cluster = key.second;
    cell.n_train = agg.n_train;
    cell.n_train_locations = agg.locations.size();
    cell.train_ratio = agg.n_train > 0
                           ? static_cast<double>(agg.n_train) /
                                 static_cast<double>(agg.locations.size())
                           : nan;
    cell.n_test = agg.n_test;
    cell.test_rmse =
        agg.n_test > 0
            ? std::sqrt(agg.sq_err / static_cast<double>(agg.n_test))
            : nan;
    out.cells.push_back(cell);
  }
  return out;
}

void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& hm) {
  std::ofstream out = open_csv(path);
  out << "mg,cluster,n_train,n_train_locations,train_ratio,n_test,test_rmse\n";
  for (const HeatmapCell& c : hm.cells) {
    out << c.mg << ',' << c.cluster << ',' << c.n_train << ','
        << c.n_train_locations << ',';
    if (std::isnan(c.train_ratio))
      out << "NA";
    else
      out << fmt_double(c.train_ratio);
    out << ',' << c.n_test << ',';
    if (std::isnan(c.test_rmse))
      out << "NA";
    else
      out << fmt_double(c.test_rmse);
    out << '\n';
  }
  finish_csv(out, path);
}

}  // namespace yatt

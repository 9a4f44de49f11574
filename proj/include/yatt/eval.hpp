#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "yatt/attention.hpp"
#include "yatt/model.hpp"
#include "yatt/pipeline.hpp"

namespace yatt {

// ---------------------------------------------------------------------------
// Metric reports
// ---------------------------------------------------------------------------

struct MetricReport {
  std::string model_id;
  std::string split;  // train / validation / test
  std::size_t n = 0;
  double rmse = 0.0;  // original units
  double r2 = 0.0;
};

/// CSV columns: model_id,split,n,rmse,r2.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricReport>& reports);

// ---------------------------------------------------------------------------
// Input ablation
// ---------------------------------------------------------------------------

/// Shared setup for the seven input-combination rows. The prepare spec's
/// use_* flags and the model's input/static dimensions are overridden per
/// combination; everything else is taken as given.
struct AblationSpec {
  PrepareSpec prepare;
  ModelConfig config;
  std::vector<std::uint64_t> seeds = {1};  // metrics averaged across seeds
};

inline const std::vector<std::string>& ablation_labels() {
  static const std::vector<std::string> labels = {
      "mg",         "cluster",         "weather",          "mg+cluster",
      "mg+weather", "cluster+weather", "mg+cluster+weather"};
  return labels;
}

/// Retrains the configured model once per input combination and seed;
/// reports seed-averaged test metrics, one row per combination in
/// ablation_labels() order.
std::vector<MetricReport> ablation_grid(
    const std::vector<PerformanceRecord>& records, const WeatherStore& weather,
    const ClusterAssignment* clusters, const AblationSpec& spec,
    const std::function<void(const std::string&, std::uint64_t)>& on_start =
        nullptr);

// ---------------------------------------------------------------------------
// Year-wise absolute error
// ---------------------------------------------------------------------------

struct YearwiseRow {
  int year = 0;
  std::size_t n = 0;
  double abs_error = 0.0;  // |mean(pred) - mean(actual)|, original units
};

struct YearwiseTable {
  std::vector<YearwiseRow> rows;  // ascending year
  std::vector<int> omitted_years;  // expected years with no test records
};

/// `expected_years` (optional) lists years that should appear; those without
/// test records land in omitted_years instead of the table.
YearwiseTable yearwise_abs_error(const std::vector<PreparedRecord>& test,
                                 const Vec& predictions,
                                 const std::vector<int>& expected_years = {});

/// CSV columns: year,n,abs_error.
void write_yearwise_csv(const std::filesystem::path& path,
                        const YearwiseTable& table);

// ---------------------------------------------------------------------------
// Attention distributions
// ---------------------------------------------------------------------------

struct AttentionGroup {
  int mg = 0;
  std::size_t band = 0;   // 1-based yield band, lowest yields first
  double yield_lo = 0.0;  // band boundaries in original units
  double yield_hi = 0.0;
  std::size_t n = 0;
  Vec curve;  // per-step mean attention; empty when n == 0
};

struct AttentionDistribution {
  std::size_t t_steps = 0;
  std::vector<AttentionGroup> groups;  // sorted by (mg, band)
};

/// Groups records by maturity group and actual-yield band (nearest-rank
/// quantiles within each MG; `n_bands` = 4 gives quartiles) and averages the
/// per-record attention weights per band. `mg_filter` empty keeps every MG.
AttentionDistribution attention_distribution(
    const std::vector<PreparedRecord>& records,
    const std::vector<AttentionMap>& maps,
    const std::vector<int>& mg_filter = {}, std::size_t n_bands = 4);

/// CSV columns: mg,band,yield_lo,yield_hi,n,w1..wT (curve cells empty when
/// the band holds no records).
void write_attention_csv(const std::filesystem::path& path,
                         const AttentionDistribution& dist);

// ---------------------------------------------------------------------------
// Availability heatmap
// ---------------------------------------------------------------------------

struct HeatmapCell {
  int mg = 0;
  int cluster = 0;
  std::size_t n_train = 0;
  std::size_t n_train_locations = 0;
  double train_ratio = 0.0;  // n_train / unique train locations; NaN when empty
  std::size_t n_test = 0;
  double test_rmse = 0.0;  // original units; NaN when the cell has no test rows
};

struct Heatmap {
  std::vector<HeatmapCell> cells;  // sorted by (mg, cluster)
};

/// One cell per (MG, cluster) pair present in train or test.
/// `test_predictions` are original-unit predictions aligned with split.test.
Heatmap availability_heatmap(const DatasetSplit& split,
                             const Vec& test_predictions);

/// CSV columns: mg,cluster,n_train,n_train_locations,train_ratio,n_test,
/// test_rmse; missing values written as NA.
void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& hm);

}  // namespace yatt

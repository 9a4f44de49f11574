#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "yatt/pipeline.hpp"

namespace yatt {

/// Which split's RMSE drives the greedy selection. Validation is the default;
/// scoring on test is available for protocol comparisons but leaks the test
/// set into the search.
enum class MetricSet { validation, test };

const char* metric_set_name(MetricSet m);
MetricSet metric_set_from_name(const std::string& name);  // ConfigError

/// Optional maturity-group filter: north keeps MG 0-4, south keeps MG 4-8
/// (MG 4 belongs to both).
enum class Region { all, north, south };

const char* region_name(Region r);
Region region_from_name(const std::string& name);  // ConfigError

std::vector<PerformanceRecord> filter_region(
    const std::vector<PerformanceRecord>& records, Region region);

struct GreedyStep {
  WeatherVar variable;
  double rmse = 0.0;
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;
  std::vector<WeatherVar> pool;
  MetricSet metric_set = MetricSet::validation;
  Region region = Region::all;
  bool complete = false;

  /// Variables in selection order.
  std::vector<WeatherVar> selected() const;
};

/// Maps a candidate variable subset (canonical order) to an RMSE.
using GreedyEvaluator = std::function<double(const std::vector<WeatherVar>&)>;

/// Thrown when an evaluation fails mid-search; carries the steps completed so
/// far so callers can report partial progress, plus the original exception
/// (null when the failure was a non-finite RMSE value).
struct GreedyAborted : std::runtime_error {
  GreedyTrace partial;
  std::exception_ptr cause;
  GreedyAborted(GreedyTrace trace, const std::string& why,
                std::exception_ptr from = nullptr)
      : std::runtime_error("greedy search aborted: " + why),
        partial(std::move(trace)),
        cause(from) {}
};

/// Forward selection: each step evaluates every remaining candidate appended
/// to the chosen set and keeps the strict-minimum RMSE, ties resolved toward
/// the earlier variable in `tie_order` (canonical order by default).
/// Candidates within a step may be evaluated in parallel; the selection is a
/// fixed-order reduction, so results do not depend on the execution mode.
GreedyTrace greedy_search(const std::vector<WeatherVar>& pool,
                          const GreedyEvaluator& evaluator,
                          MetricSet metric_set = MetricSet::validation,
                          const std::vector<WeatherVar>& tie_order = all_weather_vars());

/// CSV columns: step,variable,rmse,metric_set,region.
void write_trace_csv(const std::filesystem::path& path, const GreedyTrace& trace);

}  // namespace yatt

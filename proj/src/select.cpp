#include "yatt/select.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>

#include "yatt/common.hpp"
#include "yatt/exec.hpp"

namespace yatt {

const char* metric_set_name(MetricSet m) {
  return m == MetricSet::validation ? "validation" : "test";
}

MetricSet metric_set_from_name(const std::string& name) {
  if (name == "validation") return MetricSet::validation;
  if (name == "test") return MetricSet::test;
  throw ConfigError("unknown metric set '" + name +
                    "' (expected validation or test)");
}

const char* region_name(Region r) {
  switch (r) {
    case Region::all: return "all";
    case Region::north: return "north";
    case Region::south: return "south";
  }
  return "?";
}

Region region_from_name(const std::string& name) {
  if (name == "all") return Region::all;
  if (name == "north") return Region::north;
  if (name == "south") return Region::south;
  throw ConfigError("unknown region '" + name + "' (expected all, north or south)");
}

std::vector<PerformanceRecord> filter_region(
    const std::vector<PerformanceRecord>& records, Region region) {
  if (region == Region::all) return records;
  std::vector<PerformanceRecord> out;
  for (const PerformanceRecord& r : records) {
    bool keep = region == Region::north ? r.maturity_group <= 4
                                        : r.maturity_group >= 4;
    if (keep) out.push_back(r);
  }
  return out;
}

std::vector<WeatherVar> GreedyTrace::selected() const {
  std::vector<WeatherVar> out;
  out.reserve(steps.size());
  for (const GreedyStep& s : steps) out.push_back(s.variable);
  return out;
}

GreedyTrace greedy_search(const std::vector<WeatherVar>& pool,
                          const GreedyEvaluator& evaluator,
                          MetricSet metric_set,
                          const std::vector<WeatherVar>& tie_order) {
  if (pool.empty()) throw ConfigError("greedy_search: empty candidate pool");
  if (!evaluator) throw ConfigError("greedy_search: missing evaluator");
  {
    std::vector<WeatherVar> sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ConfigError("greedy_search: duplicate variable in pool");
  }
  for (WeatherVar v : pool)
    if (std::find(tie_order.begin(), tie_order.end(), v) == tie_order.end())
      throw ConfigError(std::string("greedy_search: tie order misses ") +
                        weather_var_name(v));

  GreedyTrace trace;
  trace.pool = pool;
  trace.metric_set = metric_set;

  std::vector<WeatherVar> chosen;
  std::vector<WeatherVar> remaining;
  for (WeatherVar v : tie_order)
    if (std::find(pool.begin(), pool.end(), v) != pool.end())
      remaining.push_back(v);

  while (!remaining.empty()) {
    std::vector<double> rmse(remaining.size(), 0.0);
    std::vector<std::exception_ptr> failure(remaining.size());
    exec::parallel_for(remaining.size(), [&](std::size_t c) {
      std::vector<WeatherVar> subset = chosen;
      subset.push_back(remaining[c]);
      std::sort(subset.begin(), subset.end());
      try {
        rmse[c] = evaluator(subset);
      } catch (...) {
        failure[c] = std::current_exception();
      }
    });

    // Fixed-order reduction: the first strict minimum wins, so ties resolve
    // toward the earlier tie_order entry regardless of evaluation order.
    std::size_t best = remaining.size();
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      if (failure[c]) {
        try {
          std::rethrow_exception(failure[c]);
        } catch (const std::exception& e) {
          throw GreedyAborted(trace,
                              std::string("evaluating ") +
                                  weather_var_name(remaining[c]) + ": " + e.what(),
                              failure[c]);
        }
      }
      if (!std::isfinite(rmse[c]))
        throw GreedyAborted(trace, std::string("evaluating ") +
                                       weather_var_name(remaining[c]) +
                                       ": non-finite RMSE");
      if (best == remaining.size() || rmse[c] < rmse[best]) best = c;
    }

    trace.steps.push_back({remaining[best], rmse[best]});
    chosen.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  trace.complete = true;
  return trace;
}

void write_trace_csv(const std::filesystem::path& path,
                     const GreedyTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,variable,rmse,metric_set,region\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    out << i + 1 << ',' << weather_var_name(trace.steps[i].variable) << ','
        << fmt_double(trace.steps[i].rmse) << ','
        << metric_set_name(trace.metric_set) << ',' << region_name(trace.region)
        << '\n';
  }
  if (!out.good()) throw IoError("failed writing " + path.string());
}

}  // namespace yatt

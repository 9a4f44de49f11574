#include "yatt/select.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

using namespace yatt;
namespace fs = std::filesystem;

namespace {

unsigned subset_mask(const std::vector<WeatherVar>& subset) {
  unsigned m = 0;
  for (WeatherVar v : subset) m |= 1u << static_cast<unsigned>(v);
  return m;
}

// Full lookup table over all 2^7 subsets; the evaluator under test and the
// brute-force oracle below read from the same table.
using RmseTable = std::vector<double>;

RmseTable random_table(std::uint64_t seed, bool quantize) {
  Rng rng(seed);
  RmseTable t(1u << 7, 0.0);
  for (double& v : t) {
    v = rng.uniform(1.0, 10.0);
    if (quantize) v = std::round(v * 10.0) / 10.0;  // provoke exact ties
  }
  return t;
}

GreedyEvaluator table_evaluator(const RmseTable& t) {
  return [&t](const std::vector<WeatherVar>& subset) {
    return t[subset_mask(subset)];
  };
}

// Independent stepwise oracle: scans bits in canonical order with a strict
// minimum, sharing no code with greedy_search.
std::vector<std::pair<int, double>> brute_force_trace(const RmseTable& t) {
  std::vector<std::pair<int, double>> out;
  unsigned mask = 0;
  for (int step = 0; step < 7; ++step) {
    int best_bit = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int bit = 0; bit < 7; ++bit) {
      if (mask & (1u << bit)) continue;
      double v = t[mask | (1u << bit)];
      if (v < best) {
        best = v;
        best_bit = bit;
      }
    }
    out.emplace_back(best_bit, best);
    mask |= 1u << best_bit;
  }
  return out;
}

}  // namespace

TEST_CASE("greedy trace matches the exhaustive stepwise oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    RmseTable table = random_table(1000 + seed, seed % 2 == 0);
    GreedyTrace trace = greedy_search(all_weather_vars(), table_evaluator(table));
    auto expected = brute_force_trace(table);
    REQUIRE(trace.steps.size() == 7);
    CHECK(trace.complete);
    for (std::size_t s = 0; s < 7; ++s) {
      CHECK(static_cast<int>(trace.steps[s].variable) == expected[s].first);
      CHECK(trace.steps[s].rmse == expected[s].second);
    }
    // Permutation of the pool.
    std::vector<WeatherVar> sel = trace.selected();
    std::sort(sel.begin(), sel.end());
    CHECK(sel == all_weather_vars());
  }
}

TEST_CASE("greedy picks the smallest singleton first under additive costs") {
  std::map<WeatherVar, double> singleton = {{WeatherVar::adni, 5.0},
                                            {WeatherVar::ap, 4.0},
                                            {WeatherVar::arh, 6.0}};
  auto eval = [&](const std::vector<WeatherVar>& subset) {
    double s = 0.0;
    for (WeatherVar v : subset) s += singleton.at(v);
    return s;
  };
  std::vector<WeatherVar> pool = {WeatherVar::adni, WeatherVar::ap,
                                  WeatherVar::arh};
  GreedyTrace trace = greedy_search(pool, eval);
  REQUIRE(trace.steps.size() == 3);
  CHECK(trace.steps[0].variable == WeatherVar::ap);
  CHECK(trace.steps[0].rmse == 4.0);
  CHECK(trace.steps[1].variable == WeatherVar::adni);
  CHECK(trace.steps[1].rmse == 9.0);
  CHECK(trace.steps[2].variable == WeatherVar::arh);
  CHECK(trace.steps[2].rmse == 15.0);
}

TEST_CASE("exact ties resolve to the earlier canonical variable") {
  auto eval = [](const std::vector<WeatherVar>&) { return 1.0; };
  GreedyTrace trace = greedy_search(all_weather_vars(), eval);
  REQUIRE(trace.steps.size() == 7);
  for (std::size_t s = 0; s < 7; ++s) {
    CHECK(trace.steps[s].variable == all_weather_vars()[s]);
    CHECK(trace.steps[s].rmse == 1.0);
  }
}

TEST_CASE("custom tie order overrides the canonical one") {
  auto eval = [](const std::vector<WeatherVar>&) { return 2.5; };
  std::vector<WeatherVar> order = {WeatherVar::avg_sur, WeatherVar::adni};
  std::vector<WeatherVar> pool = {WeatherVar::adni, WeatherVar::avg_sur};
  GreedyTrace trace = greedy_search(pool, eval, MetricSet::validation, order);
  REQUIRE(trace.steps.size() == 2);
  CHECK(trace.steps[0].variable == WeatherVar::avg_sur);
  CHECK(trace.steps[1].variable == WeatherVar::adni);
}

TEST_CASE("singleton pool yields a single-step trace") {
  auto eval = [](const std::vector<WeatherVar>& s) {
    REQUIRE(s.size() == 1);
    return 3.25;
  };
  GreedyTrace trace = greedy_search({WeatherVar::min_sur}, eval);
  REQUIRE(trace.steps.size() == 1);
  CHECK(trace.steps[0].variable == WeatherVar::min_sur);
  CHECK(trace.steps[0].rmse == 3.25);
  CHECK(trace.complete);
}

TEST_CASE("evaluator receives sorted subsets, one per remaining candidate") {
  std::vector<std::vector<WeatherVar>> calls;
  auto eval = [&](const std::vector<WeatherVar>& subset) {
    calls.push_back(subset);
    return static_cast<double>(subset_mask(subset));
  };
  exec::Mode saved = exec::mode();
  exec::set_mode(exec::Mode::serial);  // keep the call log ordered
  greedy_search(all_weather_vars(), eval);
  exec::set_mode(saved);
  CHECK(calls.size() == 7 + 6 + 5 + 4 + 3 + 2 + 1);
  for (const auto& subset : calls)
    CHECK(std::is_sorted(subset.begin(), subset.end()));
}

TEST_CASE("evaluator failure aborts with the partial trace") {
  auto eval = [](const std::vector<WeatherVar>& subset) -> double {
    bool has_mdni = std::find(subset.begin(), subset.end(), WeatherVar::mdni) !=
                    subset.end();
    if (subset.size() == 2 && has_mdni) throw DataError("synthetic failure");
    return 5.0 + static_cast<double>(subset_mask(subset)) * 1e-3;
  };
  try {
    greedy_search(all_weather_vars(), eval);
    FAIL("expected GreedyAborted");
  } catch (const GreedyAborted& e) {
    CHECK(e.partial.steps.size() == 1);
    CHECK_FALSE(e.partial.complete);
    CHECK(std::string(e.what()).find("MDNI") != std::string::npos);
    CHECK(std::string(e.what()).find("synthetic failure") != std::string::npos);
  }
}

TEST_CASE("non-finite RMSE aborts the search") {
  auto eval = [](const std::vector<WeatherVar>& subset) {
    return subset.size() >= 2 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  try {
    greedy_search(all_weather_vars(), eval);
    FAIL("expected GreedyAborted");
  } catch (const GreedyAborted& e) {
    CHECK(e.partial.steps.size() == 1);
    CHECK_FALSE(e.partial.complete);
  }
}

TEST_CASE("greedy search is deterministic across execution modes") {
  RmseTable table = random_table(7, true);
  GreedyTrace a = greedy_search(all_weather_vars(), table_evaluator(table));
  exec::Mode saved = exec::mode();
  exec::set_mode(exec::Mode::serial);
  GreedyTrace b = greedy_search(all_weather_vars(), table_evaluator(table));
  exec::set_mode(saved);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t s = 0; s < a.steps.size(); ++s) {
    CHECK(a.steps[s].variable == b.steps[s].variable);
    CHECK(a.steps[s].rmse == b.steps[s].rmse);
  }
}

TEST_CASE("greedy search validates its inputs") {
  auto eval = [](const std::vector<WeatherVar>&) { return 1.0; };
  CHECK_THROWS_AS(greedy_search({}, eval), ConfigError);
  CHECK_THROWS_AS(greedy_search({WeatherVar::adni, WeatherVar::adni}, eval),
                  ConfigError);
  CHECK_THROWS_AS(greedy_search({WeatherVar::adni}, GreedyEvaluator{}),
                  ConfigError);
  CHECK_THROWS_AS(greedy_search({WeatherVar::adni, WeatherVar::ap}, eval,
                                MetricSet::validation, {WeatherVar::adni}),
                  ConfigError);
}

TEST_CASE("region filter keeps the right maturity groups") {
  std::vector<PerformanceRecord> records;
  for (int mg = 0; mg <= 8; ++mg) {
    PerformanceRecord r;
    r.record_id = "R" + std::to_string(mg);
    r.maturity_group = mg;
    records.push_back(r);
  }
  CHECK(filter_region(records, Region::all).size() == 9);
  auto north = filter_region(records, Region::north);
  REQUIRE(north.size() == 5);
  for (const auto& r : north) CHECK(r.maturity_group <= 4);
  auto south = filter_region(records, Region::south);
  REQUIRE(south.size() == 5);
  for (const auto& r : south) CHECK(r.maturity_group >= 4);
  // MG 4 belongs to both regions.
  CHECK(std::any_of(north.begin(), north.end(),
                    [](const auto& r) { return r.maturity_group == 4; }));
  CHECK(std::any_of(south.begin(), south.end(),
                    [](const auto& r) { return r.maturity_group == 4; }));
}

TEST_CASE("trace export writes one row per step") {
  GreedyTrace trace;
  trace.pool = {WeatherVar::adni, WeatherVar::ap};
  trace.metric_set = MetricSet::test;
  trace.region = Region::north;
  trace.steps = {{WeatherVar::ap, 4.0}, {WeatherVar::adni, 3.5}};
  trace.complete = true;

  fs::path dir = fs::temp_directory_path() / "yatt_select_test";
  fs::create_directories(dir);
  fs::path file = dir / "trace.csv";
  write_trace_csv(file, trace);

  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() ==
        "step,variable,rmse,metric_set,region\n"
        "1,AP,4,test,north\n"
        "2,ADNI,3.5,test,north\n");
  fs::remove_all(dir);
}

TEST_CASE("metric set names round trip") {
  CHECK(metric_set_from_name("validation") == MetricSet::validation);
  CHECK(metric_set_from_name("test") == MetricSet::test);
  CHECK_THROWS_AS(metric_set_from_name("train"), ConfigError);
  CHECK(region_from_name("all") == Region::all);
  CHECK(region_from_name("north") == Region::north);
  CHECK(region_from_name("south") == Region::south);
  CHECK_THROWS_AS(region_from_name("east"), ConfigError);
}

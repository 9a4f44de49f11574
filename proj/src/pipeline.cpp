#include "yatt/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

namespace yatt {

namespace {

constexpr const char* kVarNames[kNumWeatherVars] = {
    "ADNI", "AP", "ARH", "MDNI", "MaxSur", "MinSur", "AvgSur"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stoi(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::string fmt_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

bool strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return !line.empty();
}

}  // namespace

const char* weather_var_name(WeatherVar v) {
  return kVarNames[static_cast<int>(v)];
}

WeatherVar weather_var_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNumWeatherVars; ++i) {
    if (name == kVarNames[i]) return static_cast<WeatherVar>(i);
  }
  throw ConfigError("unknown weather variable '" + name +
                    "' (expected one of ADNI, AP, ARH, MDNI, MaxSur, MinSur, AvgSur)");
}

std::vector<WeatherVar> all_weather_vars() {
  std::vector<WeatherVar> v;
  v.reserve(kNumWeatherVars);
  for (std::size_t i = 0; i < kNumWeatherVars; ++i) v.push_back(static_cast<WeatherVar>(i));
  return v;
}

const char* granularity_name(Granularity g) {
  switch (g) {
    case Granularity::daily: return "daily";
    case Granularity::weekly: return "weekly";
    case Granularity::biweekly: return "biweekly";
    case Granularity::monthly: return "monthly";
  }
  return "?";
}

Granularity granularity_from_name(const std::string& name) {
  if (name == "daily") return Granularity::daily;
  if (name == "weekly") return Granularity::weekly;
  if (name == "biweekly") return Granularity::biweekly;
  if (name == "monthly") return Granularity::monthly;
  throw ConfigError("unknown granularity '" + name +
                    "' (expected daily, weekly, biweekly or monthly)");
}

std::size_t granularity_window(Granularity g) {
  switch (g) {
    case Granularity::daily: return 1;
    case Granularity::weekly: return 7;
    case Granularity::biweekly: return 14;
    case Granularity::monthly: return 30;
  }
  return 1;
}

std::size_t granularity_steps(Granularity g) {
  if (g == Granularity::daily) return kSeasonDays;
  return kDownsampleDays / granularity_window(g);
}

void validate_series(const WeatherSeries& s) {
  const std::string where = "weather series " + s.location_id + "/" + std::to_string(s.year);
  if (s.days.rows != kSeasonDays || s.days.cols != kNumWeatherVars) {
    throw DataError(where + ": shape " + s.days.shape_str() + ", expected 214x7");
  }
  for (std::size_t d = 0; d < kSeasonDays; ++d) {
    const double* r = s.days.row(d);
    for (std::size_t j = 0; j < kNumWeatherVars; ++j) {
      if (!std::isfinite(r[j])) {
        throw DataError(where + ": non-finite " + kVarNames[j] + " on day " +
                        std::to_string(d));
      }
    }
    const double adni = r[0], ap = r[1], arh = r[2], mdni = r[3];
    const double max_sur = r[4], min_sur = r[5], avg_sur = r[6];
    const std::string day = " on day " + std::to_string(d);
    if (ap < 0.0) throw DataError(where + ": negative AP" + day);
    if (arh < 0.0 || arh > 100.0) throw DataError(where + ": ARH outside [0, 100]" + day);
    if (adni < 0.0) throw DataError(where + ": negative ADNI" + day);
    if (mdni < adni) throw DataError(where + ": MDNI below ADNI" + day);
    if (min_sur > avg_sur || avg_sur > max_sur) {
      throw DataError(where + ": surface temperatures violate MinSur <= AvgSur <= MaxSur" + day);
    }
  }
}

Matrix downsample(const WeatherSeries& s, Granularity g) {
  validate_series(s);
  if (g == Granularity::daily) {
    return s.days;
  }
  const std::size_t window = granularity_window(g);
  const std::size_t steps = granularity_steps(g);
  Matrix out(steps, kNumWeatherVars);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t d0 = t * window;
    double* o = out.row(t);
    // mean: ADNI, AP, ARH, AvgSur; max: MDNI, MaxSur; min: MinSur
    double sum[4] = {0, 0, 0, 0};
    double mx_mdni = s.days(d0, 3), mx_max = s.days(d0, 4), mn_min = s.days(d0, 5);
    for (std::size_t d = d0; d < d0 + window; ++d) {
      sum[0] += s.days(d, 0);
      sum[1] += s.days(d, 1);
      sum[2] += s.days(d, 2);
      sum[3] += s.days(d, 6);
      mx_mdni = std::max(mx_mdni, s.days(d, 3));
      mx_max = std::max(mx_max, s.days(d, 4));
      mn_min = std::min(mn_min, s.days(d, 5));
    }
    const double w = static_cast<double>(window);
    o[0] = sum[0] / w;
    o[1] = sum[1] / w;
    o[2] = sum[2] / w;
    o[3] = mx_mdni;
    o[4] = mx_max;
    o[5] = mn_min;
    o[6] = sum[3] / w;
  }
  return out;
}

void WeatherStore::add(WeatherSeries s) {
  validate_series(s);
  auto key = std::make_pair(s.location_id, s.year);
  if (series_.contains(key)) {
    throw DataError("duplicate weather series for " + s.location_id + "/" +
                    std::to_string(s.year));
  }
  series_.emplace(std::move(key), std::move(s));
}

const WeatherSeries* WeatherStore::find(const std::string& location_id,
                                        int year) const {
  auto it = series_.find(std::make_pair(location_id, year));
  return it == series_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, int>> WeatherStore::keys() const {
  std::vector<std::pair<std::string, int>> out;
  out.reserve(series_.size());
  for (const auto& [key, value] : series_) out.push_back(key);
  return out;
}

WeatherStore WeatherStore::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  strip_cr(line);
  const std::string expected =
      "location_id,year,day_index,ADNI,AP,ARH,MDNI,MaxSur,MinSur,AvgSur";
  if (line != expected) {
    throw DataError(path.string() + ": bad header, expected '" + expected + "'");
  }

  // (location, year) -> per-day rows seen so far
  std::map<std::pair<std::string, int>, std::pair<Matrix, std::vector<bool>>> partial;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip_cr(line)) continue;
    const auto f = split_fields(line);
    const std::string at = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 10) {
      throw DataError(at + ": expected 10 fields, got " + std::to_string(f.size()));
    }
    int year = 0, day = 0;
    if (!parse_int(f[1], year)) throw DataError(at + ": malformed year '" + f[1] + "'");
    if (!parse_int(f[2], day)) throw DataError(at + ": malformed day_index '" + f[2] + "'");
    if (day < 0 || day >= static_cast<int>(kSeasonDays)) {
      throw DataError(at + ": day_index " + std::to_string(day) + " outside 0..213");
    }
    auto& slot = partial[std::make_pair(f[0], year)];
    if (slot.second.empty()) {
      slot.first = Matrix(kSeasonDays, kNumWeatherVars);
      slot.second.assign(kSeasonDays, false);
    }
    if (slot.second[static_cast<std::size_t>(day)]) {
      throw DataError(at + ": duplicate day " + std::to_string(day) + " for " +
                      f[0] + "/" + std::to_string(year));
    }
    slot.second[static_cast<std::size_t>(day)] = true;
    for (std::size_t j = 0; j < kNumWeatherVars; ++j) {
      double v;
      if (!parse_double(f[3 + j], v)) {
        throw DataError(at + ": malformed " + kVarNames[j] + " '" + f[3 + j] + "'");
      }
      slot.first(static_cast<std::size_t>(day), j) = v;
    }
  }

  WeatherStore store;
  std::vector<std::string> gaps;
  for (auto& [key, slot] : partial) {
    std::size_t have = 0;
    for (bool b : slot.second) have += b ? 1 : 0;
    if (have != kSeasonDays) {
      gaps.push_back(key.first + "/" + std::to_string(key.second) + " (" +
                     std::to_string(have) + "/214 days)");
      continue;
    }
    WeatherSeries s;
    s.location_id = key.first;
    s.year = key.second;
    s.days = std::move(slot.first);
    store.add(std::move(s));
  }
  if (!gaps.empty()) {
    std::string msg = path.string() + ": incomplete weather series:";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }
  if (store.size() == 0) throw DataError(path.string() + ": no weather data rows");
  return store;
}

void write_weather_csv(const std::filesystem::path& path,
                       const WeatherStore& store) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "location_id,year,day_index,ADNI,AP,ARH,MDNI,MaxSur,MinSur,AvgSur\n";
  for (const auto& key : store.keys()) {
    const WeatherSeries* s = store.find(key.first, key.second);
    for (std::size_t d = 0; d < kSeasonDays; ++d) {
      out << key.first << ',' << key.second << ',' << d;
      for (std::size_t j = 0; j < kNumWeatherVars; ++j) {
        out << ',' << fmt_fixed(s->days(d, j), 4);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PerformanceParse parse_performance_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  strip_cr(line);
  const std::string expected =
      "record_id,year,location_id,genotype_id,maturity_group,yield_bu_ac";
  if (line != expected) {
    throw DataError(path.string() + ": bad header, expected '" + expected + "'");
  }

  PerformanceParse out;
  std::set<std::string> seen_ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip_cr(line)) continue;
    const auto f = split_fields(line);
    auto skip = [&](const std::string& reason) {
      out.skipped.entries.push_back({lineno, reason});
    };
    if (f.size() != 6) {
      skip("expected 6 fields, got " + std::to_string(f.size()));
      continue;
    }
    PerformanceRecord r;
    r.record_id = f[0];
    r.location_id = f[2];
    r.genotype_id = f[3];
    if (r.record_id.empty()) {
      skip("empty record_id");
      continue;
    }
    if (!parse_int(f[1], r.year)) {
      skip("malformed year '" + f[1] + "'");
      continue;
    }
    if (!parse_int(f[4], r.maturity_group)) {
      skip("malformed maturity_group '" + f[4] + "'");
      continue;
    }
    if (r.maturity_group < 0 || r.maturity_group > 8) {
      skip("maturity_group " + std::to_string(r.maturity_group) + " outside 0..8");
      continue;
    }
    if (f[5].empty()) {
      skip("missing yield");
      continue;
    }
    if (!parse_double(f[5], r.yield) || !std::isfinite(r.yield)) {
      skip("malformed yield '" + f[5] + "'");
      continue;
    }
    if (!seen_ids.insert(r.record_id).second) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": duplicate record_id '" + r.record_id + "'");
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

void write_performance_csv(const std::filesystem::path& path,
                           const std::vector<PerformanceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "record_id,year,location_id,genotype_id,maturity_group,yield_bu_ac\n";
  for (const auto& r : records) {
    out << r.record_id << ',' << r.year << ',' << r.location_id << ','
        << r.genotype_id << ',' << r.maturity_group << ',' << fmt_fixed(r.yield, 4)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void check_join(const std::vector<PerformanceRecord>& records,
                const WeatherStore& weather) {
  std::map<std::pair<std::string, int>, std::size_t> missing;
  for (const auto& r : records) {
    if (weather.find(r.location_id, r.year) == nullptr) {
      ++missing[std::make_pair(r.location_id, r.year)];
    }
  }
  if (!missing.empty()) {
    std::string msg = "records reference weather series that were not provided:";
    for (const auto& [key, count] : missing) {
      msg += " " + key.first + "/" + std::to_string(key.second) + " (" +
             std::to_string(count) + " records)";
    }
    throw DataError(msg);
  }
}

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

Scaler::Range Scaler::fit_range(const std::vector<double>& values) {
  if (values.empty()) throw DataError("cannot fit a scaling range on no values");
  Range r;
  r.min = values[0];
  r.max = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("non-finite value while fitting scaler");
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  r.constant = (r.min == r.max);
  return r;
}

double Scaler::apply_range(const Range& r, double x) {
  if (r.constant) return 0.0;
  return -1.0 + 2.0 * (x - r.min) / (r.max - r.min);
}

double Scaler::invert_range(const Range& r, double x) {
  if (r.constant) {
    throw NumericError("cannot invert a constant scaling range");
  }
  return r.min + (x + 1.0) * 0.5 * (r.max - r.min);
}

double Scaler::apply(std::size_t feature, double x) const {
  if (feature >= features.size()) {
    throw ShapeError("scaler feature index " + std::to_string(feature) +
                     " out of range (" + std::to_string(features.size()) + ")");
  }
  return apply_range(features[feature], x);
}

// ---------------------------------------------------------------------------
// PrepareSpec
// ---------------------------------------------------------------------------

const char* static_mode_name(StaticMode m) {
  switch (m) {
    case StaticMode::none: return "none";
    case StaticMode::every_step: return "every_step";
    case StaticMode::after_encoder: return "after_encoder";
    case StaticMode::both: return "both";
  }
  return "?";
}

StaticMode static_mode_from_name(const std::string& name) {
  if (name == "none") return StaticMode::none;
  if (name == "every_step") return StaticMode::every_step;
  if (name == "after_encoder") return StaticMode::after_encoder;
  if (name == "both") return StaticMode::both;
  throw ConfigError("unknown static mode '" + name +
                    "' (expected none, every_step, after_encoder or both)");
}

std::size_t PrepareSpec::static_count() const {
  return (use_mg ? 1u : 0u) + (use_cluster ? 1u : 0u);
}

std::size_t PrepareSpec::sequence_dim() const {
  const bool in_seq =
      static_mode == StaticMode::every_step || static_mode == StaticMode::both;
  return weather_dim() + (in_seq ? static_count() : 0);
}

std::size_t PrepareSpec::statics_after_dim() const {
  const bool after =
      static_mode == StaticMode::after_encoder || static_mode == StaticMode::both;
  return after ? static_count() : 0;
}

void PrepareSpec::validate() const {
  if (use_weather && weather_vars.empty()) {
    throw ConfigError("weather is enabled but no weather variables are selected");
  }
  std::set<WeatherVar> seen;
  for (WeatherVar v : weather_vars) {
    if (!seen.insert(v).second) {
      throw ConfigError(std::string("duplicate weather variable ") + weather_var_name(v));
    }
  }
  if (sequence_dim() == 0) {
    throw ConfigError("model input is empty: no weather variables and no per-step statics");
  }
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

namespace {

// 80/10/10 of n by largest remainder; ties favor the earlier bucket.
std::array<std::size_t, 3> split_counts(std::size_t n) {
  const double fracs[3] = {0.8, 0.1, 0.1};
  std::array<std::size_t, 3> base{};
  double rem[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double q = static_cast<double>(n) * fracs[i];
    base[i] = static_cast<std::size_t>(q);
    rem[i] = q - static_cast<double>(base[i]);
    assigned += base[i];
  }
  std::size_t leftover = n - assigned;
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; i < leftover; ++i) ++base[order[i % 3]];
  return base;
}

void cut(const std::vector<std::size_t>& perm, const std::array<std::size_t, 3>& counts,
         SplitIndices& out) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(perm[pos++]);
  for (std::size_t i = 0; i < counts[1]; ++i) out.validation.push_back(perm[pos++]);
  for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(perm[pos++]);
}

}  // namespace

SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 10) {
    throw DataError("need at least 10 records to split, got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(perm);
  SplitIndices out;
  cut(perm, split_counts(n), out);
  return out;
}

SplitIndices split_indices_by_year(const std::vector<int>& years,
                                   std::uint64_t seed) {
  if (years.size() < 10) {
    throw DataError("need at least 10 records to split, got " +
                    std::to_string(years.size()));
  }
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < years.size(); ++i) by_year[years[i]].push_back(i);
  SplitIndices out;
  for (auto& [year, perm] : by_year) {
    Rng rng(derive_seed(seed, "split-year", static_cast<std::uint64_t>(
                                                static_cast<std::int64_t>(year))));
    rng.shuffle(perm);
    cut(perm, split_counts(perm.size()), out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

DatasetSplit prepare(const std::vector<PerformanceRecord>& records,
                     const WeatherStore& weather,
                     const ClusterAssignment* clusters,
                     const PrepareSpec& spec) {
  spec.validate();
  if (spec.use_cluster && clusters == nullptr) {
    throw ConfigError("cluster feature requested but no cluster assignment given");
  }
  check_join(records, weather);

  // Canonical order for the selected weather columns.
  std::vector<WeatherVar> vars = spec.weather_vars;
  std::sort(vars.begin(), vars.end());
  if (!spec.use_weather) vars.clear();

  // Resolve clusters up front so a missing genotype fails before any heavy work.
  std::vector<int> cluster_ids(records.size(), -1);
  if (spec.use_cluster) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      cluster_ids[i] = clusters->cluster_for(records[i].genotype_id);
    }
  }

  SplitIndices idx;
  if (spec.stratify_by_year) {
    std::vector<int> years(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) years[i] = records[i].year;
    idx = split_indices_by_year(years, spec.seed);
  } else {
    idx = split_indices(records.size(), spec.seed);
  }

  // Downsample each (location, year) series once, in parallel.
  std::map<std::pair<std::string, int>, std::size_t> slot_of;
  std::vector<const WeatherSeries*> series;
  for (const auto& r : records) {
    auto key = std::make_pair(r.location_id, r.year);
    if (slot_of.emplace(key, series.size()).second) {
      series.push_back(weather.find(r.location_id, r.year));
    }
  }
  std::vector<Matrix> downsampled(series.size());
  exec::parallel_for(series.size(), [&](std::size_t i) {
    downsampled[i] = downsample(*series[i], spec.granularity);
  });

  DatasetSplit out;
  out.t_steps = granularity_steps(spec.granularity);
  out.input_dim = spec.sequence_dim();
  out.statics_after_dim = spec.statics_after_dim();

  // Fit scaling ranges on the training portion only.
  Scaler& scaler = out.scaler;
  {
    std::vector<std::vector<double>> weather_cols(vars.size());
    std::vector<double> mg_vals, cluster_vals, targets;
    for (std::size_t i : idx.train) {
      const Matrix& m = downsampled[slot_of.at({records[i].location_id, records[i].year})];
      for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        const std::size_t col = static_cast<std::size_t>(vars[vi]);
        for (std::size_t t = 0; t < out.t_steps; ++t) {
          weather_cols[vi].push_back(m(t, col));
        }
      }
      if (spec.use_mg) mg_vals.push_back(records[i].maturity_group);
      if (spec.use_cluster) cluster_vals.push_back(cluster_ids[i]);
      targets.push_back(records[i].yield);
    }
    for (std::size_t vi = 0; vi < vars.size(); ++vi) {
      scaler.feature_names.push_back(weather_var_name(vars[vi]));
      scaler.features.push_back(Scaler::fit_range(weather_cols[vi]));
    }
    if (spec.use_mg) {
      scaler.feature_names.push_back("MG");
      scaler.features.push_back(Scaler::fit_range(mg_vals));
    }
    if (spec.use_cluster) {
      scaler.feature_names.push_back("Cluster");
      scaler.features.push_back(Scaler::fit_range(cluster_vals));
    }
    scaler.target = Scaler::fit_range(targets);
  }
  const std::size_t mg_feature = vars.size();
  const std::size_t cluster_feature = vars.size() + (spec.use_mg ? 1 : 0);

  const bool statics_in_seq =
      spec.static_mode == StaticMode::every_step || spec.static_mode == StaticMode::both;

  auto build = [&](std::size_t i) {
    const PerformanceRecord& r = records[i];
    PreparedRecord p;
    p.record_id = r.record_id;
    p.location_id = r.location_id;
    p.genotype_id = r.genotype_id;
    p.year = r.year;
    p.maturity_group = r.maturity_group;
    p.cluster_id = cluster_ids[i];
    p.yield = r.yield;
    p.target_scaled = scaler.apply_target(r.yield);

    double mg_scaled = 0.0, cluster_scaled = 0.0;
    if (spec.use_mg) mg_scaled = scaler.apply(mg_feature, r.maturity_group);
    if (spec.use_cluster) cluster_scaled = scaler.apply(cluster_feature, cluster_ids[i]);

    const Matrix& m = downsampled[slot_of.at({r.location_id, r.year})];
    p.sequence.resize(out.t_steps);
    for (std::size_t t = 0; t < out.t_steps; ++t) {
      Vec& row = p.sequence[t];
      row.reserve(out.input_dim);
      for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        row.push_back(scaler.apply(vi, m(t, static_cast<std::size_t>(vars[vi]))));
      }
      if (statics_in_seq) {
        if (spec.use_mg) row.push_back(mg_scaled);
        if (spec.use_cluster) row.push_back(cluster_scaled);
      }
    }
    if (out.statics_after_dim > 0) {
      if (spec.use_mg) p.statics_after.push_back(mg_scaled);
      if (spec.use_cluster) p.statics_after.push_back(cluster_scaled);
    }
    return p;
  };

  out.train.reserve(idx.train.size());
  out.validation.reserve(idx.validation.size());
  out.test.reserve(idx.test.size());
  for (std::size_t i : idx.train) out.train.push_back(build(i));
  for (std::size_t i : idx.validation) out.validation.push_back(build(i));
  for (std::size_t i : idx.test) out.test.push_back(build(i));
  return out;
}

}  // namespace yatt

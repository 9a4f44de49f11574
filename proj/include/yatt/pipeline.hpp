#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "yatt/genotype.hpp"
#include "yatt/matrix.hpp"

namespace yatt {

// ---------------------------------------------------------------------------
// Weather variables
// ---------------------------------------------------------------------------

/// Canonical variable order; every matrix column, CSV column and tie-break
/// rule in the library follows it.
enum class WeatherVar : int {
  adni = 0,  // average direct normal irradiance (W/m^2)
  ap,        // accumulated precipitation (inches/day)
  arh,       // average relative humidity (%)
  mdni,      // maximum direct normal irradiance (W/m^2)
  max_sur,   // maximum surface temperature (C)
  min_sur,   // minimum surface temperature (C)
  avg_sur,   // average surface temperature (C)
};

inline constexpr std::size_t kNumWeatherVars = 7;

const char* weather_var_name(WeatherVar v);
WeatherVar weather_var_from_name(const std::string& name);  // ConfigError
std::vector<WeatherVar> all_weather_vars();

// ---------------------------------------------------------------------------
// Weather series and downsampling
// ---------------------------------------------------------------------------

/// Growing-season length in days; day_index runs 0..213 (late April onward).
inline constexpr std::size_t kSeasonDays = 214;
/// Downsampling covers the first 210 days so the window width divides evenly.
inline constexpr std::size_t kDownsampleDays = 210;

enum class Granularity { daily, weekly, biweekly, monthly };

const char* granularity_name(Granularity g);
Granularity granularity_from_name(const std::string& name);  // ConfigError
/// Sequence length after downsampling: 214 / 30 / 15 / 7.
std::size_t granularity_steps(Granularity g);
/// Window width in days (1 for daily).
std::size_t granularity_window(Granularity g);

struct WeatherSeries {
  std::string location_id;
  int year = 0;
  Matrix days;  // kSeasonDays x kNumWeatherVars, canonical column order
};

/// Throws DataError: wrong shape, non-finite values, or violated physical
/// invariants (MinSur <= AvgSur <= MaxSur, 0 <= ADNI <= MDNI, ARH in [0,100],
/// AP >= 0).
void validate_series(const WeatherSeries& s);

/// Aggregates non-overlapping windows over days 0..209 (days 210..213 are
/// dropped for every non-daily granularity). Mean for ADNI/AP/ARH/AvgSur,
/// max for MDNI/MaxSur, min for MinSur. Daily returns all 214 rows.
Matrix downsample(const WeatherSeries& s, Granularity g);

class WeatherStore {
 public:
  static WeatherStore load_csv(const std::filesystem::path& path);

  void add(WeatherSeries s);  // DataError on duplicate (location, year)
  const WeatherSeries* find(const std::string& location_id, int year) const;
  std::size_t size() const { return series_.size(); }

  /// Keys in deterministic (location, year) order.
  std::vector<std::pair<std::string, int>> keys() const;

 private:
  std::map<std::pair<std::string, int>, WeatherSeries> series_;
};

void write_weather_csv(const std::filesystem::path& path,
                       const WeatherStore& store);

// ---------------------------------------------------------------------------
// Performance records
// ---------------------------------------------------------------------------

struct PerformanceRecord {
  std::string record_id;
  int year = 0;
  std::string location_id;
  std::string genotype_id;
  int maturity_group = 0;  // 0..8
  double yield = 0.0;      // bu/acre
};

struct SkipReport {
  struct Entry {
    std::size_t line;  // 1-based line number in the source file
    std::string reason;
  };
  std::vector<Entry> entries;
};

struct PerformanceParse {
  std::vector<PerformanceRecord> records;
  SkipReport skipped;
};

/// Skips (and reports) rows with missing yield, maturity group outside 0..8,
/// or malformed numeric fields. A missing or wrong header is fatal (DataError).
PerformanceParse parse_performance_csv(const std::filesystem::path& path);

void write_performance_csv(const std::filesystem::path& path,
                           const std::vector<PerformanceRecord>& records);

/// Every record must have a matching weather series; throws DataError listing
/// all missing (location, year) pairs at once.
void check_join(const std::vector<PerformanceRecord>& records,
                const WeatherStore& weather);

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// Min-max scaling to (-1, 1), fitted on training data only. Applying to
/// out-of-range values extrapolates beyond (-1, 1) rather than clamping.
struct Scaler {
  struct Range {
    double min = 0.0;
    double max = 0.0;
    bool constant = false;  // max == min; scaled value is pinned to 0
  };

  std::vector<std::string> feature_names;
  std::vector<Range> features;
  Range target;

  static Range fit_range(const std::vector<double>& values);  // DataError if empty
  static double apply_range(const Range& r, double x);
  static double invert_range(const Range& r, double x);  // NumericError if constant

  double apply(std::size_t feature, double x) const;
  double apply_target(double y) const { return apply_range(target, y); }
  double invert_target(double y) const { return invert_range(target, y); }
};

// ---------------------------------------------------------------------------
// Prepared datasets
// ---------------------------------------------------------------------------

/// Where the static inputs (maturity group, genotype cluster) enter the model.
enum class StaticMode { none, every_step, after_encoder, both };

const char* static_mode_name(StaticMode m);
StaticMode static_mode_from_name(const std::string& name);  // ConfigError

struct PrepareSpec {
  Granularity granularity = Granularity::weekly;
  std::vector<WeatherVar> weather_vars = all_weather_vars();
  bool use_weather = true;
  bool use_mg = true;
  bool use_cluster = true;
  StaticMode static_mode = StaticMode::both;
  bool stratify_by_year = false;
  std::uint64_t seed = 0;

  std::size_t weather_dim() const { return use_weather ? weather_vars.size() : 0; }
  std::size_t static_count() const;
  std::size_t sequence_dim() const;      // weather + per-step statics
  std::size_t statics_after_dim() const; // statics handed to the head
  void validate() const;                 // ConfigError
};

struct PreparedRecord {
  std::string record_id;
  std::string location_id;
  std::string genotype_id;
  int year = 0;
  int maturity_group = 0;
  int cluster_id = -1;
  double yield = 0.0;         // original units
  double target_scaled = 0.0;
  std::vector<Vec> sequence;  // t_steps rows of sequence_dim scaled inputs
  Vec statics_after;          // scaled statics for the regression head
};

struct DatasetSplit {
  std::vector<PreparedRecord> train;
  std::vector<PreparedRecord> validation;
  std::vector<PreparedRecord> test;
  Scaler scaler;
  std::size_t t_steps = 0;
  std::size_t input_dim = 0;
  std::size_t statics_after_dim = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle then contiguous 80/10/10 cut; fractional counts resolved by
/// largest remainder (ties to the earlier bucket). Throws DataError below 10
/// records.
SplitIndices split_indices(std::size_t n, std::uint64_t seed);

/// Stratified variant: each year's records are split 80/10/10 separately.
SplitIndices split_indices_by_year(const std::vector<int>& years,
                                   std::uint64_t seed);

/// Full preparation: join weather, downsample, split, fit the scaler on the
/// training portion only, scale everything. `clusters` may be null when
/// use_cluster is false.
DatasetSplit prepare(const std::vector<PerformanceRecord>& records,
                     const WeatherStore& weather,
                     const ClusterAssignment* clusters,
                     const PrepareSpec& spec);

}  // namespace yatt

#include "yatt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "yatt/common.hpp"
#include "yatt/rng.hpp"

namespace yatt {

void SynthSpec::validate() const {
  if (locations == 0 || years == 0 || genotypes == 0 || trials_per_cell == 0)
    throw ConfigError("synthetic spec: all counts must be positive");
  if (families == 0 || families > genotypes)
    throw ConfigError("synthetic spec: families must be in 1.." +
                      std::to_string(genotypes));
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string padded(const char* prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t id_width(std::size_t count) {
  std::size_t w = 1, limit = 10;
  while (count > limit) {
    ++w;
    limit *= 10;
  }
  return std::max<std::size_t>(w, 3);
}

struct LocationClimate {
  double base_temp;   // mean surface temperature offset
  double irradiance;  // ADNI offset
  double humidity_phase;
};

/// One full season of daily weather. Margins between coupled variables stay
/// >= 0.5, so the %.4f CSV rounding cannot violate the ordering invariants.
WeatherSeries make_series(const std::string& loc, int year,
                          const LocationClimate& climate, Rng& rng) {
  WeatherSeries s;
  s.location_id = loc;
  s.year = year;
  s.days = Matrix(kSeasonDays, kNumWeatherVars);
  // Year-specific mid-season anomaly: a smooth temperature/irradiance
  // excursion confined to weeks 18-26 (days 119..181). Most of the variance
  // in the aggregates that drive yield must be read from those weeks alone;
  // location climate visible elsewhere in the season cannot recover it.
  const double temp_anomaly = rng.uniform(-10.0, 10.0);
  const double irr_anomaly = rng.uniform(-60.0, 60.0);
  for (std::size_t d = 0; d < kSeasonDays; ++d) {
    double season = std::sin(kPi * static_cast<double>(d) / 213.0);
    double anomaly =
        d >= 119 && d <= 181
            ? std::sin(kPi * static_cast<double>(d - 119) / 62.0)
            : 0.0;
    double avg_sur = climate.base_temp + 10.0 * season +
                     temp_anomaly * anomaly + rng.uniform(-2.0, 2.0);
    double min_sur = avg_sur - 3.0 - rng.uniform(0.5, 4.0);
    double max_sur = avg_sur + 3.0 + rng.uniform(0.5, 4.0);
    double adni = 150.0 + climate.irradiance + 80.0 * season +
                  irr_anomaly * anomaly + rng.uniform(-30.0, 30.0);
    double mdni = adni + 20.0 + rng.uniform(0.0, 80.0);
    double arh = 40.0 +
                 25.0 * std::sin(kPi * static_cast<double>(d) / 150.0 +
                                 climate.humidity_phase) +
                 rng.uniform(-10.0, 10.0);
    double ap = std::max(0.0, rng.uniform(-0.5, 1.0));
    s.days(d, 0) = adni;
    s.days(d, 1) = ap;
    s.days(d, 2) = arh;
    s.days(d, 3) = mdni;
    s.days(d, 4) = max_sur;
    s.days(d, 5) = min_sur;
    s.days(d, 6) = avg_sur;
  }
  return s;
}

/// Mid-season aggregates driving the planted yield response: mean weekly
/// minimum of MinSur and mean weekly average of ADNI over weeks 18-26.
struct MidSeason {
  double wmin = 0.0;
  double wirr = 0.0;
};

MidSeason mid_season(const WeatherSeries& s) {
  Matrix weekly = downsample(s, Granularity::weekly);
  MidSeason out;
  for (std::size_t w = 17; w <= 25; ++w) {
    out.wmin += weekly(w, static_cast<std::size_t>(WeatherVar::min_sur));
    out.wirr += weekly(w, static_cast<std::size_t>(WeatherVar::adni));
  }
  out.wmin /= 9.0;
  out.wirr /= 9.0;
  return out;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  SynthData out;

  const std::size_t loc_width = id_width(spec.locations);
  const std::size_t geno_width = id_width(spec.genotypes);

  // Per-location climates, then one weather series per (location, year).
  std::vector<LocationClimate> climates;
  for (std::size_t li = 0; li < spec.locations; ++li) {
    Rng rng(derive_seed(spec.seed, "location", li));
    climates.push_back({rng.uniform(13.0, 19.0), rng.uniform(-15.0, 15.0),
                        rng.uniform(0.0, 2.0 * kPi)});
  }
  std::vector<MidSeason> cells(spec.locations * spec.years);
  for (std::size_t li = 0; li < spec.locations; ++li) {
    std::string loc = padded("L", li, loc_width);
    for (std::size_t yi = 0; yi < spec.years; ++yi) {
      Rng rng(derive_seed(spec.seed, "weather", li * spec.years + yi));
      WeatherSeries s = make_series(loc, spec.first_year + static_cast<int>(yi),
                                    climates[li], rng);
      cells[li * spec.years + yi] = mid_season(s);
      out.weather.add(std::move(s));
    }
  }

  // Standardize the mid-season aggregates against this generation so the
  // yield effect sizes below are in known units regardless of climate draws.
  double m1 = 0.0, m2 = 0.0;
  for (const MidSeason& c : cells) {
    m1 += c.wmin;
    m2 += c.wirr;
  }
  m1 /= static_cast<double>(cells.size());
  m2 /= static_cast<double>(cells.size());
  double v1 = 0.0, v2 = 0.0;
  for (const MidSeason& c : cells) {
    v1 += (c.wmin - m1) * (c.wmin - m1);
    v2 += (c.wirr - m2) * (c.wirr - m2);
  }
  double sd1 = std::sqrt(v1 / static_cast<double>(cells.size()));
  double sd2 = std::sqrt(v2 / static_cast<double>(cells.size()));
  if (sd1 <= 0.0) sd1 = 1.0;  // single-cell degenerate specs
  if (sd2 <= 0.0) sd2 = 1.0;

  // Genotypes: maturity group spread evenly over 0..8, family = round robin.
  std::vector<int> geno_mg(spec.genotypes);
  std::vector<std::size_t> geno_family(spec.genotypes);
  for (std::size_t g = 0; g < spec.genotypes; ++g) {
    geno_mg[g] = static_cast<int>(g * 9 / spec.genotypes);
    geno_family[g] = g % spec.families;
  }

  // Block-structured correlation: 0.9 within a family, 0.1 across, plus
  // small symmetric noise; diagonal exactly 1.
  out.correlation.ids.resize(spec.genotypes);
  for (std::size_t g = 0; g < spec.genotypes; ++g)
    out.correlation.ids[g] = padded("G", g, geno_width);
  out.correlation.values = Matrix(spec.genotypes, spec.genotypes);
  Rng corr_rng(derive_seed(spec.seed, "correlation"));
  for (std::size_t i = 0; i < spec.genotypes; ++i) {
    out.correlation.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < spec.genotypes; ++j) {
      double base = geno_family[i] == geno_family[j] ? 0.9 : 0.1;
      double v = base + corr_rng.uniform(-0.05, 0.05);
      v = std::clamp(v, -1.0, 1.0);
      out.correlation.values(i, j) = v;
      out.correlation.values(j, i) = v;
    }
  }

  // Yields: base + MG trend + family effect + standardized weather response
  // (linear, quadratic and MG-interaction terms) + noise, floored at 1.
  Rng rec_rng(derive_seed(spec.seed, "records"));
  const double fam_mid = (static_cast<double>(spec.families) - 1.0) / 2.0;
  std::size_t counter = 0;
  const std::size_t rec_width = id_width(spec.record_count());
  for (std::size_t li = 0; li < spec.locations; ++li) {
    std::string loc = padded("L", li, loc_width);
    for (std::size_t yi = 0; yi < spec.years; ++yi) {
      const MidSeason& cell = cells[li * spec.years + yi];
      double z1 = (cell.wmin - m1) / sd1;
      double z2 = (cell.wirr - m2) / sd2;
      for (std::size_t t = 0; t < spec.trials_per_cell; ++t) {
        std::size_t g = rec_rng.uniform_index(spec.genotypes);
        double mg_c = static_cast<double>(geno_mg[g]) - 4.0;
        double fam = 3.0 * (static_cast<double>(geno_family[g]) - fam_mid);
        double y = 50.7 + 1.2 * mg_c + fam + 13.0 * z1 + 6.0 * z2 -
                   2.5 * (z1 * z1 - 1.0) + 1.5 * z1 * mg_c / 4.0 +
                   rec_rng.normal(0.0, 3.2);
        PerformanceRecord r;
        r.record_id = padded("R", counter++, rec_width);
        r.year = spec.first_year + static_cast<int>(yi);
        r.location_id = loc;
        r.genotype_id = out.correlation.ids[g];
        r.maturity_group = geno_mg[g];
        r.yield = std::max(1.0, y);
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SynthData& data) {
  std::filesystem::create_directories(dir);
  write_performance_csv(dir / "performance.csv", data.records);
  write_weather_csv(dir / "weather.csv", data.weather);
  write_correlation_csv(dir / "correlation.csv", data.correlation);
}

}  // namespace yatt

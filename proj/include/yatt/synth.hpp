#pragma once

#include <cstdint>
#include <filesystem>

#include "yatt/genotype.hpp"
#include "yatt/pipeline.hpp"

namespace yatt {

/// Synthetic trial-network layout: every (location, year) cell runs
/// `trials_per_cell` plots with randomly drawn genotypes.
struct SynthSpec {
  std::size_t locations = 25;
  std::size_t years = 8;
  std::size_t genotypes = 100;
  std::size_t trials_per_cell = 25;
  std::size_t families = 5;  // planted genotype clusters
  int first_year = 2003;
  std::uint64_t seed = 0;

  std::size_t record_count() const { return locations * years * trials_per_cell; }
  void validate() const;  // ConfigError on non-positive counts
};

struct SynthData {
  std::vector<PerformanceRecord> records;
  WeatherStore weather;
  CorrelationMatrix correlation;
};

/// Seasonal sinusoid weather with margins wide enough that CSV rounding can
/// never violate the physical invariants; genotype families with 0.9/0.1
/// block correlations; yield = base + maturity-group effect + family effect
/// + a nonlinear response to mid-season (weeks 18-26) MinSur/ADNI aggregates
/// + Gaussian noise, calibrated to mean ~50.7 and std ~16 bu/acre.
SynthData generate_synthetic(const SynthSpec& spec);

/// Writes performance.csv, weather.csv and correlation.csv into `dir` in the
/// exact ingestion formats; byte-identical for a fixed spec.
void write_synthetic(const std::filesystem::path& dir, const SynthData& data);

}  // namespace yatt

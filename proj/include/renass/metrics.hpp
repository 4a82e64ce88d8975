#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "renass/model.hpp"

namespace renass {

enum class TimeCounter : std::uint8_t { Operating, Standby, Corrective, Preventive };

/// Per-business tick counts. MUT = OT + ST, MDT = TCM + TPM.
struct TimeCounters {
  Tick ot = 0;
  Tick st = 0;
  Tick tcm = 0;
  Tick tpm = 0;

  Tick mut() const { return ot + st; }
  Tick mdt() const { return tcm + tpm; }
  Tick total() const { return mut() + mdt(); }
  void add(TimeCounter which, Tick n = 1);

  bool operator==(const TimeCounters&) const = default;
};

/// A0 = MUT / (MUT + MDT). Throws UndefinedMetricError when no time was observed.
double operational_availability(const TimeCounters& counters);

struct AvailabilityPoint {
  Tick tick = 0;
  std::vector<double> per_business;
  double system = 0.0;  // equal-weight mean of per_business

  bool operator==(const AvailabilityPoint&) const = default;
};

struct SimulationTrace;

/// Recomputes the availability curve from the trace's per-tick counter
/// accruals. `window == 0` gives cumulative A0 (counters from tick 1 through
/// t); otherwise each point covers the last `window` ticks.
std::vector<AvailabilityPoint> availability_series(const SimulationTrace& trace, Tick window = 0);

struct ComparisonReport {
  std::vector<Tick> ticks;
  std::vector<double> reconfig;
  std::vector<double> baseline;
  std::vector<double> gap;  // reconfig - baseline
  double min_gap = 0.0;
  double gap_trend = 0.0;  // mean gap over second half minus mean over first half

  bool operator==(const ComparisonReport&) const = default;
};

ComparisonReport compare(const SimulationTrace& reconfig, const SimulationTrace& baseline);
ComparisonReport compare_series(std::span<const double> reconfig, std::span<const double> baseline);

/// Second-half mean minus first-half mean; the middle element of an odd
/// series belongs to the second half. Zero for fewer than two points.
double gap_trend(std::span<const double> gap);

/// Mean comparison across replications plus per-tick standard errors.
struct ReplicatedComparison {
  ComparisonReport mean;
  std::vector<double> se_reconfig;
  std::vector<double> se_baseline;
  std::vector<double> se_gap;
  std::size_t replications = 0;
};

ReplicatedComparison aggregate(std::span<const ComparisonReport> reports);

}  // namespace renass

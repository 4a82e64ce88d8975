#include "renass/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "renass/engine.hpp"

namespace renass {

void TimeCounters::add(TimeCounter which, Tick n) {
  switch (which) {
    case TimeCounter::Operating: ot += n; break;
    case TimeCounter::Standby: st += n; break;
    case TimeCounter::Corrective: tcm += n; break;
    case TimeCounter::Preventive: tpm += n; break;
  }
}

double operational_availability(const TimeCounters& c) {
  const auto total = c.total();
  if (total == 0) throw UndefinedMetricError("operational availability undefined: no time observed");
  return static_cast<double>(c.mut()) / static_cast<double>(total);
}

std::vector<AvailabilityPoint> availability_series(const SimulationTrace& trace, Tick window) {
  const auto nb = trace.business_ids.size();
  if (nb == 0 || trace.accruals.empty()) throw UndefinedMetricError("empty trace has no availability series");
  const Tick ticks = trace.accruals.size() / nb;

  std::vector<AvailabilityPoint> out;
  out.reserve(ticks);
  std::vector<TimeCounters> running(nb);
  std::vector<TimeCounters> expired(nb);  // accruals that fell out of the window
  for (Tick t = 1; t <= ticks; ++t) {
    AvailabilityPoint p;
    p.tick = t;
    p.per_business.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      running[b].add(trace.accrual(t, b));
      if (window > 0 && t > window) expired[b].add(trace.accrual(t - window, b));
      const auto& c = running[b];
      const auto& e = expired[b];
      p.per_business[b] = operational_availability({c.ot - e.ot, c.st - e.st, c.tcm - e.tcm, c.tpm - e.tpm});
    }
    p.system = std::accumulate(p.per_business.begin(), p.per_business.end(), 0.0) / static_cast<double>(nb);
    out.push_back(std::move(p));
  }
  return out;
}

double gap_trend(std::span<const double> gap) {
  const auto n = gap.size();
  if (n < 2) return 0.0;
  const auto half = n / 2;
  const double first = std::accumulate(gap.begin(), gap.begin() + half, 0.0) / static_cast<double>(half);
  const double second = std::accumulate(gap.begin() + half, gap.end(), 0.0) / static_cast<double>(n - half);
  return second - first;
}

ComparisonReport compare_series(std::span<const double> reconfig, std::span<const double> baseline) {
  if (reconfig.size() != baseline.size())
    throw ShapeError("series lengths differ: " + std::to_string(reconfig.size()) + " vs " +
                     std::to_string(baseline.size()));
  if (reconfig.empty()) throw ShapeError("cannot compare empty series");
  ComparisonReport r;
  const auto n = reconfig.size();
  r.ticks.resize(n);
  std::iota(r.ticks.begin(), r.ticks.end(), Tick{1});
  r.reconfig.assign(reconfig.begin(), reconfig.end());
  r.baseline.assign(baseline.begin(), baseline.end());
  r.gap.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.gap[i] = reconfig[i] - baseline[i];
  r.min_gap = *std::min_element(r.gap.begin(), r.gap.end());
  r.gap_trend = gap_trend(r.gap);
  return r;
}

namespace {

std::vector<double> system_series(const SimulationTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) out.push_back(s.system);
  return out;
}

}  // namespace

ComparisonReport compare(const SimulationTrace& reconfig, const SimulationTrace& baseline) {
  if (reconfig.samples.size() != baseline.samples.size())
    throw ShapeError("horizons differ: " + std::to_string(reconfig.samples.size()) + " vs " +
                     std::to_string(baseline.samples.size()));
  if (reconfig.business_ids != baseline.business_ids) throw ShapeError("business ids differ between traces");
  return compare_series(system_series(reconfig), system_series(baseline));
}

ReplicatedComparison aggregate(std::span<const ComparisonReport> reports) {
  if (reports.empty()) throw ShapeError("no replications to aggregate");
  const auto n = reports.front().gap.size();
  for (const auto& r : reports)
    if (r.gap.size() != n) throw ShapeError("replications have different horizons");

  const auto k = static_cast<double>(reports.size());
  auto mean_and_se = [&](auto member, std::vector<double>& mean, std::vector<double>& se) {
    mean.assign(n, 0.0);
    se.assign(n, 0.0);
    for (const auto& r : reports)
      for (std::size_t i = 0; i < n; ++i) mean[i] += (r.*member)[i];
    for (auto& m : mean) m /= k;
    if (reports.size() < 2) return;
    for (const auto& r : reports)
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (r.*member)[i] - mean[i];
        se[i] += d * d;
      }
    for (auto& s : se) s = std::sqrt(s / (k - 1.0) / k);
  };

  ReplicatedComparison out;
  out.replications = reports.size();
  std::vector<double> mean_r, mean_b, mean_g;
  mean_and_se(&ComparisonReport::reconfig, mean_r, out.se_reconfig);
  mean_and_se(&ComparisonReport::baseline, mean_b, out.se_baseline);
  mean_and_se(&ComparisonReport::gap, mean_g, out.se_gap);
  out.mean = compare_series(mean_r, mean_b);
  return out;
}

}  // namespace renass

#pragma once

#include <vector>

#include "renass/engine.hpp"
#include "renass/model.hpp"

namespace renass {

/// Exact transient availability for small, non-repairable models with
/// hot-standby substitutes.
struct SmallModelBound {
  std::size_t max_agents = 12;
  std::size_t max_services = 4;
};

/// An original agent and its ordered substitutes.
struct Slot {
  AgentId original;
  std::vector<AgentId> substitutes;
};

/// Probability that at least one slot member is still Normal at tick t:
/// 1 - prod(1 - r_m^t). Throws UnsupportedConfigError when a member repairs.
double exact_slot_availability(const Slot& slot, Tick t, const SystemModel& model);

/// Expected cumulative system A0 at `ticks`. Requires duty cycle 1, no
/// repair, and slots that are independent: substitute pools of different
/// originals are disjoint and no service closure touches one agent through
/// two slots.
double exact_expected_availability(const SystemModel& model, Tick ticks, bool reconfig = true,
                                   SmallModelBound bound = {});

/// As above, taking horizon, reconfiguration flag and reliability override
/// from `params`. Maintenance schedules are rejected.
double exact_expected_availability(const SystemModel& model, const SimParams& params, SmallModelBound bound = {});

/// Second oracle: enumerates every per-agent failure tick (or survival),
/// replays first-fit substitution on each path and averages A0 weighted by
/// the path probability. Limited to 6 agents, 10 ticks and businesses
/// that each use a single service.
double brute_force_availability(const SystemModel& model, Tick ticks, bool reconfig = true);

/// Monte Carlo estimate of the final cumulative system A0 against the
/// exact oracle.
struct OracleCheck {
  double oracle = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
  double z = 0.0;

  bool passed(double max_abs_z = 3.0) const;
};

OracleCheck oracle_check(const SystemModel& model, const SimParams& params, unsigned threads = 0,
                         SmallModelBound bound = {});

}  // namespace renass

#include "renass/oracle.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace renass {

namespace {

double survival(const SystemModel& model, AgentId id, Tick t) {
  if (model.repair_ticks(id)) throw UnsupportedConfigError(to_string(id) + " has repair configured");
  if (model.initial_status(id) == AgentStatus::Failed) return 0.0;
  return std::pow(model.reliability(id), static_cast<double>(t));
}

std::set<AgentId> critical_agents(const SystemModel& model) {
  std::set<AgentId> out;
  for (const auto& b : model.businesses)
    if (b.critical)
      for (auto sid : b.services)
        for (const auto& id : support_closure(sid, model)) out.insert(id);
  return out;
}

// Substitute rules that actually take effect: the agent has a rule and
// serves a critical business.
std::map<AgentId, std::vector<AgentId>> effective_rules(const SystemModel& model, bool reconfig) {
  std::map<AgentId, std::vector<AgentId>> out;
  if (!reconfig) return out;
  const auto critical = critical_agents(model);
  for (const auto& r : model.reconfig.rules)
    if (critical.contains(r.failed)) out.emplace(r.failed, r.substitutes);
  return out;
}

void require_valid(const SystemModel& model) {
  if (auto report = validate(model); !report.empty()) throw ValidationError(std::move(report));
}

void require_supported(const SystemModel& model) {
  for (const auto& b : model.businesses)
    if (b.duty_cycle != 1.0)
      throw UnsupportedConfigError("business " + std::to_string(b.id) + " has duty cycle below 1");
  for (const auto& c : model.components)
    if (c.repair_ticks) throw UnsupportedConfigError(to_string(c.id) + " has repair configured");
  for (const auto& c : model.connectors)
    if (c.repair_ticks) throw UnsupportedConfigError(to_string(c.id) + " has repair configured");
}

}  // namespace

double exact_slot_availability(const Slot& slot, Tick t, const SystemModel& model) {
  double all_down = 1.0 - survival(model, slot.original, t);
  for (const auto& s : slot.substitutes) all_down *= 1.0 - survival(model, s, t);
  return 1.0 - all_down;
}

double exact_expected_availability(const SystemModel& model, Tick ticks, bool reconfig, SmallModelBound bound) {
  if (ticks == 0) throw UndefinedMetricError("availability undefined over an empty horizon");
  if (model.agent_count() > bound.max_agents)
    throw SizeError("model has " + std::to_string(model.agent_count()) + " agents, oracle limit is " +
                    std::to_string(bound.max_agents));
  if (model.services.size() > bound.max_services)
    throw SizeError("model has " + std::to_string(model.services.size()) + " services, oracle limit is " +
                    std::to_string(bound.max_services));
  require_valid(model);
  require_supported(model);

  const auto rules = effective_rules(model, reconfig);
  std::map<AgentId, AgentId> pool_owner;
  for (const auto& [original, subs] : rules)
    for (const auto& s : subs)
      if (auto [it, inserted] = pool_owner.emplace(s, original); !inserted)
        throw UnsupportedConfigError("substitute " + to_string(s) + " is shared by " + to_string(it->second) +
                                     " and " + to_string(original));

  std::map<std::uint32_t, std::vector<Slot>> service_slots;
  for (const auto& svc : model.services) {
    std::vector<Slot> slots;
    std::set<AgentId> members;
    for (const auto& a : support_closure(svc, model)) {
      Slot slot{a, {}};
      if (auto it = rules.find(a); it != rules.end()) slot.substitutes = it->second;
      for (const auto& m : slot.substitutes)
        if (!members.insert(m).second)
          throw UnsupportedConfigError("service " + std::to_string(svc.id) + " depends on " + to_string(m) +
                                       " through more than one slot");
      if (!members.insert(a).second)
        throw UnsupportedConfigError("service " + std::to_string(svc.id) + " depends on " + to_string(a) +
                                     " through more than one slot");
      slots.push_back(std::move(slot));
    }
    service_slots.emplace(svc.id, std::move(slots));
  }

  double total = 0.0;
  for (const auto& b : model.businesses) {
    const auto n = b.services.size();
    std::vector<double> dist(n, 1.0 / static_cast<double>(n));
    double business_sum = 0.0;
    for (Tick t = 1; t <= ticks; ++t) {
      double up = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (dist[j] == 0.0) continue;
        double q = 1.0;
        for (const auto& slot : service_slots.at(b.services[j])) q *= exact_slot_availability(slot, t, model);
        up += dist[j] * q;
      }
      business_sum += up;
      std::vector<double> next(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) next[j] += dist[i] * b.transition[i][j];
      dist = std::move(next);
    }
    total += business_sum / static_cast<double>(ticks);
  }
  return total / static_cast<double>(model.businesses.size());
}

double exact_expected_availability(const SystemModel& model, const SimParams& params, SmallModelBound bound) {
  if (!params.pm_schedule.empty()) throw UnsupportedConfigError("preventive maintenance is outside the oracle domain");
  if (!params.reliability_override) return exact_expected_availability(model, params.ticks, params.reconfig_enabled, bound);
  SystemModel copy = model;
  for (auto& c : copy.components) c.reliability = *params.reliability_override;
  for (auto& c : copy.connectors) c.reliability = *params.reliability_override;
  return exact_expected_availability(copy, params.ticks, params.reconfig_enabled, bound);
}

double brute_force_availability(const SystemModel& model, Tick ticks, bool reconfig) {
  if (ticks == 0) throw UndefinedMetricError("availability undefined over an empty horizon");
  if (model.agent_count() > 6) throw SizeError("path enumeration is limited to 6 agents");
  if (ticks > 10) throw SizeError("path enumeration is limited to 10 ticks");
  require_valid(model);
  require_supported(model);
  for (const auto& b : model.businesses)
    if (b.services.size() != 1)
      throw SizeError("path enumeration needs a single service per business (business " + std::to_string(b.id) + ")");

  const AgentIndex index(model);
  const auto n = index.size();
  // Per-agent outcomes: fails at tick k in [1, ticks], or survives (ticks + 1).
  // Initially failed agents are modelled as failing at tick 0.
  std::vector<std::vector<std::pair<Tick, double>>> outcomes(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto id = index.id(s);
    if (model.initial_status(id) == AgentStatus::Failed) {
      outcomes[s].push_back({0, 1.0});
      continue;
    }
    const double r = model.reliability(id);
    for (Tick k = 1; k <= ticks; ++k) {
      const double p = std::pow(r, static_cast<double>(k - 1)) * (1.0 - r);
      if (p > 0.0) outcomes[s].push_back({k, p});
    }
    outcomes[s].push_back({ticks + 1, std::pow(r, static_cast<double>(ticks))});
  }

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> rules;  // slot -> substitute slots
  for (const auto& [original, subs] : effective_rules(model, reconfig)) {
    std::vector<std::size_t> sub_slots;
    for (const auto& s : subs) sub_slots.push_back(index.slot(s));
    rules.emplace_back(index.slot(original), std::move(sub_slots));
  }
  std::vector<std::vector<std::size_t>> closures;
  for (const auto& b : model.businesses) {
    std::vector<std::size_t> c;
    for (const auto& id : support_closure(b.services.front(), model)) c.push_back(index.slot(id));
    closures.push_back(std::move(c));
  }

  constexpr std::size_t kUnbound = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> choice(n, 0);
  std::vector<Tick> fail_at(n);
  std::vector<std::size_t> bound_to(n);
  std::vector<std::size_t> held_by(n);
  double expected = 0.0;
  while (true) {
    double prob = 1.0;
    for (std::size_t s = 0; s < n; ++s) {
      fail_at[s] = outcomes[s][choice[s]].first;
      prob *= outcomes[s][choice[s]].second;
    }

    std::fill(bound_to.begin(), bound_to.end(), kUnbound);
    std::fill(held_by.begin(), held_by.end(), kUnbound);
    double a0_sum = 0.0;
    std::vector<Tick> up_ticks(closures.size(), 0);
    for (Tick t = 1; t <= ticks; ++t) {
      auto failed = [&](std::size_t s) { return fail_at[s] <= t; };
      for (const auto& [orig, subs] : rules) {
        const auto b = bound_to[orig];
        if (b != kUnbound && (!failed(orig) || failed(b))) {
          held_by[b] = kUnbound;
          bound_to[orig] = kUnbound;
        }
      }
      for (const auto& [orig, subs] : rules) {
        if (!failed(orig) || bound_to[orig] != kUnbound) continue;
        for (auto s : subs) {
          if (failed(s) || held_by[s] != kUnbound) continue;
          bound_to[orig] = s;
          held_by[s] = orig;
          break;
        }
      }
      for (std::size_t b = 0; b < closures.size(); ++b) {
        bool up = true;
        for (auto a : closures[b]) {
          const auto effective = bound_to[a] == kUnbound ? a : bound_to[a];
          up = up && !failed(effective);
        }
        if (up) ++up_ticks[b];
      }
    }
    for (auto u : up_ticks) a0_sum += static_cast<double>(u) / static_cast<double>(ticks);
    expected += prob * a0_sum / static_cast<double>(closures.size());

    std::size_t pos = 0;
    while (pos < n && ++choice[pos] == outcomes[pos].size()) choice[pos++] = 0;
    if (pos == n) break;
  }
  return expected;
}

bool OracleCheck::passed(double max_abs_z) const { return std::abs(z) <= max_abs_z; }

OracleCheck oracle_check(const SystemModel& model, const SimParams& params, unsigned threads, SmallModelBound bound) {
  OracleCheck out;
  out.oracle = exact_expected_availability(model, params, bound);
  out.replications = params.replications;
  std::vector<double> finals(params.replications);
  for_each_replication(params, params.replications, threads, [&](std::size_t i, const SimParams& p) {
    finals[i] = run(model, p).samples.back().system;
  });
  const auto n = static_cast<double>(finals.size());
  double mean = 0.0;
  for (double v : finals) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : finals) ss += (v - mean) * (v - mean);
  out.estimate = mean;
  out.std_error = finals.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  const double diff = out.estimate - out.oracle;
  if (out.std_error > 0.0)
    out.z = diff / out.std_error;
  else
    out.z = std::abs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return out;
}

}  // namespace renass

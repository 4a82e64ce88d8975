#include "renass/reconfig.hpp"

#include <set>
#include <stdexcept>

namespace renass {

void BindingTable::bind(AgentId original, AgentId substitute) {
  if (substitute == original) {
    unbind(original);
    return;
  }
  if (auto holder = occupant(substitute); holder && *holder != original)
    throw std::logic_error(to_string(substitute) + " already substitutes for " + to_string(*holder));
  unbind(original);
  forward_[original] = substitute;
  reverse_[substitute] = original;
}

void BindingTable::unbind(AgentId original) {
  auto it = forward_.find(original);
  if (it == forward_.end()) return;
  reverse_.erase(it->second);
  forward_.erase(it);
}

namespace {

std::set<AgentId> critical_closure(const SystemModel& model) {
  std::set<AgentId> out;
  for (const auto& b : model.businesses) {
    if (!b.critical) continue;
    for (auto sid : b.services)
      for (const auto& id : support_closure(sid, model)) out.insert(id);
  }
  return out;
}

}  // namespace

bool is_reconfigurable(AgentId agent, const SystemModel& model) {
  if (!model.contains(agent)) throw LookupError("unknown agent " + to_string(agent));
  return model.rule_for(agent) != nullptr && critical_closure(model).contains(agent);
}

std::optional<AgentId> find_substitute(const ReconfigRule& rule, const BindingTable& bindings,
                                       const StatusView& statuses) {
  for (const auto& s : rule.substitutes) {
    if (statuses.status(s) != AgentStatus::Normal) continue;
    if (auto holder = bindings.occupant(s); holder && *holder != rule.failed) continue;
    return s;
  }
  return std::nullopt;
}

std::optional<AgentId> find_substitute(AgentId failed, const ReconfigModel& reconfig, const BindingTable& bindings,
                                       const StatusView& statuses) {
  for (const auto& r : reconfig.rules)
    if (r.failed == failed) return find_substitute(r, bindings, statuses);
  throw RuleMissingError("no reconfiguration rule for " + to_string(failed));
}

Reconfigurator::Reconfigurator(const SystemModel& model) {
  const auto critical = critical_closure(model);
  for (const auto& r : model.reconfig.rules) {
    if (!critical.contains(r.failed)) continue;
    rules_.emplace(r.failed, r);
  }
  for (const auto& [id, _] : rules_) reconfigurable_.push_back(id);
}

bool Reconfigurator::is_reconfigurable(AgentId agent) const { return rules_.contains(agent); }

const ReconfigRule* Reconfigurator::rule(AgentId failed) const {
  auto it = rules_.find(failed);
  return it == rules_.end() ? nullptr : &it->second;
}

std::vector<SubstitutionEvent> Reconfigurator::apply(Tick tick, BindingTable& bindings,
                                                     const StatusView& statuses) const {
  std::vector<SubstitutionEvent> events;

  // Copy: unbinding invalidates iterators.
  const auto current = bindings.entries();
  for (const auto& [original, substitute] : current) {
    if (statuses.status(original) == AgentStatus::Normal || statuses.status(substitute) == AgentStatus::Failed) {
      bindings.unbind(original);
      events.push_back({tick, original, substitute, original});
    }
  }

  for (const auto& [original, rule] : rules_) {
    if (statuses.status(original) != AgentStatus::Failed || bindings.bound(original) != original) continue;
    if (auto s = find_substitute(rule, bindings, statuses)) {
      bindings.bind(original, *s);
      events.push_back({tick, original, original, *s});
    }
  }
  return events;
}

std::vector<SubstitutionEvent> apply_reconfiguration(Tick tick, const SystemModel& model, BindingTable& bindings,
                                                     const StatusView& statuses) {
  return Reconfigurator(model).apply(tick, bindings, statuses);
}

}  // namespace renass

#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "renass/model.hpp"

namespace renass {

/// Read-only per-agent status, optionally with preventive-maintenance flags.
class StatusView {
 public:
  StatusView(const AgentIndex& index, std::span<const AgentStatus> statuses,
             std::span<const std::uint8_t> maintenance = {})
      : index_(&index), statuses_(statuses), maintenance_(maintenance) {}

  AgentStatus status(AgentId id) const { return statuses_[index_->slot(id)]; }
  bool in_maintenance(AgentId id) const {
    return !maintenance_.empty() && maintenance_[index_->slot(id)] != 0;
  }
  bool available(AgentId id) const {
    const auto s = index_->slot(id);
    return statuses_[s] == AgentStatus::Normal && (maintenance_.empty() || maintenance_[s] == 0);
  }

 private:
  const AgentIndex* index_;
  std::span<const AgentStatus> statuses_;
  std::span<const std::uint8_t> maintenance_;
};

/// Original -> currently bound substitute. Unlisted agents are bound to
/// themselves. A substitute serves at most one original at a time.
class BindingTable {
 public:
  AgentId bound(AgentId original) const {
    auto it = forward_.find(original);
    return it == forward_.end() ? original : it->second;
  }
  std::optional<AgentId> occupant(AgentId substitute) const {
    auto it = reverse_.find(substitute);
    if (it == reverse_.end()) return std::nullopt;
    return it->second;
  }

  /// Throws std::logic_error if `substitute` already serves another original.
  void bind(AgentId original, AgentId substitute);
  void unbind(AgentId original);

  bool empty() const { return forward_.empty(); }
  std::size_t size() const { return forward_.size(); }
  const std::map<AgentId, AgentId>& entries() const { return forward_; }

  bool operator==(const BindingTable&) const = default;

 private:
  std::map<AgentId, AgentId> forward_;
  std::map<AgentId, AgentId> reverse_;
};

struct SubstitutionEvent {
  Tick tick = 0;
  AgentId original;
  AgentId old_binding;
  AgentId new_binding;

  bool operator==(const SubstitutionEvent&) const = default;
};

/// True iff a rule exists for `agent` and the agent lies in the support
/// closure of some service used by a critical business.
bool is_reconfigurable(AgentId agent, const SystemModel& model);

/// First substitute in rule order that is Normal and not serving another
/// original, or nullopt when the pool is exhausted.
std::optional<AgentId> find_substitute(const ReconfigRule& rule, const BindingTable& bindings,
                                       const StatusView& statuses);
std::optional<AgentId> find_substitute(AgentId failed, const ReconfigModel& reconfig,
                                       const BindingTable& bindings, const StatusView& statuses);

/// Precomputed rule table for one model. `apply` first reverts bindings
/// whose original is Normal again and releases substitutes that failed, then
/// binds a substitute to every failed reconfigurable agent that has none.
/// Both passes visit agents in ascending id order.
class Reconfigurator {
 public:
  Reconfigurator() = default;
  explicit Reconfigurator(const SystemModel& model);

  bool is_reconfigurable(AgentId agent) const;
  const std::vector<AgentId>& reconfigurable() const { return reconfigurable_; }
  const ReconfigRule* rule(AgentId failed) const;

  std::vector<SubstitutionEvent> apply(Tick tick, BindingTable& bindings, const StatusView& statuses) const;

 private:
  std::map<AgentId, ReconfigRule> rules_;
  std::vector<AgentId> reconfigurable_;
};

std::vector<SubstitutionEvent> apply_reconfiguration(Tick tick, const SystemModel& model, BindingTable& bindings,
                                                     const StatusView& statuses);

}  // namespace renass

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "renass/errors.hpp"

namespace renass {

using Tick = std::uint64_t;

enum class AgentKind : std::uint8_t { Component, Connector };

/// Identifies a component or connector. Ordering is by kind (components
/// first), then index; every "ascending id" traversal uses this order.
struct AgentId {
  AgentKind kind = AgentKind::Component;
  std::uint32_t index = 0;

  auto operator<=>(const AgentId&) const = default;
};

constexpr AgentId component_id(std::uint32_t index) { return {AgentKind::Component, index}; }
constexpr AgentId connector_id(std::uint32_t index) { return {AgentKind::Connector, index}; }

std::string to_string(AgentId id);
std::string to_string(AgentKind kind);

enum class AgentStatus : std::uint8_t { Normal, Failed };

enum class AgentAction : std::uint8_t { Fail, Recover, SubstituteIn, SubstituteOut };

/// The full action alphabet shared by component and connector agents.
inline constexpr std::array<AgentAction, 4> kAgentActions = {
    AgentAction::Fail, AgentAction::Recover, AgentAction::SubstituteIn, AgentAction::SubstituteOut};

/// Declarative stand-in for the cognitive parts of a component agent. The
/// only executable semantics live in the reconfiguration rule table.
struct BehaviorProfile {
  std::vector<AgentId> knowledge;  // failed-ids of the rules relevant to this agent
  std::vector<AgentId> plan;       // substitute preference
  bool critical = false;

  bool operator==(const BehaviorProfile&) const = default;
};

struct ComponentAgent {
  AgentId id;
  double reliability = 1.0;  // per-tick survival probability
  AgentStatus status = AgentStatus::Normal;
  std::optional<Tick> repair_ticks;  // nullopt: never repaired
  BehaviorProfile behavior;

  bool operator==(const ComponentAgent&) const = default;
};

struct ConnectorAgent {
  AgentId id{AgentKind::Connector, 0};
  double reliability = 1.0;
  AgentStatus status = AgentStatus::Normal;
  AgentId source;
  AgentId target;
  std::vector<AgentId> plan;
  std::optional<Tick> repair_ticks;

  bool operator==(const ConnectorAgent&) const = default;
};

struct ServiceAgent {
  std::uint32_t id = 0;
  std::vector<AgentId> support;

  bool operator==(const ServiceAgent&) const = default;
};

struct BusinessAgent {
  std::uint32_t id = 0;
  double duty_cycle = 1.0;
  // Row i gives the branch probabilities after calling services[i].
  std::vector<std::vector<double>> transition;
  std::vector<std::uint32_t> services;
  bool critical = false;

  bool operator==(const BusinessAgent&) const = default;
};

struct ReconfigRule {
  AgentId failed;
  std::vector<AgentId> substitutes;  // preference order

  bool operator==(const ReconfigRule&) const = default;
};

enum class RulePolicy : std::uint8_t { FirstFit };
enum class Coordination : std::uint8_t { PriorityOrder };

struct ReconfigModel {
  std::uint32_t id = 0;
  std::vector<ReconfigRule> rules;
  RulePolicy policy = RulePolicy::FirstFit;
  Coordination strategy = Coordination::PriorityOrder;

  bool operator==(const ReconfigModel&) const = default;
};

struct SystemModel {
  std::vector<ComponentAgent> components;
  std::vector<ConnectorAgent> connectors;
  std::vector<ServiceAgent> services;
  std::vector<BusinessAgent> businesses;
  ReconfigModel reconfig;

  bool operator==(const SystemModel&) const = default;

  std::size_t agent_count() const { return components.size() + connectors.size(); }
  bool contains(AgentId id) const;
  double reliability(AgentId id) const;
  std::optional<Tick> repair_ticks(AgentId id) const;
  AgentStatus initial_status(AgentId id) const;
  const ConnectorAgent& connector(AgentId id) const;
  const ServiceAgent& service(std::uint32_t id) const;
  const BusinessAgent& business(std::uint32_t id) const;
  const ReconfigRule* rule_for(AgentId failed) const;
};

/// Checks every structural invariant. Violations are returned, not thrown.
ValidationReport validate(const SystemModel& model);

/// The service's declared agents plus both endpoints of each declared
/// connector, sorted ascending and deduplicated.
std::vector<AgentId> support_closure(const ServiceAgent& service, const SystemModel& model);
std::vector<AgentId> support_closure(std::uint32_t service_id, const SystemModel& model);

/// Dense slot numbering of all agents in ascending id order.
class AgentIndex {
 public:
  AgentIndex() = default;
  explicit AgentIndex(const SystemModel& model);

  std::size_t size() const { return ids_.size(); }
  std::optional<std::size_t> find(AgentId id) const;
  std::size_t slot(AgentId id) const;
  AgentId id(std::size_t slot) const { return ids_[slot]; }
  const std::vector<AgentId>& ids() const { return ids_; }

 private:
  std::vector<AgentId> ids_;
};

}  // namespace renass

#include "renass/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace renass {

ValidationError::ValidationError(ValidationReport report)
    : Error([&] {
        std::ostringstream msg;
        msg << "invalid model (" << report.size() << " violation" << (report.size() == 1 ? "" : "s") << ")";
        for (const auto& v : report) msg << "\n  " << v.path << ": " << v.message;
        return msg.str();
      }()),
      report_(std::move(report)) {}

std::string to_string(AgentKind kind) {
  return kind == AgentKind::Component ? "component" : "connector";
}

std::string to_string(AgentId id) { return to_string(id.kind) + ":" + std::to_string(id.index); }

namespace {

template <typename Agent>
const Agent* find_agent(const std::vector<Agent>& agents, AgentId id) {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

}  // namespace

bool SystemModel::contains(AgentId id) const {
  return id.kind == AgentKind::Component ? find_agent(components, id) != nullptr
                                         : find_agent(connectors, id) != nullptr;
}

double SystemModel::reliability(AgentId id) const {
  if (id.kind == AgentKind::Component) {
    if (const auto* c = find_agent(components, id)) return c->reliability;
  } else if (const auto* c = find_agent(connectors, id)) {
    return c->reliability;
  }
  throw LookupError("unknown agent " + to_string(id));
}

std::optional<Tick> SystemModel::repair_ticks(AgentId id) const {
  if (id.kind == AgentKind::Component) {
    if (const auto* c = find_agent(components, id)) return c->repair_ticks;
  } else if (const auto* c = find_agent(connectors, id)) {
    return c->repair_ticks;
  }
  throw LookupError("unknown agent " + to_string(id));
}

AgentStatus SystemModel::initial_status(AgentId id) const {
  if (id.kind == AgentKind::Component) {
    if (const auto* c = find_agent(components, id)) return c->status;
  } else if (const auto* c = find_agent(connectors, id)) {
    return c->status;
  }
  throw LookupError("unknown agent " + to_string(id));
}

const ConnectorAgent& SystemModel::connector(AgentId id) const {
  if (const auto* c = find_agent(connectors, id)) return *c;
  throw LookupError("unknown connector " + to_string(id));
}

const ServiceAgent& SystemModel::service(std::uint32_t id) const {
  for (const auto& s : services)
    if (s.id == id) return s;
  throw LookupError("unknown service " + std::to_string(id));
}

const BusinessAgent& SystemModel::business(std::uint32_t id) const {
  for (const auto& b : businesses)
    if (b.id == id) return b;
  throw LookupError("unknown business " + std::to_string(id));
}

const ReconfigRule* SystemModel::rule_for(AgentId failed) const {
  for (const auto& r : reconfig.rules)
    if (r.failed == failed) return &r;
  return nullptr;
}

namespace {

class Validator {
 public:
  explicit Validator(const SystemModel& model) : model_(model) {
    for (const auto& c : model.components) agents_.insert(c.id);
    for (const auto& c : model.connectors) agents_.insert(c.id);
    for (const auto& s : model.services) services_.insert(s.id);
    for (const auto& r : model.reconfig.rules) rules_.insert(r.failed);
  }

  ValidationReport run() {
    check_components();
    check_connectors();
    check_services();
    check_businesses();
    check_rules();
    return std::move(report_);
  }

 private:
  void add(std::string path, std::string message) {
    report_.push_back({std::move(path), std::move(message)});
  }

  static std::string at(const std::string& list, std::size_t i) {
    return list + "[" + std::to_string(i) + "]";
  }

  void check_reliability(const std::string& path, double r) {
    if (!(r > 0.0 && r <= 1.0)) add(path + ".reliability", "must lie in (0, 1], got " + std::to_string(r));
  }

  void check_repair(const std::string& path, const std::optional<Tick>& repair) {
    if (repair && *repair == 0) add(path + ".repair_ticks", "must be positive or infinite");
  }

  void check_ref(const std::string& path, AgentId id) {
    if (!agents_.contains(id)) add(path, "unknown agent " + to_string(id));
  }

  void check_plan(const std::string& path, AgentId owner, const std::vector<AgentId>& plan) {
    for (std::size_t j = 0; j < plan.size(); ++j) {
      check_ref(at(path, j), plan[j]);
      if (plan[j].kind != owner.kind) add(at(path, j), "plan entry must be a " + to_string(owner.kind));
    }
  }

  void check_components() {
    std::set<std::uint32_t> seen;
    for (std::size_t i = 0; i < model_.components.size(); ++i) {
      const auto& c = model_.components[i];
      const auto path = at("components", i);
      if (c.id.kind != AgentKind::Component) add(path + ".id", "must be a component id");
      if (!seen.insert(c.id.index).second) add(path + ".id", "duplicate component id " + std::to_string(c.id.index));
      check_reliability(path, c.reliability);
      check_repair(path, c.repair_ticks);
      for (std::size_t j = 0; j < c.behavior.knowledge.size(); ++j) {
        const auto& k = c.behavior.knowledge[j];
        if (!rules_.contains(k)) add(at(path + ".behavior.knowledge", j), "no rule for " + to_string(k));
      }
      check_plan(path + ".behavior.plan", c.id, c.behavior.plan);
    }
  }

  void check_connectors() {
    std::set<std::uint32_t> seen;
    for (std::size_t i = 0; i < model_.connectors.size(); ++i) {
      const auto& c = model_.connectors[i];
      const auto path = at("connectors", i);
      if (c.id.kind != AgentKind::Connector) add(path + ".id", "must be a connector id");
      if (!seen.insert(c.id.index).second) add(path + ".id", "duplicate connector id " + std::to_string(c.id.index));
      check_reliability(path, c.reliability);
      check_repair(path, c.repair_ticks);
      for (const auto& [name, end] : {std::pair{".source", c.source}, std::pair{".target", c.target}}) {
        if (end.kind != AgentKind::Component)
          add(path + name, "endpoint must be a component");
        else
          check_ref(path + name, end);
      }
      if (c.source == c.target) add(path, "source and target must differ");
      check_plan(path + ".plan", c.id, c.plan);
    }
  }

  void check_services() {
    std::set<std::uint32_t> seen;
    for (std::size_t i = 0; i < model_.services.size(); ++i) {
      const auto& s = model_.services[i];
      const auto path = at("services", i);
      if (!seen.insert(s.id).second) add(path + ".id", "duplicate service id " + std::to_string(s.id));
      if (s.support.empty()) add(path + ".support", "must not be empty");
      for (std::size_t j = 0; j < s.support.size(); ++j) check_ref(at(path + ".support", j), s.support[j]);
    }
  }

  void check_businesses() {
    if (model_.businesses.empty()) add("businesses", "model needs at least one business");
    std::set<std::uint32_t> seen;
    for (std::size_t i = 0; i < model_.businesses.size(); ++i) {
      const auto& b = model_.businesses[i];
      const auto path = at("businesses", i);
      if (!seen.insert(b.id).second) add(path + ".id", "duplicate business id " + std::to_string(b.id));
      if (!(b.duty_cycle >= 0.0 && b.duty_cycle <= 1.0)) add(path + ".duty_cycle", "must lie in [0, 1]");
      if (b.services.empty()) add(path + ".services", "must not be empty");
      for (std::size_t j = 0; j < b.services.size(); ++j)
        if (!services_.contains(b.services[j]))
          add(at(path + ".services", j), "unknown service " + std::to_string(b.services[j]));
      const auto n = b.services.size();
      if (b.transition.size() != n) {
        add(path + ".transition", "expected " + std::to_string(n) + " rows, got " + std::to_string(b.transition.size()));
        continue;
      }
      for (std::size_t r = 0; r < n; ++r) {
        const auto& row = b.transition[r];
        const auto rpath = at(path + ".transition", r);
        if (row.size() != n) {
          add(rpath, "expected " + std::to_string(n) + " entries, got " + std::to_string(row.size()));
          continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (double p : row) {
          negative = negative || !(p >= 0.0);
          sum += p;
        }
        if (negative) add(rpath, "entries must be non-negative");
        if (!(std::abs(sum - 1.0) <= 1e-9)) add(rpath, "row sums to " + std::to_string(sum) + ", expected 1");
      }
    }
  }

  void check_rules() {
    std::set<AgentId> failed_seen;
    for (std::size_t i = 0; i < model_.reconfig.rules.size(); ++i) {
      const auto& r = model_.reconfig.rules[i];
      const auto path = at("reconfig.rules", i);
      check_ref(path + ".failed", r.failed);
      if (!failed_seen.insert(r.failed).second) add(path + ".failed", "more than one rule for " + to_string(r.failed));
      if (r.substitutes.empty()) add(path + ".substitutes", "must not be empty");
      std::set<AgentId> subs;
      for (std::size_t j = 0; j < r.substitutes.size(); ++j) {
        const auto& s = r.substitutes[j];
        const auto spath = at(path + ".substitutes", j);
        check_ref(spath, s);
        if (s.kind != r.failed.kind) add(spath, "substitute kind differs from failed agent");
        if (s == r.failed) add(spath, "agent cannot substitute for itself");
        if (!subs.insert(s).second) add(spath, "duplicate substitute " + to_string(s));
      }
    }
  }

  const SystemModel& model_;
  std::set<AgentId> agents_;
  std::set<std::uint32_t> services_;
  std::set<AgentId> rules_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const SystemModel& model) { return Validator(model).run(); }

std::vector<AgentId> support_closure(const ServiceAgent& service, const SystemModel& model) {
  std::vector<AgentId> out;
  out.reserve(service.support.size() * 3);
  for (const auto& id : service.support) {
    out.push_back(id);
    if (id.kind == AgentKind::Connector) {
      const auto& c = model.connector(id);
      out.push_back(c.source);
      out.push_back(c.target);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<AgentId> support_closure(std::uint32_t service_id, const SystemModel& model) {
  return support_closure(model.service(service_id), model);
}

AgentIndex::AgentIndex(const SystemModel& model) {
  ids_.reserve(model.agent_count());
  for (const auto& c : model.components) ids_.push_back(c.id);
  for (const auto& c : model.connectors) ids_.push_back(c.id);
  std::sort(ids_.begin(), ids_.end());
}

std::optional<std::size_t> AgentIndex::find(AgentId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::size_t AgentIndex::slot(AgentId id) const {
  if (auto s = find(id)) return *s;
  throw LookupError("unknown agent " + to_string(id));
}

}  // namespace renass

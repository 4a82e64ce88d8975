#pragma once

#include <algorithm>
#include <set>

#include "renass/engine.hpp"
#include "renass/model.hpp"
#include "renass/rng.hpp"

namespace renass::testing {

inline ComponentAgent make_component(std::uint32_t i, double r = 1.0) {
  ComponentAgent c;
  c.id = component_id(i);
  c.reliability = r;
  return c;
}

inline ConnectorAgent make_connector(std::uint32_t i, std::uint32_t source, std::uint32_t target, double r = 1.0) {
  ConnectorAgent c;
  c.id = connector_id(i);
  c.source = component_id(source);
  c.target = component_id(target);
  c.reliability = r;
  return c;
}

inline BusinessAgent make_business(std::uint32_t id, std::vector<std::uint32_t> services, bool critical = false,
                                   double duty = 1.0) {
  BusinessAgent b;
  b.id = id;
  b.duty_cycle = duty;
  b.critical = critical;
  const auto n = services.size();
  b.services = std::move(services);
  b.transition.assign(n, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  return b;
}

/// Two components joined by one connector, one service over the connector.
inline SystemModel two_node_model() {
  SystemModel m;
  m.components = {make_component(0), make_component(1)};
  m.connectors = {make_connector(0, 0, 1)};
  m.services = {{0, {connector_id(0)}}};
  m.businesses = {make_business(0, {0})};
  return m;
}

/// One business calling one service that needs component 0 only. With a
/// substitute, component 1 backs component 0 and the business is critical.
inline SystemModel single_component_model(double r, bool with_substitute) {
  SystemModel m;
  m.components = {make_component(0, r)};
  m.services = {{0, {component_id(0)}}};
  m.businesses = {make_business(0, {0}, with_substitute)};
  if (with_substitute) {
    m.components.push_back(make_component(1, r));
    m.reconfig.rules = {{component_id(0), {component_id(1)}}};
  }
  return m;
}

struct RandomModelOptions {
  std::uint32_t max_components = 6;
  std::uint32_t max_connectors = 5;
  std::uint32_t max_services = 4;
  std::uint32_t max_businesses = 3;
  double min_reliability = 0.6;
  bool repair = true;
  bool rules = true;
  bool partial_duty = true;
};

/// Arbitrary valid model: random topology, supports, stochastic rows,
/// repairs, criticality and (possibly overlapping) substitute rules.
inline SystemModel random_model(Rng& rng, const RandomModelOptions& o = {}) {
  SystemModel m;
  const auto nc = 2 + static_cast<std::uint32_t>(rng.below(o.max_components - 1));
  for (std::uint32_t i = 0; i < nc; ++i) {
    auto c = make_component(i, o.min_reliability + (1.0 - o.min_reliability) * rng.uniform());
    if (o.repair && rng.uniform() < 0.5) c.repair_ticks = 1 + rng.below(5);
    m.components.push_back(c);
  }
  const auto nk = static_cast<std::uint32_t>(rng.below(o.max_connectors + 1));
  for (std::uint32_t i = 0; i < nk; ++i) {
    const auto s = static_cast<std::uint32_t>(rng.below(nc));
    auto t = static_cast<std::uint32_t>(rng.below(nc - 1));
    if (t >= s) ++t;
    auto c = make_connector(i, s, t, o.min_reliability + (1.0 - o.min_reliability) * rng.uniform());
    if (o.repair && rng.uniform() < 0.5) c.repair_ticks = 1 + rng.below(5);
    m.connectors.push_back(c);
  }
  std::vector<AgentId> all;
  for (const auto& c : m.components) all.push_back(c.id);
  for (const auto& c : m.connectors) all.push_back(c.id);

  const auto ns = 1 + static_cast<std::uint32_t>(rng.below(o.max_services));
  for (std::uint32_t i = 0; i < ns; ++i) {
    std::set<AgentId> support;
    const auto k = 1 + rng.below(3);
    for (std::uint64_t j = 0; j < k; ++j) support.insert(all[rng.below(all.size())]);
    m.services.push_back({i, {support.begin(), support.end()}});
  }
  const auto nb = 1 + static_cast<std::uint32_t>(rng.below(o.max_businesses));
  for (std::uint32_t i = 0; i < nb; ++i) {
    BusinessAgent b;
    b.id = i;
    b.critical = rng.uniform() < 0.6;
    b.duty_cycle = o.partial_duty && rng.uniform() < 0.3 ? rng.uniform() : 1.0;
    const auto k = 1 + rng.below(ns);
    for (std::uint64_t j = 0; j < k; ++j) b.services.push_back(static_cast<std::uint32_t>(rng.below(ns)));
    for (std::size_t r = 0; r < b.services.size(); ++r) {
      std::vector<double> row(b.services.size());
      double sum = 0.0;
      for (auto& p : row) sum += (p = rng.uniform() < 0.2 ? 0.0 : rng.uniform());
      if (sum == 0.0) {
        row[0] = 1.0;
        sum = 1.0;
      }
      for (auto& p : row) p /= sum;
      b.transition.push_back(std::move(row));
    }
    m.businesses.push_back(std::move(b));
  }
  if (o.rules) {
    for (const auto& a : all) {
      if (rng.uniform() < 0.5) continue;
      ReconfigRule rule{a, {}};
      for (const auto& s : all)
        if (s.kind == a.kind && s != a && rng.uniform() < 0.5) rule.substitutes.push_back(s);
      if (rule.substitutes.empty()) continue;
      std::reverse(rule.substitutes.begin(), rule.substitutes.end());
      m.reconfig.rules.push_back(std::move(rule));
    }
  }
  return m;
}

/// Random model inside both oracles' domain: at most `max_agents` agents,
/// one service per business, duty 1, no repair, and substitutes that are
/// dedicated to one rule and required by no service.
inline SystemModel random_oracle_model(Rng& rng, std::uint32_t max_agents = 6) {
  while (true) {
    SystemModel m;
    const auto n_agents = 2 + static_cast<std::uint32_t>(rng.below(max_agents - 1));
    const auto nc = 1 + static_cast<std::uint32_t>(rng.below(n_agents));
    const auto nk = nc >= 2 ? n_agents - nc : 0;
    for (std::uint32_t i = 0; i < nc; ++i) m.components.push_back(make_component(i, 0.5 + 0.5 * rng.uniform()));
    for (std::uint32_t i = 0; i < nk; ++i) {
      const auto s = static_cast<std::uint32_t>(rng.below(nc));
      auto t = static_cast<std::uint32_t>(rng.below(nc - 1));
      if (t >= s) ++t;
      m.connectors.push_back(make_connector(i, s, t, 0.5 + 0.5 * rng.uniform()));
    }
    std::vector<AgentId> all;
    for (const auto& c : m.components) all.push_back(c.id);
    for (const auto& c : m.connectors) all.push_back(c.id);

    // Split agents into "core" (may be required) and "spare" (substitutes).
    std::vector<AgentId> core, spare;
    for (const auto& a : all) (rng.uniform() < 0.6 ? core : spare).push_back(a);
    if (core.empty()) continue;

    const auto ns = 1 + static_cast<std::uint32_t>(rng.below(2));
    for (std::uint32_t i = 0; i < ns; ++i) {
      std::set<AgentId> support;
      const auto k = 1 + rng.below(2);
      for (std::uint64_t j = 0; j < k; ++j) support.insert(core[rng.below(core.size())]);
      m.services.push_back({i, {support.begin(), support.end()}});
    }
    const auto nb = 1 + static_cast<std::uint32_t>(rng.below(2));
    for (std::uint32_t i = 0; i < nb; ++i)
      m.businesses.push_back(make_business(i, {static_cast<std::uint32_t>(rng.below(ns))}, rng.uniform() < 0.7));

    // Closures may pull in spare components as connector endpoints; those
    // cannot be substitutes.
    std::set<AgentId> required;
    for (const auto& s : m.services)
      for (const auto& a : support_closure(s, m)) required.insert(a);
    std::vector<AgentId> pool;
    for (const auto& a : spare)
      if (!required.contains(a)) pool.push_back(a);
    for (const auto& a : required) {
      ReconfigRule rule{a, {}};
      for (auto it = pool.begin(); it != pool.end();) {
        if (it->kind == a.kind && rng.uniform() < 0.6) {
          rule.substitutes.push_back(*it);
          it = pool.erase(it);
        } else {
          ++it;
        }
      }
      if (!rule.substitutes.empty()) m.reconfig.rules.push_back(std::move(rule));
    }
    return m;
  }
}

/// Random parameters for `model`: horizon, seed, reconfig flag, optional
/// override and PM windows.
inline SimParams random_params(Rng& rng, const SystemModel& model, Tick max_ticks = 60) {
  SimParams p;
  p.ticks = 1 + rng.below(max_ticks);
  p.seed = rng.below(1u << 30);
  p.reconfig_enabled = rng.uniform() < 0.7;
  if (rng.uniform() < 0.2) p.reliability_override = 0.5 + 0.5 * rng.uniform();
  if (rng.uniform() < 0.5) {
    const AgentIndex index(model);
    std::set<AgentId> chosen;
    const auto k = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < k; ++i) {
      const auto id = index.id(rng.below(index.size()));
      if (!chosen.insert(id).second) continue;
      const auto period = 2 + rng.below(8);
      p.pm_schedule.push_back({id, period, 1 + rng.below(period - 1)});
    }
  }
  return p;
}

}  // namespace renass::testing

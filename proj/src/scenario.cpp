#include "renass/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "renass/rng.hpp"

namespace renass {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json agent_json(AgentId id) { return Json{{to_string(id.kind), id.index}}; }

Json agent_list(const std::vector<AgentId>& ids) {
  Json out = Json::array();
  for (const auto& id : ids) out.push_back(agent_json(id));
  return out;
}

Json repair_json(const std::optional<Tick>& repair) { return repair ? Json(*repair) : Json(nullptr); }

const char* status_name(AgentStatus s) { return s == AgentStatus::Normal ? "normal" : "failed"; }

}  // namespace

std::string to_json(const SystemModel& model) {
  Json doc;
  doc["format_version"] = kModelFormatVersion;

  Json components = Json::array();
  for (const auto& c : model.components) {
    components.push_back({{"id", c.id.index},
                          {"reliability", c.reliability},
                          {"status", status_name(c.status)},
                          {"repair_ticks", repair_json(c.repair_ticks)},
                          {"behavior",
                           {{"knowledge", agent_list(c.behavior.knowledge)},
                            {"plan", agent_list(c.behavior.plan)},
                            {"critical", c.behavior.critical}}}});
  }
  doc["components"] = std::move(components);

  Json connectors = Json::array();
  for (const auto& c : model.connectors) {
    connectors.push_back({{"id", c.id.index},
                          {"source", c.source.index},
                          {"target", c.target.index},
                          {"reliability", c.reliability},
                          {"status", status_name(c.status)},
                          {"repair_ticks", repair_json(c.repair_ticks)},
                          {"plan", agent_list(c.plan)}});
  }
  doc["connectors"] = std::move(connectors);

  Json services = Json::array();
  for (const auto& s : model.services) services.push_back({{"id", s.id}, {"support", agent_list(s.support)}});
  doc["services"] = std::move(services);

  Json businesses = Json::array();
  for (const auto& b : model.businesses) {
    businesses.push_back({{"id", b.id},
                          {"duty_cycle", b.duty_cycle},
                          {"critical", b.critical},
                          {"services", b.services},
                          {"transition", b.transition}});
  }
  doc["businesses"] = std::move(businesses);

  Json rules = Json::array();
  for (const auto& r : model.reconfig.rules)
    rules.push_back({{"failed", agent_json(r.failed)}, {"substitutes", agent_list(r.substitutes)}});
  doc["reconfig"] = {{"id", model.reconfig.id},
                     {"policy", "first_fit"},
                     {"strategy", "priority_order"},
                     {"rules", std::move(rules)}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

// Wraps a JSON object and rejects keys nobody asked about.
class Fields {
 public:
  Fields(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node.is_object()) fail(path_, "expected an object");
  }

  const Json& required(const std::string& key) {
    used_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) fail(path_, "missing key \"" + key + "\"");
    return *it;
  }

  const Json* optional(const std::string& key) {
    used_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!used_.contains(it.key())) fail(path_.empty() ? "<root>" : path_, "unknown key \"" + it.key() + "\"");
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> used_;
};

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::uint32_t as_id(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
    fail(path, "expected a non-negative integer id");
  return v.get<std::uint32_t>();
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

AgentId as_agent(const Json& v, const std::string& path) {
  if (!v.is_object() || v.size() != 1) fail(path, "expected {\"component\": n} or {\"connector\": n}");
  const auto it = v.begin();
  const auto& key = it.key();
  const auto& value = it.value();
  if (key == "component") return component_id(as_id(value, path + ".component"));
  if (key == "connector") return connector_id(as_id(value, path + ".connector"));
  fail(path, "unknown agent kind \"" + key + "\"");
}

std::vector<AgentId> as_agents(const Json& v, const std::string& path) {
  std::vector<AgentId> out;
  for (std::size_t i = 0; i < as_array(v, path).size(); ++i) out.push_back(as_agent(v[i], index_path(path, i)));
  return out;
}

AgentStatus as_status(const Json* v, const std::string& path) {
  if (!v) return AgentStatus::Normal;
  if (*v == "normal") return AgentStatus::Normal;
  if (*v == "failed") return AgentStatus::Failed;
  fail(path, "expected \"normal\" or \"failed\"");
}

std::optional<Tick> as_repair(const Json* v, const std::string& path) {
  if (!v || v->is_null()) return std::nullopt;
  if (!v->is_number_unsigned()) fail(path, "expected a positive integer or null");
  return v->get<Tick>();
}

ComponentAgent parse_component(const Json& node, const std::string& path) {
  Fields f(node, path);
  ComponentAgent c;
  c.id = component_id(as_id(f.required("id"), f.at("id")));
  c.reliability = as_number(f.required("reliability"), f.at("reliability"));
  c.status = as_status(f.optional("status"), f.at("status"));
  c.repair_ticks = as_repair(f.optional("repair_ticks"), f.at("repair_ticks"));
  if (const auto* b = f.optional("behavior")) {
    Fields bf(*b, f.at("behavior"));
    if (const auto* k = bf.optional("knowledge")) c.behavior.knowledge = as_agents(*k, bf.at("knowledge"));
    if (const auto* p = bf.optional("plan")) c.behavior.plan = as_agents(*p, bf.at("plan"));
    if (const auto* cr = bf.optional("critical")) c.behavior.critical = as_bool(*cr, bf.at("critical"));
    bf.finish();
  }
  f.finish();
  return c;
}

ConnectorAgent parse_connector(const Json& node, const std::string& path) {
  Fields f(node, path);
  ConnectorAgent c;
  c.id = connector_id(as_id(f.required("id"), f.at("id")));
  c.source = component_id(as_id(f.required("source"), f.at("source")));
  c.target = component_id(as_id(f.required("target"), f.at("target")));
  c.reliability = as_number(f.required("reliability"), f.at("reliability"));
  c.status = as_status(f.optional("status"), f.at("status"));
  c.repair_ticks = as_repair(f.optional("repair_ticks"), f.at("repair_ticks"));
  if (const auto* p = f.optional("plan")) c.plan = as_agents(*p, f.at("plan"));
  f.finish();
  return c;
}

ServiceAgent parse_service(const Json& node, const std::string& path) {
  Fields f(node, path);
  ServiceAgent s;
  s.id = as_id(f.required("id"), f.at("id"));
  s.support = as_agents(f.required("support"), f.at("support"));
  f.finish();
  return s;
}

BusinessAgent parse_business(const Json& node, const std::string& path) {
  Fields f(node, path);
  BusinessAgent b;
  b.id = as_id(f.required("id"), f.at("id"));
  if (const auto* d = f.optional("duty_cycle")) b.duty_cycle = as_number(*d, f.at("duty_cycle"));
  if (const auto* c = f.optional("critical")) b.critical = as_bool(*c, f.at("critical"));
  const auto& services = as_array(f.required("services"), f.at("services"));
  for (std::size_t i = 0; i < services.size(); ++i)
    b.services.push_back(as_id(services[i], index_path(f.at("services"), i)));
  const auto& rows = as_array(f.required("transition"), f.at("transition"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto rpath = index_path(f.at("transition"), i);
    std::vector<double> row;
    for (std::size_t j = 0; j < as_array(rows[i], rpath).size(); ++j)
      row.push_back(as_number(rows[i][j], index_path(rpath, j)));
    b.transition.push_back(std::move(row));
  }
  f.finish();
  return b;
}

ReconfigModel parse_reconfig(const Json& node, const std::string& path) {
  Fields f(node, path);
  ReconfigModel r;
  if (const auto* id = f.optional("id")) r.id = as_id(*id, f.at("id"));
  if (const auto* p = f.optional("policy"); p && *p != "first_fit") fail(f.at("policy"), "only \"first_fit\" is supported");
  if (const auto* s = f.optional("strategy"); s && *s != "priority_order")
    fail(f.at("strategy"), "only \"priority_order\" is supported");
  const auto& rules = as_array(f.required("rules"), f.at("rules"));
  for (std::size_t i = 0; i < rules.size(); ++i) {
    Fields rf(rules[i], index_path(f.at("rules"), i));
    ReconfigRule rule;
    rule.failed = as_agent(rf.required("failed"), rf.at("failed"));
    rule.substitutes = as_agents(rf.required("substitutes"), rf.at("substitutes"));
    rf.finish();
    r.rules.push_back(std::move(rule));
  }
  f.finish();
  return r;
}

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

SystemModel from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the byte just past the offending character.
    throw ParseError(location(text, e.byte > 0 ? e.byte - 1 : 0) + ": malformed JSON");
  }

  Fields f(doc, "");
  const auto& version = f.required("format_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kModelFormatVersion)
    fail("format_version", "unsupported version, expected " + std::to_string(kModelFormatVersion));

  SystemModel model;
  const auto& components = as_array(f.required("components"), "components");
  for (std::size_t i = 0; i < components.size(); ++i)
    model.components.push_back(parse_component(components[i], index_path("components", i)));
  const auto& connectors = as_array(f.required("connectors"), "connectors");
  for (std::size_t i = 0; i < connectors.size(); ++i)
    model.connectors.push_back(parse_connector(connectors[i], index_path("connectors", i)));
  const auto& services = as_array(f.required("services"), "services");
  for (std::size_t i = 0; i < services.size(); ++i)
    model.services.push_back(parse_service(services[i], index_path("services", i)));
  const auto& businesses = as_array(f.required("businesses"), "businesses");
  for (std::size_t i = 0; i < businesses.size(); ++i)
    model.businesses.push_back(parse_business(businesses[i], index_path("businesses", i)));
  model.reconfig = parse_reconfig(f.required("reconfig"), "reconfig");
  f.finish();

  if (auto report = validate(model); !report.empty()) throw ValidationError(std::move(report));
  return model;
}

void save(const SystemModel& model, const std::filesystem::path& path) {
  if (auto report = validate(model); !report.empty()) throw ValidationError(std::move(report));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(model);
  if (!out) throw IoError("failed writing " + path.string());
}

SystemModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Generation

namespace {

void check_gen_params(const GenParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw GenerationError(what);
  };
  require(p.components >= 1, "need at least one component");
  require(p.services >= 1, "need at least one service");
  require(p.businesses >= 1, "need at least one business");
  require(p.critical_fraction >= 0.0 && p.critical_fraction <= 1.0, "critical fraction must lie in [0, 1]");
  require(p.reliability > 0.0 && p.reliability <= 1.0, "reliability must lie in (0, 1]");
  require(p.support_size_range.first >= 1 && p.support_size_range.first <= p.support_size_range.second,
          "support size range must satisfy 1 <= min <= max");
  require(p.services_per_business_range.first >= 1 &&
              p.services_per_business_range.first <= p.services_per_business_range.second,
          "services per business range must satisfy 1 <= min <= max");
  const auto n = static_cast<std::uint64_t>(p.components);
  require(p.connectors <= n * (n - 1), "more connectors than distinct ordered component pairs");
}

std::uint32_t in_range(Rng& rng, std::pair<std::uint32_t, std::uint32_t> range, std::uint32_t cap) {
  const auto lo = std::min(range.first, cap);
  const auto hi = std::min(range.second, cap);
  return lo + static_cast<std::uint32_t>(rng.below(hi - lo + 1));
}

template <typename T>
std::vector<T> pick_distinct(Rng& rng, std::vector<T> pool, std::size_t k) {
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  return pool;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> make_edges(Rng& rng, std::uint32_t n, std::uint32_t count) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::set<std::pair<std::uint32_t, std::uint32_t>> used;
  auto add = [&](std::uint32_t s, std::uint32_t t) {
    if (s != t && used.insert({s, t}).second) edges.emplace_back(s, t);
  };

  // Random spanning tree first so the graph is weakly connected.
  if (n > 1 && count >= n - 1) {
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::uint32_t i = 1; i < n; ++i) {
      const auto other = order[rng.below(i)];
      if (rng.uniform() < 0.5)
        add(order[i], other);
      else
        add(other, order[i]);
    }
  }

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1);
  const std::uint64_t missing = count - edges.size();
  if (missing * 2 > total - edges.size()) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> free;
    for (std::uint32_t s = 0; s < n; ++s)
      for (std::uint32_t t = 0; t < n; ++t)
        if (s != t && !used.contains({s, t})) free.emplace_back(s, t);
    for (const auto& [s, t] : pick_distinct(rng, std::move(free), missing)) add(s, t);
  } else {
    while (edges.size() < count) {
      const auto s = static_cast<std::uint32_t>(rng.below(n));
      const auto t = static_cast<std::uint32_t>(rng.below(n));
      add(s, t);
    }
  }
  return edges;
}

}  // namespace

SystemModel generate(const GenParams& params) {
  check_gen_params(params);
  Rng rng(params.seed);
  SystemModel model;

  for (std::uint32_t i = 0; i < params.components; ++i) {
    ComponentAgent c;
    c.id = component_id(i);
    c.reliability = params.reliability;
    model.components.push_back(std::move(c));
  }
  const auto edges = make_edges(rng, params.components, params.connectors);
  for (std::uint32_t i = 0; i < edges.size(); ++i) {
    ConnectorAgent c;
    c.id = connector_id(i);
    c.reliability = params.reliability;
    c.source = component_id(edges[i].first);
    c.target = component_id(edges[i].second);
    model.connectors.push_back(std::move(c));
  }

  std::vector<AgentId> all;
  for (const auto& c : model.components) all.push_back(c.id);
  for (const auto& c : model.connectors) all.push_back(c.id);
  for (std::uint32_t i = 0; i < params.services; ++i) {
    ServiceAgent s;
    s.id = i;
    const auto k = in_range(rng, params.support_size_range, static_cast<std::uint32_t>(all.size()));
    s.support = pick_distinct(rng, all, k);
    std::sort(s.support.begin(), s.support.end());
    model.services.push_back(std::move(s));
  }

  std::vector<std::uint32_t> service_ids(params.services);
  for (std::uint32_t i = 0; i < params.services; ++i) service_ids[i] = i;
  for (std::uint32_t i = 0; i < params.businesses; ++i) {
    BusinessAgent b;
    b.id = i;
    const auto m = in_range(rng, params.services_per_business_range, params.services);
    b.services = pick_distinct(rng, service_ids, m);
    std::sort(b.services.begin(), b.services.end());
    b.transition.assign(m, std::vector<double>(m, 1.0 / static_cast<double>(m)));
    model.businesses.push_back(std::move(b));
  }
  const auto n_critical = static_cast<std::size_t>(
      std::floor(params.critical_fraction * static_cast<double>(params.businesses) + 1e-9));
  std::vector<std::uint32_t> business_order(params.businesses);
  for (std::uint32_t i = 0; i < params.businesses; ++i) business_order[i] = i;
  rng.shuffle(business_order);
  for (std::size_t i = 0; i < n_critical; ++i) model.businesses[business_order[i]].critical = true;

  std::set<AgentId> used, critical;
  for (const auto& s : model.services)
    for (const auto& id : support_closure(s, model)) used.insert(id);
  for (const auto& b : model.businesses)
    if (b.critical)
      for (auto sid : b.services)
        for (const auto& id : support_closure(sid, model)) critical.insert(id);

  if (params.substitutes_per_critical_agent > 0 && !critical.empty()) {
    // Substitute pools: agents outside every service first, then agents that
    // only serve non-critical businesses. Each substitute serves one rule.
    std::vector<AgentId> pool[2];
    for (int kind = 0; kind < 2; ++kind) {
      std::vector<AgentId> unused, noncritical;
      for (const auto& id : all) {
        if (static_cast<int>(id.kind) != kind || critical.contains(id)) continue;
        (used.contains(id) ? noncritical : unused).push_back(id);
      }
      rng.shuffle(unused);
      rng.shuffle(noncritical);
      pool[kind] = std::move(noncritical);
      pool[kind].insert(pool[kind].end(), unused.begin(), unused.end());  // consumed from the back
    }
    for (const auto& original : critical) {
      auto& p = pool[static_cast<int>(original.kind)];
      if (p.size() < params.substitutes_per_critical_agent)
        throw GenerationError("not enough spare " + to_string(original.kind) + "s to give " + to_string(original) +
                              " " + std::to_string(params.substitutes_per_critical_agent) + " substitutes");
      ReconfigRule rule{original, {}};
      for (std::uint32_t k = 0; k < params.substitutes_per_critical_agent; ++k) {
        rule.substitutes.push_back(p.back());
        p.pop_back();
      }
      model.reconfig.rules.push_back(std::move(rule));
    }
  }

  for (const auto& rule : model.reconfig.rules) {
    if (rule.failed.kind == AgentKind::Component) {
      auto& c = model.components[rule.failed.index];
      c.behavior.knowledge.push_back(rule.failed);
      c.behavior.plan = rule.substitutes;
      for (const auto& s : rule.substitutes) model.components[s.index].behavior.knowledge.push_back(rule.failed);
    } else {
      model.connectors[rule.failed.index].plan = rule.substitutes;
    }
  }
  for (const auto& id : critical)
    if (id.kind == AgentKind::Component) model.components[id.index].behavior.critical = true;

  if (auto report = validate(model); !report.empty()) throw GenerationError(ValidationError(report).what());
  return model;
}

}  // namespace renass

#include "renass/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace renass {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Fail: return "fail";
    case EventKind::Recover: return "recover";
    case EventKind::SubstituteIn: return "substitute_in";
    case EventKind::SubstituteOut: return "substitute_out";
    case EventKind::PMStart: return "pm_start";
    case EventKind::PMEnd: return "pm_end";
  }
  return "unknown";
}

void check_params(const SimParams& params, const SystemModel& model) {
  if (params.ticks < 1) throw ParamError("ticks must be at least 1");
  if (params.replications < 1) throw ParamError("replications must be at least 1");
  if (params.reliability_override) {
    const double r = *params.reliability_override;
    if (!(r > 0.0 && r <= 1.0)) throw ParamError("reliability override must lie in (0, 1]");
  }
  std::set<AgentId> seen;
  for (const auto& w : params.pm_schedule) {
    const auto name = to_string(w.agent);
    if (!model.contains(w.agent)) throw ParamError("maintenance schedule names unknown agent " + name);
    if (!seen.insert(w.agent).second) throw ParamError("more than one maintenance schedule for " + name);
    if (w.duration < 1 || w.duration >= w.period)
      throw ParamError("maintenance for " + name + " needs 1 <= duration < period");
  }
}

ServiceOutcome evaluate_closure(std::span<const AgentId> closure, const BindingTable& bindings,
                                const StatusView& statuses) {
  ServiceOutcome out;
  for (const auto& a : closure) {
    const auto b = bindings.bound(a);
    if (statuses.status(b) == AgentStatus::Failed) {
      out.blocking.push_back(a);
      out.corrective = true;
    } else if (statuses.in_maintenance(b)) {
      out.blocking.push_back(a);
    }
  }
  out.up = out.blocking.empty();
  return out;
}

ServiceOutcome evaluate_service(const ServiceAgent& service, const BindingTable& bindings,
                                const StatusView& statuses, const SystemModel& model) {
  const auto closure = support_closure(service, model);
  return evaluate_closure(closure, bindings, statuses);
}

namespace {

std::shared_ptr<const EngineContext> make_context(const SystemModel& model, const SimParams& params) {
  auto ctx = std::make_shared<EngineContext>();
  ctx->index = AgentIndex(model);
  const auto n = ctx->index.size();
  ctx->reliability.resize(n);
  ctx->repair.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto id = ctx->index.id(s);
    ctx->reliability[s] = params.reliability_override.value_or(model.reliability(id));
    ctx->repair[s] = model.repair_ticks(id);
  }
  ctx->reconfigurator = Reconfigurator(model);
  for (const auto& svc : model.services) ctx->closures.push_back(support_closure(svc, model));

  ctx->business_order.resize(model.businesses.size());
  std::iota(ctx->business_order.begin(), ctx->business_order.end(), std::size_t{0});
  std::sort(ctx->business_order.begin(), ctx->business_order.end(),
            [&](std::size_t a, std::size_t b) { return model.businesses[a].id < model.businesses[b].id; });
  for (const auto& b : model.businesses) {
    std::vector<std::size_t> positions;
    for (auto sid : b.services) {
      auto it = std::find_if(model.services.begin(), model.services.end(),
                             [&](const ServiceAgent& s) { return s.id == sid; });
      if (it == model.services.end()) throw LookupError("unknown service " + std::to_string(sid));
      positions.push_back(static_cast<std::size_t>(it - model.services.begin()));
    }
    ctx->business_services.push_back(std::move(positions));
  }
  for (const auto& w : params.pm_schedule) ctx->pm.emplace_back(ctx->index.slot(w.agent), w);
  return ctx;
}

}  // namespace

EngineState initial_state(const SystemModel& model, const SimParams& params) {
  check_params(params, model);
  if (auto report = validate(model); !report.empty()) throw ValidationError(std::move(report));

  EngineState st;
  st.context = make_context(model, params);
  const auto& ctx = *st.context;
  const auto n = ctx.index.size();
  st.horizon = params.ticks;
  st.statuses.resize(n);
  st.repair_remaining.resize(n);
  st.in_pm.assign(n, 0);
  st.pm_remaining.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    st.statuses[s] = model.initial_status(ctx.index.id(s));
    if (st.statuses[s] == AgentStatus::Failed) st.repair_remaining[s] = ctx.repair[s];
  }
  st.businesses.resize(model.businesses.size());
  st.services.assign(model.services.size(), ServiceState::Idle);
  st.counters.resize(model.businesses.size());
  st.rng = Rng(params.seed);
  return st;
}

std::vector<AgentId> sample_failures(EngineState& state, const SystemModel&) {
  const auto& ctx = *state.context;
  std::vector<AgentId> failed;
  for (std::size_t s = 0; s < state.statuses.size(); ++s) {
    const double u = state.rng.uniform();
    if (state.statuses[s] != AgentStatus::Normal || state.in_pm[s]) continue;
    if (u >= ctx.reliability[s]) {
      state.statuses[s] = AgentStatus::Failed;
      state.repair_remaining[s] = ctx.repair[s];
      failed.push_back(ctx.index.id(s));
    }
  }
  return failed;
}

std::optional<std::uint32_t> select_service(const BusinessAgent& business, BusinessState& state, Rng& rng) {
  const double duty = rng.uniform();
  const double branch = rng.uniform();
  if (!(duty < business.duty_cycle)) return std::nullopt;

  const auto n = business.services.size();
  std::size_t pos = n - 1;
  if (!state.last_position) {
    pos = std::min(static_cast<std::size_t>(branch * static_cast<double>(n)), n - 1);
  } else {
    const auto& row = business.transition[*state.last_position];
    double cumulative = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cumulative += row[j];
      if (branch < cumulative) {
        pos = j;
        break;
      }
    }
    // Rounding can leave the cumulative sum just under 1; take the last
    // reachable branch in that case.
    if (!(branch < cumulative))
      while (pos > 0 && row[pos] <= 0.0) --pos;
  }
  state.last_position = pos;
  return business.services[pos];
}

void step(EngineState& state, const SystemModel& model, const SimParams& params) {
  if (state.clock >= state.horizon)
    throw EndOfHorizonError("clock already at horizon " + std::to_string(state.horizon));
  const auto& ctx = *state.context;
  state.tick_events.clear();
  const Tick tick = ++state.clock;

  for (const auto& [slot, w] : ctx.pm) {
    const auto id = ctx.index.id(slot);
    if (state.in_pm[slot] && --state.pm_remaining[slot] == 0) {
      state.in_pm[slot] = 0;
      state.tick_events.push_back({tick, EventKind::PMEnd, id, {}, {}});
    }
    if (tick % w.period == 0) {
      state.in_pm[slot] = 1;
      state.pm_remaining[slot] = w.duration;
      state.tick_events.push_back({tick, EventKind::PMStart, id, {}, {}});
    }
  }

  const auto failed = sample_failures(state, model);
  for (const auto& id : failed) state.tick_events.push_back({tick, EventKind::Fail, id, {}, {}});

  for (std::size_t s = 0; s < state.statuses.size(); ++s) {
    if (state.statuses[s] != AgentStatus::Failed || !state.repair_remaining[s]) continue;
    const auto id = ctx.index.id(s);
    if (std::binary_search(failed.begin(), failed.end(), id)) continue;
    if (--*state.repair_remaining[s] == 0) {
      state.statuses[s] = AgentStatus::Normal;
      state.repair_remaining[s].reset();
      state.tick_events.push_back({tick, EventKind::Recover, id, {}, {}});
    }
  }

  const auto view = state.status_view();
  if (params.reconfig_enabled) {
    for (const auto& e : ctx.reconfigurator.apply(tick, state.bindings, view)) {
      const auto kind = e.new_binding == e.original ? EventKind::SubstituteOut : EventKind::SubstituteIn;
      state.tick_events.push_back({tick, kind, e.original, e.old_binding, e.new_binding});
    }
  }

  std::fill(state.services.begin(), state.services.end(), ServiceState::Idle);
  state.tick_accruals.assign(ctx.business_order.size(), TimeCounter::Standby);
  for (std::size_t k = 0; k < ctx.business_order.size(); ++k) {
    const auto pos = ctx.business_order[k];
    const auto& business = model.businesses[pos];
    auto& bstate = state.businesses[k];
    const auto called = select_service(business, bstate, state.rng);
    bstate.service = called;
    TimeCounter accrual = TimeCounter::Standby;
    if (!called) {
      bstate.phase = BusinessPhase::Idle;
    } else {
      const auto spos = ctx.business_services[pos][*bstate.last_position];
      const auto outcome = evaluate_closure(ctx.closures[spos], state.bindings, view);
      if (outcome.up) {
        accrual = TimeCounter::Operating;
        bstate.phase = BusinessPhase::Calling;
        state.services[spos] = ServiceState::Executing;
      } else {
        accrual = outcome.corrective ? TimeCounter::Corrective : TimeCounter::Preventive;
        bstate.phase = BusinessPhase::Blocked;
        state.services[spos] = ServiceState::Failed;
      }
    }
    state.counters[k].add(accrual);
    state.tick_accruals[k] = accrual;
  }

  auto& sample = state.last_sample;
  sample.tick = tick;
  sample.per_business.resize(state.counters.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < state.counters.size(); ++k) {
    sample.per_business[k] = operational_availability(state.counters[k]);
    sum += sample.per_business[k];
  }
  sample.system = sum / static_cast<double>(state.counters.size());
}

Simulation::Simulation(const SystemModel& model, SimParams params)
    : model_(model), params_(std::move(params)), state_(initial_state(model_, params_)) {
  trace_.params = params_;
  for (auto pos : state_.context->business_order) trace_.business_ids.push_back(model_.businesses[pos].id);
  trace_.samples.reserve(params_.ticks);
  trace_.accruals.reserve(params_.ticks * trace_.business_ids.size());
  bus_.subscribe([this](const Event& e) { trace_.events.push_back(e); });
}

void Simulation::advance() {
  step(state_, model_, params_);
  for (const auto& e : state_.tick_events) bus_.publish(e);
  trace_.samples.push_back(state_.last_sample);
  trace_.accruals.insert(trace_.accruals.end(), state_.tick_accruals.begin(), state_.tick_accruals.end());
}

SimulationTrace Simulation::finish() && {
  while (!done()) advance();
  trace_.final_counters = state_.counters;
  return std::move(trace_);
}

SimulationTrace run(const SystemModel& model, const SimParams& params) {
  return Simulation(model, params).finish();
}

void for_each_replication(const SimParams& params, std::size_t count, unsigned threads,
                          const std::function<void(std::size_t, const SimParams&)>& fn) {
  auto params_for = [&](std::size_t i) {
    SimParams p = params;
    p.seed = params.seed + i;
    p.replications = 1;
    return p;
  };
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, params_for(i));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const auto n = std::min<std::size_t>(threads, count);
  for (std::size_t w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i, params_for(i));
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SimulationTrace> run_replications(const SystemModel& model, const SimParams& params, unsigned threads) {
  check_params(params, model);
  std::vector<SimulationTrace> out(params.replications);
  for_each_replication(params, params.replications, threads,
                       [&](std::size_t i, const SimParams& p) { out[i] = run(model, p); });
  return out;
}

}  // namespace renass

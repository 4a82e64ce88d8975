#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "renass/metrics.hpp"
#include "renass/model.hpp"
#include "renass/reconfig.hpp"
#include "renass/rng.hpp"

namespace renass {

/// Preventive maintenance for one agent: windows start at every positive
/// multiple of `period` and last `duration` ticks.
struct PmWindow {
  AgentId agent;
  Tick period = 1;
  Tick duration = 1;

  bool operator==(const PmWindow&) const = default;
};

struct SimParams {
  Tick ticks = 1;
  std::uint64_t seed = 0;
  bool reconfig_enabled = true;
  std::optional<double> reliability_override;
  std::vector<PmWindow> pm_schedule;
  std::uint32_t replications = 1;

  bool operator==(const SimParams&) const = default;
};

/// Throws ParamError on the first invalid field.
void check_params(const SimParams& params, const SystemModel& model);

enum class ServiceState : std::uint8_t { Idle, Executing, Failed };
enum class BusinessPhase : std::uint8_t { Idle, Calling, Blocked };

struct BusinessState {
  BusinessPhase phase = BusinessPhase::Idle;
  std::optional<std::uint32_t> service;           // service called this tick
  std::optional<std::size_t> last_position;       // position in services of the previous call

  bool operator==(const BusinessState&) const = default;
};

enum class EventKind : std::uint8_t { Fail, Recover, SubstituteIn, SubstituteOut, PMStart, PMEnd };

std::string to_string(EventKind kind);

struct Event {
  Tick tick = 0;
  EventKind kind = EventKind::Fail;
  AgentId agent;
  std::optional<AgentId> from;  // substitution events: previous binding
  std::optional<AgentId> to;    // substitution events: new binding

  bool operator==(const Event&) const = default;
};

struct ServiceOutcome {
  bool up = true;
  std::vector<AgentId> blocking;  // closure members whose bound agent is unavailable
  bool corrective = false;        // some blocking agent is Failed (not merely in PM)
};

ServiceOutcome evaluate_closure(std::span<const AgentId> closure, const BindingTable& bindings,
                                const StatusView& statuses);
ServiceOutcome evaluate_service(const ServiceAgent& service, const BindingTable& bindings,
                                const StatusView& statuses, const SystemModel& model);

/// Per-run lookup tables derived once from the model and parameters.
struct EngineContext {
  AgentIndex index;
  std::vector<double> reliability;           // by slot, override applied
  std::vector<std::optional<Tick>> repair;   // by slot
  Reconfigurator reconfigurator;
  std::vector<std::vector<AgentId>> closures;          // by position in model.services
  std::vector<std::size_t> business_order;             // model.businesses positions, ascending id
  std::vector<std::vector<std::size_t>> business_services;  // business position -> service positions
  std::vector<std::pair<std::size_t, PmWindow>> pm;    // (slot, window)
};

struct EngineState {
  Tick clock = 0;
  Tick horizon = 0;
  std::vector<AgentStatus> statuses;  // by slot
  std::vector<std::optional<Tick>> repair_remaining;
  std::vector<std::uint8_t> in_pm;
  std::vector<Tick> pm_remaining;
  BindingTable bindings;
  std::vector<BusinessState> businesses;  // ascending business id
  std::vector<ServiceState> services;     // by position in model.services
  std::vector<TimeCounters> counters;     // ascending business id
  Rng rng;
  std::vector<Event> tick_events;
  std::vector<TimeCounter> tick_accruals;
  AvailabilityPoint last_sample;
  std::shared_ptr<const EngineContext> context;

  StatusView status_view() const { return {context->index, statuses, in_pm}; }
};

EngineState initial_state(const SystemModel& model, const SimParams& params);

/// Draws one variate per agent in ascending id order; Normal agents outside
/// a PM window fail when the variate lands in their failure mass.
std::vector<AgentId> sample_failures(EngineState& state, const SystemModel& model);

/// Draws the duty variate then the branch variate. Returns the called
/// service id, or nullopt when the business stays idle this tick.
std::optional<std::uint32_t> select_service(const BusinessAgent& business, BusinessState& state, Rng& rng);

/// Advances one tick in place. Throws EndOfHorizonError at clock == horizon.
void step(EngineState& state, const SystemModel& model, const SimParams& params);

struct SimulationTrace {
  SimParams params;
  std::vector<std::uint32_t> business_ids;  // ascending
  std::vector<AvailabilityPoint> samples;
  std::vector<TimeCounter> accruals;        // row-major: tick-1, business
  std::vector<Event> events;
  std::vector<TimeCounters> final_counters;

  TimeCounter accrual(Tick tick, std::size_t business) const {
    return accruals[(tick - 1) * business_ids.size() + business];
  }
  bool operator==(const SimulationTrace&) const = default;
};

class EventBus {
 public:
  using Handler = std::function<void(const Event&)>;
  void subscribe(Handler handler) { handlers_.push_back(std::move(handler)); }
  void publish(const Event& event) const {
    for (const auto& h : handlers_) h(event);
  }

 private:
  std::vector<Handler> handlers_;
};

/// Drives one run tick by tick, routing each tick's events through a bus
/// and collecting samples into a trace. The model must outlive it.
class Simulation {
 public:
  Simulation(const SystemModel& model, SimParams params);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  EventBus& bus() { return bus_; }
  const EngineState& state() const { return state_; }
  bool done() const { return state_.clock >= state_.horizon; }
  void advance();
  SimulationTrace finish() &&;

 private:
  const SystemModel& model_;
  SimParams params_;
  EngineState state_;
  EventBus bus_;
  SimulationTrace trace_;
};

SimulationTrace run(const SystemModel& model, const SimParams& params);

/// Runs params.replications independent runs seeded seed + i. `threads == 0`
/// runs sequentially; results are ordered by replication index either way.
std::vector<SimulationTrace> run_replications(const SystemModel& model, const SimParams& params,
                                              unsigned threads = 0);

/// Applies `fn(i, params_i)` for i in [0, count) with at most `threads`
/// workers; `params_i` is `params` with seed + i.
void for_each_replication(const SimParams& params, std::size_t count, unsigned threads,
                          const std::function<void(std::size_t, const SimParams&)>& fn);

}  // namespace renass

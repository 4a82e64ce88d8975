#include <cmath>

#include "doctest.h"
#include "renass/engine.hpp"
#include "renass/scenario.hpp"
#include "support.hpp"

using namespace renass;
using namespace renass::testing;

namespace {

// Mean and standard error of the final system A0 over `n` seeds.
std::pair<double, double> monte_carlo(const SystemModel& m, SimParams p, int n) {
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    p.seed = static_cast<std::uint64_t>(i);
    const double a = run(m, p).samples.back().system;
    sum += a;
    sq += a * a;
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  return {mean, std::sqrt(var / n)};
}

// Exhaustive enumeration of a slot of `members` agents with survival r and
// no repair: each member fails at tick 1..T or survives. The business is up
// at tick t iff some member is still Normal.
double enumerate_slot(double r, int members, int T) {
  const int outcomes = T + 1;
  int paths = 1;
  for (int i = 0; i < members; ++i) paths *= outcomes;
  double expected = 0.0;
  for (int path = 0; path < paths; ++path) {
    double prob = 1.0;
    std::vector<int> fail_at(members);
    for (int i = 0, rest = path; i < members; ++i, rest /= outcomes) {
      const int k = rest % outcomes;  // k < T: fails at tick k+1; k == T: survives
      fail_at[i] = k < T ? k + 1 : T + 1;
      prob *= k < T ? std::pow(r, k) * (1 - r) : std::pow(r, T);
    }
    int up = 0;
    for (int t = 1; t <= T; ++t) {
      bool any = false;
      for (int f : fail_at) any = any || f > t;
      up += any;
    }
    expected += prob * up / T;
  }
  return expected;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("enumeration oracle reproduces the hand-derived values") {
    CHECK(enumerate_slot(0.5, 1, 2) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(enumerate_slot(0.5, 2, 2) == doctest::Approx(0.59375).epsilon(1e-15));
    // Closed form (1/T) sum_t (1 - (1 - r^t)^2).
    CHECK(enumerate_slot(0.5, 2, 2) == doctest::Approx(((1 - 0.25) + (1 - 0.75 * 0.75)) / 2));
  }

  TEST_CASE("perfect reliability never fails") {
    auto m = two_node_model();
    auto st = initial_state(m, {.ticks = 100});
    for (int t = 0; t < 100; ++t) CHECK(sample_failures(st, m).empty());
  }

  TEST_CASE("case-study scale failure rate per tick") {
    GenParams g;
    g.substitutes_per_critical_agent = 0;
    const auto m = generate(g);
    REQUIRE(m.agent_count() == 765);
    auto st = initial_state(m, {.ticks = 1});
    constexpr int kTicks = 1'000'000;
    double count = 0.0;
    for (int t = 0; t < kTicks; ++t) {
      std::fill(st.statuses.begin(), st.statuses.end(), AgentStatus::Normal);
      count += static_cast<double>(sample_failures(st, m).size());
    }
    const double expected = 765 * 1e-4;               // 0.0765
    const double sigma = std::sqrt(765 * 1e-4 * (1 - 1e-4) / kTicks);
    CHECK(std::abs(count / kTicks - expected) <= 3 * sigma);
  }

  TEST_CASE("single agent survival after two ticks is r^2") {
    SystemModel m = single_component_model(0.5, false);
    constexpr int n = 100000;
    int alive = 0;
    for (int i = 0; i < n; ++i) {
      auto st = initial_state(m, {.ticks = 2, .seed = static_cast<std::uint64_t>(i)});
      sample_failures(st, m);
      sample_failures(st, m);
      alive += st.statuses[0] == AgentStatus::Normal;
    }
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(alive / double(n) - 0.25) <= 3 * sigma);
  }

  TEST_CASE("select_service degenerate cases") {
    Rng rng(1);
    BusinessState st;
    const auto one = make_business(0, {5});
    for (int i = 0; i < 100; ++i) CHECK(select_service(one, st, rng) == 5u);
    const auto never = make_business(0, {5}, false, 0.0);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(select_service(never, st, rng).has_value());
  }

  TEST_CASE("select_service uses the transition row of the previous call") {
    auto b = make_business(0, {3, 4});
    b.transition = {{0.0, 1.0}, {1.0, 0.0}};
    Rng rng(9);
    BusinessState st;
    auto previous = *select_service(b, st, rng);
    for (int i = 0; i < 20; ++i) {
      const auto next = *select_service(b, st, rng);
      CHECK(next != previous);
      previous = next;
    }
  }

  TEST_CASE("uniform two-service chain calls each service half the time") {
    const auto b = make_business(0, {0, 1});
    Rng rng(77);
    BusinessState st;
    constexpr int n = 100000;
    int zero = 0;
    for (int i = 0; i < n; ++i) zero += *select_service(b, st, rng) == 0u;
    CHECK(std::abs(zero / double(n) - 0.5) <= 3 * std::sqrt(0.25 / n));
  }

  TEST_CASE("evaluate_service follows bindings and reports blockers") {
    auto m = single_component_model(0.5, true);
    const AgentIndex index(m);
    std::vector<AgentStatus> statuses(index.size(), AgentStatus::Normal);
    std::vector<std::uint8_t> pm(index.size(), 0);
    BindingTable b;
    const auto& svc = m.services[0];

    CHECK(evaluate_service(svc, b, {index, statuses, pm}, m).up);

    statuses[0] = AgentStatus::Failed;
    auto out = evaluate_service(svc, b, {index, statuses, pm}, m);
    CHECK_FALSE(out.up);
    CHECK(out.corrective);
    CHECK(out.blocking == std::vector<AgentId>{component_id(0)});

    b.bind(component_id(0), component_id(1));
    CHECK(evaluate_service(svc, b, {index, statuses, pm}, m).up);

    statuses[0] = AgentStatus::Normal;
    b.unbind(component_id(0));
    pm[0] = 1;
    out = evaluate_service(svc, b, {index, statuses, pm}, m);
    CHECK_FALSE(out.up);
    CHECK_FALSE(out.corrective);
  }

  TEST_CASE("nothing fails with reliability one") {
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
      auto m = random_model(rng, {.partial_duty = false});
      const SimParams p{.ticks = 50, .seed = 3, .reliability_override = 1.0};
      const auto trace = run(m, p);
      for (const auto& c : trace.final_counters) CHECK(c == TimeCounters{50, 0, 0, 0});
    }
  }

  TEST_CASE("single component r = 0.5, T = 2 averages 0.375") {
    const auto [mean, se] = monte_carlo(single_component_model(0.5, false), {.ticks = 2}, 100000);
    CHECK(std::abs(mean - enumerate_slot(0.5, 1, 2)) <= 3 * se);
  }

  TEST_CASE("hot standby substitute raises it to 0.59375") {
    const auto [mean, se] = monte_carlo(single_component_model(0.5, true), {.ticks = 2}, 100000);
    CHECK(std::abs(mean - enumerate_slot(0.5, 2, 2)) <= 3 * se);
  }

  TEST_CASE("stepping past the horizon is an error") {
    const auto m = two_node_model();
    auto st = initial_state(m, {.ticks = 2});
    step(st, m, {.ticks = 2});
    step(st, m, {.ticks = 2});
    CHECK_THROWS_AS(step(st, m, {.ticks = 2}), EndOfHorizonError);
  }

  TEST_CASE("run is deterministic") {
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
      const auto m = random_model(rng);
      const auto p = random_params(rng, m);
      CHECK(run(m, p) == run(m, p));
    }
  }

  TEST_CASE("single tick all-up run") {
    const auto trace = run(two_node_model(), {.ticks = 1});
    REQUIRE(trace.samples.size() == 1);
    CHECK(trace.samples[0].system == 1.0);
  }

  TEST_CASE("invalid model or params are rejected before running") {
    auto m = two_node_model();
    CHECK_THROWS_AS(run(m, {.ticks = 0}), ParamError);
    CHECK_THROWS_AS(run(m, {.ticks = 5, .reliability_override = 0.0}), ParamError);
    CHECK_THROWS_AS(run(m, {.ticks = 5, .pm_schedule = {{component_id(0), 3, 3}}}), ParamError);
    CHECK_THROWS_AS(run(m, {.ticks = 5, .pm_schedule = {{component_id(9), 3, 1}}}), ParamError);
    m.connectors[0].target = component_id(5);
    try {
      run(m, {.ticks = 5});
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.report().size() == 1);
    }
  }

  TEST_CASE("finite repair keeps a sampled failure down for exactly repair_ticks") {
    auto m = single_component_model(1e-12, false);
    m.components[0].repair_ticks = 3;
    const auto trace = run(m, {.ticks = 8});
    // fails at 1, recovers at 4, fails at 5, recovers at 8
    CHECK(trace.final_counters[0] == TimeCounters{2, 0, 6, 0});
    std::vector<std::pair<Tick, EventKind>> seen;
    for (const auto& e : trace.events) seen.emplace_back(e.tick, e.kind);
    CHECK(seen == std::vector<std::pair<Tick, EventKind>>{
                      {1, EventKind::Fail}, {4, EventKind::Recover}, {5, EventKind::Fail}, {8, EventKind::Recover}});
  }

  TEST_CASE("initially failed agent counts as failed at tick zero") {
    auto m = single_component_model(1.0, false);
    m.components[0].status = AgentStatus::Failed;
    m.components[0].repair_ticks = 3;
    CHECK(run(m, {.ticks = 5}).final_counters[0] == TimeCounters{3, 0, 2, 0});
  }

  TEST_CASE("preventive maintenance accrues TPM, corrective wins when mixed") {
    auto m = two_node_model();
    const auto trace = run(m, {.ticks = 12, .pm_schedule = {{component_id(0), 5, 2}}});
    CHECK(trace.final_counters[0] == TimeCounters{8, 0, 0, 4});  // ticks 5, 6, 10, 11

    m.connectors[0].reliability = 1e-12;  // connector fails at tick 1, never repaired
    CHECK(run(m, {.ticks = 12, .pm_schedule = {{component_id(0), 5, 2}}}).final_counters[0] ==
          TimeCounters{0, 0, 12, 0});
  }

  TEST_CASE("idle business accrues standby even while its service is down") {
    auto m = single_component_model(1e-12, false);
    m.businesses[0].duty_cycle = 0.0;
    CHECK(run(m, {.ticks = 10}).final_counters[0] == TimeCounters{0, 10, 0, 0});
  }

  TEST_CASE("substitution on the failure tick prevents corrective time") {
    auto m = single_component_model(1e-12, true);
    m.components[1].reliability = 1.0;
    const auto trace = run(m, {.ticks = 4});
    CHECK(trace.final_counters[0] == TimeCounters{4, 0, 0, 0});
    REQUIRE(trace.events.size() == 2);
    CHECK(trace.events[0].kind == EventKind::Fail);
    CHECK(trace.events[1] == Event{1, EventKind::SubstituteIn, component_id(0), component_id(0), component_id(1)});
  }

  TEST_CASE("time conservation and bounded A0 over random runs") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
      const auto m = random_model(rng);
      const auto p = random_params(rng, m);
      Simulation sim(m, p);
      while (!sim.done()) {
        sim.advance();
        for (const auto& c : sim.state().counters) CHECK(c.total() == sim.state().clock);
        for (double a : sim.state().last_sample.per_business) CHECK((a >= 0.0 && a <= 1.0));
      }
    }
  }

  TEST_CASE("without repair or reconfiguration the Normal set only shrinks") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
      const auto m = random_model(rng, {.repair = false});
      SimParams p = random_params(rng, m);
      p.reconfig_enabled = false;
      Simulation sim(m, p);
      auto previous = sim.state().statuses;
      while (!sim.done()) {
        sim.advance();
        const auto& now = sim.state().statuses;
        for (std::size_t s = 0; s < now.size(); ++s)
          if (previous[s] == AgentStatus::Failed) CHECK(now[s] == AgentStatus::Failed);
        previous = now;
      }
    }
  }

  TEST_CASE("paired seeds: reconfiguration dominates tick by tick") {
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
      const auto m = random_model(rng);
      auto p = random_params(rng, m);
      p.reconfig_enabled = true;
      auto off = p;
      off.reconfig_enabled = false;
      const auto with = run(m, p);
      const auto without = run(m, off);
      for (std::size_t t = 0; t < with.samples.size(); ++t)
        for (std::size_t b = 0; b < with.business_ids.size(); ++b) {
          // Same failure and call streams, so every up tick without
          // reconfiguration is also up with it.
          const auto w = with.accrual(t + 1, b), wo = without.accrual(t + 1, b);
          if (wo == TimeCounter::Operating || wo == TimeCounter::Standby)
            CHECK((w == TimeCounter::Operating || w == TimeCounter::Standby));
          CHECK(with.samples[t].per_business[b] >= without.samples[t].per_business[b]);
        }
      std::vector<Event> fails_with, fails_without;
      for (const auto& e : with.events)
        if (e.kind == EventKind::Fail || e.kind == EventKind::Recover) fails_with.push_back(e);
      for (const auto& e : without.events)
        if (e.kind == EventKind::Fail || e.kind == EventKind::Recover) fails_without.push_back(e);
      CHECK(fails_with == fails_without);
    }
  }

  TEST_CASE("replications are seeded seed + i and independent of thread count") {
    const auto m = generate({.components = 20, .connectors = 30, .services = 6, .businesses = 4, .substitutes_per_critical_agent = 1, .reliability = 0.99});
    SimParams p{.ticks = 200, .seed = 100, .replications = 6};
    const auto seq = run_replications(m, p, 0);
    const auto par = run_replications(m, p, 3);
    CHECK(seq == par);
    auto single = p;
    single.seed = 103;
    single.replications = 1;
    CHECK(seq[3].samples == run(m, single).samples);
  }

  TEST_CASE("event bus delivers every event to subscribers in order") {
    auto m = single_component_model(0.3, true);
    m.components[0].repair_ticks = 2;
    m.components[1].repair_ticks = 2;
    Simulation sim(m, {.ticks = 50, .seed = 2});
    std::vector<Event> seen;
    sim.bus().subscribe([&](const Event& e) { seen.push_back(e); });
    auto trace = std::move(sim).finish();
    CHECK(seen == trace.events);
    CHECK(std::is_sorted(seen.begin(), seen.end(), [](const Event& a, const Event& b) { return a.tick < b.tick; }));
  }
}

#include "renass/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "renass/engine.hpp"
#include "renass/metrics.hpp"
#include "renass/oracle.hpp"
#include "renass/scenario.hpp"

namespace renass::cli {

std::string format_probability(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

unsigned thread_limit() {
  const char* raw = std::getenv("RENASS_THREADS");
  if (!raw || !*raw) return std::max(1u, std::thread::hardware_concurrency());
  const std::string text(raw);
  std::size_t used = 0;
  long value = -1;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
  }
  if (used != text.size() || value < 0) throw std::invalid_argument("RENASS_THREADS must be a non-negative integer");
  return static_cast<unsigned>(value);
}

namespace {

struct BadFlags : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimFlags {
  std::string model_path;
  std::string out_path;
  Tick ticks = 1000;
  std::uint64_t seed = 1;
  bool no_reconfig = false;
  std::optional<double> reliability;
  std::vector<std::string> pm;
  std::uint32_t replications = 1;
};

PmWindow parse_pm(const std::string& spec) {
  // kind:index:period:duration
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 4) throw BadFlags("--pm expects kind:index:period:duration, got \"" + spec + "\"");
  PmWindow w;
  if (parts[0] == "component")
    w.agent.kind = AgentKind::Component;
  else if (parts[0] == "connector")
    w.agent.kind = AgentKind::Connector;
  else
    throw BadFlags("--pm agent kind must be component or connector");
  try {
    w.agent.index = static_cast<std::uint32_t>(std::stoul(parts[1]));
    w.period = std::stoull(parts[2]);
    w.duration = std::stoull(parts[3]);
  } catch (const std::exception&) {
    throw BadFlags("--pm fields must be non-negative integers: \"" + spec + "\"");
  }
  return w;
}

SimParams to_params(const SimFlags& f, bool reconfig) {
  SimParams p;
  p.ticks = f.ticks;
  p.seed = f.seed;
  p.reconfig_enabled = reconfig;
  p.reliability_override = f.reliability;
  for (const auto& spec : f.pm) p.pm_schedule.push_back(parse_pm(spec));
  p.replications = f.replications;
  return p;
}

// Opens --out or falls back to the given stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot open " + path + " for writing");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }
  void close(const std::string& path) {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError("failed writing " + path);
    } else {
      stream_->flush();
    }
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f, bool with_out) {
  cmd->add_option("--model", f.model_path, "Model JSON file")->required();
  cmd->add_option("--ticks", f.ticks, "Simulation horizon in ticks")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--reliability", f.reliability, "Override every agent's per-tick reliability")
      ->check(CLI::Range(0.0, 1.0));
  if (with_out) cmd->add_option("--out", f.out_path, "Output CSV (standard output when omitted)");
}

void add_pm_flag(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--pm", f.pm, "Preventive maintenance window kind:index:period:duration (repeatable)");
}

void add_reconfig_flags(CLI::App* cmd, SimFlags& f) {
  auto* on = cmd->add_flag("--reconfig", "Enable reconfiguration (default)");
  auto* off = cmd->add_flag("--no-reconfig", f.no_reconfig, "Disable reconfiguration");
  on->excludes(off);
}

int cmd_run(const SimFlags& f, const std::string& events_path, std::ostream& out, std::ostream& err) {
  const auto model = load(f.model_path);
  const auto params = to_params(f, !f.no_reconfig);
  check_params(params, model);
  const auto trace = renass::run(model, params);

  Output csv(f.out_path, out);
  auto& os = csv.get();
  os << "tick,system_a0";
  for (auto id : trace.business_ids) os << ",business_" << id << "_a0";
  os << '\n';
  for (const auto& s : trace.samples) {
    os << s.tick << ',' << format_probability(s.system);
    for (double v : s.per_business) os << ',' << format_probability(v);
    os << '\n';
  }
  csv.close(f.out_path);

  std::string sidecar = events_path;
  if (sidecar.empty() && !f.out_path.empty()) sidecar = f.out_path + ".events.csv";
  if (!sidecar.empty()) {
    std::ofstream ev(sidecar, std::ios::binary);
    if (!ev) throw IoError("cannot open " + sidecar + " for writing");
    ev << "tick,event,agent,from,to\n";
    for (const auto& e : trace.events) {
      ev << e.tick << ',' << to_string(e.kind) << ',' << to_string(e.agent) << ','
         << (e.from ? to_string(*e.from) : "") << ',' << (e.to ? to_string(*e.to) : "") << '\n';
    }
    if (!ev) throw IoError("failed writing " + sidecar);
  }
  (void)err;
  return kOk;
}

int cmd_compare(const SimFlags& f, std::ostream& out, std::ostream& err) {
  const auto model = load(f.model_path);
  const auto params = to_params(f, true);
  check_params(params, model);

  std::vector<ComparisonReport> reports(f.replications);
  for_each_replication(params, f.replications, thread_limit(), [&](std::size_t i, const SimParams& p) {
    auto off = p;
    off.reconfig_enabled = false;
    reports[i] = compare(renass::run(model, p), renass::run(model, off));
  });
  const auto agg = aggregate(reports);
  const bool with_se = f.replications > 1;

  Output csv(f.out_path, out);
  auto& os = csv.get();
  os << "tick,a0_reconfig,a0_baseline,gap";
  if (with_se) os << ",se_reconfig,se_baseline,se_gap";
  os << '\n';
  const auto& m = agg.mean;
  for (std::size_t i = 0; i < m.ticks.size(); ++i) {
    os << m.ticks[i] << ',' << format_probability(m.reconfig[i]) << ',' << format_probability(m.baseline[i]) << ','
       << format_probability(m.gap[i]);
    if (with_se)
      os << ',' << format_probability(agg.se_reconfig[i]) << ',' << format_probability(agg.se_baseline[i]) << ','
         << format_probability(agg.se_gap[i]);
    os << '\n';
  }
  csv.close(f.out_path);

  auto& summary = f.out_path.empty() ? err : out;
  summary << "min_gap=" << format_probability(m.min_gap) << '\n'
          << "gap_trend=" << format_probability(m.gap_trend) << '\n';
  return kOk;
}

int cmd_oracle_check(const SimFlags& f, std::ostream& out) {
  const auto model = load(f.model_path);
  const auto params = to_params(f, !f.no_reconfig);
  check_params(params, model);
  const auto result = oracle_check(model, params, thread_limit());
  out << "oracle=" << format_probability(result.oracle) << '\n'
      << "estimate=" << format_probability(result.estimate) << '\n'
      << "replications=" << result.replications << '\n'
      << "std_error=" << format_probability(result.std_error) << '\n'
      << "z=" << format_probability(result.z) << '\n';
  return result.passed() ? kOk : kOracleMismatch;
}

int cmd_generate(const GenParams& g, const std::string& out_path, std::ostream& out) {
  const auto model = generate(g);
  if (out_path.empty()) {
    out << to_json(model);
  } else {
    save(model, out_path);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent availability simulator for reconfigurable networked software", "renass"};
  app.require_subcommand(1);

  SimFlags run_flags, cmp_flags, oracle_flags;
  std::string events_path;
  auto* run_cmd = app.add_subcommand("run", "Simulate one run and write the availability series as CSV");
  add_sim_flags(run_cmd, run_flags, true);
  add_pm_flag(run_cmd, run_flags);
  add_reconfig_flags(run_cmd, run_flags);
  run_cmd->add_option("--events", events_path, "Events CSV (default <out>.events.csv)");

  auto* cmp_cmd = app.add_subcommand("compare", "Paired-seed runs with and without reconfiguration");
  add_sim_flags(cmp_cmd, cmp_flags, true);
  add_pm_flag(cmp_cmd, cmp_flags);
  cmp_cmd->add_option("--replications", cmp_flags.replications, "Independent replications (seed + i)")
      ->check(CLI::PositiveNumber);

  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare Monte Carlo A0 with the exact oracle");
  oracle_flags.replications = 100000;
  add_sim_flags(oracle_cmd, oracle_flags, false);
  add_reconfig_flags(oracle_cmd, oracle_flags);
  oracle_cmd->add_option("--replications", oracle_flags.replications, "Monte Carlo replications")
      ->check(CLI::PositiveNumber);

  GenParams gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a random model file");
  gen_cmd->add_option("--components", gen.components);
  gen_cmd->add_option("--connectors", gen.connectors);
  gen_cmd->add_option("--services", gen.services);
  gen_cmd->add_option("--businesses", gen.businesses);
  gen_cmd->add_option("--critical-fraction", gen.critical_fraction)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--substitutes", gen.substitutes_per_critical_agent, "Substitutes per critical agent");
  gen_cmd->add_option("--support-min", gen.support_size_range.first);
  gen_cmd->add_option("--support-max", gen.support_size_range.second);
  gen_cmd->add_option("--services-min", gen.services_per_business_range.first, "Services per business, minimum");
  gen_cmd->add_option("--services-max", gen.services_per_business_range.second, "Services per business, maximum");
  gen_cmd->add_option("--reliability", gen.reliability)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen_out, "Model JSON file (standard output when omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "renass: " << e.what() << "\n\n" << app.help();
    return kBadFlags;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, events_path, out, err);
    if (*cmp_cmd) return cmd_compare(cmp_flags, out, err);
    if (*oracle_cmd) return cmd_oracle_check(oracle_flags, out);
    if (*gen_cmd) return cmd_generate(gen, gen_out, out);
  } catch (const BadFlags& e) {
    err << "renass: " << e.what() << '\n';
    return kBadFlags;
  } catch (const ParamError& e) {
    err << "renass: " << e.what() << '\n';
    return kBadFlags;
  } catch (const std::invalid_argument& e) {
    err << "renass: " << e.what() << '\n';
    return kBadFlags;
  } catch (const GenerationError& e) {
    err << "renass: cannot generate model: " << e.what() << '\n';
    return kBadFlags;
  } catch (const ValidationError& e) {
    err << "renass: " << e.what() << '\n';
    return kInvalidModel;
  } catch (const ParseError& e) {
    err << "renass: malformed model file: " << e.what() << '\n';
    return kInvalidModel;
  } catch (const IoError& e) {
    err << "renass: " << e.what() << '\n';
    return kIoFailure;
  } catch (const UnsupportedConfigError& e) {
    err << "renass: outside the oracle domain: " << e.what() << '\n';
    return kOutsideOracleDomain;
  } catch (const SizeError& e) {
    err << "renass: outside the oracle domain: " << e.what() << '\n';
    return kOutsideOracleDomain;
  } catch (const std::exception& e) {
    err << "renass: internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kBadFlags;
}

}  // namespace renass::cli

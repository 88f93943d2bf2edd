// mssr: protocol projection, type checking, progress analysis, simulation,
// and concurrency-primitive encodings over one session-calculus DSL.
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mssr/comm.hpp"
#include "mssr/encodings.hpp"
#include "mssr/parser.hpp"
#include "mssr/printer.hpp"
#include "mssr/projection.hpp"
#include "mssr/reducer.hpp"
#include "mssr/semantics.hpp"
#include "mssr/typecheck.hpp"

using json = nlohmann::json;
using namespace mssr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;      // parse or type failure
constexpr int kExitUnsafe = 2;       // unsafe / deadlock
constexpr int kExitInconclusive = 3; // inconclusive / bound exceeded
constexpr int kExitUsage = 64;

bool use_color() {
  const char* v = std::getenv("MSSR_COLOR");
  std::string mode = v ? v : "auto";
  if (mode == "always") return true;
  if (mode == "never") return false;
  return isatty(fileno(stdout));
}

std::string paint(const std::string& s, const char* code) {
  if (!use_color()) return s;
  return std::string("\033[") + code + "m" + s + "\033[0m";
}

std::string green(const std::string& s) { return paint(s, "32"); }
std::string red(const std::string& s) { return paint(s, "31"); }
std::string yellow(const std::string& s) { return paint(s, "33"); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_check(const std::string& file, const std::string& proc_name, bool explain_flag,
              bool json_flag) {
  Program prog = load_file(file);
  TypeJudgment j = typecheck(prog, prog.process(proc_name));
  if (json_flag) {
    json out{{"schema", 1},
             {"command", "check"},
             {"process", proc_name},
             {"ok", j.ok}};
    if (!j.ok) {
      out["error"] = j.error;
      out["rule_path"] = j.error_path;
    } else {
      out["rules"] = json::array();
      for (const auto& r : rules_used(j.derivation)) out["rules"].push_back(r);
    }
    std::cout << out.dump(2) << "\n";
  } else if (j.ok) {
    std::cout << green("well-typed") << ": " << proc_name << "\n";
    if (explain_flag) std::cout << explain(j.derivation);
  } else {
    std::cout << red("ill-typed") << ": " << proc_name << "\n  " << j.error << "\n";
    if (explain_flag) {
      std::cout << "  rule path:";
      for (const auto& r : j.error_path) std::cout << " " << r;
      std::cout << "\n";
    }
  }
  return j.ok ? kExitOk : kExitFailure;
}

int cmd_project(const std::string& file, const std::string& global_name, const std::string& role,
                const std::string& domain, bool json_flag) {
  Program prog = load_file(file);
  GlobalPtr g = prog.global(global_name);
  std::vector<DomainSet> targets;
  if (!role.empty()) {
    targets.push_back(DomainSet({Role{role}}));
  } else if (!domain.empty()) {
    std::vector<Role> rs;
    std::stringstream ss(domain);
    std::string item;
    while (std::getline(ss, item, ',')) rs.push_back(Role{item});
    targets.push_back(DomainSet(std::move(rs)));
  } else {
    targets = projection_targets(g);
  }
  json out{{"schema", 1}, {"command", "project"}, {"global", global_name}};
  out["projections"] = json::array();
  bool all_ok = true;
  for (const auto& t : targets) {
    ProjectResult r = project(g, t);
    if (json_flag) {
      json entry;
      if (t.roles.size() == 1)
        entry["role"] = t.roles[0].name;
      else
        entry["domain"] = t.to_string();
      if (r.defined())
        entry["local_type"] = pretty(r.type);
      else
        entry["undefined"] = r.reason;
      out["projections"].push_back(entry);
    } else if (r.defined()) {
      std::cout << t.to_string() << ": " << pretty(r.type) << "\n";
    } else {
      std::cout << t.to_string() << ": " << red("undefined") << " (" << r.reason << ")\n";
    }
    all_ok = all_ok && r.defined();
  }
  if (json_flag) std::cout << out.dump(2) << "\n";
  return all_ok ? kExitOk : kExitFailure;
}

int cmd_consistency(const std::string& file, const std::string& global_name, bool json_flag) {
  Program prog = load_file(file);
  GlobalPtr g = prog.global(global_name);
  auto ctx = projection_context(g, "s");
  if (!ctx) {
    std::cout << red("not well-formed") << ": " << global_name << "\n";
    for (const auto& f : well_formed(g).failures) std::cout << "  " << f << "\n";
    return kExitFailure;
  }
  ConsistencyResult r = check_consistency(g, *ctx);
  if (json_flag) {
    json out{{"schema", 1},
             {"command", "consistency"},
             {"global", global_name},
             {"consistent", r.consistent},
             {"bound_hit", r.bound_hit}};
    if (!r.consistent) {
      out["trace"] = r.trace;
      out["mismatch"] = r.mismatch;
    }
    std::cout << out.dump(2) << "\n";
  } else if (r.consistent) {
    std::cout << green("consistent") << ": " << global_name << " and its projection\n";
  } else {
    std::cout << red("inconsistent") << ": " << global_name << "\n";
    for (const auto& step : r.trace) std::cout << "  after " << step << "\n";
    std::cout << "  " << r.mismatch << "\n";
  }
  return r.consistent ? kExitOk : kExitFailure;
}

int cmd_progress(const std::string& file, const std::string& proc_name, bool json_flag) {
  Program prog = load_file(file);
  ProgressResult r = check_progress(prog.process(proc_name));
  std::string verdict = r.status == ProgressStatus::Safe         ? "safe"
                        : r.status == ProgressStatus::Unsafe     ? "unsafe"
                                                                 : "inconclusive";
  if (json_flag) {
    json out{{"schema", 1}, {"command", "progress"}, {"process", proc_name},
             {"verdict", verdict}};
    if (r.witness)
      out["witness"] = {r.witness->first.to_string(), r.witness->second.to_string()};
    if (!r.residue.empty()) out["residue"] = r.residue;
    std::cout << out.dump(2) << "\n";
  } else {
    if (r.status == ProgressStatus::Safe) std::cout << green("safe") << "\n";
    if (r.status == ProgressStatus::Unsafe)
      std::cout << red("unsafe") << ": " << r.witness->first.to_string() << " before its dual "
                << r.witness->second.to_string() << "\n";
    if (r.status == ProgressStatus::Inconclusive) {
      std::cout << yellow("inconclusive") << "\n";
      for (const auto& m : r.residue) std::cout << "  unresolved: " << m << "\n";
    }
  }
  switch (r.status) {
    case ProgressStatus::Safe: return kExitOk;
    case ProgressStatus::Unsafe: return kExitUnsafe;
    case ProgressStatus::Inconclusive: return kExitInconclusive;
  }
  return kExitFailure;
}

void print_trace(const Trace& t) {
  int k = 0;
  for (const auto& [redex, term] : t.steps) std::cout << k++ << ": " << redex.display() << "\n";
}

json trace_json(const Trace& t) {
  json steps = json::array();
  for (const auto& [redex, term] : t.steps) steps.push_back(redex.display());
  return steps;
}

int cmd_simulate(const std::string& file, const std::string& proc_name, uint64_t seed, int fuel,
                 bool exhaustive, size_t states, int depth, int unfolds, int workers,
                 bool json_flag) {
  Program prog = load_file(file);
  ProcPtr p = prog.process(proc_name);
  if (exhaustive) {
    ExploreResult r = explore(p, states, depth, unfolds, workers);
    std::string verdict = r.status == ExploreStatus::DeadlockFree    ? "deadlock-free"
                          : r.status == ExploreStatus::DeadlockFound ? "deadlock"
                                                                     : "bound-exceeded";
    if (json_flag) {
      json out{{"schema", 1},      {"command", "simulate"}, {"mode", "exhaustive"},
               {"process", proc_name}, {"verdict", verdict},    {"states", r.states}};
      if (r.status == ExploreStatus::DeadlockFound) {
        out["trace"] = trace_json(r.trace);
        out["stuck_term"] = pretty(r.trace.final_term);
      }
      std::cout << out.dump(2) << "\n";
    } else {
      if (r.status == ExploreStatus::DeadlockFree)
        std::cout << green("deadlock-free") << " (" << r.states << " states)\n";
      if (r.status == ExploreStatus::DeadlockFound) {
        std::cout << red("deadlock") << " reachable in " << r.trace.steps.size() << " step(s)\n";
        print_trace(r.trace);
        std::cout << "stuck: " << pretty(r.trace.final_term) << "\n";
      }
      if (r.status == ExploreStatus::BoundExceeded)
        std::cout << yellow("bound exceeded") << " (" << r.states << " states)\n";
    }
    switch (r.status) {
      case ExploreStatus::DeadlockFree: return kExitOk;
      case ExploreStatus::DeadlockFound: return kExitUnsafe;
      case ExploreStatus::BoundExceeded: return kExitInconclusive;
    }
  }
  Trace t = run(p, seed, fuel);
  std::string verdict = t.terminal == Terminal::Terminated    ? "terminated"
                        : t.terminal == Terminal::Deadlock    ? "deadlock"
                                                              : "fuel-exhausted";
  if (json_flag) {
    json out{{"schema", 1},          {"command", "simulate"}, {"mode", "seeded"},
             {"process", proc_name}, {"seed", seed},          {"verdict", verdict},
             {"trace", trace_json(t)}};
    std::cout << out.dump(2) << "\n";
  } else {
    print_trace(t);
    if (t.terminal == Terminal::Terminated) std::cout << green("terminated") << "\n";
    if (t.terminal == Terminal::Deadlock)
      std::cout << red("deadlock") << ": " << pretty(t.final_term) << "\n";
    if (t.terminal == Terminal::FuelExhausted) std::cout << yellow("fuel exhausted") << "\n";
  }
  switch (t.terminal) {
    case Terminal::Terminated: return kExitOk;
    case Terminal::Deadlock: return kExitUnsafe;
    case Terminal::FuelExhausted: return kExitInconclusive;
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSSR session types: projection, typing, progress, simulation, encodings"};
  app.require_subcommand(1);

  std::string file, proc_name, global_name, role, domain, script_path;
  bool explain_flag = false, json_flag = false, exhaustive = false;
  uint64_t seed = 0;
  int fuel = 1000, depth = 100, unfolds = 1 << 20, workers = 1, senders = 1, buffer = 0,
      sends = 1, threads = 1;
  size_t states = 10000;

  auto* check = app.add_subcommand("check", "type-check a process against Fig. 5-style rules");
  check->add_option("file", file)->required();
  check->add_option("--process", proc_name)->required();
  check->add_flag("--explain", explain_flag);
  check->add_flag("--json", json_flag);

  auto* project_cmd = app.add_subcommand("project", "project a global type");
  project_cmd->add_option("file", file)->required();
  project_cmd->add_option("--global", global_name)->required();
  project_cmd->add_option("--role", role);
  project_cmd->add_option("--domain", domain, "comma-separated existential domain");
  project_cmd->add_flag("--json", json_flag);

  auto* consistency = app.add_subcommand("consistency", "check a global type against its projection");
  consistency->add_option("file", file)->required();
  consistency->add_option("--global", global_name)->required();
  consistency->add_flag("--json", json_flag);

  auto* progress = app.add_subcommand("progress", "communication analysis for deadlock-freedom");
  progress->add_option("file", file)->required();
  progress->add_option("--process", proc_name)->required();
  progress->add_flag("--json", json_flag);

  auto* simulate = app.add_subcommand("simulate", "run the operational semantics");
  simulate->add_option("file", file)->required();
  simulate->add_option("--process", proc_name)->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--fuel", fuel);
  simulate->add_flag("--exhaustive", exhaustive);
  simulate->add_option("--states", states);
  simulate->add_option("--depth", depth);
  simulate->add_option("--unfolds", unfolds);
  simulate->add_option("--workers", workers);
  simulate->add_flag("--json", json_flag);

  auto* encode = app.add_subcommand("encode", "emit concurrency-primitive models as DSL text");
  encode->require_subcommand(1);
  auto* mpsc = encode->add_subcommand("mpsc", "multi-producer single-consumer channel");
  mpsc->add_option("--senders", senders)->required();
  mpsc->add_option("--buffer", buffer, "0 for synchronous");
  mpsc->add_option("--sends", sends, "sends per sender");
  auto* mutex_cmd = encode->add_subcommand("mutex", "mutual exclusion lock");
  mutex_cmd->add_option("--threads", threads)->required();
  mutex_cmd->add_option("--script", script_path)->required();
  auto* rwlock_cmd = encode->add_subcommand("rwlock", "read-write lock");
  rwlock_cmd->add_option("--threads", threads)->required();
  rwlock_cmd->add_option("--script", script_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(file, proc_name, explain_flag, json_flag);
    if (project_cmd->parsed())
      return cmd_project(file, global_name, role, domain, json_flag);
    if (consistency->parsed()) return cmd_consistency(file, global_name, json_flag);
    if (progress->parsed()) return cmd_progress(file, proc_name, json_flag);
    if (simulate->parsed())
      return cmd_simulate(file, proc_name, seed, fuel, exhaustive, states, depth, unfolds,
                          workers, json_flag);
    if (encode->parsed()) {
      Encoding enc;
      if (mpsc->parsed()) {
        enc = buffer == 0 ? encode_mpsc_sync(senders, sends)
                          : encode_mpsc_buffered(senders, buffer, sends);
      } else if (mutex_cmd->parsed()) {
        enc = encode_mutex(parse_mutex_script(read_file(script_path), threads));
      } else {
        enc = encode_rwlock(parse_rwlock_script(read_file(script_path), threads));
      }
      std::cout << enc.dsl;
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const EncodingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

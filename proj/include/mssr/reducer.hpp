// Operational semantics: redex enumeration, single steps, seeded random runs
// and exhaustive breadth-first exploration (the deadlock oracle).
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssr/ast.hpp"

namespace mssr {

struct Redex {
  enum class Kind { BranchSync, ExistSync, CallUnfold };
  Kind kind = Kind::BranchSync;
  std::vector<int> arena;   // nested-arena address (component indices)
  int receiver = -1;        // component index of the branching side
  int sender = -1;          // component index of the selecting side
  int callee = -1;          // component index of the call
  std::string session;
  Role receiver_role;
  Role sender_role;
  std::string label;
  std::string call_name;

  std::string key() const;      // canonical ordering key
  std::string display() const;  // sender[role] --label--> receiver[role]

  friend bool operator<(const Redex& a, const Redex& b) { return a.key() < b.key(); }
  friend bool operator==(const Redex& a, const Redex& b) { return a.key() == b.key(); }
};

struct StaleRedex : std::runtime_error {
  explicit StaleRedex(const std::string& msg) : std::runtime_error(msg) {}
};

// All synchronization and call-unfolding redexes of the canonical form of p.
std::vector<Redex> enabled_redexes(const ProcPtr& p);

// Contracts one redex; throws StaleRedex when r does not match p.
ProcPtr step(const ProcPtr& p, const Redex& r);

enum class Terminal { Terminated, Deadlock, FuelExhausted };

struct Trace {
  std::vector<std::pair<Redex, ProcPtr>> steps;
  Terminal terminal = Terminal::Terminated;
  ProcPtr final_term;
};

// Repeatedly contracts a uniformly seeded redex; deterministic in (p, seed,
// fuel).
Trace run(const ProcPtr& p, uint64_t seed, int fuel);

enum class ExploreStatus { DeadlockFree, DeadlockFound, BoundExceeded };

struct ExploreResult {
  ExploreStatus status = ExploreStatus::DeadlockFree;
  Trace trace;          // minimal-length witness for DeadlockFound
  size_t states = 0;    // distinct states visited
};

// Exhaustive BFS over canonical states. DeadlockFree only when the reachable
// set was exhausted without hitting any bound; unfold_bound caps call
// unfoldings along a path separately from the depth bound.
ExploreResult explore(const ProcPtr& p, size_t state_bound, int depth_bound,
                      int unfold_bound = 1 << 20, int workers = 1);

} // namespace mssr

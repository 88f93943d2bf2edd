// The process type system: judgment Theta . Gamma |- P with existential
// branching, domain selection, projection wiring at restrictions, and
// delegation.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mssr/ast.hpp"
#include "mssr/context.hpp"
#include "mssr/parser.hpp"

namespace mssr {

// Theta: basic-sorted variables and process-variable signatures.
struct ProcessVarContext {
  std::map<std::string, Sort> vars;
  std::map<std::string, std::vector<TypeExpr>> process_vars;
};

struct Derivation {
  std::string rule;
  std::string subject; // short description of the typed term
  std::string gamma;   // context snapshot, for replay and --explain
  std::vector<std::shared_ptr<Derivation>> children;
};
using DerivationPtr = std::shared_ptr<Derivation>;

struct TypeJudgment {
  bool ok = false;
  DerivationPtr derivation;            // present on success
  std::string error;                   // deepest failing premise
  std::vector<std::string> error_path; // rule trail down to the failure
};

// The environment of declared global types, consulted at restrictions.
using GlobalEnv = std::map<std::string, GlobalPtr>;

TypeJudgment typecheck(const ProcessVarContext& theta, const ChannelContext& gamma,
                       const ProcPtr& p, const GlobalEnv& globals = {});

TypeJudgment typecheck(const Program& program, const ProcPtr& p);

// Collects every rule name used in a derivation.
std::set<std::string> rules_used(const DerivationPtr& d);

// Renders the derivation as an indented tree.
std::string explain(const DerivationPtr& d);

// Re-runs the checker on the judgment's recorded root and compares the
// resulting rule tree node by node.
bool replay_derivation(const ProcessVarContext& theta, const ChannelContext& gamma,
                       const ProcPtr& p, const GlobalEnv& globals, const DerivationPtr& d);

struct ProbeResult {
  bool ok = false;
  std::string violation;               // residue that lost typability
  std::vector<std::string> path;       // actions leading there
};

// Executable subject reduction: follows every reduction path of p (to the
// given bounds) and checks that some context reachable through communication
// steps types the residue.
ProbeResult subject_reduction_probe(const Program& program, const ProcPtr& p, int max_steps,
                                    int max_unfolds = 3);

} // namespace mssr

// Session pi-calculus process AST: channels, payloads, process terms,
// substitution, canonical forms and structural equivalence.
#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mssr/types.hpp"

namespace mssr {

// A channel is either a variable or the endpoint s[p] of role p in session s.
struct Channel {
  std::string base;          // variable name, or session name
  std::optional<Role> role;  // set for s[p]

  static Channel variable(std::string x) { return Channel{std::move(x), std::nullopt}; }
  static Channel session_role(std::string s, Role p) {
    return Channel{std::move(s), std::move(p)};
  }
  bool is_variable() const { return !role.has_value(); }
  std::string to_string() const { return role ? base + "[" + role->name + "]" : base; }

  friend bool operator==(const Channel& a, const Channel& b) {
    return a.base == b.base && a.role == b.role;
  }
  friend bool operator<(const Channel& a, const Channel& b) {
    if (a.base != b.base) return a.base < b.base;
    return a.role < b.role;
  }
};

struct Constant {
  Sort sort = Sort::Unit;
  std::string text; // canonical literal spelling, e.g. 100, true, "bread", ()

  friend bool operator==(const Constant& a, const Constant& b) {
    return a.sort == b.sort && a.text == b.text;
  }
};

// Data transmitted in a communication: a constant or a channel (a variable
// payload is a variable channel).
struct Payload {
  enum class Kind { Constant, ChannelValue };
  Kind kind = Kind::Constant;
  Constant constant;
  Channel channel;

  static Payload from_constant(Constant c) {
    Payload p;
    p.kind = Kind::Constant;
    p.constant = std::move(c);
    return p;
  }
  static Payload from_channel(Channel c) {
    Payload p;
    p.kind = Kind::ChannelValue;
    p.channel = std::move(c);
    return p;
  }
  static Payload unit() { return from_constant(Constant{Sort::Unit, "()"}); }
  bool is_variable() const { return kind == Kind::ChannelValue && channel.is_variable(); }
  std::string to_string() const {
    return kind == Kind::Constant ? constant.text : channel.to_string();
  }

  friend bool operator==(const Payload& a, const Payload& b) {
    if (a.kind != b.kind) return false;
    return a.kind == Kind::Constant ? a.constant == b.constant : a.channel == b.channel;
  }
};

struct Process;
using ProcPtr = std::shared_ptr<const Process>;

struct BranchArm {
  std::string label;
  std::string var; // bound in body
  ProcPtr body;
};

struct ExistArm {
  Role partner;
  std::string label;
  std::string var;
  ProcPtr body;
};

struct Param {
  std::string name;
  TypeExpr sort;
};

struct Process {
  enum class Kind {
    Inaction,
    Restriction,
    Parallel,
    Selection,
    Branching,
    ExistBranching,
    Definition,
    Call
  };
  Kind kind = Kind::Inaction;

  // Restriction
  std::string session;
  std::string global_name; // declared protocol for (T-new); may be empty
  ProcPtr body;

  // Parallel, kept flattened
  std::vector<ProcPtr> parts;

  // Selection / Branching / ExistBranching
  Channel subject;
  Role partner;       // Selection / Branching
  std::string label;  // Selection
  Payload payload;    // Selection
  ProcPtr cont;       // Selection
  std::vector<BranchArm> arms;   // Branching
  std::vector<ExistArm> rows;    // ExistBranching

  // Definition
  std::string def_name;
  std::vector<Param> params;
  ProcPtr def_body;
  ProcPtr scope;

  // Call
  std::string call_name;
  std::vector<Payload> args;

  static ProcPtr inaction();
  static ProcPtr restriction(std::string session, std::string global_name, ProcPtr body);
  static ProcPtr parallel(std::vector<ProcPtr> parts);
  static ProcPtr selection(Channel subj, Role to, std::string label, Payload d, ProcPtr cont);
  static ProcPtr branching(Channel subj, Role from, std::vector<BranchArm> arms);
  static ProcPtr exist_branching(Channel subj, std::vector<ExistArm> rows);
  static ProcPtr definition(std::string name, std::vector<Param> params, ProcPtr body,
                            ProcPtr scope);
  static ProcPtr call(std::string name, std::vector<Payload> args);
};

// Capture-avoiding replacement of every free occurrence of `var` by `value`.
// Total: clashing binders are renamed fresh.
ProcPtr substitute(const ProcPtr& p, const std::string& var, const Payload& value);

// Simultaneous substitution (used by call unfolding).
ProcPtr substitute_all(const ProcPtr& p, const std::vector<std::string>& vars,
                       const std::vector<Payload>& values);

// Replaces every call to `name` by inaction (communication analysis of
// recursive definitions).
ProcPtr zero_calls(const ProcPtr& p, const std::string& name);

// Canonical form: parallel compositions flattened into a sorted multiset with
// inert components dropped, arms/rows sorted. Binder names are kept; equality
// goes through encode() which alpha-normalizes them.
ProcPtr canon(const ProcPtr& p);

// Alpha- and AC-invariant encoding; equal strings <=> structurally equivalent.
std::string encode(const ProcPtr& p);

// True iff the terms are equal up to alpha renaming, commutativity and
// associativity of parallel composition (and garbage-collection of inert
// parallel components).
bool structurally_equivalent(const ProcPtr& p, const ProcPtr& q);

// True iff every leaf under restrictions/definitions/parallel is inaction.
bool inert(const ProcPtr& p);

// Roles r such that some subject s[r] occurs in p.
std::set<Role> roles_of(const ProcPtr& p);

// True iff every occurrence of Call(name, ...) in def_body sits under at
// least one communication prefix.
bool check_guarded(const ProcPtr& def_body, const std::string& name);

// Names of definitions called at guard depth zero (for letrec cycle checks).
std::set<std::string> unguarded_calls(const ProcPtr& def_body);

// All free channel variables of p.
std::set<std::string> free_channel_vars(const ProcPtr& p);

// Variables used as the base of a subject channel or re-sent as a payload
// somewhere in p (treated as channel-like by the communication analysis).
std::set<std::string> channel_like_vars(const ProcPtr& p);

// Session names with a free occurrence in p (subjects and channel payloads).
std::set<std::string> free_sessions(const ProcPtr& p);

} // namespace mssr

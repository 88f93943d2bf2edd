// The communication type system: directed events, mobility records, order
// relations, unification, transitive closure, and the safety verdict.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mssr/ast.hpp"

namespace mssr {

// One endpoint c[r]: channel c talking to role r.
struct Endpoint {
  Channel chan;
  Role partner;

  std::string to_string() const { return chan.to_string() + "[" + partner.name + "]"; }
  friend bool operator==(const Endpoint& a, const Endpoint& b) {
    return a.chan == b.chan && a.partner == b.partner;
  }
  friend bool operator<(const Endpoint& a, const Endpoint& b) {
    if (!(a.chan == b.chan)) return a.chan < b.chan;
    return a.partner < b.partner;
  }
};

// The i-th communication action of endpoint c[r] with label l.
struct DirectedEvent {
  Endpoint ep;
  std::string label;
  int index = 1;

  std::string to_string() const {
    return "(" + ep.to_string() + ", " + label + ", " + std::to_string(index) + ")";
  }
  friend bool operator==(const DirectedEvent& a, const DirectedEvent& b) {
    return a.ep == b.ep && a.label == b.label && a.index == b.index;
  }
  friend bool operator<(const DirectedEvent& a, const DirectedEvent& b) {
    if (!(a.ep == b.ep)) return a.ep < b.ep;
    if (a.label != b.label) return a.label < b.label;
    return a.index < b.index;
  }
};

// Dual of (s[p][q], l, i) is (s[q][p], l, i); undefined for variable
// channels.
std::optional<DirectedEvent> dual(const DirectedEvent& e);

// Communication history of a channel before it moves: count per endpoint.
struct History {
  std::map<Endpoint, int> entries;

  std::string to_string() const;
  friend bool operator==(const History& a, const History& b) { return a.entries == b.entries; }
  friend bool operator<(const History& a, const History& b) { return a.entries < b.entries; }
};

// A directed event that also transfers a channel.
struct MobilityEvent {
  DirectedEvent event;
  Channel moved;
  History history;

  std::string to_string() const;
  friend bool operator==(const MobilityEvent& a, const MobilityEvent& b) {
    return a.event == b.event && a.moved == b.moved && a.history == b.history;
  }
  friend bool operator<(const MobilityEvent& a, const MobilityEvent& b) {
    if (!(a.event == b.event)) return a.event < b.event;
    if (!(a.moved == b.moved)) return a.moved < b.moved;
    return a.history < b.history;
  }
};

struct OrderRelation {
  std::set<std::pair<DirectedEvent, DirectedEvent>> pairs;

  bool contains(const DirectedEvent& a, const DirectedEvent& b) const {
    return pairs.count({a, b}) != 0;
  }
  std::string to_string() const;
};

// Index shifts ("k-th index increase" with respect to endpoint alpha).
DirectedEvent bump_event(const DirectedEvent& e, const Endpoint& alpha, int k = 1);
History bump_history(const History& a, const Endpoint& alpha, int k = 1);
MobilityEvent bump_mobility(const MobilityEvent& me, const Endpoint& alpha, int k = 1);
OrderRelation bump_relation(const OrderRelation& r, const Endpoint& alpha, int k = 1);
std::set<MobilityEvent> bump_mobility_set(const std::set<MobilityEvent>& m,
                                          const Endpoint& alpha, int k = 1);
// Union of per-entry bumps over a whole history.
OrderRelation bump_set_by_history(const OrderRelation& r, const History& a);
std::set<MobilityEvent> bump_set_by_history(const std::set<MobilityEvent>& m, const History& a);

struct CommTriple {
  std::set<DirectedEvent> least;     // U: events nothing precedes
  std::set<MobilityEvent> mobility;  // M
  OrderRelation order;               // R
};

// Communication context for process variables.
using CommContext = std::map<std::string, CommTriple>;

struct UnboundProcessVar : std::runtime_error {
  explicit UnboundProcessVar(const std::string& n)
      : std::runtime_error("unbound process variable " + n) {}
};

// Structural analysis (the communication typing rules).
CommTriple analyze(const CommContext& delta, const ProcPtr& p);

struct UnifyResult {
  std::set<MobilityEvent> mobility; // residue left unmatched
  OrderRelation order;
  int applications = 0;
};

// Applies the unification rule to a fixpoint in canonical pair order:
// matching sender/receiver mobility duals transfer the moved channel's
// history onto the receiver's variable and substitute the channel for it.
UnifyResult unify(const std::set<MobilityEvent>& m, const OrderRelation& r);

// Least fixpoint of e1 < e2, dual(e2) < e3 ==> e1 < e3.
OrderRelation transitive_close(const OrderRelation& r);

struct SafetyResult {
  bool safe = true;
  std::optional<std::pair<DirectedEvent, DirectedEvent>> witness;
};

SafetyResult is_safe(const OrderRelation& r);

enum class ProgressStatus { Safe, Unsafe, Inconclusive };

struct ProgressResult {
  ProgressStatus status = ProgressStatus::Safe;
  std::optional<std::pair<DirectedEvent, DirectedEvent>> witness; // Unsafe
  std::vector<std::string> residue; // Inconclusive: leftovers after unify
  OrderRelation closed_order;
};

// analyze -> unify to fixpoint -> transitive closure -> safety.
ProgressResult check_progress(const ProcPtr& p);

} // namespace mssr

// Projection of global types onto roles and existential domains, the merge
// operator, and well-formedness.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mssr/types.hpp"

namespace mssr {

// All roles occurring in interactions of g (payload protocols excluded).
std::set<Role> roles(const GlobalPtr& g);

// The domains of all existential branching nodes of g, deduplicated.
std::set<DomainSet> exdom(const GlobalPtr& g);

struct ProjectResult {
  LocalPtr type;      // null when undefined
  std::string reason; // human-readable clash description when undefined

  bool defined() const { return type != nullptr; }
};

ProjectResult project(const GlobalPtr& g, const DomainSet& onto);
ProjectResult project(const GlobalPtr& g, const Role& onto);

struct MergeResult {
  LocalPtr type;
  std::string reason;

  bool defined() const { return type != nullptr; }
};

MergeResult merge(const LocalPtr& a, const LocalPtr& b);

struct WellFormedReport {
  bool ok = false;
  // One line per failed projection target.
  std::vector<std::string> failures;
};

WellFormedReport well_formed(const GlobalPtr& g);

// The projection targets of g: every role not covered by an existential
// domain as a singleton, plus every domain as a unit. Domain-covered roles
// receive their local type through the domain entry.
std::vector<DomainSet> projection_targets(const GlobalPtr& g);

// The proj(G) bundle: target -> local type. Fails (nullopt) when g is not
// well-formed.
std::optional<std::map<DomainSet, LocalPtr>> projection_bundle(const GlobalPtr& g);

} // namespace mssr

// Channel typing contexts and type-level actions.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mssr/types.hpp"

namespace mssr {

// Key of one context entry: a channel variable, an endpoint s[p], or a
// domain channel s[A].
struct ChannelKey {
  enum class Kind { Var, SessionRole, SessionDomain };
  Kind kind = Kind::Var;
  std::string name;   // variable name, or session name
  Role role;          // SessionRole
  DomainSet domain;   // SessionDomain

  static ChannelKey var(std::string x) {
    ChannelKey k;
    k.kind = Kind::Var;
    k.name = std::move(x);
    return k;
  }
  static ChannelKey session_role(std::string s, Role p) {
    ChannelKey k;
    k.kind = Kind::SessionRole;
    k.name = std::move(s);
    k.role = std::move(p);
    return k;
  }
  static ChannelKey session_domain(std::string s, DomainSet a) {
    ChannelKey k;
    k.kind = Kind::SessionDomain;
    k.name = std::move(s);
    k.domain = std::move(a);
    return k;
  }
  std::string to_string() const;

  friend bool operator==(const ChannelKey& a, const ChannelKey& b) {
    return a.kind == b.kind && a.name == b.name && a.role == b.role && a.domain == b.domain;
  }
  friend bool operator<(const ChannelKey& a, const ChannelKey& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.name != b.name) return a.name < b.name;
    if (!(a.role == b.role)) return a.role < b.role;
    return a.domain < b.domain;
  }
};

struct ChannelContext {
  std::map<ChannelKey, LocalPtr> entries;

  bool has(const ChannelKey& k) const { return entries.count(k) != 0; }
  LocalPtr get(const ChannelKey& k) const;
  void set(const ChannelKey& k, LocalPtr t) { entries[std::move(k)] = std::move(t); }
  void erase(const ChannelKey& k) { entries.erase(k); }
  bool all_end() const;
  std::string to_string() const;
  std::string encode_canonical() const;

  // Disjoint union; nullopt when the domains overlap.
  static std::optional<ChannelContext> disjoint_union(const ChannelContext& a,
                                                      const ChannelContext& b);
};

// An action of the local-type transition semantics: a single-sided output or
// input, or a synchronized communication.
struct TypeAction {
  enum class Kind { Output, Input, Comm };
  Kind kind = Kind::Comm;
  // Output: subject is a role or a whole domain (the L-select' case).
  std::optional<Role> subject_role;
  std::optional<DomainSet> subject_domain;
  Role partner;        // Output/Input: the other side
  Role sender;         // Comm
  Role receiver;       // Comm
  std::string label;
  TypeExpr payload;

  std::string to_string() const;
};

} // namespace mssr

// Global and local session type ASTs with existential branching.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mssr {

struct Role {
  std::string name;

  friend bool operator==(const Role& a, const Role& b) { return a.name == b.name; }
  friend bool operator!=(const Role& a, const Role& b) { return !(a == b); }
  friend bool operator<(const Role& a, const Role& b) { return a.name < b.name; }
};

enum class Sort { Int, Bool, Real, Str, Unit };

const char* sort_name(Sort s);

struct GlobalType;
struct LocalType;
using GlobalPtr = std::shared_ptr<const GlobalType>;
using LocalPtr = std::shared_ptr<const LocalType>;

// Payload type of a message: a basic sort, a protocol <G>, or a channel type T.
struct TypeExpr {
  enum class Kind { Basic, GlobalPayload, LocalPayload };
  Kind kind = Kind::Basic;
  Sort sort = Sort::Unit;
  GlobalPtr global;
  LocalPtr local;

  static TypeExpr basic(Sort s);
  static TypeExpr protocol(GlobalPtr g);
  static TypeExpr channel(LocalPtr t);
};

// A non-empty sorted, duplicate-free set of roles: the domain of one
// existential interaction, projected as a unit.
struct DomainSet {
  std::vector<Role> roles;

  explicit DomainSet(std::vector<Role> rs = {});
  bool contains(const Role& r) const;
  std::string to_string() const;

  friend bool operator==(const DomainSet& a, const DomainSet& b) { return a.roles == b.roles; }
  friend bool operator<(const DomainSet& a, const DomainSet& b) { return a.roles < b.roles; }
};

struct GlobalBranch {
  std::string label;
  TypeExpr payload;
  GlobalPtr cont;
};

struct GlobalRow {
  Role sender;
  std::string label;
  TypeExpr payload;
  GlobalPtr cont;
};

struct GlobalType {
  enum class Kind { Comm, Exist, Rec, Var, End };
  Kind kind = Kind::End;

  // Comm
  Role sender;
  Role receiver;
  std::vector<GlobalBranch> branches;
  // Exist: rows (distinct senders), ex_receiver
  std::vector<GlobalRow> rows;
  Role ex_receiver;
  // Rec / Var
  std::string var;
  GlobalPtr body;

  static GlobalPtr end_type();
  static GlobalPtr make_var(std::string v);
  static GlobalPtr rec(std::string v, GlobalPtr b);
  static GlobalPtr comm(Role from, Role to, std::vector<GlobalBranch> bs);
  static GlobalPtr exist(std::vector<GlobalRow> rs, Role to);
};

struct LocalBranch {
  std::string label;
  TypeExpr payload;
  LocalPtr cont;
  // Set on the branches of a domain-projected selection: the member of the
  // domain that performs this branch. Absent on ordinary selections.
  std::optional<Role> sender;
};

struct LocalRow {
  Role partner;
  std::string label;
  TypeExpr payload;
  LocalPtr cont;
};

struct LocalType {
  enum class Kind { Select, Branch, ExistBranch, Rec, Var, End };
  Kind kind = Kind::End;

  Role partner;                      // Select / Branch
  std::vector<LocalBranch> branches; // Select / Branch
  std::vector<LocalRow> rows;        // ExistBranch
  std::string var;                   // Rec / Var
  LocalPtr body;                     // Rec

  static LocalPtr end_type();
  static LocalPtr make_var(std::string v);
  static LocalPtr rec(std::string v, LocalPtr b);
  static LocalPtr select(Role to, std::vector<LocalBranch> bs);
  static LocalPtr branch(Role from, std::vector<LocalBranch> bs);
  static LocalPtr exist(std::vector<LocalRow> rs);
};

// Canonical string encodings. Recursion binders are numbered by binding
// depth and branches/rows are sorted, so two encodings compare equal exactly
// when the types are equal up to alpha renaming and branch order.
std::string encode(const GlobalPtr& g);
std::string encode(const LocalPtr& t);
std::string encode(const TypeExpr& e);

bool equal_types(const GlobalPtr& a, const GlobalPtr& b);
bool equal_types(const LocalPtr& a, const LocalPtr& b);
bool equal_types(const TypeExpr& a, const TypeExpr& b);

// Canonical forms: branches sorted by label, Exist rows by sender,
// ExistBranch rows by partner.
GlobalPtr canon(const GlobalPtr& g);
LocalPtr canon(const LocalPtr& t);

// One-step unfolding of a recursive type; throws std::invalid_argument on a
// non-Rec argument.
GlobalPtr unfold(const GlobalPtr& g);
LocalPtr unfold(const LocalPtr& t);

// Unfolds Rec heads until a non-Rec constructor shows (guarded types need
// one step; the cap guards against malformed input).
LocalPtr head_normal(const LocalPtr& t);
GlobalPtr head_normal(const GlobalPtr& g);

// Free type variables (for binding checks).
bool closed_type(const GlobalPtr& g);
bool closed_type(const LocalPtr& t);

} // namespace mssr

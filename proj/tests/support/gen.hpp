// Random generators for property tests: well-formed global types restricted
// to the shapes the consistency theorem covers, local types for merge
// properties, small process terms for calculus properties, and processes
// synthesized from projections (well-typed by construction).
#pragma once

#include <cassert>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mssr/ast.hpp"
#include "mssr/parser.hpp"
#include "mssr/projection.hpp"
#include "mssr/types.hpp"

namespace mssr::gen {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}
  int pick(int n) { return static_cast<int>(engine() % static_cast<uint64_t>(n)); }
  bool chance(double p) { return std::uniform_real_distribution<>(0, 1)(engine) < p; }
};

inline TypeExpr random_sort(Rng& rng) {
  switch (rng.pick(5)) {
    case 0: return TypeExpr::basic(Sort::Int);
    case 1: return TypeExpr::basic(Sort::Bool);
    case 2: return TypeExpr::basic(Sort::Real);
    case 3: return TypeExpr::basic(Sort::Str);
    default: return TypeExpr::basic(Sort::Unit);
  }
}

struct GlobalGenConfig {
  int max_roles = 4;
  int max_depth = 4;
  int max_branches = 2;
  int max_rec = 2;
  bool allow_exist = true;
};

// Generates closed, guarded global types. Existential nodes follow the
// discipline the projection theory assumes: the domain's senders occur only
// inside their own branch continuation, and no recursion loop crosses the
// existential node.
class GlobalGen {
 public:
  GlobalGen(Rng& rng, GlobalGenConfig cfg) : rng_(rng), cfg_(cfg) {
    for (int i = 0; i < cfg.max_roles; ++i) roles_.push_back(Role{"r" + std::to_string(i)});
  }

  GlobalPtr generate() {
    rec_count_ = 0;
    exist_used_ = false;
    label_counter_ = 0;
    return gen(cfg_.max_depth, roles_, {}, cfg_.allow_exist);
  }

 private:
  Rng& rng_;
  GlobalGenConfig cfg_;
  std::vector<Role> roles_;
  int rec_count_ = 0;
  bool exist_used_ = false;
  int label_counter_ = 0;

  std::string fresh_label() { return "m" + std::to_string(label_counter_++); }

  Role pick_role(const std::vector<Role>& pool, const Role* not_this = nullptr) {
    while (true) {
      const Role& r = pool[rng_.pick(static_cast<int>(pool.size()))];
      if (!not_this || !(r == *not_this)) return r;
    }
  }

  GlobalPtr gen(int depth, std::vector<Role> pool, std::vector<std::string> rec_vars,
                bool exist_ok) {
    if (depth <= 0 || pool.size() < 2) {
      if (!rec_vars.empty() && rng_.chance(0.5))
        return GlobalType::make_var(rec_vars[rng_.pick(static_cast<int>(rec_vars.size()))]);
      return GlobalType::end_type();
    }
    int dice = rng_.pick(10);
    if (dice == 0 && rec_count_ < cfg_.max_rec) {
      rec_count_++;
      std::string v = "t" + std::to_string(rec_count_);
      auto vars = rec_vars;
      vars.push_back(v);
      // The body must be guarded in v and must actually use communication.
      GlobalPtr body = gen_comm(depth - 1, pool, vars, false);
      return GlobalType::rec(v, body);
    }
    if (dice == 1 && exist_ok && !exist_used_ && pool.size() >= 3) {
      exist_used_ = true;
      return gen_exist(depth, pool);
    }
    if (dice <= 7) return gen_comm(depth, pool, rec_vars, exist_ok);
    if (!rec_vars.empty())
      return GlobalType::make_var(rec_vars[rng_.pick(static_cast<int>(rec_vars.size()))]);
    return GlobalType::end_type();
  }

  GlobalPtr gen_comm(int depth, const std::vector<Role>& pool,
                     const std::vector<std::string>& rec_vars, bool exist_ok) {
    Role from = pick_role(pool);
    Role to = pick_role(pool, &from);
    int n = 1 + rng_.pick(cfg_.max_branches);
    std::vector<GlobalBranch> bs;
    for (int i = 0; i < n; ++i)
      bs.push_back({fresh_label(), random_sort(rng_),
                    gen(depth - 1, pool, rec_vars, exist_ok)});
    return GlobalType::comm(from, to, std::move(bs));
  }

  GlobalPtr gen_exist(int depth, std::vector<Role> pool) {
    // Reserve two senders and one receiver; senders may only appear in
    // their own continuation, paired with roles outside the domain.
    Role receiver = pick_role(pool);
    std::vector<Role> senders;
    for (const auto& r : pool)
      if (!(r == receiver) && senders.size() < 2) senders.push_back(r);
    std::vector<Role> outside{receiver};
    for (const auto& r : pool) {
      bool is_sender = false;
      for (const auto& s : senders) is_sender = is_sender || s == r;
      if (!is_sender && !(r == receiver)) outside.push_back(r);
    }
    std::vector<GlobalRow> rows;
    for (const auto& s : senders) {
      auto branch_pool = outside;
      branch_pool.push_back(s);
      rows.push_back({s, fresh_label(), random_sort(rng_),
                      gen(depth - 1, branch_pool, {}, false)});
    }
    return GlobalType::exist(std::move(rows), receiver);
  }
};

// Keeps generating until `count` well-formed types came out.
inline std::vector<GlobalPtr> well_formed_globals(Rng& rng, int count,
                                                  GlobalGenConfig cfg = {}) {
  std::vector<GlobalPtr> out;
  GlobalGen gen(rng, cfg);
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard++ < count * 200) {
    GlobalPtr g = gen.generate();
    if (g->kind == GlobalType::Kind::End) continue;
    if (roles(g).size() < 2) continue;
    if (well_formed(g).ok) out.push_back(canon(g));
  }
  assert(static_cast<int>(out.size()) == count);
  return out;
}

inline LocalPtr random_local(Rng& rng, int depth, const std::vector<Role>& pool,
                             std::vector<std::string> rec_vars = {}) {
  if (depth <= 0) {
    if (!rec_vars.empty() && rng.chance(0.4))
      return LocalType::make_var(rec_vars[rng.pick(static_cast<int>(rec_vars.size()))]);
    return LocalType::end_type();
  }
  switch (rng.pick(6)) {
    case 0: {
      std::string v = "u" + std::to_string(rng.pick(3));
      rec_vars.push_back(v);
      Role p = pool[rng.pick(static_cast<int>(pool.size()))];
      std::vector<LocalBranch> bs{{"k" + std::to_string(rng.pick(3)), random_sort(rng),
                                   random_local(rng, depth - 1, pool, rec_vars), std::nullopt}};
      return LocalType::rec(v, LocalType::branch(p, std::move(bs)));
    }
    case 1:
    case 2: {
      Role p = pool[rng.pick(static_cast<int>(pool.size()))];
      int n = 1 + rng.pick(2);
      std::vector<LocalBranch> bs;
      for (int i = 0; i < n; ++i)
        bs.push_back({"k" + std::to_string(rng.pick(4)), random_sort(rng),
                      random_local(rng, depth - 1, pool, rec_vars), std::nullopt});
      std::set<std::string> seen;
      std::vector<LocalBranch> uniq;
      for (auto& b : bs)
        if (seen.insert(b.label).second) uniq.push_back(b);
      return rng.chance(0.5) ? LocalType::branch(p, std::move(uniq))
                             : LocalType::select(p, std::move(uniq));
    }
    case 3: {
      int n = 1 + rng.pick(2);
      std::vector<LocalRow> rows;
      std::set<std::string> partners;
      for (int i = 0; i < n; ++i) {
        Role p = pool[rng.pick(static_cast<int>(pool.size()))];
        if (!partners.insert(p.name).second) continue;
        rows.push_back({p, "k" + std::to_string(rng.pick(4)), random_sort(rng),
                        random_local(rng, depth - 1, pool, rec_vars)});
      }
      if (rows.empty())
        rows.push_back({pool[0], "k0", TypeExpr::basic(Sort::Unit), LocalType::end_type()});
      return LocalType::exist(std::move(rows));
    }
    default:
      return LocalType::end_type();
  }
}

inline Payload constant_of(const TypeExpr& e, Rng& rng) {
  if (e.kind != TypeExpr::Kind::Basic) return Payload::unit();
  switch (e.sort) {
    case Sort::Int: return Payload::from_constant({Sort::Int, std::to_string(rng.pick(100))});
    case Sort::Bool: return Payload::from_constant({Sort::Bool, rng.chance(0.5) ? "true" : "false"});
    case Sort::Real: return Payload::from_constant({Sort::Real, "1.5"});
    case Sort::Str: return Payload::from_constant({Sort::Str, "\"v\""});
    case Sort::Unit: return Payload::unit();
  }
  return Payload::unit();
}

struct Realizer {
  Rng& rng;
  std::string session;
  int var_counter = 0;
  int def_counter = 0;

  ProcPtr from_role(Role self, const LocalPtr& t, std::map<std::string, std::string> rec_defs) {
    switch (t->kind) {
      case LocalType::Kind::End:
        return Process::inaction();
      case LocalType::Kind::Var: {
        return Process::call(rec_defs.at(t->var), {});
      }
      case LocalType::Kind::Rec: {
        std::string name = "D" + std::to_string(def_counter++);
        rec_defs[t->var] = name;
        ProcPtr body = from_role(self, t->body, rec_defs);
        return Process::definition(name, {}, body, Process::call(name, {}));
      }
      case LocalType::Kind::Select: {
        const auto& b = t->branches[rng.pick(static_cast<int>(t->branches.size()))];
        Role subject_role = b.sender ? *b.sender : self;
        ProcPtr cont = from_role(subject_role, b.cont, rec_defs);
        return Process::selection(Channel::session_role(session, subject_role), t->partner,
                                  b.label, constant_of(b.payload, rng), cont);
      }
      case LocalType::Kind::Branch: {
        std::vector<BranchArm> arms;
        for (const auto& b : t->branches) {
          std::string v = "y" + std::to_string(var_counter++);
          arms.push_back({b.label, v, from_role(self, b.cont, rec_defs)});
        }
        return Process::branching(Channel::session_role(session, self), t->partner,
                                  std::move(arms));
      }
      case LocalType::Kind::ExistBranch: {
        std::vector<ExistArm> rows;
        for (const auto& r : t->rows) {
          std::string v = "y" + std::to_string(var_counter++);
          rows.push_back({r.partner, r.label, v, from_role(self, r.cont, rec_defs)});
        }
        return Process::exist_branching(Channel::session_role(session, self), std::move(rows));
      }
    }
    return Process::inaction();
  }
};

// Builds (new s : G . (P_t1 | ... | P_tk)) where each component realizes one
// projection target. The definitions realizing recursive types sit inside
// each component; recursive local types carry the channel through calls, so
// this realizer only handles non-recursive targets for typed fuzzing.
inline std::optional<ProcPtr> realize_system(Rng& rng, const GlobalPtr& g,
                                             const std::string& session,
                                             const std::string& global_name) {
  auto bundle = projection_bundle(g);
  if (!bundle) return std::nullopt;
  Realizer realizer{rng, session};
  std::vector<ProcPtr> parts;
  for (const auto& [target, type] : *bundle) {
    // Recursion needs parameterized definitions to stay typable; skip.
    std::string e = encode(type);
    if (e.find("rec.") != std::string::npos) return std::nullopt;
    Role self = target.roles.size() == 1 ? target.roles[0] : Role{"?"};
    parts.push_back(realizer.from_role(self, type, {}));
  }
  return Process::restriction(session, global_name, Process::parallel(std::move(parts)));
}

// Small random processes over fixed sessions/roles for calculus properties.
inline ProcPtr random_process(Rng& rng, int depth) {
  if (depth <= 0) return Process::inaction();
  switch (rng.pick(6)) {
    case 0:
      return Process::inaction();
    case 1: {
      std::vector<ProcPtr> parts;
      int n = 1 + rng.pick(2);
      for (int i = 0; i < n; ++i) parts.push_back(random_process(rng, depth - 1));
      return Process::parallel(std::move(parts));
    }
    case 2: {
      Role to{"q" + std::to_string(rng.pick(2))};
      return Process::selection(
          Channel::session_role("s", Role{"p" + std::to_string(rng.pick(2))}), to,
          "l" + std::to_string(rng.pick(3)), constant_of(TypeExpr::basic(Sort::Int), rng),
          random_process(rng, depth - 1));
    }
    case 3: {
      int n = 1 + rng.pick(2);
      std::vector<BranchArm> arms;
      std::set<std::string> labels;
      for (int i = 0; i < n; ++i) {
        std::string lab = "l" + std::to_string(rng.pick(3));
        if (!labels.insert(lab).second) continue;
        arms.push_back({lab, "x" + std::to_string(rng.pick(3)), random_process(rng, depth - 1)});
      }
      return Process::branching(
          Channel::session_role("s", Role{"p" + std::to_string(rng.pick(2))}),
          Role{"q" + std::to_string(rng.pick(2))}, std::move(arms));
    }
    case 4: {
      int n = 1 + rng.pick(2);
      std::vector<ExistArm> rows;
      std::set<std::string> partners;
      for (int i = 0; i < n; ++i) {
        std::string pn = "q" + std::to_string(rng.pick(3));
        if (!partners.insert(pn).second) continue;
        rows.push_back({Role{pn}, "l" + std::to_string(rng.pick(3)),
                        "x" + std::to_string(rng.pick(3)), random_process(rng, depth - 1)});
      }
      return Process::exist_branching(Channel::session_role("s", Role{"p0"}), std::move(rows));
    }
    default:
      return Process::restriction("s" + std::to_string(rng.pick(2)), "",
                                  random_process(rng, depth - 1));
  }
}

} // namespace mssr::gen

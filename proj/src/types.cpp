#include "mssr/types.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mssr {

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Int: return "int";
    case Sort::Bool: return "bool";
    case Sort::Real: return "real";
    case Sort::Str: return "str";
    case Sort::Unit: return "unit";
  }
  return "?";
}

TypeExpr TypeExpr::basic(Sort s) {
  TypeExpr e;
  e.kind = Kind::Basic;
  e.sort = s;
  return e;
}

TypeExpr TypeExpr::protocol(GlobalPtr g) {
  TypeExpr e;
  e.kind = Kind::GlobalPayload;
  e.global = std::move(g);
  return e;
}

TypeExpr TypeExpr::channel(LocalPtr t) {
  TypeExpr e;
  e.kind = Kind::LocalPayload;
  e.local = std::move(t);
  return e;
}

DomainSet::DomainSet(std::vector<Role> rs) : roles(std::move(rs)) {
  std::sort(roles.begin(), roles.end());
  roles.erase(std::unique(roles.begin(), roles.end()), roles.end());
}

bool DomainSet::contains(const Role& r) const {
  return std::binary_search(roles.begin(), roles.end(), r);
}

std::string DomainSet::to_string() const {
  std::string out = "{";
  for (size_t i = 0; i < roles.size(); ++i) {
    if (i) out += ",";
    out += roles[i].name;
  }
  return out + "}";
}

GlobalPtr GlobalType::end_type() {
  auto g = std::make_shared<GlobalType>();
  g->kind = Kind::End;
  return g;
}

GlobalPtr GlobalType::make_var(std::string v) {
  auto g = std::make_shared<GlobalType>();
  g->kind = Kind::Var;
  g->var = std::move(v);
  return g;
}

GlobalPtr GlobalType::rec(std::string v, GlobalPtr b) {
  auto g = std::make_shared<GlobalType>();
  g->kind = Kind::Rec;
  g->var = std::move(v);
  g->body = std::move(b);
  return g;
}

GlobalPtr GlobalType::comm(Role from, Role to, std::vector<GlobalBranch> bs) {
  auto g = std::make_shared<GlobalType>();
  g->kind = Kind::Comm;
  g->sender = std::move(from);
  g->receiver = std::move(to);
  g->branches = std::move(bs);
  return g;
}

GlobalPtr GlobalType::exist(std::vector<GlobalRow> rs, Role to) {
  auto g = std::make_shared<GlobalType>();
  g->kind = Kind::Exist;
  g->rows = std::move(rs);
  g->ex_receiver = std::move(to);
  return g;
}

LocalPtr LocalType::end_type() {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::End;
  return t;
}

LocalPtr LocalType::make_var(std::string v) {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::Var;
  t->var = std::move(v);
  return t;
}

LocalPtr LocalType::rec(std::string v, LocalPtr b) {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::Rec;
  t->var = std::move(v);
  t->body = std::move(b);
  return t;
}

LocalPtr LocalType::select(Role to, std::vector<LocalBranch> bs) {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::Select;
  t->partner = std::move(to);
  t->branches = std::move(bs);
  return t;
}

LocalPtr LocalType::branch(Role from, std::vector<LocalBranch> bs) {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::Branch;
  t->partner = std::move(from);
  t->branches = std::move(bs);
  return t;
}

LocalPtr LocalType::exist(std::vector<LocalRow> rs) {
  auto t = std::make_shared<LocalType>();
  t->kind = Kind::ExistBranch;
  t->rows = std::move(rs);
  return t;
}

namespace {

using Binders = std::map<std::string, int>;

void encode_g(const GlobalPtr& g, Binders env, int depth, std::string& out);
void encode_l(const LocalPtr& t, Binders env, int depth, std::string& out);

void encode_e(const TypeExpr& e, std::string& out) {
  switch (e.kind) {
    case TypeExpr::Kind::Basic:
      out += sort_name(e.sort);
      return;
    case TypeExpr::Kind::GlobalPayload:
      out += "<";
      encode_g(e.global, {}, 0, out);
      out += ">";
      return;
    case TypeExpr::Kind::LocalPayload:
      encode_l(e.local, {}, 0, out);
      return;
  }
}

std::string var_token(const Binders& env, const std::string& v) {
  auto it = env.find(v);
  if (it != env.end()) return "%" + std::to_string(it->second);
  return "!" + v; // free variable, compared by name
}

void encode_g(const GlobalPtr& g, Binders env, int depth, std::string& out) {
  switch (g->kind) {
    case GlobalType::Kind::End:
      out += "end";
      return;
    case GlobalType::Kind::Var:
      out += var_token(env, g->var);
      return;
    case GlobalType::Kind::Rec: {
      env[g->var] = depth;
      out += "rec.";
      encode_g(g->body, env, depth + 1, out);
      return;
    }
    case GlobalType::Kind::Comm: {
      out += "comm(" + g->sender.name + ">" + g->receiver.name + "){";
      std::vector<std::string> parts;
      for (const auto& b : g->branches) {
        std::string p = b.label + "(";
        encode_e(b.payload, p);
        p += ").";
        encode_g(b.cont, env, depth, p);
        parts.push_back(std::move(p));
      }
      std::sort(parts.begin(), parts.end());
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      out += "}";
      return;
    }
    case GlobalType::Kind::Exist: {
      out += "exist(>" + g->ex_receiver.name + "){";
      std::vector<std::string> parts;
      for (const auto& r : g->rows) {
        std::string p = r.sender.name + ">" + r.label + "(";
        encode_e(r.payload, p);
        p += ").";
        encode_g(r.cont, env, depth, p);
        parts.push_back(std::move(p));
      }
      std::sort(parts.begin(), parts.end());
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      out += "}";
      return;
    }
  }
}

void encode_l(const LocalPtr& t, Binders env, int depth, std::string& out) {
  switch (t->kind) {
    case LocalType::Kind::End:
      out += "end";
      return;
    case LocalType::Kind::Var:
      out += var_token(env, t->var);
      return;
    case LocalType::Kind::Rec: {
      env[t->var] = depth;
      out += "rec.";
      encode_l(t->body, env, depth + 1, out);
      return;
    }
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch: {
      out += (t->kind == LocalType::Kind::Select ? "sel(" : "bra(");
      out += t->partner.name;
      out += "){";
      std::vector<std::string> parts;
      for (const auto& b : t->branches) {
        std::string p;
        if (b.sender) p += b.sender->name + ">";
        p += b.label + "(";
        encode_e(b.payload, p);
        p += ").";
        encode_l(b.cont, env, depth, p);
        parts.push_back(std::move(p));
      }
      std::sort(parts.begin(), parts.end());
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      out += "}";
      return;
    }
    case LocalType::Kind::ExistBranch: {
      out += "ebra{";
      std::vector<std::string> parts;
      for (const auto& r : t->rows) {
        std::string p = r.partner.name + "&" + r.label + "(";
        encode_e(r.payload, p);
        p += ").";
        encode_l(r.cont, env, depth, p);
        parts.push_back(std::move(p));
      }
      std::sort(parts.begin(), parts.end());
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      out += "}";
      return;
    }
  }
}

} // namespace

std::string encode(const GlobalPtr& g) {
  std::string out;
  encode_g(g, {}, 0, out);
  return out;
}

std::string encode(const LocalPtr& t) {
  std::string out;
  encode_l(t, {}, 0, out);
  return out;
}

std::string encode(const TypeExpr& e) {
  std::string out;
  encode_e(e, out);
  return out;
}

bool equal_types(const GlobalPtr& a, const GlobalPtr& b) { return encode(a) == encode(b); }
bool equal_types(const LocalPtr& a, const LocalPtr& b) { return encode(a) == encode(b); }
bool equal_types(const TypeExpr& a, const TypeExpr& b) { return encode(a) == encode(b); }

GlobalPtr canon(const GlobalPtr& g) {
  switch (g->kind) {
    case GlobalType::Kind::End:
    case GlobalType::Kind::Var:
      return g;
    case GlobalType::Kind::Rec:
      return GlobalType::rec(g->var, canon(g->body));
    case GlobalType::Kind::Comm: {
      auto bs = g->branches;
      for (auto& b : bs) b.cont = canon(b.cont);
      std::sort(bs.begin(), bs.end(),
                [](const GlobalBranch& x, const GlobalBranch& y) { return x.label < y.label; });
      return GlobalType::comm(g->sender, g->receiver, std::move(bs));
    }
    case GlobalType::Kind::Exist: {
      auto rs = g->rows;
      for (auto& r : rs) r.cont = canon(r.cont);
      std::sort(rs.begin(), rs.end(),
                [](const GlobalRow& x, const GlobalRow& y) { return x.sender < y.sender; });
      return GlobalType::exist(std::move(rs), g->ex_receiver);
    }
  }
  return g;
}

LocalPtr canon(const LocalPtr& t) {
  switch (t->kind) {
    case LocalType::Kind::End:
    case LocalType::Kind::Var:
      return t;
    case LocalType::Kind::Rec:
      return LocalType::rec(t->var, canon(t->body));
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch: {
      auto bs = t->branches;
      for (auto& b : bs) b.cont = canon(b.cont);
      std::sort(bs.begin(), bs.end(),
                [](const LocalBranch& x, const LocalBranch& y) { return x.label < y.label; });
      auto r = std::make_shared<LocalType>();
      r->kind = t->kind;
      r->partner = t->partner;
      r->branches = std::move(bs);
      return r;
    }
    case LocalType::Kind::ExistBranch: {
      auto rs = t->rows;
      for (auto& r : rs) r.cont = canon(r.cont);
      std::sort(rs.begin(), rs.end(),
                [](const LocalRow& x, const LocalRow& y) { return x.partner < y.partner; });
      return LocalType::exist(std::move(rs));
    }
  }
  return t;
}

namespace {

GlobalPtr subst_g(const GlobalPtr& g, const std::string& v, const GlobalPtr& rep) {
  switch (g->kind) {
    case GlobalType::Kind::End:
      return g;
    case GlobalType::Kind::Var:
      return g->var == v ? rep : g;
    case GlobalType::Kind::Rec:
      if (g->var == v) return g; // shadowed
      return GlobalType::rec(g->var, subst_g(g->body, v, rep));
    case GlobalType::Kind::Comm: {
      auto bs = g->branches;
      for (auto& b : bs) b.cont = subst_g(b.cont, v, rep);
      return GlobalType::comm(g->sender, g->receiver, std::move(bs));
    }
    case GlobalType::Kind::Exist: {
      auto rs = g->rows;
      for (auto& r : rs) r.cont = subst_g(r.cont, v, rep);
      return GlobalType::exist(std::move(rs), g->ex_receiver);
    }
  }
  return g;
}

LocalPtr subst_l(const LocalPtr& t, const std::string& v, const LocalPtr& rep) {
  switch (t->kind) {
    case LocalType::Kind::End:
      return t;
    case LocalType::Kind::Var:
      return t->var == v ? rep : t;
    case LocalType::Kind::Rec:
      if (t->var == v) return t;
      return LocalType::rec(t->var, subst_l(t->body, v, rep));
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch: {
      auto bs = t->branches;
      for (auto& b : bs) b.cont = subst_l(b.cont, v, rep);
      auto r = std::make_shared<LocalType>();
      r->kind = t->kind;
      r->partner = t->partner;
      r->branches = std::move(bs);
      return r;
    }
    case LocalType::Kind::ExistBranch: {
      auto rs = t->rows;
      for (auto& r : rs) r.cont = subst_l(r.cont, v, rep);
      return LocalType::exist(std::move(rs));
    }
  }
  return t;
}

} // namespace

GlobalPtr unfold(const GlobalPtr& g) {
  if (g->kind != GlobalType::Kind::Rec)
    throw std::invalid_argument("unfold: global type is not a rec node");
  return subst_g(g->body, g->var, g);
}

LocalPtr unfold(const LocalPtr& t) {
  if (t->kind != LocalType::Kind::Rec)
    throw std::invalid_argument("unfold: local type is not a rec node");
  return subst_l(t->body, t->var, t);
}

GlobalPtr head_normal(const GlobalPtr& g) {
  auto cur = g;
  for (int i = 0; i < 64 && cur->kind == GlobalType::Kind::Rec; ++i) cur = unfold(cur);
  return cur;
}

LocalPtr head_normal(const LocalPtr& t) {
  auto cur = t;
  for (int i = 0; i < 64 && cur->kind == LocalType::Kind::Rec; ++i) cur = unfold(cur);
  return cur;
}

namespace {

void free_vars_g(const GlobalPtr& g, std::set<std::string> bound, std::set<std::string>& out) {
  switch (g->kind) {
    case GlobalType::Kind::End:
      return;
    case GlobalType::Kind::Var:
      if (!bound.count(g->var)) out.insert(g->var);
      return;
    case GlobalType::Kind::Rec:
      bound.insert(g->var);
      free_vars_g(g->body, bound, out);
      return;
    case GlobalType::Kind::Comm:
      for (const auto& b : g->branches) free_vars_g(b.cont, bound, out);
      return;
    case GlobalType::Kind::Exist:
      for (const auto& r : g->rows) free_vars_g(r.cont, bound, out);
      return;
  }
}

void free_vars_l(const LocalPtr& t, std::set<std::string> bound, std::set<std::string>& out) {
  switch (t->kind) {
    case LocalType::Kind::End:
      return;
    case LocalType::Kind::Var:
      if (!bound.count(t->var)) out.insert(t->var);
      return;
    case LocalType::Kind::Rec:
      bound.insert(t->var);
      free_vars_l(t->body, bound, out);
      return;
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch:
      for (const auto& b : t->branches) free_vars_l(b.cont, bound, out);
      return;
    case LocalType::Kind::ExistBranch:
      for (const auto& r : t->rows) free_vars_l(r.cont, bound, out);
      return;
  }
}

} // namespace

bool closed_type(const GlobalPtr& g) {
  std::set<std::string> fv;
  free_vars_g(g, {}, fv);
  return fv.empty();
}

bool closed_type(const LocalPtr& t) {
  std::set<std::string> fv;
  free_vars_l(t, {}, fv);
  return fv.empty();
}

} // namespace mssr

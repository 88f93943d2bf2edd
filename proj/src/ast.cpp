#include "mssr/ast.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mssr {

ProcPtr Process::inaction() {
  static const ProcPtr zero = std::make_shared<Process>();
  return zero;
}

ProcPtr Process::restriction(std::string session, std::string global_name, ProcPtr body) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Restriction;
  p->session = std::move(session);
  p->global_name = std::move(global_name);
  p->body = std::move(body);
  return p;
}

ProcPtr Process::parallel(std::vector<ProcPtr> parts) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Parallel;
  p->parts = std::move(parts);
  return p;
}

ProcPtr Process::selection(Channel subj, Role to, std::string label, Payload d, ProcPtr cont) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Selection;
  p->subject = std::move(subj);
  p->partner = std::move(to);
  p->label = std::move(label);
  p->payload = std::move(d);
  p->cont = std::move(cont);
  return p;
}

ProcPtr Process::branching(Channel subj, Role from, std::vector<BranchArm> arms) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Branching;
  p->subject = std::move(subj);
  p->partner = std::move(from);
  p->arms = std::move(arms);
  return p;
}

ProcPtr Process::exist_branching(Channel subj, std::vector<ExistArm> rows) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::ExistBranching;
  p->subject = std::move(subj);
  p->rows = std::move(rows);
  return p;
}

ProcPtr Process::definition(std::string name, std::vector<Param> params, ProcPtr body,
                            ProcPtr scope) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Definition;
  p->def_name = std::move(name);
  p->params = std::move(params);
  p->def_body = std::move(body);
  p->scope = std::move(scope);
  return p;
}

ProcPtr Process::call(std::string name, std::vector<Payload> args) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Call;
  p->call_name = std::move(name);
  p->args = std::move(args);
  return p;
}

namespace {

void collect_names(const ProcPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      out.insert(p->session);
      collect_names(p->body, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) collect_names(q, out);
      return;
    case Process::Kind::Selection:
      out.insert(p->subject.base);
      if (p->payload.kind == Payload::Kind::ChannelValue) out.insert(p->payload.channel.base);
      collect_names(p->cont, out);
      return;
    case Process::Kind::Branching:
      out.insert(p->subject.base);
      for (const auto& a : p->arms) {
        out.insert(a.var);
        collect_names(a.body, out);
      }
      return;
    case Process::Kind::ExistBranching:
      out.insert(p->subject.base);
      for (const auto& r : p->rows) {
        out.insert(r.var);
        collect_names(r.body, out);
      }
      return;
    case Process::Kind::Definition:
      out.insert(p->def_name);
      for (const auto& par : p->params) out.insert(par.name);
      collect_names(p->def_body, out);
      collect_names(p->scope, out);
      return;
    case Process::Kind::Call:
      out.insert(p->call_name);
      for (const auto& a : p->args)
        if (a.kind == Payload::Kind::ChannelValue) out.insert(a.channel.base);
      return;
  }
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
  if (!used.count(base)) {
    used.insert(base);
    return base;
  }
  for (int i = 2;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!used.count(cand)) {
      used.insert(cand);
      return cand;
    }
  }
}

Channel subst_chan(const Channel& c, const std::string& var, const Payload& value) {
  if (!c.is_variable() || c.base != var) return c;
  // A variable channel can only be replaced by a channel value.
  if (c.is_variable() && !c.role.has_value()) {
    if (value.kind == Payload::Kind::ChannelValue) return value.channel;
  }
  return c;
}

Payload subst_payload(const Payload& d, const std::string& var, const Payload& value) {
  if (d.kind == Payload::Kind::ChannelValue && d.channel.is_variable() &&
      d.channel.base == var)
    return value;
  return d;
}

std::set<std::string> payload_names(const Payload& d) {
  std::set<std::string> out;
  if (d.kind == Payload::Kind::ChannelValue) out.insert(d.channel.base);
  return out;
}

ProcPtr subst(const ProcPtr& p, const std::string& var, const Payload& value,
              std::set<std::string>& used) {
  const std::set<std::string> avoid = payload_names(value);
  switch (p->kind) {
    case Process::Kind::Inaction:
      return p;
    case Process::Kind::Restriction: {
      if (p->session == var) return p; // shadowed
      auto body = p->body;
      auto session = p->session;
      if (avoid.count(session)) {
        std::string ns = fresh_name(session, used);
        body = subst(body, session, Payload::from_channel(Channel::variable(ns)), used);
        session = ns;
      }
      return Process::restriction(session, p->global_name, subst(body, var, value, used));
    }
    case Process::Kind::Parallel: {
      std::vector<ProcPtr> parts;
      parts.reserve(p->parts.size());
      for (const auto& q : p->parts) parts.push_back(subst(q, var, value, used));
      return Process::parallel(std::move(parts));
    }
    case Process::Kind::Selection:
      return Process::selection(subst_chan(p->subject, var, value), p->partner, p->label,
                                subst_payload(p->payload, var, value),
                                subst(p->cont, var, value, used));
    case Process::Kind::Branching: {
      std::vector<BranchArm> arms;
      arms.reserve(p->arms.size());
      for (const auto& a : p->arms) {
        if (a.var == var) {
          arms.push_back(a); // shadowed
          continue;
        }
        auto body = a.body;
        auto v = a.var;
        if (avoid.count(v)) {
          std::string nv = fresh_name(v, used);
          body = subst(body, v, Payload::from_channel(Channel::variable(nv)), used);
          v = nv;
        }
        arms.push_back({a.label, v, subst(body, var, value, used)});
      }
      return Process::branching(subst_chan(p->subject, var, value), p->partner, std::move(arms));
    }
    case Process::Kind::ExistBranching: {
      std::vector<ExistArm> rows;
      rows.reserve(p->rows.size());
      for (const auto& r : p->rows) {
        if (r.var == var) {
          rows.push_back(r);
          continue;
        }
        auto body = r.body;
        auto v = r.var;
        if (avoid.count(v)) {
          std::string nv = fresh_name(v, used);
          body = subst(body, v, Payload::from_channel(Channel::variable(nv)), used);
          v = nv;
        }
        rows.push_back({r.partner, r.label, v, subst(body, var, value, used)});
      }
      return Process::exist_branching(subst_chan(p->subject, var, value), std::move(rows));
    }
    case Process::Kind::Definition: {
      bool shadow = false;
      for (const auto& par : p->params)
        if (par.name == var) shadow = true;
      auto body = shadow ? p->def_body : subst(p->def_body, var, value, used);
      return Process::definition(p->def_name, p->params, body, subst(p->scope, var, value, used));
    }
    case Process::Kind::Call: {
      std::vector<Payload> args;
      args.reserve(p->args.size());
      for (const auto& a : p->args) args.push_back(subst_payload(a, var, value));
      return Process::call(p->call_name, std::move(args));
    }
  }
  return p;
}

} // namespace

ProcPtr substitute(const ProcPtr& p, const std::string& var, const Payload& value) {
  std::set<std::string> used;
  collect_names(p, used);
  if (value.kind == Payload::Kind::ChannelValue) used.insert(value.channel.base);
  return subst(p, var, value, used);
}

ProcPtr substitute_all(const ProcPtr& p, const std::vector<std::string>& vars,
                       const std::vector<Payload>& values) {
  auto cur = p;
  for (size_t i = 0; i < vars.size(); ++i) cur = substitute(cur, vars[i], values[i]);
  return cur;
}

ProcPtr zero_calls(const ProcPtr& p, const std::string& name) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return p;
    case Process::Kind::Restriction:
      return Process::restriction(p->session, p->global_name, zero_calls(p->body, name));
    case Process::Kind::Parallel: {
      std::vector<ProcPtr> parts;
      for (const auto& q : p->parts) parts.push_back(zero_calls(q, name));
      return Process::parallel(std::move(parts));
    }
    case Process::Kind::Selection:
      return Process::selection(p->subject, p->partner, p->label, p->payload,
                                zero_calls(p->cont, name));
    case Process::Kind::Branching: {
      auto arms = p->arms;
      for (auto& a : arms) a.body = zero_calls(a.body, name);
      return Process::branching(p->subject, p->partner, std::move(arms));
    }
    case Process::Kind::ExistBranching: {
      auto rows = p->rows;
      for (auto& r : rows) r.body = zero_calls(r.body, name);
      return Process::exist_branching(p->subject, std::move(rows));
    }
    case Process::Kind::Definition:
      if (p->def_name == name) return p; // inner binding shadows
      return Process::definition(p->def_name, p->params, zero_calls(p->def_body, name),
                                 zero_calls(p->scope, name));
    case Process::Kind::Call:
      return p->call_name == name ? Process::inaction() : p;
  }
  return p;
}

namespace {

struct EncEnv {
  std::map<std::string, std::string> names; // source name -> canonical token
  int counter = 0;

  std::string bind(const std::string& n) {
    std::string tok = "$" + std::to_string(counter++);
    names[n] = tok;
    return tok;
  }
  std::string look(const std::string& n) const {
    auto it = names.find(n);
    return it == names.end() ? "!" + n : it->second;
  }
};

std::string enc_chan(const Channel& c, const EncEnv& env) {
  std::string s = env.look(c.base);
  if (c.role) s += "[" + c.role->name + "]";
  return s;
}

std::string enc_payload(const Payload& d, const EncEnv& env) {
  if (d.kind == Payload::Kind::Constant)
    return std::string(sort_name(d.constant.sort)) + ":" + d.constant.text;
  return enc_chan(d.channel, env);
}

std::string enc(const ProcPtr& p, EncEnv env);

std::string enc_parallel_parts(const std::vector<ProcPtr>& parts, const EncEnv& env) {
  std::vector<std::string> encs;
  for (const auto& q : parts) {
    std::string e = enc(q, env);
    if (e == "0") continue;
    encs.push_back(std::move(e));
  }
  if (encs.empty()) return "0";
  if (encs.size() == 1) return encs[0];
  std::sort(encs.begin(), encs.end());
  std::string out = "par(";
  for (size_t i = 0; i < encs.size(); ++i) out += (i ? "," : "") + encs[i];
  return out + ")";
}

std::string enc(const ProcPtr& p, EncEnv env) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return "0";
    case Process::Kind::Restriction: {
      EncEnv inner = env;
      std::string tok = inner.bind(p->session);
      std::string body = enc(p->body, inner);
      if (body == "0") return "0";
      return "new(" + tok + (p->global_name.empty() ? "" : ":" + p->global_name) + ")." + body;
    }
    case Process::Kind::Parallel:
      return enc_parallel_parts(p->parts, env);
    case Process::Kind::Selection:
      return enc_chan(p->subject, env) + "[" + p->partner.name + "]+" + p->label + "(" +
             enc_payload(p->payload, env) + ")." + enc(p->cont, env);
    case Process::Kind::Branching: {
      std::vector<std::string> parts;
      for (const auto& a : p->arms) {
        EncEnv inner = env;
        std::string tok = inner.bind(a.var);
        parts.push_back(a.label + "(" + tok + ")." + enc(a.body, inner));
      }
      std::sort(parts.begin(), parts.end());
      std::string out = enc_chan(p->subject, env) + "[" + p->partner.name + "]&{";
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      return out + "}";
    }
    case Process::Kind::ExistBranching: {
      std::vector<std::string> parts;
      for (const auto& r : p->rows) {
        EncEnv inner = env;
        std::string tok = inner.bind(r.var);
        parts.push_back(r.partner.name + "&" + r.label + "(" + tok + ")." + enc(r.body, inner));
      }
      std::sort(parts.begin(), parts.end());
      std::string out = "ex" + enc_chan(p->subject, env) + "{";
      for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      return out + "}";
    }
    case Process::Kind::Definition: {
      EncEnv outer = env;
      std::string dtok = outer.bind(p->def_name);
      EncEnv inner = outer;
      std::string out = "def " + dtok + "(";
      for (size_t i = 0; i < p->params.size(); ++i) {
        out += (i ? "," : "") + inner.bind(p->params[i].name) + ":" + encode(p->params[i].sort);
      }
      std::string scope = enc(p->scope, outer);
      if (scope == "0") return "0"; // dead definitions are inert
      return out + ")=" + enc(p->def_body, inner) + " in " + scope;
    }
    case Process::Kind::Call: {
      std::string out = env.look(p->call_name) + "(";
      for (size_t i = 0; i < p->args.size(); ++i)
        out += (i ? "," : "") + enc_payload(p->args[i], env);
      return out + ")";
    }
  }
  return "?";
}

void flatten(const ProcPtr& p, std::vector<ProcPtr>& out) {
  if (p->kind == Process::Kind::Parallel) {
    for (const auto& q : p->parts) flatten(q, out);
    return;
  }
  out.push_back(p);
}

} // namespace

std::string encode(const ProcPtr& p) { return enc(p, EncEnv{}); }

ProcPtr canon(const ProcPtr& p) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return p;
    case Process::Kind::Restriction: {
      auto body = canon(p->body);
      if (body->kind == Process::Kind::Inaction) return body;
      return Process::restriction(p->session, p->global_name, body);
    }
    case Process::Kind::Parallel: {
      std::vector<ProcPtr> flat;
      flatten(p, flat);
      std::vector<ProcPtr> parts;
      for (const auto& q : flat) {
        auto c = canon(q);
        if (c->kind == Process::Kind::Inaction) continue;
        parts.push_back(c);
      }
      if (parts.empty()) return Process::inaction();
      if (parts.size() == 1) return parts[0];
      std::stable_sort(parts.begin(), parts.end(), [](const ProcPtr& a, const ProcPtr& b) {
        return encode(a) < encode(b);
      });
      return Process::parallel(std::move(parts));
    }
    case Process::Kind::Selection:
      return Process::selection(p->subject, p->partner, p->label, p->payload, canon(p->cont));
    case Process::Kind::Branching: {
      auto arms = p->arms;
      for (auto& a : arms) a.body = canon(a.body);
      std::sort(arms.begin(), arms.end(),
                [](const BranchArm& a, const BranchArm& b) { return a.label < b.label; });
      return Process::branching(p->subject, p->partner, std::move(arms));
    }
    case Process::Kind::ExistBranching: {
      auto rows = p->rows;
      for (auto& r : rows) r.body = canon(r.body);
      std::sort(rows.begin(), rows.end(), [](const ExistArm& a, const ExistArm& b) {
        if (a.partner != b.partner) return a.partner < b.partner;
        return a.label < b.label;
      });
      return Process::exist_branching(p->subject, std::move(rows));
    }
    case Process::Kind::Definition: {
      auto scope = canon(p->scope);
      if (scope->kind == Process::Kind::Inaction) return scope;
      return Process::definition(p->def_name, p->params, canon(p->def_body), scope);
    }
    case Process::Kind::Call:
      return p;
  }
  return p;
}

bool structurally_equivalent(const ProcPtr& p, const ProcPtr& q) {
  return encode(p) == encode(q);
}

bool inert(const ProcPtr& p) { return encode(p) == "0"; }

namespace {

void roles_walk(const ProcPtr& p, std::set<Role>& out) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      roles_walk(p->body, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) roles_walk(q, out);
      return;
    case Process::Kind::Selection:
      if (p->subject.role) out.insert(*p->subject.role);
      roles_walk(p->cont, out);
      return;
    case Process::Kind::Branching:
      if (p->subject.role) out.insert(*p->subject.role);
      for (const auto& a : p->arms) roles_walk(a.body, out);
      return;
    case Process::Kind::ExistBranching:
      if (p->subject.role) out.insert(*p->subject.role);
      for (const auto& r : p->rows) roles_walk(r.body, out);
      return;
    case Process::Kind::Definition:
      roles_walk(p->def_body, out);
      roles_walk(p->scope, out);
      return;
    case Process::Kind::Call:
      return;
  }
}

bool guarded_walk(const ProcPtr& p, const std::string& name, bool under_prefix) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return true;
    case Process::Kind::Restriction:
      return guarded_walk(p->body, name, under_prefix);
    case Process::Kind::Parallel: {
      for (const auto& q : p->parts)
        if (!guarded_walk(q, name, under_prefix)) return false;
      return true;
    }
    case Process::Kind::Selection:
      return guarded_walk(p->cont, name, true);
    case Process::Kind::Branching: {
      for (const auto& a : p->arms)
        if (!guarded_walk(a.body, name, true)) return false;
      return true;
    }
    case Process::Kind::ExistBranching: {
      for (const auto& r : p->rows)
        if (!guarded_walk(r.body, name, true)) return false;
      return true;
    }
    case Process::Kind::Definition:
      if (p->def_name == name) return guarded_walk(p->scope, name, under_prefix);
      return guarded_walk(p->def_body, name, under_prefix) &&
             guarded_walk(p->scope, name, under_prefix);
    case Process::Kind::Call:
      return p->call_name != name || under_prefix;
  }
  return true;
}

void unguarded_walk(const ProcPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case Process::Kind::Inaction:
    case Process::Kind::Selection:
    case Process::Kind::Branching:
    case Process::Kind::ExistBranching:
      return; // prefixes guard everything below
    case Process::Kind::Restriction:
      unguarded_walk(p->body, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) unguarded_walk(q, out);
      return;
    case Process::Kind::Definition:
      unguarded_walk(p->def_body, out);
      unguarded_walk(p->scope, out);
      return;
    case Process::Kind::Call:
      out.insert(p->call_name);
      return;
  }
}

void chan_vars(const ProcPtr& p, std::set<std::string> bound, std::set<std::string>& out) {
  auto note = [&](const Channel& c) {
    if (c.is_variable() || bound.count(c.base) == 0) {
      // A subject like x[q] where x is not a bound session counts only when
      // x is a variable binder somewhere; free sessions are filtered later.
    }
    if (!bound.count(c.base)) out.insert(c.base);
  };
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      bound.insert(p->session);
      chan_vars(p->body, bound, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) chan_vars(q, bound, out);
      return;
    case Process::Kind::Selection:
      note(p->subject);
      if (p->payload.kind == Payload::Kind::ChannelValue) note(p->payload.channel);
      chan_vars(p->cont, bound, out);
      return;
    case Process::Kind::Branching:
      note(p->subject);
      for (const auto& a : p->arms) {
        auto b = bound;
        b.insert(a.var);
        chan_vars(a.body, b, out);
      }
      return;
    case Process::Kind::ExistBranching:
      note(p->subject);
      for (const auto& r : p->rows) {
        auto b = bound;
        b.insert(r.var);
        chan_vars(r.body, b, out);
      }
      return;
    case Process::Kind::Definition: {
      auto b = bound;
      for (const auto& par : p->params) b.insert(par.name);
      chan_vars(p->def_body, b, out);
      chan_vars(p->scope, bound, out);
      return;
    }
    case Process::Kind::Call:
      for (const auto& a : p->args)
        if (a.kind == Payload::Kind::ChannelValue) note(a.channel);
      return;
  }
}

void channel_like_walk(const ProcPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      channel_like_walk(p->body, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) channel_like_walk(q, out);
      return;
    case Process::Kind::Selection:
      out.insert(p->subject.base);
      if (p->payload.kind == Payload::Kind::ChannelValue) out.insert(p->payload.channel.base);
      channel_like_walk(p->cont, out);
      return;
    case Process::Kind::Branching:
      out.insert(p->subject.base);
      for (const auto& a : p->arms) channel_like_walk(a.body, out);
      return;
    case Process::Kind::ExistBranching:
      out.insert(p->subject.base);
      for (const auto& r : p->rows) channel_like_walk(r.body, out);
      return;
    case Process::Kind::Definition:
      channel_like_walk(p->def_body, out);
      channel_like_walk(p->scope, out);
      return;
    case Process::Kind::Call:
      for (const auto& a : p->args)
        if (a.kind == Payload::Kind::ChannelValue) out.insert(a.channel.base);
      return;
  }
}

void sessions_walk(const ProcPtr& p, std::set<std::string> bound, std::set<std::string>& out) {
  auto note = [&](const Channel& c) {
    if (!c.is_variable() && !bound.count(c.base)) out.insert(c.base);
  };
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      bound.insert(p->session);
      sessions_walk(p->body, bound, out);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) sessions_walk(q, bound, out);
      return;
    case Process::Kind::Selection:
      note(p->subject);
      if (p->payload.kind == Payload::Kind::ChannelValue) note(p->payload.channel);
      sessions_walk(p->cont, bound, out);
      return;
    case Process::Kind::Branching:
      note(p->subject);
      for (const auto& a : p->arms) sessions_walk(a.body, bound, out);
      return;
    case Process::Kind::ExistBranching:
      note(p->subject);
      for (const auto& r : p->rows) sessions_walk(r.body, bound, out);
      return;
    case Process::Kind::Definition:
      sessions_walk(p->def_body, bound, out);
      sessions_walk(p->scope, bound, out);
      return;
    case Process::Kind::Call:
      for (const auto& a : p->args)
        if (a.kind == Payload::Kind::ChannelValue) note(a.channel);
      return;
  }
}

} // namespace

std::set<Role> roles_of(const ProcPtr& p) {
  std::set<Role> out;
  roles_walk(p, out);
  return out;
}

bool check_guarded(const ProcPtr& def_body, const std::string& name) {
  return guarded_walk(def_body, name, false);
}

std::set<std::string> unguarded_calls(const ProcPtr& def_body) {
  std::set<std::string> out;
  unguarded_walk(def_body, out);
  return out;
}

std::set<std::string> free_channel_vars(const ProcPtr& p) {
  std::set<std::string> out;
  chan_vars(p, {}, out);
  return out;
}

std::set<std::string> channel_like_vars(const ProcPtr& p) {
  std::set<std::string> out;
  channel_like_walk(p, out);
  return out;
}

std::set<std::string> free_sessions(const ProcPtr& p) {
  std::set<std::string> out;
  sessions_walk(p, {}, out);
  return out;
}

} // namespace mssr

#include "mssr/typecheck.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "mssr/printer.hpp"
#include "mssr/reducer.hpp"
#include "mssr/semantics.hpp"

namespace mssr {

namespace {

std::string brief(const ProcPtr& p) {
  std::string s = pretty(p);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

struct CheckError {
  std::string message;
  std::vector<std::string> path;
};

struct Checker {
  const GlobalEnv* globals;

  DerivationPtr node(std::string rule, const ProcPtr& p, const ChannelContext& gamma) {
    auto d = std::make_shared<Derivation>();
    d->rule = std::move(rule);
    d->subject = brief(p);
    d->gamma = gamma.to_string();
    return d;
  }

  [[noreturn]] void fail(const std::string& rule, const std::string& msg) {
    throw CheckError{msg, {rule}};
  }

  DerivationPtr with_rule(const std::string& rule, const std::function<DerivationPtr()>& f) {
    try {
      return f();
    } catch (CheckError& e) {
      e.path.insert(e.path.begin(), rule);
      throw;
    }
  }

  // Keys a component needs from gamma: its free channels, with roles falling
  // back to a covering domain entry.
  std::set<ChannelKey> needed_keys(const ProcPtr& p, const ChannelContext& gamma) {
    std::set<ChannelKey> out;
    std::function<void(const ProcPtr&, std::set<std::string>)> walk =
        [&](const ProcPtr& q, std::set<std::string> bound) {
          auto claim_chan = [&](const Channel& c) {
            if (bound.count(c.base)) return;
            if (c.is_variable()) {
              ChannelKey k = ChannelKey::var(c.base);
              if (gamma.has(k)) out.insert(k);
              return;
            }
            ChannelKey k = ChannelKey::session_role(c.base, *c.role);
            if (gamma.has(k)) {
              out.insert(k);
              return;
            }
            for (const auto& [key, t] : gamma.entries)
              if (key.kind == ChannelKey::Kind::SessionDomain && key.name == c.base &&
                  key.domain.contains(*c.role))
                out.insert(key);
          };
          auto claim_payload = [&](const Payload& d) {
            if (d.kind == Payload::Kind::ChannelValue) claim_chan(d.channel);
          };
          switch (q->kind) {
            case Process::Kind::Inaction:
              return;
            case Process::Kind::Restriction:
              bound.insert(q->session);
              walk(q->body, bound);
              return;
            case Process::Kind::Parallel:
              for (const auto& r : q->parts) walk(r, bound);
              return;
            case Process::Kind::Selection:
              claim_chan(q->subject);
              claim_payload(q->payload);
              walk(q->cont, bound);
              return;
            case Process::Kind::Branching:
              claim_chan(q->subject);
              for (const auto& a : q->arms) {
                auto b = bound;
                b.insert(a.var);
                walk(a.body, b);
              }
              return;
            case Process::Kind::ExistBranching:
              claim_chan(q->subject);
              for (const auto& r : q->rows) {
                auto b = bound;
                b.insert(r.var);
                walk(r.body, b);
              }
              return;
            case Process::Kind::Definition: {
              auto b = bound;
              for (const auto& par : q->params) b.insert(par.name);
              walk(q->def_body, b);
              walk(q->scope, bound);
              return;
            }
            case Process::Kind::Call:
              for (const auto& a : q->args) claim_payload(a);
              return;
          }
        };
    walk(p, {});
    return out;
  }

  // Consumes the payload d of expected type B from gamma/theta.
  void check_payload(const Payload& d, const TypeExpr& B, const ProcessVarContext& theta,
                     ChannelContext& gamma, const std::string& rule) {
    switch (B.kind) {
      case TypeExpr::Kind::Basic: {
        if (d.kind == Payload::Kind::Constant) {
          if (d.constant.sort != B.sort)
            fail(rule, "payload " + d.to_string() + " has sort " +
                           sort_name(d.constant.sort) + ", expected " + sort_name(B.sort));
          return;
        }
        if (d.is_variable()) {
          auto it = theta.vars.find(d.channel.base);
          if (it == theta.vars.end())
            fail(rule, "variable " + d.channel.base + " has no basic sort in scope");
          if (it->second != B.sort)
            fail(rule, "variable " + d.channel.base + " has sort " + sort_name(it->second) +
                           ", expected " + sort_name(B.sort));
          return;
        }
        fail(rule, "channel " + d.to_string() + " sent where basic sort " +
                       std::string(sort_name(B.sort)) + " expected");
      }
      case TypeExpr::Kind::LocalPayload: {
        ChannelKey k = d.kind == Payload::Kind::ChannelValue && !d.channel.is_variable()
                           ? ChannelKey::session_role(d.channel.base, *d.channel.role)
                           : ChannelKey::var(d.to_string());
        if (d.kind == Payload::Kind::Constant)
          fail(rule, "constant " + d.to_string() + " sent where channel type expected");
        if (!gamma.has(k))
          fail(rule, "delegated channel " + d.to_string() + " is not in the typing context");
        if (!equal_types(canon(gamma.get(k)), canon(B.local)))
          fail(rule, "delegated channel " + d.to_string() + " has type " +
                         pretty(gamma.get(k)) + ", expected " + pretty(B.local));
        gamma.erase(k); // ownership moves to the receiver
        return;
      }
      case TypeExpr::Kind::GlobalPayload:
        fail(rule, "protocol-sort payloads cannot be produced by a process");
    }
  }

  void bind_arm_var(const std::string& var, const TypeExpr& B, ProcessVarContext& theta,
                    ChannelContext& gamma, const std::string& rule) {
    switch (B.kind) {
      case TypeExpr::Kind::Basic:
        theta.vars[var] = B.sort;
        return;
      case TypeExpr::Kind::LocalPayload:
        gamma.set(ChannelKey::var(var), B.local);
        return;
      case TypeExpr::Kind::GlobalPayload:
        fail(rule, "protocol-sort payloads cannot be received by a process");
    }
  }

  DerivationPtr check(const ProcessVarContext& theta, const ChannelContext& gamma,
                      const ProcPtr& p) {
    switch (p->kind) {
      case Process::Kind::Inaction: {
        for (const auto& [k, t] : gamma.entries)
          if (t->kind != LocalType::Kind::End)
            fail("T-0", "inaction typed under non-end entry " + k.to_string() + ": " + pretty(t));
        return node("T-0", p, gamma);
      }
      case Process::Kind::Parallel:
        return check_parallel(theta, gamma, p);
      case Process::Kind::Restriction:
        return check_restriction(theta, gamma, p);
      case Process::Kind::Selection:
        return check_selection(theta, gamma, p);
      case Process::Kind::Branching:
        return check_branching(theta, gamma, p);
      case Process::Kind::ExistBranching:
        return check_exist(theta, gamma, p);
      case Process::Kind::Definition:
        return check_definition(theta, gamma, p);
      case Process::Kind::Call:
        return check_call(theta, gamma, p);
    }
    fail("?", "unreachable");
  }

  DerivationPtr check_parallel(const ProcessVarContext& theta, const ChannelContext& gamma,
                               const ProcPtr& p) {
    return with_rule("T-Par", [&]() {
      std::vector<std::set<ChannelKey>> needs;
      for (const auto& q : p->parts) needs.push_back(needed_keys(q, gamma));
      std::map<ChannelKey, size_t> owner;
      for (size_t i = 0; i < needs.size(); ++i) {
        for (const auto& k : needs[i]) {
          auto it = owner.find(k);
          if (it != owner.end())
            fail("T-Par", "no disjoint context split: " + k.to_string() +
                              " is used by two parallel components");
          owner[k] = i;
        }
      }
      std::vector<ChannelContext> shares(p->parts.size());
      for (const auto& [k, t] : gamma.entries) {
        auto it = owner.find(k);
        if (it != owner.end())
          shares[it->second].set(k, t);
        else
          shares[0].set(k, t); // leftovers must be end; surfaces at the leaf
      }
      auto d = node("T-Par", p, gamma);
      for (size_t i = 0; i < p->parts.size(); ++i)
        d->children.push_back(check(theta, shares[i], p->parts[i]));
      return d;
    });
  }

  DerivationPtr check_restriction(const ProcessVarContext& theta, const ChannelContext& gamma,
                                  const ProcPtr& p) {
    return with_rule("T-new", [&]() {
      if (p->global_name.empty())
        fail("T-new", "restriction (new " + p->session +
                          ") has no associated global type declaration");
      auto it = globals->find(p->global_name);
      if (it == globals->end())
        fail("T-new", "unknown global type " + p->global_name);
      for (const auto& [k, t] : gamma.entries)
        if (k.name == p->session)
          fail("T-new", "session " + p->session + " already typed in the context");
      auto projected = projection_context(it->second, p->session);
      if (!projected)
        fail("T-new", "global type " + p->global_name + " is not well-formed");
      auto combined = ChannelContext::disjoint_union(gamma, *projected);
      if (!combined) fail("T-new", "projection entries collide with the context");
      auto d = node("T-new", p, gamma);
      d->children.push_back(check(theta, *combined, p->body));
      return d;
    });
  }

  // Resolves the subject entry of a prefix. For selections the fallback to a
  // covering domain entry (the T-select' case) is handled by the caller.
  std::optional<ChannelKey> subject_key(const Channel& c, const ChannelContext& gamma) {
    ChannelKey k = c.is_variable() ? ChannelKey::var(c.base)
                                   : ChannelKey::session_role(c.base, *c.role);
    if (gamma.has(k)) return k;
    return std::nullopt;
  }

  DerivationPtr check_selection(const ProcessVarContext& theta, const ChannelContext& gamma,
                                const ProcPtr& p) {
    auto own = subject_key(p->subject, gamma);
    bool own_is_end =
        own && head_normal(gamma.get(*own))->kind == LocalType::Kind::End;
    if (own && !own_is_end) {
      return with_rule("T-select", [&]() {
        LocalPtr t = head_normal(gamma.get(*own));
        if (t->kind != LocalType::Kind::Select)
          fail("T-select", "subject " + p->subject.to_string() + " has type " +
                               pretty(gamma.get(*own)) + ", not an internal choice");
        if (!(t->partner == p->partner))
          fail("T-select", "selection towards " + p->partner.name + " but type targets " +
                               t->partner.name);
        auto b = std::find_if(t->branches.begin(), t->branches.end(),
                              [&](const LocalBranch& x) { return x.label == p->label; });
        if (b == t->branches.end())
          fail("T-select", "label " + p->label + " not in the type's label set");
        if (b->sender && !p->subject.is_variable() && !(*b->sender == *p->subject.role))
          fail("T-select", "branch " + p->label + " belongs to sender " + b->sender->name);
        ChannelContext g = gamma;
        check_payload(p->payload, b->payload, theta, g, "T-select");
        g.set(*own, b->cont);
        auto d = node("T-select", p, gamma);
        d->children.push_back(check(theta, g, p->cont));
        return d;
      });
    }
    return with_rule("T-select'", [&]() {
      if (p->subject.is_variable())
        fail("T-select'", "variable subject " + p->subject.base + " has no selectable type");
      // c's own entry is end (or absent); a domain entry covering c's role
      // must carry the selection.
      std::optional<ChannelKey> domain_key;
      for (const auto& [k, t] : gamma.entries)
        if (k.kind == ChannelKey::Kind::SessionDomain && k.name == p->subject.base &&
            k.domain.contains(*p->subject.role))
          domain_key = k;
      if (!domain_key)
        fail("T-select'", "no type for subject " + p->subject.to_string() +
                              " and no covering domain entry");
      LocalPtr t = head_normal(gamma.get(*domain_key));
      if (t->kind != LocalType::Kind::Select)
        fail("T-select'", "domain entry " + domain_key->to_string() + " has type " +
                              pretty(gamma.get(*domain_key)) + ", not an internal choice");
      if (!(t->partner == p->partner))
        fail("T-select'", "selection towards " + p->partner.name + " but type targets " +
                              t->partner.name);
      auto b = std::find_if(t->branches.begin(), t->branches.end(),
                            [&](const LocalBranch& x) { return x.label == p->label; });
      if (b == t->branches.end())
        fail("T-select'", "label " + p->label + " not in the domain type's label set");
      if (b->sender && !(*b->sender == *p->subject.role))
        fail("T-select'", "branch " + p->label + " belongs to sender " + b->sender->name +
                              ", not " + p->subject.role->name);
      ChannelContext g = gamma;
      if (own) g.erase(*own);
      g.erase(*domain_key);
      check_payload(p->payload, b->payload, theta, g, "T-select'");
      // The subject is fixed for the rest of the domain's protocol.
      g.set(ChannelKey::session_role(p->subject.base, *p->subject.role), b->cont);
      auto d = node("T-select'", p, gamma);
      d->children.push_back(check(theta, g, p->cont));
      return d;
    });
  }

  DerivationPtr check_branching(const ProcessVarContext& theta, const ChannelContext& gamma,
                                const ProcPtr& p) {
    return with_rule("T-branch", [&]() {
      auto own = subject_key(p->subject, gamma);
      if (!own) fail("T-branch", "no type for subject " + p->subject.to_string());
      LocalPtr t = head_normal(gamma.get(*own));
      if (t->kind != LocalType::Kind::Branch)
        fail("T-branch", "subject " + p->subject.to_string() + " has type " +
                             pretty(gamma.get(*own)) + ", not an external choice");
      if (!(t->partner == p->partner))
        fail("T-branch", "branching from " + p->partner.name + " but type expects " +
                             t->partner.name);
      auto d = node("T-branch", p, gamma);
      for (const auto& tb : t->branches) {
        auto arm = std::find_if(p->arms.begin(), p->arms.end(),
                                [&](const BranchArm& a) { return a.label == tb.label; });
        if (arm == p->arms.end())
          fail("T-branch", "process does not offer label " + tb.label +
                               " required by its type");
        ProcessVarContext th = theta;
        ChannelContext g = gamma;
        bind_arm_var(arm->var, tb.payload, th, g, "T-branch");
        g.set(*own, tb.cont);
        d->children.push_back(check(th, g, arm->body));
      }
      return d;
    });
  }

  DerivationPtr check_exist(const ProcessVarContext& theta, const ChannelContext& gamma,
                            const ProcPtr& p) {
    return with_rule("T-exist", [&]() {
      auto own = subject_key(p->subject, gamma);
      if (!own) fail("T-exist", "no type for subject " + p->subject.to_string());
      LocalPtr t = head_normal(gamma.get(*own));
      if (t->kind != LocalType::Kind::ExistBranch)
        fail("T-exist", "subject " + p->subject.to_string() + " has type " +
                            pretty(gamma.get(*own)) + ", not an existential choice");
      auto d = node("T-exist", p, gamma);
      for (const auto& row : t->rows) {
        auto arm = std::find_if(p->rows.begin(), p->rows.end(), [&](const ExistArm& a) {
          return a.partner == row.partner && a.label == row.label;
        });
        if (arm == p->rows.end())
          fail("T-exist", "process does not offer row " + row.partner.name + "&" + row.label +
                              " required by its type");
        ProcessVarContext th = theta;
        ChannelContext g = gamma;
        bind_arm_var(arm->var, row.payload, th, g, "T-exist");
        g.set(*own, row.cont);
        d->children.push_back(check(th, g, arm->body));
      }
      return d;
    });
  }

  DerivationPtr check_definition(const ProcessVarContext& theta, const ChannelContext& gamma,
                                 const ProcPtr& p) {
    return with_rule("T-def", [&]() {
      // A contiguous chain of definitions is mutually recursive.
      std::vector<const Process*> chain;
      const Process* cur = p.get();
      while (cur->kind == Process::Kind::Definition) {
        chain.push_back(cur);
        cur = cur->scope.get();
      }
      ProcessVarContext th = theta;
      for (const auto* defn : chain) {
        std::vector<TypeExpr> sig;
        for (const auto& par : defn->params) sig.push_back(par.sort);
        th.process_vars[defn->def_name] = std::move(sig);
      }
      auto d = node("T-def", p, gamma);
      for (const auto* defn : chain) {
        // The body is typed under exactly the parameters.
        ProcessVarContext th_body = th;
        ChannelContext g_body;
        for (const auto& par : defn->params) {
          if (par.sort.kind == TypeExpr::Kind::Basic)
            th_body.vars[par.name] = par.sort.sort;
          else if (par.sort.kind == TypeExpr::Kind::LocalPayload)
            g_body.set(ChannelKey::var(par.name), par.sort.local);
          else
            fail("T-def", "parameter " + par.name + " has protocol sort");
        }
        d->children.push_back(check(th_body, g_body, defn->def_body));
      }
      d->children.push_back(check(th, gamma, chain.back()->scope));
      return d;
    });
  }

  DerivationPtr check_call(const ProcessVarContext& theta, const ChannelContext& gamma,
                           const ProcPtr& p) {
    return with_rule("T-fun", [&]() {
      auto it = theta.process_vars.find(p->call_name);
      if (it == theta.process_vars.end())
        fail("T-fun", "process variable " + p->call_name + " is not in scope");
      const auto& sig = it->second;
      if (sig.size() != p->args.size())
        fail("T-fun", "call to " + p->call_name + " with wrong arity");
      ChannelContext g = gamma;
      for (size_t i = 0; i < sig.size(); ++i)
        check_payload(p->args[i], sig[i], theta, g, "T-fun");
      for (const auto& [k, t] : g.entries)
        if (t->kind != LocalType::Kind::End)
          fail("T-fun", "leftover entry " + k.to_string() + " is not end at call of " +
                            p->call_name);
      auto d = node("T-fun", p, gamma);
      auto leaf = std::make_shared<Derivation>();
      leaf->rule = "T-X";
      leaf->subject = p->call_name;
      leaf->gamma = "";
      d->children.push_back(leaf);
      return d;
    });
  }
};

} // namespace

TypeJudgment typecheck(const ProcessVarContext& theta, const ChannelContext& gamma,
                       const ProcPtr& p, const GlobalEnv& globals) {
  Checker checker{&globals};
  TypeJudgment j;
  try {
    j.derivation = checker.check(theta, gamma, canon(p));
    j.ok = true;
  } catch (const CheckError& e) {
    j.ok = false;
    j.error = e.message;
    j.error_path = e.path;
  }
  return j;
}

TypeJudgment typecheck(const Program& program, const ProcPtr& p) {
  return typecheck(ProcessVarContext{}, ChannelContext{}, p, program.globals);
}

std::set<std::string> rules_used(const DerivationPtr& d) {
  std::set<std::string> out;
  if (!d) return out;
  std::deque<DerivationPtr> queue{d};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    out.insert(cur->rule);
    for (const auto& c : cur->children) queue.push_back(c);
  }
  return out;
}

std::string explain(const DerivationPtr& d) {
  std::string out;
  std::function<void(const DerivationPtr&, int)> walk = [&](const DerivationPtr& n, int depth) {
    if (!n) return;
    out += std::string(depth * 2, ' ') + "[" + n->rule + "] " + n->subject + "\n";
    for (const auto& c : n->children) walk(c, depth + 1);
  };
  walk(d, 0);
  return out;
}

namespace {

bool same_tree(const DerivationPtr& a, const DerivationPtr& b) {
  if (!a || !b) return a == b;
  if (a->rule != b->rule || a->subject != b->subject || a->gamma != b->gamma) return false;
  if (a->children.size() != b->children.size()) return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!same_tree(a->children[i], b->children[i])) return false;
  return true;
}

} // namespace

bool replay_derivation(const ProcessVarContext& theta, const ChannelContext& gamma,
                       const ProcPtr& p, const GlobalEnv& globals, const DerivationPtr& d) {
  TypeJudgment j = typecheck(theta, gamma, p, globals);
  return j.ok && same_tree(j.derivation, d);
}

ProbeResult subject_reduction_probe(const Program& program, const ProcPtr& p, int max_steps,
                                    int max_unfolds) {
  ProbeResult res;
  // Peel the outer restriction chain; its sessions type through projections.
  ProcPtr body = canon(p);
  ChannelContext gamma;
  while (body->kind == Process::Kind::Restriction) {
    if (body->global_name.empty()) {
      res.violation = "restriction without a global type";
      return res;
    }
    auto ctx = projection_context(program.global(body->global_name), body->session);
    if (!ctx) {
      res.violation = "global type " + body->global_name + " is not well-formed";
      return res;
    }
    auto merged = ChannelContext::disjoint_union(gamma, *ctx);
    if (!merged) {
      res.violation = "projection contexts collide";
      return res;
    }
    gamma = *merged;
    body = body->body;
  }
  struct State {
    ProcPtr term;
    ChannelContext ctx;
    std::vector<std::string> path;
    int unfolds;
  };
  auto initial = typecheck(ProcessVarContext{}, gamma, body, program.globals);
  if (!initial.ok) {
    res.violation = "initial process does not typecheck: " + initial.error;
    return res;
  }
  std::deque<State> queue;
  std::set<std::string> visited;
  queue.push_back({body, gamma, {}, 0});
  visited.insert(encode(body) + "||" + gamma.encode_canonical());
  int steps_taken = 0;
  while (!queue.empty()) {
    State st = std::move(queue.front());
    queue.pop_front();
    if (static_cast<int>(st.path.size()) >= max_steps) continue;
    for (const auto& r : enabled_redexes(st.term)) {
      if (r.kind == Redex::Kind::CallUnfold && st.unfolds >= max_unfolds) continue;
      ProcPtr next = step(st.term, r);
      std::vector<std::pair<std::string, ChannelContext>> candidates;
      if (r.kind == Redex::Kind::CallUnfold) {
        candidates.emplace_back("", st.ctx);
      } else {
        for (const auto& cs : context_comm_steps(st.ctx)) {
          if (cs.action.label != r.label) continue;
          if (!(cs.action.sender == r.sender_role) || !(cs.action.receiver == r.receiver_role))
            continue;
          candidates.emplace_back(cs.action.to_string(), cs.next);
        }
      }
      bool typed = false;
      for (const auto& [desc, ctx2] : candidates) {
        TypeJudgment j = typecheck(ProcessVarContext{}, ctx2, next, program.globals);
        if (j.ok) {
          auto path = st.path;
          path.push_back(r.display());
          std::string key = encode(next) + "||" + ctx2.encode_canonical();
          if (visited.insert(key).second)
            queue.push_back({next, ctx2, std::move(path),
                             st.unfolds + (r.kind == Redex::Kind::CallUnfold ? 1 : 0)});
          typed = true;
          break;
        }
      }
      if (!typed) {
        res.ok = false;
        res.path = st.path;
        res.path.push_back(r.display());
        res.violation = candidates.empty()
                            ? "no context step matches process step " + r.display()
                            : "no reachable context types the residue " + brief(next);
        return res;
      }
      if (++steps_taken > 20000) {
        res.ok = true; // bounded exploration exhausted its budget
        return res;
      }
    }
  }
  res.ok = true;
  return res;
}

} // namespace mssr

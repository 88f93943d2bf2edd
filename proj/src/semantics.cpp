#include "mssr/semantics.hpp"

#include <deque>
#include <functional>
#include <map>

namespace mssr {

namespace {

std::string action_sig(const TypeAction& a) {
  return a.sender.name + ">" + a.receiver.name + ":" + a.label + "(" + encode(a.payload) + ")";
}

TypeAction comm_action(Role sender, Role receiver, std::string label, TypeExpr payload) {
  TypeAction a;
  a.kind = TypeAction::Kind::Comm;
  a.sender = std::move(sender);
  a.receiver = std::move(receiver);
  a.label = std::move(label);
  a.payload = std::move(payload);
  return a;
}

// in_progress cuts unfolding cycles: a permuted action that would need the
// same rec node twice in one derivation is already derivable from a single
// unfolding, the body being self-similar.
std::vector<GlobalStep> steps_inner(const GlobalPtr& g, std::set<std::string>& in_progress) {
  switch (g->kind) {
    case GlobalType::Kind::End:
    case GlobalType::Kind::Var:
      return {};
    case GlobalType::Kind::Rec: {
      std::string key = encode(g);
      if (in_progress.count(key)) return {};
      in_progress.insert(key);
      auto out = steps_inner(unfold(g), in_progress);
      in_progress.erase(key);
      return out;
    }
    case GlobalType::Kind::Comm:
    case GlobalType::Kind::Exist: {
      std::vector<GlobalStep> out;
      std::set<Role> prefix_roles;
      struct Branchy {
        std::string label;
        TypeExpr payload;
        GlobalPtr cont;
        Role sender;
      };
      std::vector<Branchy> branches;
      if (g->kind == GlobalType::Kind::Comm) {
        prefix_roles = {g->sender, g->receiver};
        for (const auto& b : g->branches)
          branches.push_back({b.label, b.payload, b.cont, g->sender});
      } else {
        prefix_roles.insert(g->ex_receiver);
        for (const auto& r : g->rows) {
          prefix_roles.insert(r.sender);
          branches.push_back({r.label, r.payload, r.cont, r.sender});
        }
      }
      Role receiver = g->kind == GlobalType::Kind::Comm ? g->receiver : g->ex_receiver;
      for (const auto& b : branches)
        out.push_back({comm_action(b.sender, receiver, b.label, b.payload), b.cont});
      // Permutation: an action enabled in every branch whose roles are
      // disjoint from the prefix can fire first.
      std::vector<std::map<std::string, GlobalStep>> per_branch;
      for (const auto& b : branches) {
        std::map<std::string, GlobalStep> m;
        for (auto& st : steps_inner(b.cont, in_progress)) m.emplace(action_sig(st.action), st);
        per_branch.push_back(std::move(m));
      }
      if (!per_branch.empty()) {
        for (const auto& [sig, st] : per_branch.front()) {
          if (prefix_roles.count(st.action.sender) || prefix_roles.count(st.action.receiver))
            continue;
          bool everywhere = true;
          for (size_t i = 1; i < per_branch.size(); ++i)
            if (!per_branch[i].count(sig)) everywhere = false;
          if (!everywhere) continue;
          if (g->kind == GlobalType::Kind::Comm) {
            std::vector<GlobalBranch> bs;
            for (size_t i = 0; i < branches.size(); ++i)
              bs.push_back({branches[i].label, branches[i].payload,
                            per_branch[i].at(sig).next});
            out.push_back({st.action, GlobalType::comm(g->sender, g->receiver, std::move(bs))});
          } else {
            std::vector<GlobalRow> rs;
            for (size_t i = 0; i < branches.size(); ++i)
              rs.push_back({branches[i].sender, branches[i].label, branches[i].payload,
                            per_branch[i].at(sig).next});
            out.push_back({st.action, GlobalType::exist(std::move(rs), g->ex_receiver)});
          }
        }
      }
      // Deduplicate on (action, canonical residue).
      std::map<std::string, GlobalStep> dedup;
      for (auto& st : out)
        dedup.emplace(action_sig(st.action) + "=>" + encode(canon(st.next)), st);
      std::vector<GlobalStep> result;
      for (auto& [k, st] : dedup) result.push_back(st);
      return result;
    }
  }
  return {};
}

struct OutCandidate {
  ChannelKey key;
  Role acting;              // role performing the send; for hintless domain
  bool acting_known;        // entries the partner side fixes it
  Role partner;
  std::string label;
  TypeExpr payload;
  LocalPtr cont;
};

struct InCandidate {
  ChannelKey key;
  Role subject;
  Role partner;
  std::string label;
  TypeExpr payload;
  LocalPtr cont;
};

std::vector<OutCandidate> out_candidates(const ChannelKey& k, const LocalPtr& t) {
  std::vector<OutCandidate> out;
  if (k.kind == ChannelKey::Kind::Var) return out; // variable entries do not step
  LocalPtr hn = head_normal(t);
  if (hn->kind != LocalType::Kind::Select) return out;
  for (const auto& b : hn->branches) {
    OutCandidate c{k, Role{}, false, hn->partner, b.label, b.payload, b.cont};
    if (k.kind == ChannelKey::Kind::SessionRole) {
      c.acting = k.role;
      c.acting_known = true;
    } else if (k.kind == ChannelKey::Kind::SessionDomain && b.sender) {
      c.acting = *b.sender;
      c.acting_known = true;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<InCandidate> in_candidates(const ChannelKey& k, const LocalPtr& t) {
  std::vector<InCandidate> out;
  if (k.kind != ChannelKey::Kind::SessionRole) return out;
  LocalPtr hn = head_normal(t);
  if (hn->kind == LocalType::Kind::Branch) {
    for (const auto& b : hn->branches)
      out.push_back({k, k.role, hn->partner, b.label, b.payload, b.cont});
  } else if (hn->kind == LocalType::Kind::ExistBranch) {
    for (const auto& r : hn->rows)
      out.push_back({k, k.role, r.partner, r.label, r.payload, r.cont});
  }
  return out;
}

void apply_out(ChannelContext& ctx, const OutCandidate& c, const Role& acting) {
  if (c.key.kind == ChannelKey::Kind::SessionDomain) {
    ctx.erase(c.key);
    ctx.set(ChannelKey::session_role(c.key.name, acting), c.cont);
  } else {
    ctx.set(c.key, c.cont);
  }
}

} // namespace

std::vector<GlobalStep> global_steps(const GlobalPtr& g) {
  std::set<std::string> in_progress;
  return steps_inner(g, in_progress);
}

std::vector<ContextStep> context_steps(const ChannelContext& ctx) {
  std::vector<ContextStep> out;
  for (const auto& [k, t] : ctx.entries) {
    for (const auto& c : out_candidates(k, t)) {
      if (!c.acting_known) continue; // resolved only when paired with an input
      TypeAction a;
      a.kind = TypeAction::Kind::Output;
      if (k.kind == ChannelKey::Kind::SessionDomain)
        a.subject_domain = k.domain;
      else
        a.subject_role = c.acting;
      a.partner = c.partner;
      a.label = c.label;
      a.payload = c.payload;
      ChannelContext next = ctx;
      apply_out(next, c, c.acting);
      out.push_back({std::move(a), std::move(next)});
    }
    for (const auto& c : in_candidates(k, t)) {
      TypeAction a;
      a.kind = TypeAction::Kind::Input;
      a.subject_role = c.subject;
      a.partner = c.partner;
      a.label = c.label;
      a.payload = c.payload;
      ChannelContext next = ctx;
      next.set(c.key, c.cont);
      out.push_back({std::move(a), std::move(next)});
    }
  }
  auto comms = context_comm_steps(ctx);
  out.insert(out.end(), comms.begin(), comms.end());
  return out;
}

std::vector<ContextStep> context_comm_steps(const ChannelContext& ctx) {
  std::vector<ContextStep> out;
  std::map<std::string, ContextStep> dedup;
  for (const auto& [ko, to] : ctx.entries) {
    for (const auto& oc : out_candidates(ko, to)) {
      for (const auto& [ki, ti] : ctx.entries) {
        if (ko == ki) continue;
        // Channels of one session pair up; a variable entry never fires.
        if (ko.name != ki.name) continue;
        for (const auto& ic : in_candidates(ki, ti)) {
          if (oc.label != ic.label) continue;
          if (!(oc.partner == ic.subject)) continue;
          if (!equal_types(oc.payload, ic.payload)) continue;
          Role acting = ic.partner;
          if (oc.acting_known && !(oc.acting == acting)) continue;
          if (ko.kind == ChannelKey::Kind::SessionDomain && !ko.domain.contains(acting))
            continue;
          if (ko.kind == ChannelKey::Kind::SessionRole && !(oc.acting == acting)) continue;
          ChannelContext next = ctx;
          apply_out(next, oc, acting);
          next.set(ic.key, ic.cont);
          TypeAction a = comm_action(acting, ic.subject, oc.label, oc.payload);
          std::string sig = action_sig(a) + "=>" + next.encode_canonical();
          dedup.emplace(sig, ContextStep{std::move(a), std::move(next)});
        }
      }
    }
  }
  for (auto& [sig, st] : dedup) out.push_back(st);
  return out;
}

ConsistencyResult check_consistency(const GlobalPtr& g, const ChannelContext& ctx,
                                    size_t max_states) {
  struct State {
    GlobalPtr g;
    ChannelContext ctx;
    std::vector<std::string> trace;
  };
  std::deque<State> queue;
  std::set<std::string> visited;
  queue.push_back({g, ctx, {}});
  visited.insert(encode(canon(g)) + "||" + ctx.encode_canonical());
  ConsistencyResult res;
  size_t explored = 0;
  while (!queue.empty()) {
    State st = std::move(queue.front());
    queue.pop_front();
    if (++explored > max_states) {
      res.consistent = true;
      res.bound_hit = true;
      return res;
    }
    auto gsteps = global_steps(st.g);
    auto csteps = context_comm_steps(st.ctx);
    std::map<std::string, std::vector<const GlobalStep*>> gmap;
    std::map<std::string, std::vector<const ContextStep*>> cmap;
    for (const auto& s : gsteps) gmap[action_sig(s.action)].push_back(&s);
    for (const auto& s : csteps) cmap[action_sig(s.action)].push_back(&s);
    for (const auto& [sig, gs] : gmap) {
      if (!cmap.count(sig)) {
        res.consistent = false;
        res.trace = st.trace;
        res.mismatch = "global type offers " + gs.front()->action.to_string() +
                       " but the context cannot match it";
        return res;
      }
    }
    for (const auto& [sig, cs] : cmap) {
      if (!gmap.count(sig)) {
        res.consistent = false;
        res.trace = st.trace;
        res.mismatch = "context offers " + cs.front()->action.to_string() +
                       " but the global type cannot match it";
        return res;
      }
    }
    for (const auto& [sig, gs] : gmap) {
      for (const GlobalStep* gstep : gs) {
        for (const ContextStep* cstep : cmap.at(sig)) {
          std::string key = encode(canon(gstep->next)) + "||" + cstep->next.encode_canonical();
          if (!visited.insert(key).second) continue;
          auto trace = st.trace;
          trace.push_back(gstep->action.to_string());
          queue.push_back({gstep->next, cstep->next, std::move(trace)});
        }
      }
    }
  }
  res.consistent = true;
  return res;
}

std::optional<ChannelContext> projection_context(const GlobalPtr& g,
                                                 const std::string& session) {
  auto bundle = projection_bundle(g);
  if (!bundle) return std::nullopt;
  ChannelContext ctx;
  for (const auto& [target, type] : *bundle) {
    if (target.roles.size() == 1)
      ctx.set(ChannelKey::session_role(session, target.roles[0]), type);
    else
      ctx.set(ChannelKey::session_domain(session, target), type);
  }
  return ctx;
}

} // namespace mssr

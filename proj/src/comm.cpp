#include "mssr/comm.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace mssr {

std::optional<DirectedEvent> dual(const DirectedEvent& e) {
  if (e.ep.chan.is_variable()) return std::nullopt;
  DirectedEvent d = e;
  d.ep.chan = Channel::session_role(e.ep.chan.base, e.ep.partner);
  d.ep.partner = *e.ep.chan.role;
  return d;
}

std::string History::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [ep, k] : entries) {
    if (!first) out += ", ";
    first = false;
    out += "(" + ep.to_string() + ", " + std::to_string(k) + ")";
  }
  return out + "}";
}

std::string MobilityEvent::to_string() const {
  return "(" + event.ep.to_string() + ", " + event.label + ", " +
         std::to_string(event.index) + ", " + moved.to_string() + ", " + history.to_string() +
         ")";
}

std::string OrderRelation::to_string() const {
  std::string out;
  for (const auto& [a, b] : pairs) out += a.to_string() + " < " + b.to_string() + "\n";
  return out;
}

DirectedEvent bump_event(const DirectedEvent& e, const Endpoint& alpha, int k) {
  if (e.ep == alpha) {
    DirectedEvent out = e;
    out.index += k;
    return out;
  }
  return e;
}

History bump_history(const History& a, const Endpoint& alpha, int k) {
  History out = a;
  auto it = out.entries.find(alpha);
  if (it != out.entries.end())
    it->second += k;
  else
    out.entries[alpha] = k;
  return out;
}

MobilityEvent bump_mobility(const MobilityEvent& me, const Endpoint& alpha, int k) {
  MobilityEvent out = me;
  if (me.event.ep == alpha) {
    out.event.index += k;
    return out;
  }
  if (me.moved == alpha.chan) {
    out.history = bump_history(me.history, alpha, k);
    return out;
  }
  return out;
}

OrderRelation bump_relation(const OrderRelation& r, const Endpoint& alpha, int k) {
  OrderRelation out;
  for (const auto& [a, b] : r.pairs)
    out.pairs.insert({bump_event(a, alpha, k), bump_event(b, alpha, k)});
  return out;
}

std::set<MobilityEvent> bump_mobility_set(const std::set<MobilityEvent>& m,
                                          const Endpoint& alpha, int k) {
  std::set<MobilityEvent> out;
  for (const auto& me : m) out.insert(bump_mobility(me, alpha, k));
  return out;
}

OrderRelation bump_set_by_history(const OrderRelation& r, const History& a) {
  OrderRelation out;
  for (const auto& [ep, k] : a.entries) {
    OrderRelation bumped = bump_relation(r, ep, k);
    out.pairs.insert(bumped.pairs.begin(), bumped.pairs.end());
  }
  return out;
}

std::set<MobilityEvent> bump_set_by_history(const std::set<MobilityEvent>& m, const History& a) {
  std::set<MobilityEvent> out;
  for (const auto& [ep, k] : a.entries) {
    auto bumped = bump_mobility_set(m, ep, k);
    out.insert(bumped.begin(), bumped.end());
  }
  return out;
}

namespace {

bool is_channel_value(const Payload& d, const std::set<std::string>& channel_vars) {
  if (d.kind == Payload::Kind::ChannelValue) {
    if (!d.channel.is_variable()) return true;
    return channel_vars.count(d.channel.base) != 0;
  }
  return false;
}

struct Analyzer {
  std::set<std::string> channel_vars;

  CommTriple run(const CommContext& delta, const ProcPtr& p) {
    switch (p->kind) {
      case Process::Kind::Inaction:
        return {};
      case Process::Kind::Restriction:
        return run(delta, p->body);
      case Process::Kind::Parallel: {
        CommTriple out;
        for (const auto& q : p->parts) {
          CommTriple t = run(delta, q);
          out.least.insert(t.least.begin(), t.least.end());
          out.mobility.insert(t.mobility.begin(), t.mobility.end());
          out.order.pairs.insert(t.order.pairs.begin(), t.order.pairs.end());
        }
        return out;
      }
      case Process::Kind::Selection: {
        CommTriple inner = run(delta, p->cont);
        Endpoint ep{p->subject, p->partner};
        DirectedEvent e{ep, p->label, 1};
        CommTriple out;
        out.least = {e};
        out.mobility = bump_mobility_set(inner.mobility, ep);
        if (is_channel_value(p->payload, channel_vars))
          out.mobility.insert({e, p->payload.channel, History{}});
        out.order = bump_relation(inner.order, ep);
        for (const auto& u : inner.least)
          if (!(u.ep == ep)) out.order.pairs.insert({e, bump_event(u, ep)});
        return out;
      }
      case Process::Kind::Branching:
      case Process::Kind::ExistBranching: {
        struct Arm {
          Role partner;
          std::string label;
          std::string var;
          ProcPtr body;
        };
        std::vector<Arm> arms;
        if (p->kind == Process::Kind::Branching) {
          for (const auto& a : p->arms) arms.push_back({p->partner, a.label, a.var, a.body});
        } else {
          for (const auto& r : p->rows) arms.push_back({r.partner, r.label, r.var, r.body});
        }
        CommTriple out;
        for (const auto& a : arms) {
          Endpoint ep{p->subject, a.partner};
          DirectedEvent e{ep, a.label, 1};
          bool var_is_channel = channel_like_vars(a.body).count(a.var) != 0;
          CommTriple inner = run(delta, a.body);
          out.least.insert(e);
          auto bumped_m = bump_mobility_set(inner.mobility, ep);
          out.mobility.insert(bumped_m.begin(), bumped_m.end());
          if (var_is_channel)
            out.mobility.insert({e, Channel::variable(a.var), History{}});
          OrderRelation bumped_r = bump_relation(inner.order, ep);
          out.order.pairs.insert(bumped_r.pairs.begin(), bumped_r.pairs.end());
          for (const auto& u : inner.least)
            if (!(u.ep == ep)) out.order.pairs.insert({e, bump_event(u, ep)});
        }
        return out;
      }
      case Process::Kind::Definition: {
        CommTriple body = run(delta, zero_calls(p->def_body, p->def_name));
        CommContext inner = delta;
        inner[p->def_name] = body;
        // Parameter names key the substitution applied at each call site.
        std::vector<std::string> params;
        for (const auto& par : p->params) params.push_back(par.name);
        param_names[p->def_name] = params;
        return run(inner, p->scope);
      }
      case Process::Kind::Call: {
        auto it = delta.find(p->call_name);
        if (it == delta.end()) throw UnboundProcessVar(p->call_name);
        const auto& params = param_names[p->call_name];
        return substitute_triple(it->second, params, p->args);
      }
    }
    return {};
  }

  std::map<std::string, std::vector<std::string>> param_names;

  static Channel subst_channel(const Channel& c, const std::map<std::string, Channel>& env) {
    if (!c.is_variable()) return c;
    auto it = env.find(c.base);
    return it == env.end() ? c : it->second;
  }

  static CommTriple substitute_triple(const CommTriple& t, const std::vector<std::string>& params,
                                      const std::vector<Payload>& args) {
    std::map<std::string, Channel> env;
    for (size_t i = 0; i < params.size() && i < args.size(); ++i)
      if (args[i].kind == Payload::Kind::ChannelValue) env[params[i]] = args[i].channel;
    if (env.empty()) return t;
    auto sub_event = [&](const DirectedEvent& e) {
      DirectedEvent out = e;
      out.ep.chan = subst_channel(e.ep.chan, env);
      return out;
    };
    CommTriple out;
    for (const auto& e : t.least) out.least.insert(sub_event(e));
    for (const auto& me : t.mobility) {
      MobilityEvent m = me;
      m.event = sub_event(me.event);
      m.moved = subst_channel(me.moved, env);
      History h;
      for (const auto& [ep, k] : me.history.entries)
        h.entries[Endpoint{subst_channel(ep.chan, env), ep.partner}] = k;
      m.history = h;
      out.mobility.insert(m);
    }
    for (const auto& [a, b] : t.order.pairs) out.order.pairs.insert({sub_event(a), sub_event(b)});
    return out;
  }
};

Channel subst_chan_var(const Channel& c, const std::string& var, const Channel& value) {
  if (c.is_variable() && c.base == var) return value;
  return c;
}

DirectedEvent subst_event_var(const DirectedEvent& e, const std::string& var,
                              const Channel& value) {
  DirectedEvent out = e;
  out.ep.chan = subst_chan_var(e.ep.chan, var, value);
  return out;
}

} // namespace

CommTriple analyze(const CommContext& delta, const ProcPtr& p) {
  Analyzer a;
  a.channel_vars = channel_like_vars(p);
  return a.run(delta, p);
}

UnifyResult unify(const std::set<MobilityEvent>& m, const OrderRelation& r) {
  UnifyResult res;
  res.mobility = m;
  res.order = r;
  while (true) {
    // Match a sender mobility event carrying a real channel against the
    // receiver's dual carrying a variable with empty history.
    std::optional<std::pair<MobilityEvent, MobilityEvent>> found;
    for (const auto& sender : res.mobility) {
      if (sender.moved.is_variable()) continue;
      if (sender.event.ep.chan.is_variable()) continue;
      auto d = dual(sender.event);
      if (!d) continue;
      for (const auto& receiver : res.mobility) {
        if (!(receiver.event == *d)) continue;
        if (!receiver.moved.is_variable()) continue;
        if (!receiver.history.entries.empty()) continue;
        found = {sender, receiver};
        break;
      }
      if (found) break;
    }
    if (!found) break;
    const auto& [sender, receiver] = *found;
    const std::string var = receiver.moved.base;
    const Channel moved = sender.moved;
    // B: the sender-side history of the moved channel, re-keyed onto the
    // receiver's variable.
    History b;
    for (const auto& [ep, k] : sender.history.entries) {
      Endpoint nep = ep;
      if (ep.chan == moved) nep.chan = Channel::variable(var);
      b.entries[nep] = k;
    }
    res.mobility.erase(sender);
    res.mobility.erase(receiver);
    // Bump by B, then substitute the channel for the variable.
    std::set<MobilityEvent> m2 = res.mobility;
    OrderRelation r2 = res.order;
    for (const auto& [ep, k] : b.entries) {
      m2 = bump_mobility_set(m2, ep, k);
      r2 = bump_relation(r2, ep, k);
    }
    std::set<MobilityEvent> m3;
    for (const auto& me : m2) {
      MobilityEvent out = me;
      out.event = subst_event_var(me.event, var, moved);
      out.moved = subst_chan_var(me.moved, var, moved);
      History h;
      for (const auto& [ep, k] : me.history.entries)
        h.entries[Endpoint{subst_chan_var(ep.chan, var, moved), ep.partner}] = k;
      out.history = h;
      m3.insert(out);
    }
    OrderRelation r3;
    for (const auto& [a, bb] : r2.pairs)
      r3.pairs.insert({subst_event_var(a, var, moved), subst_event_var(bb, var, moved)});
    res.mobility = std::move(m3);
    res.order = std::move(r3);
    res.applications++;
  }
  return res;
}

OrderRelation transitive_close(const OrderRelation& r) {
  OrderRelation out = r;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<DirectedEvent, DirectedEvent>> fresh;
    for (const auto& [e1, e2] : out.pairs) {
      auto d2 = dual(e2);
      if (!d2) continue;
      for (const auto& [x, e3] : out.pairs) {
        if (!(x == *d2)) continue;
        if (!out.contains(e1, e3)) fresh.push_back({e1, e3});
      }
    }
    for (auto& p : fresh)
      if (out.pairs.insert(p).second) changed = true;
  }
  return out;
}

SafetyResult is_safe(const OrderRelation& r) {
  for (const auto& [a, b] : r.pairs) {
    auto d = dual(a);
    if (d && *d == b) return {false, std::make_pair(a, b)};
  }
  return {true, std::nullopt};
}

ProgressResult check_progress(const ProcPtr& p) {
  ProgressResult res;
  CommTriple t = analyze({}, p);
  UnifyResult u = unify(t.mobility, t.order);
  res.closed_order = transitive_close(u.order);
  SafetyResult s = is_safe(res.closed_order);
  if (!s.safe) {
    res.status = ProgressStatus::Unsafe;
    res.witness = s.witness;
    return res;
  }
  // Events still on variable subjects mean the unification premise of the
  // progress theorem was not discharged.
  bool variable_left = false;
  for (const auto& me : u.mobility) {
    res.residue.push_back(me.to_string());
    variable_left = true;
  }
  for (const auto& [a, b] : res.closed_order.pairs)
    if (a.ep.chan.is_variable() || b.ep.chan.is_variable()) variable_left = true;
  res.status = variable_left ? ProgressStatus::Inconclusive : ProgressStatus::Safe;
  return res;
}

} // namespace mssr

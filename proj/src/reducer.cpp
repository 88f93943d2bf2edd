#include "mssr/reducer.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace mssr {

namespace {

struct Arena {
  std::vector<const Process*> wrappers; // restriction/definition chain, outside in
  std::vector<ProcPtr> components;
};

Arena decompose(const ProcPtr& term) {
  Arena a;
  const Process* cur = term.get();
  ProcPtr cur_ptr = term;
  while (cur->kind == Process::Kind::Restriction || cur->kind == Process::Kind::Definition) {
    a.wrappers.push_back(cur);
    cur_ptr = cur->kind == Process::Kind::Restriction ? cur->body : cur->scope;
    cur = cur_ptr.get();
  }
  if (cur->kind == Process::Kind::Parallel)
    a.components = cur->parts;
  else
    a.components = {cur_ptr};
  return a;
}

ProcPtr recompose(const Arena& a, std::vector<ProcPtr> components) {
  ProcPtr cur = components.size() == 1 ? components[0] : Process::parallel(std::move(components));
  for (auto it = a.wrappers.rbegin(); it != a.wrappers.rend(); ++it) {
    const Process* w = *it;
    if (w->kind == Process::Kind::Restriction)
      cur = Process::restriction(w->session, w->global_name, cur);
    else
      cur = Process::definition(w->def_name, w->params, w->def_body, cur);
  }
  return cur;
}

struct DefBinding {
  const Process* def;
};

void enumerate(const ProcPtr& term, std::vector<int> addr,
               std::vector<const Process*> enclosing_defs, std::vector<Redex>& out) {
  Arena a = decompose(term);
  for (const Process* w : a.wrappers)
    if (w->kind == Process::Kind::Definition) enclosing_defs.push_back(w);
  const auto& cs = a.components;
  for (size_t i = 0; i < cs.size(); ++i) {
    const Process& recv = *cs[i];
    if (recv.kind == Process::Kind::Branching && !recv.subject.is_variable()) {
      for (size_t j = 0; j < cs.size(); ++j) {
        if (i == j) continue;
        const Process& send = *cs[j];
        if (send.kind != Process::Kind::Selection || send.subject.is_variable()) continue;
        if (send.subject.base != recv.subject.base) continue;
        if (!(*send.subject.role == recv.partner)) continue;
        if (!(send.partner == *recv.subject.role)) continue;
        bool label_ok = std::any_of(recv.arms.begin(), recv.arms.end(),
                                    [&](const BranchArm& arm) { return arm.label == send.label; });
        if (!label_ok) continue;
        Redex r;
        r.kind = Redex::Kind::BranchSync;
        r.arena = addr;
        r.receiver = static_cast<int>(i);
        r.sender = static_cast<int>(j);
        r.session = recv.subject.base;
        r.receiver_role = *recv.subject.role;
        r.sender_role = recv.partner;
        r.label = send.label;
        out.push_back(std::move(r));
      }
    } else if (recv.kind == Process::Kind::ExistBranching && !recv.subject.is_variable()) {
      for (const auto& row : recv.rows) {
        for (size_t j = 0; j < cs.size(); ++j) {
          if (i == j) continue;
          const Process& send = *cs[j];
          if (send.kind != Process::Kind::Selection || send.subject.is_variable()) continue;
          if (send.subject.base != recv.subject.base) continue;
          if (!(*send.subject.role == row.partner)) continue;
          if (!(send.partner == *recv.subject.role)) continue;
          if (send.label != row.label) continue;
          Redex r;
          r.kind = Redex::Kind::ExistSync;
          r.arena = addr;
          r.receiver = static_cast<int>(i);
          r.sender = static_cast<int>(j);
          r.session = recv.subject.base;
          r.receiver_role = *recv.subject.role;
          r.sender_role = row.partner;
          r.label = row.label;
          out.push_back(std::move(r));
        }
      }
    } else if (cs[i]->kind == Process::Kind::Call) {
      for (auto it = enclosing_defs.rbegin(); it != enclosing_defs.rend(); ++it) {
        if ((*it)->def_name == cs[i]->call_name) {
          Redex r;
          r.kind = Redex::Kind::CallUnfold;
          r.arena = addr;
          r.callee = static_cast<int>(i);
          r.call_name = cs[i]->call_name;
          out.push_back(std::move(r));
          break;
        }
      }
    } else if (cs[i]->kind == Process::Kind::Restriction ||
               cs[i]->kind == Process::Kind::Definition) {
      auto sub = addr;
      sub.push_back(static_cast<int>(i));
      enumerate(cs[i], std::move(sub), enclosing_defs, out);
    }
  }
}

ProcPtr rewrite_at(const ProcPtr& term, const std::vector<int>& addr, size_t idx,
                   const std::vector<const Process*>& defs_above,
                   const std::function<std::vector<ProcPtr>(const Arena&,
                                                            const std::vector<const Process*>&)>&
                       fn) {
  Arena a = decompose(term);
  auto defs = defs_above;
  for (const Process* w : a.wrappers)
    if (w->kind == Process::Kind::Definition) defs.push_back(w);
  if (idx == addr.size()) return recompose(a, fn(a, defs));
  int k = addr[idx];
  if (k < 0 || k >= static_cast<int>(a.components.size()))
    throw StaleRedex("redex arena address out of range");
  auto components = a.components;
  components[k] = rewrite_at(components[k], addr, idx + 1, defs, fn);
  return recompose(a, std::move(components));
}

} // namespace

std::string Redex::key() const {
  std::string out;
  switch (kind) {
    case Kind::BranchSync:
      out = "b:";
      break;
    case Kind::ExistSync:
      out = "e:";
      break;
    case Kind::CallUnfold:
      out = "u:";
      break;
  }
  for (int k : arena) out += std::to_string(k) + ".";
  out += "|" + session + "|" + sender_role.name + ">" + receiver_role.name + "|" + label + "|" +
         call_name + "|" + std::to_string(receiver) + "," + std::to_string(sender) + "," +
         std::to_string(callee);
  return out;
}

std::string Redex::display() const {
  if (kind == Kind::CallUnfold) return "unfold " + call_name;
  return session + "[" + sender_role.name + "] --" + label + "--> " + session + "[" +
         receiver_role.name + "]";
}

std::vector<Redex> enabled_redexes(const ProcPtr& p) {
  std::vector<Redex> out;
  enumerate(canon(p), {}, {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

ProcPtr step(const ProcPtr& p, const Redex& r) {
  ProcPtr term = canon(p);
  auto fn = [&](const Arena& a,
                const std::vector<const Process*>& defs) -> std::vector<ProcPtr> {
    auto components = a.components;
    if (r.kind == Redex::Kind::CallUnfold) {
      if (r.callee < 0 || r.callee >= static_cast<int>(components.size()))
        throw StaleRedex("call component out of range");
      const Process& call = *components[r.callee];
      if (call.kind != Process::Kind::Call || call.call_name != r.call_name)
        throw StaleRedex("component is not the expected call");
      const Process* def = nullptr;
      for (auto it = defs.rbegin(); it != defs.rend(); ++it)
        if ((*it)->def_name == call.call_name) {
          def = *it;
          break;
        }
      if (!def) throw StaleRedex("no definition in scope for " + call.call_name);
      if (def->params.size() != call.args.size())
        throw StaleRedex("arity mismatch unfolding " + call.call_name);
      std::vector<std::string> names;
      for (const auto& par : def->params) names.push_back(par.name);
      components[r.callee] = substitute_all(def->def_body, names, call.args);
      return components;
    }
    if (r.receiver < 0 || r.receiver >= static_cast<int>(components.size()) || r.sender < 0 ||
        r.sender >= static_cast<int>(components.size()))
      throw StaleRedex("redex component out of range");
    const Process& recv = *components[r.receiver];
    const Process& send = *components[r.sender];
    if (send.kind != Process::Kind::Selection || send.label != r.label)
      throw StaleRedex("sender prefix does not match redex");
    if (r.kind == Redex::Kind::BranchSync) {
      if (recv.kind != Process::Kind::Branching) throw StaleRedex("receiver is not branching");
      auto arm = std::find_if(recv.arms.begin(), recv.arms.end(),
                              [&](const BranchArm& x) { return x.label == r.label; });
      if (arm == recv.arms.end()) throw StaleRedex("label not offered");
      components[r.receiver] = substitute(arm->body, arm->var, send.payload);
    } else {
      if (recv.kind != Process::Kind::ExistBranching)
        throw StaleRedex("receiver is not existential branching");
      auto row = std::find_if(recv.rows.begin(), recv.rows.end(), [&](const ExistArm& x) {
        return x.label == r.label && x.partner == r.sender_role;
      });
      if (row == recv.rows.end()) throw StaleRedex("row not offered");
      components[r.receiver] = substitute(row->body, row->var, send.payload);
    }
    components[r.sender] = send.cont;
    return components;
  };
  return canon(rewrite_at(term, r.arena, 0, {}, fn));
}

Trace run(const ProcPtr& p, uint64_t seed, int fuel) {
  std::mt19937_64 rng(seed);
  Trace trace;
  ProcPtr cur = canon(p);
  for (int i = 0; i < fuel; ++i) {
    auto redexes = enabled_redexes(cur);
    if (redexes.empty()) {
      trace.terminal = inert(cur) ? Terminal::Terminated : Terminal::Deadlock;
      trace.final_term = cur;
      return trace;
    }
    const Redex& pick = redexes[rng() % redexes.size()];
    cur = step(cur, pick);
    trace.steps.emplace_back(pick, cur);
  }
  auto redexes = enabled_redexes(cur);
  trace.terminal = redexes.empty()
                       ? (inert(cur) ? Terminal::Terminated : Terminal::Deadlock)
                       : Terminal::FuelExhausted;
  trace.final_term = cur;
  return trace;
}

ExploreResult explore(const ProcPtr& p, size_t state_bound, int depth_bound, int unfold_bound,
                      int workers) {
  struct Info {
    ProcPtr term;
    std::string parent; // encode of predecessor, empty at root
    Redex via;
    int depth = 0;
    int unfolds = 0;
  };
  std::map<std::string, Info> visited;
  std::deque<std::string> frontier;

  ProcPtr root = canon(p);
  std::string root_key = encode(root);
  visited[root_key] = {root, "", {}, 0, 0};
  frontier.push_back(root_key);

  bool truncated = false;
  ExploreResult res;

  auto make_trace = [&](const std::string& key) {
    Trace t;
    std::vector<std::pair<Redex, ProcPtr>> rev;
    std::string cur = key;
    while (!visited.at(cur).parent.empty()) {
      const Info& info = visited.at(cur);
      rev.emplace_back(info.via, info.term);
      cur = info.parent;
    }
    t.steps.assign(rev.rbegin(), rev.rend());
    t.terminal = Terminal::Deadlock;
    t.final_term = visited.at(key).term;
    return t;
  };

  std::mutex mtx;
  while (!frontier.empty()) {
    // Expand one BFS layer; the layer may be split across workers. Verdicts
    // do not depend on the split because successors merge in frontier order.
    std::vector<std::string> layer(frontier.begin(), frontier.end());
    frontier.clear();
    struct Expansion {
      size_t order;
      std::string parent;
      std::vector<Redex> redexes;
      std::vector<ProcPtr> successors;
      bool deadlock = false;
    };
    std::vector<Expansion> expansions(layer.size());
    auto expand = [&](size_t from, size_t to) {
      for (size_t idx = from; idx < to; ++idx) {
        Expansion e;
        e.order = idx;
        e.parent = layer[idx];
        ProcPtr term;
        {
          std::lock_guard<std::mutex> lock(mtx);
          term = visited.at(layer[idx]).term;
        }
        auto redexes = enabled_redexes(term);
        if (redexes.empty()) {
          e.deadlock = !inert(term);
          expansions[idx] = std::move(e);
          continue;
        }
        for (const auto& r : redexes) {
          e.redexes.push_back(r);
          e.successors.push_back(step(term, r));
        }
        expansions[idx] = std::move(e);
      }
    };
    int n = std::max(1, workers);
    if (n == 1 || layer.size() < 2) {
      expand(0, layer.size());
    } else {
      std::vector<std::thread> pool;
      size_t chunk = (layer.size() + n - 1) / n;
      for (int w = 0; w < n; ++w) {
        size_t from = w * chunk;
        size_t to = std::min(layer.size(), from + chunk);
        if (from >= to) break;
        pool.emplace_back(expand, from, to);
      }
      for (auto& t : pool) t.join();
    }
    for (const auto& e : expansions) {
      if (e.deadlock) {
        res.status = ExploreStatus::DeadlockFound;
        res.trace = make_trace(e.parent);
        res.states = visited.size();
        return res;
      }
      const Info parent_info = visited.at(e.parent);
      for (size_t k = 0; k < e.successors.size(); ++k) {
        const Redex& r = e.redexes[k];
        int unfolds = parent_info.unfolds + (r.kind == Redex::Kind::CallUnfold ? 1 : 0);
        if (r.kind == Redex::Kind::CallUnfold && unfolds > unfold_bound) {
          truncated = true;
          continue;
        }
        if (parent_info.depth + 1 > depth_bound) {
          truncated = true;
          continue;
        }
        std::string key = encode(e.successors[k]);
        if (visited.count(key)) continue;
        if (visited.size() >= state_bound) {
          truncated = true;
          continue;
        }
        visited[key] = {e.successors[k], e.parent, r, parent_info.depth + 1, unfolds};
        frontier.push_back(key);
      }
    }
  }
  res.states = visited.size();
  res.status = truncated ? ExploreStatus::BoundExceeded : ExploreStatus::DeadlockFree;
  return res;
}

} // namespace mssr

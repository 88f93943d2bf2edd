#include "mssr/projection.hpp"

#include <algorithm>
#include <functional>

#include "mssr/printer.hpp"

namespace mssr {

namespace {

void roles_walk(const GlobalPtr& g, std::set<Role>& out) {
  switch (g->kind) {
    case GlobalType::Kind::End:
    case GlobalType::Kind::Var:
      return;
    case GlobalType::Kind::Rec:
      roles_walk(g->body, out);
      return;
    case GlobalType::Kind::Comm:
      out.insert(g->sender);
      out.insert(g->receiver);
      for (const auto& b : g->branches) roles_walk(b.cont, out);
      return;
    case GlobalType::Kind::Exist:
      out.insert(g->ex_receiver);
      for (const auto& r : g->rows) {
        out.insert(r.sender);
        roles_walk(r.cont, out);
      }
      return;
  }
}

void exdom_walk(const GlobalPtr& g, std::set<DomainSet>& out) {
  switch (g->kind) {
    case GlobalType::Kind::End:
    case GlobalType::Kind::Var:
      return;
    case GlobalType::Kind::Rec:
      exdom_walk(g->body, out);
      return;
    case GlobalType::Kind::Comm:
      for (const auto& b : g->branches) exdom_walk(b.cont, out);
      return;
    case GlobalType::Kind::Exist: {
      std::vector<Role> rs;
      for (const auto& r : g->rows) rs.push_back(r.sender);
      out.insert(DomainSet(std::move(rs)));
      for (const auto& r : g->rows) exdom_walk(r.cont, out);
      return;
    }
  }
}

} // namespace

std::set<Role> roles(const GlobalPtr& g) {
  std::set<Role> out;
  roles_walk(g, out);
  return out;
}

std::set<DomainSet> exdom(const GlobalPtr& g) {
  std::set<DomainSet> out;
  exdom_walk(g, out);
  return out;
}

MergeResult merge(const LocalPtr& a, const LocalPtr& b) {
  auto fail = [&](const std::string& why) {
    return MergeResult{nullptr, why + ": " + pretty(a) + "  vs  " + pretty(b)};
  };
  if (a->kind != b->kind) return fail("cannot merge different type constructors");
  switch (a->kind) {
    case LocalType::Kind::End:
      return {LocalType::end_type(), ""};
    case LocalType::Kind::Var:
      if (a->var == b->var) return {a, ""};
      return fail("cannot merge distinct type variables");
    case LocalType::Kind::Rec: {
      // mu t.T merged with mu t.S merges the bodies under one binder.
      auto body_b = b->body;
      if (a->var != b->var) {
        // align binder names first
        std::function<LocalPtr(const LocalPtr&)> ren = [&](const LocalPtr& t) -> LocalPtr {
          switch (t->kind) {
            case LocalType::Kind::End:
              return t;
            case LocalType::Kind::Var:
              return t->var == b->var ? LocalType::make_var(a->var) : t;
            case LocalType::Kind::Rec:
              if (t->var == b->var) return t;
              return LocalType::rec(t->var, ren(t->body));
            case LocalType::Kind::Select:
            case LocalType::Kind::Branch: {
              auto bs = t->branches;
              for (auto& x : bs) x.cont = ren(x.cont);
              auto r = std::make_shared<LocalType>();
              r->kind = t->kind;
              r->partner = t->partner;
              r->branches = std::move(bs);
              return r;
            }
            case LocalType::Kind::ExistBranch: {
              auto rs = t->rows;
              for (auto& x : rs) x.cont = ren(x.cont);
              return LocalType::exist(std::move(rs));
            }
          }
          return t;
        };
        body_b = ren(b->body);
      }
      auto m = merge(a->body, body_b);
      if (!m.defined()) return m;
      return {LocalType::rec(a->var, m.type), ""};
    }
    case LocalType::Kind::Select: {
      // Internal choices merge only when they offer exactly the same choices.
      if (equal_types(canon(a), canon(b))) return {a, ""};
      return fail("selection types can only be merged when they have the same choices");
    }
    case LocalType::Kind::Branch: {
      if (!(a->partner == b->partner)) return fail("cannot merge branchings from different roles");
      std::vector<LocalBranch> out = a->branches;
      for (const auto& bb : b->branches) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const LocalBranch& x) { return x.label == bb.label; });
        if (it == out.end()) {
          out.push_back(bb);
          continue;
        }
        if (!equal_types(it->payload, bb.payload))
          return fail("shared label " + bb.label + " carries different payload types");
        auto m = merge(it->cont, bb.cont);
        if (!m.defined()) return m;
        it->cont = m.type;
      }
      return {canon(LocalType::branch(a->partner, std::move(out))), ""};
    }
    case LocalType::Kind::ExistBranch: {
      // Rows are keyed by partner; shared partners must agree on label and
      // payload, then their continuations merge.
      std::vector<LocalRow> out = a->rows;
      for (const auto& rb : b->rows) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const LocalRow& x) { return x.partner == rb.partner; });
        if (it == out.end()) {
          out.push_back(rb);
          continue;
        }
        if (it->label != rb.label)
          return fail("shared partner " + rb.partner.name + " carries different labels");
        if (!equal_types(it->payload, rb.payload))
          return fail("shared partner " + rb.partner.name + " carries different payload types");
        auto m = merge(it->cont, rb.cont);
        if (!m.defined()) return m;
        it->cont = m.type;
      }
      return {canon(LocalType::exist(std::move(out))), ""};
    }
  }
  return fail("unmergeable");
}

namespace {

struct Projector {
  std::map<const GlobalType*, ProjectResult> memo;
  DomainSet onto;

  ProjectResult run(const GlobalPtr& g) {
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    ProjectResult r = compute(g);
    memo[g.get()] = r;
    return r;
  }

  ProjectResult merge_continuations(const std::vector<GlobalPtr>& conts) {
    ProjectResult acc = run(conts.front());
    if (!acc.defined()) return acc;
    for (size_t i = 1; i < conts.size(); ++i) {
      ProjectResult next = run(conts[i]);
      if (!next.defined()) return next;
      MergeResult m = merge(acc.type, next.type);
      if (!m.defined()) return {nullptr, m.reason};
      acc.type = m.type;
    }
    return acc;
  }

  ProjectResult compute(const GlobalPtr& g) {
    switch (g->kind) {
      case GlobalType::Kind::End:
        return {LocalType::end_type(), ""};
      case GlobalType::Kind::Var:
        return {LocalType::make_var(g->var), ""};
      case GlobalType::Kind::Rec: {
        ProjectResult body = run(g->body);
        if (!body.defined()) return body;
        if (body.type->kind == LocalType::Kind::Var) return {LocalType::end_type(), ""};
        return {LocalType::rec(g->var, body.type), ""};
      }
      case GlobalType::Kind::Comm: {
        bool is_sender = onto.roles.size() == 1 && onto.roles[0] == g->sender;
        bool is_receiver = onto.roles.size() == 1 && onto.roles[0] == g->receiver;
        if (is_sender || is_receiver) {
          std::vector<LocalBranch> bs;
          for (const auto& b : g->branches) {
            ProjectResult c = run(b.cont);
            if (!c.defined()) return c;
            bs.push_back({b.label, b.payload, c.type, std::nullopt});
          }
          return {is_sender ? LocalType::select(g->receiver, std::move(bs))
                            : LocalType::branch(g->sender, std::move(bs)),
                  ""};
        }
        std::vector<GlobalPtr> conts;
        for (const auto& b : g->branches) conts.push_back(b.cont);
        return merge_continuations(conts);
      }
      case GlobalType::Kind::Exist: {
        std::vector<Role> senders;
        for (const auto& r : g->rows) senders.push_back(r.sender);
        DomainSet domain(senders);
        bool is_receiver = onto.roles.size() == 1 && onto.roles[0] == g->ex_receiver;
        if (is_receiver) {
          std::vector<LocalRow> rows;
          for (const auto& r : g->rows) {
            ProjectResult c = run(r.cont);
            if (!c.defined()) return c;
            rows.push_back({r.sender, r.label, r.payload, c.type});
          }
          return {LocalType::exist(std::move(rows)), ""};
        }
        if (onto == domain) {
          // Each branch continues from the view of the sender that acted.
          std::vector<LocalBranch> bs;
          for (const auto& r : g->rows) {
            Projector sub{{}, DomainSet({r.sender})};
            ProjectResult c = sub.run(r.cont);
            if (!c.defined()) return c;
            bs.push_back({r.label, r.payload, c.type, r.sender});
          }
          return {LocalType::select(g->ex_receiver, std::move(bs)), ""};
        }
        std::vector<GlobalPtr> conts;
        for (const auto& r : g->rows) conts.push_back(r.cont);
        return merge_continuations(conts);
      }
    }
    return {nullptr, "unreachable"};
  }
};

} // namespace

ProjectResult project(const GlobalPtr& g, const DomainSet& onto) {
  Projector p{{}, onto};
  ProjectResult r = p.run(g);
  if (r.defined()) r.type = canon(r.type);
  return r;
}

ProjectResult project(const GlobalPtr& g, const Role& onto) {
  return project(g, DomainSet({onto}));
}

std::vector<DomainSet> projection_targets(const GlobalPtr& g) {
  std::set<Role> rs = roles(g);
  std::set<DomainSet> domains = exdom(g);
  std::set<Role> covered;
  for (const auto& d : domains)
    for (const auto& r : d.roles) covered.insert(r);
  std::vector<DomainSet> out;
  for (const auto& r : rs)
    if (!covered.count(r)) out.push_back(DomainSet({r}));
  for (const auto& d : domains) out.push_back(d);
  std::sort(out.begin(), out.end());
  return out;
}

WellFormedReport well_formed(const GlobalPtr& g) {
  WellFormedReport rep;
  std::set<DomainSet> domains = exdom(g);
  // A role shared between two domains would need two incompatible domain
  // channels; rejected.
  std::map<std::string, int> domain_uses;
  for (const auto& d : domains)
    for (const auto& r : d.roles) domain_uses[r.name]++;
  for (const auto& [rn, n] : domain_uses)
    if (n > 1) rep.failures.push_back("role " + rn + " belongs to " + std::to_string(n) +
                                      " existential domains");
  for (const auto& target : projection_targets(g)) {
    ProjectResult r = project(g, target);
    if (!r.defined())
      rep.failures.push_back("projection onto " + target.to_string() + " undefined: " + r.reason);
  }
  // Payload protocols must be well-formed themselves.
  std::function<void(const GlobalPtr&)> scan_payloads = [&](const GlobalPtr& node) {
    auto check_payload = [&](const TypeExpr& e) {
      if (e.kind == TypeExpr::Kind::GlobalPayload) {
        WellFormedReport sub = well_formed(e.global);
        for (const auto& f : sub.failures) rep.failures.push_back("payload protocol: " + f);
      }
    };
    switch (node->kind) {
      case GlobalType::Kind::Comm:
        for (const auto& b : node->branches) {
          check_payload(b.payload);
          scan_payloads(b.cont);
        }
        return;
      case GlobalType::Kind::Exist:
        for (const auto& r : node->rows) {
          check_payload(r.payload);
          scan_payloads(r.cont);
        }
        return;
      case GlobalType::Kind::Rec:
        scan_payloads(node->body);
        return;
      default:
        return;
    }
  };
  scan_payloads(g);
  rep.ok = rep.failures.empty();
  return rep;
}

std::optional<std::map<DomainSet, LocalPtr>> projection_bundle(const GlobalPtr& g) {
  std::map<DomainSet, LocalPtr> out;
  for (const auto& target : projection_targets(g)) {
    ProjectResult r = project(g, target);
    if (!r.defined()) return std::nullopt;
    out[target] = r.type;
  }
  return out;
}

} // namespace mssr

#include "mssr/printer.hpp"

#include <sstream>

namespace mssr {

namespace {

void print_g(const GlobalPtr& g, std::string& out);
void print_l(const LocalPtr& t, std::string& out);

void print_e(const TypeExpr& e, std::string& out) {
  switch (e.kind) {
    case TypeExpr::Kind::Basic:
      out += sort_name(e.sort);
      return;
    case TypeExpr::Kind::GlobalPayload:
      out += "< ";
      print_g(e.global, out);
      out += " >";
      return;
    case TypeExpr::Kind::LocalPayload:
      print_l(e.local, out);
      return;
  }
}

void print_g(const GlobalPtr& g, std::string& out) {
  switch (g->kind) {
    case GlobalType::Kind::End:
      out += "end";
      return;
    case GlobalType::Kind::Var:
      out += g->var;
      return;
    case GlobalType::Kind::Rec:
      out += "rec " + g->var + " . ";
      print_g(g->body, out);
      return;
    case GlobalType::Kind::Comm: {
      out += g->sender.name + " -> " + g->receiver.name + " : { ";
      for (size_t i = 0; i < g->branches.size(); ++i) {
        const auto& b = g->branches[i];
        if (i) out += ", ";
        out += b.label + "(";
        print_e(b.payload, out);
        out += ") . ";
        print_g(b.cont, out);
      }
      out += " }";
      return;
    }
    case GlobalType::Kind::Exist: {
      out += "exists { ";
      for (size_t i = 0; i < g->rows.size(); ++i) {
        const auto& r = g->rows[i];
        if (i) out += ", ";
        out += r.sender.name + " -> " + g->ex_receiver.name + " : " + r.label + "(";
        print_e(r.payload, out);
        out += ") . ";
        print_g(r.cont, out);
      }
      out += " }";
      return;
    }
  }
}

void print_l(const LocalPtr& t, std::string& out) {
  switch (t->kind) {
    case LocalType::Kind::End:
      out += "end";
      return;
    case LocalType::Kind::Var:
      out += t->var;
      return;
    case LocalType::Kind::Rec:
      out += "rec " + t->var + " . ";
      print_l(t->body, out);
      return;
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch: {
      out += t->partner.name + (t->kind == LocalType::Kind::Select ? " + { " : " & { ");
      for (size_t i = 0; i < t->branches.size(); ++i) {
        const auto& b = t->branches[i];
        if (i) out += ", ";
        if (b.sender) out += b.sender->name + " -> ";
        out += b.label + "(";
        print_e(b.payload, out);
        out += ") . ";
        print_l(b.cont, out);
      }
      out += " }";
      return;
    }
    case LocalType::Kind::ExistBranch: {
      out += "exists& { ";
      for (size_t i = 0; i < t->rows.size(); ++i) {
        const auto& r = t->rows[i];
        if (i) out += ", ";
        out += r.partner.name + " & " + r.label + "(";
        print_e(r.payload, out);
        out += ") . ";
        print_l(r.cont, out);
      }
      out += " }";
      return;
    }
  }
}

void print_p(const ProcPtr& p, std::string& out, bool at_par_level);

void print_payload(const Payload& d, std::string& out) { out += d.to_string(); }

void print_p(const ProcPtr& p, std::string& out, bool at_par_level) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      out += "0";
      return;
    case Process::Kind::Restriction:
      out += "new " + p->session;
      if (!p->global_name.empty()) out += " : " + p->global_name;
      out += " . ";
      print_p(p->body, out, false);
      return;
    case Process::Kind::Parallel: {
      if (!at_par_level) out += "(";
      for (size_t i = 0; i < p->parts.size(); ++i) {
        if (i) out += " | ";
        print_p(p->parts[i], out, false);
      }
      if (!at_par_level) out += ")";
      return;
    }
    case Process::Kind::Selection:
      out += p->subject.to_string() + "[" + p->partner.name + "] + " + p->label + "(";
      print_payload(p->payload, out);
      out += ") . ";
      print_p(p->cont, out, false);
      return;
    case Process::Kind::Branching: {
      out += p->subject.to_string() + "[" + p->partner.name + "] & { ";
      for (size_t i = 0; i < p->arms.size(); ++i) {
        const auto& a = p->arms[i];
        if (i) out += ", ";
        out += a.label + "(" + a.var + ") . ";
        print_p(a.body, out, false);
      }
      out += " }";
      return;
    }
    case Process::Kind::ExistBranching: {
      out += "exists& { ";
      for (size_t i = 0; i < p->rows.size(); ++i) {
        const auto& r = p->rows[i];
        if (i) out += ", ";
        out += p->subject.to_string() + "[" + r.partner.name + "] & " + r.label + "(" + r.var +
               ") . ";
        print_p(r.body, out, false);
      }
      out += " }";
      return;
    }
    case Process::Kind::Definition: {
      out += "def " + p->def_name + "(";
      for (size_t i = 0; i < p->params.size(); ++i) {
        if (i) out += ", ";
        out += p->params[i].name + " : ";
        print_e(p->params[i].sort, out);
      }
      out += ") = ";
      print_p(p->def_body, out, false);
      out += " in ";
      print_p(p->scope, out, false);
      return;
    }
    case Process::Kind::Call: {
      out += p->call_name + "(";
      for (size_t i = 0; i < p->args.size(); ++i) {
        if (i) out += ", ";
        print_payload(p->args[i], out);
      }
      out += ")";
      return;
    }
  }
}

} // namespace

std::string pretty(const GlobalPtr& g) {
  std::string out;
  print_g(g, out);
  return out;
}

std::string pretty(const LocalPtr& t) {
  std::string out;
  print_l(t, out);
  return out;
}

std::string pretty(const TypeExpr& e) {
  std::string out;
  print_e(e, out);
  return out;
}

std::string pretty(const ProcPtr& p) {
  std::string out;
  print_p(p, out, true);
  return out;
}

} // namespace mssr

#include "mssr/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mssr {

namespace {

enum class Tok {
  Ident,
  Int,
  Real,
  Str,
  Arrow,   // ->
  Plus,
  Amp,
  Bar,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Dot,
  Colon,
  Equal,
  Less,
  Greater,
  End
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

const std::set<std::string> kKeywords = {
    "global", "local", "process", "end",  "rec",  "exists", "new",
    "def",    "in",    "true",    "false", "int", "bool",   "real",
    "str",    "unit"};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int start_col = col;
    auto push_at = [&](Tok k, std::string t, size_t len) {
      out.push_back({k, std::move(t), line, start_col});
      i += len;
      col += static_cast<int>(len);
    };
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      push_at(Tok::Arrow, "->", 2);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                                 text[j] == '_' || text[j] == '\''))
        ++j;
      push_at(Tok::Ident, text.substr(i, j - i), j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      bool real = false;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      push_at(real ? Tok::Real : Tok::Int, text.substr(i, j - i), j - i);
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      std::string s;
      while (j < text.size() && text[j] != '"') {
        if (text[j] == '\\' && j + 1 < text.size()) {
          s += text[j + 1];
          j += 2;
        } else {
          s += text[j];
          ++j;
        }
      }
      if (j >= text.size()) throw ParseError("unterminated string literal", line, start_col);
      push_at(Tok::Str, s, j - i + 1);
      continue;
    }
    switch (c) {
      case '+': push_at(Tok::Plus, "+", 1); continue;
      case '&': push_at(Tok::Amp, "&", 1); continue;
      case '|': push_at(Tok::Bar, "|", 1); continue;
      case '{': push_at(Tok::LBrace, "{", 1); continue;
      case '}': push_at(Tok::RBrace, "}", 1); continue;
      case '(': push_at(Tok::LParen, "(", 1); continue;
      case ')': push_at(Tok::RParen, ")", 1); continue;
      case '[': push_at(Tok::LBrack, "[", 1); continue;
      case ']': push_at(Tok::RBrack, "]", 1); continue;
      case ',': push_at(Tok::Comma, ",", 1); continue;
      case '.': push_at(Tok::Dot, ".", 1); continue;
      case ':': push_at(Tok::Colon, ":", 1); continue;
      case '=': push_at(Tok::Equal, "=", 1); continue;
      case '<': push_at(Tok::Less, "<", 1); continue;
      case '>': push_at(Tok::Greater, ">", 1); continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, start_col);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  const Token& peek(int ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_ident(const std::string& s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k)
      throw ParseError("expected " + what + ", got '" + peek().text + "'", peek().line,
                       peek().col);
    return next();
  }
  std::string expect_name(const std::string& what) {
    Token t = expect(Tok::Ident, what);
    if (kKeywords.count(t.text) && t.text != "_")
      throw ParseError("keyword '" + t.text + "' cannot be used as " + what, t.line, t.col);
    return t.text;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg + " near '" + peek().text + "'", peek().line, peek().col);
  }

  GlobalPtr parse_gtype() {
    if (at_ident("end")) {
      next();
      return GlobalType::end_type();
    }
    if (at_ident("rec")) {
      next();
      std::string v = expect_name("type variable");
      expect(Tok::Dot, "'.'");
      return GlobalType::rec(v, parse_gtype());
    }
    if (at_ident("exists")) {
      next();
      expect(Tok::LBrace, "'{'");
      std::vector<GlobalRow> rows;
      std::optional<Role> receiver;
      while (true) {
        Role from{expect_name("role")};
        expect(Tok::Arrow, "'->'");
        Role to{expect_name("role")};
        expect(Tok::Colon, "':'");
        std::string lab = expect_name("label");
        expect(Tok::LParen, "'('");
        TypeExpr payload = parse_btype();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        GlobalPtr cont = parse_gtype();
        if (receiver && !(*receiver == to)) fail("existential rows must share one receiver");
        receiver = to;
        rows.push_back({from, lab, payload, cont});
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return GlobalType::exist(std::move(rows), *receiver);
    }
    if (peek().kind == Tok::Ident) {
      if (peek(1).kind == Tok::Arrow) {
        Role from{expect_name("role")};
        expect(Tok::Arrow, "'->'");
        Role to{expect_name("role")};
        expect(Tok::Colon, "':'");
        expect(Tok::LBrace, "'{'");
        std::vector<GlobalBranch> bs;
        while (true) {
          std::string lab = expect_name("label");
          expect(Tok::LParen, "'('");
          TypeExpr payload = parse_btype();
          expect(Tok::RParen, "')'");
          expect(Tok::Dot, "'.'");
          bs.push_back({lab, payload, parse_gtype()});
          if (peek().kind == Tok::Comma) {
            next();
            continue;
          }
          break;
        }
        expect(Tok::RBrace, "'}'");
        return GlobalType::comm(from, to, std::move(bs));
      }
      return GlobalType::make_var(expect_name("type variable"));
    }
    fail("expected global type");
  }

  LocalPtr parse_ltype() {
    if (at_ident("end")) {
      next();
      return LocalType::end_type();
    }
    if (at_ident("rec")) {
      next();
      std::string v = expect_name("type variable");
      expect(Tok::Dot, "'.'");
      return LocalType::rec(v, parse_ltype());
    }
    if (at_ident("exists") && peek(1).kind == Tok::Amp) {
      next();
      next();
      expect(Tok::LBrace, "'{'");
      std::vector<LocalRow> rows;
      while (true) {
        Role from{expect_name("role")};
        expect(Tok::Amp, "'&'");
        std::string lab = expect_name("label");
        expect(Tok::LParen, "'('");
        TypeExpr payload = parse_btype();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        rows.push_back({from, lab, payload, parse_ltype()});
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return LocalType::exist(std::move(rows));
    }
    if (peek().kind == Tok::Ident) {
      if (peek(1).kind == Tok::Plus || peek(1).kind == Tok::Amp) {
        Role partner{expect_name("role")};
        bool is_select = next().kind == Tok::Plus;
        expect(Tok::LBrace, "'{'");
        std::vector<LocalBranch> bs;
        while (true) {
          std::optional<Role> sender;
          std::string lab;
          if (peek(1).kind == Tok::Arrow) {
            sender = Role{expect_name("role")};
            expect(Tok::Arrow, "'->'");
          }
          lab = expect_name("label");
          expect(Tok::LParen, "'('");
          TypeExpr payload = parse_btype();
          expect(Tok::RParen, "')'");
          expect(Tok::Dot, "'.'");
          LocalBranch b{lab, payload, parse_ltype(), sender};
          if (sender && !is_select) fail("sender annotations only appear on selection types");
          bs.push_back(std::move(b));
          if (peek().kind == Tok::Comma) {
            next();
            continue;
          }
          break;
        }
        expect(Tok::RBrace, "'}'");
        bool any = std::any_of(bs.begin(), bs.end(),
                               [](const LocalBranch& b) { return b.sender.has_value(); });
        bool all = std::all_of(bs.begin(), bs.end(),
                               [](const LocalBranch& b) { return b.sender.has_value(); });
        if (any && !all) fail("either all or no selection branches carry senders");
        return is_select ? LocalType::select(partner, std::move(bs))
                         : LocalType::branch(partner, std::move(bs));
      }
      return LocalType::make_var(expect_name("type variable"));
    }
    fail("expected local type");
  }

  TypeExpr parse_btype() {
    if (peek().kind == Tok::Ident) {
      const std::string& t = peek().text;
      if (t == "int") return next(), TypeExpr::basic(Sort::Int);
      if (t == "bool") return next(), TypeExpr::basic(Sort::Bool);
      if (t == "real") return next(), TypeExpr::basic(Sort::Real);
      if (t == "str") return next(), TypeExpr::basic(Sort::Str);
      if (t == "unit") return next(), TypeExpr::basic(Sort::Unit);
    }
    if (peek().kind == Tok::Less) {
      next();
      GlobalPtr g = parse_gtype();
      expect(Tok::Greater, "'>'");
      return TypeExpr::protocol(g);
    }
    return TypeExpr::channel(parse_ltype());
  }

  ProcPtr parse_proc() {
    std::vector<ProcPtr> parts;
    parts.push_back(parse_term());
    while (peek().kind == Tok::Bar) {
      next();
      parts.push_back(parse_term());
    }
    if (parts.size() == 1) return parts[0];
    return Process::parallel(std::move(parts));
  }

  ProcPtr parse_term() {
    if (peek().kind == Tok::Int && peek().text == "0") {
      next();
      return Process::inaction();
    }
    if (peek().kind == Tok::LParen) {
      next();
      ProcPtr p = parse_proc();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at_ident("new")) {
      next();
      std::string session = expect_name("session name");
      std::string global_name;
      if (peek().kind == Tok::Colon) {
        next();
        global_name = expect_name("global type name");
      }
      expect(Tok::Dot, "'.'");
      return Process::restriction(session, global_name, parse_proc());
    }
    if (at_ident("def")) {
      next();
      std::string name = expect_name("definition name");
      expect(Tok::LParen, "'('");
      std::vector<Param> params;
      if (peek().kind != Tok::RParen) {
        while (true) {
          std::string pn = expect_name("parameter name");
          expect(Tok::Colon, "':'");
          params.push_back({pn, parse_btype()});
          if (peek().kind == Tok::Comma) {
            next();
            continue;
          }
          break;
        }
      }
      expect(Tok::RParen, "')'");
      expect(Tok::Equal, "'='");
      ProcPtr body = parse_proc();
      if (!at_ident("in")) fail("expected 'in'");
      next();
      return Process::definition(name, std::move(params), body, parse_proc());
    }
    if (at_ident("exists") && peek(1).kind == Tok::Amp) {
      next();
      next();
      expect(Tok::LBrace, "'{'");
      std::optional<Channel> subject;
      std::vector<ExistArm> rows;
      while (true) {
        auto [chan, role] = parse_subject();
        if (subject && !(*subject == chan))
          fail("existential branching rows must share one subject");
        subject = chan;
        expect(Tok::Amp, "'&'");
        std::string lab = expect_name("label");
        expect(Tok::LParen, "'('");
        std::string var = parse_binder_name();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        rows.push_back({role, lab, var, parse_proc()});
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return Process::exist_branching(*subject, std::move(rows));
    }
    if (peek().kind == Tok::Ident) {
      if (peek(1).kind == Tok::LParen) {
        std::string name = expect_name("process name");
        expect(Tok::LParen, "'('");
        std::vector<Payload> args;
        if (peek().kind != Tok::RParen) {
          while (true) {
            args.push_back(parse_arg());
            if (peek().kind == Tok::Comma) {
              next();
              continue;
            }
            break;
          }
        }
        expect(Tok::RParen, "')'");
        return Process::call(name, std::move(args));
      }
      auto [chan, role] = parse_subject();
      if (peek().kind == Tok::Plus) {
        next();
        std::string lab = expect_name("label");
        expect(Tok::LParen, "'('");
        Payload d = parse_arg();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        return Process::selection(chan, role, lab, d, parse_proc());
      }
      expect(Tok::Amp, "'&'");
      expect(Tok::LBrace, "'{'");
      std::vector<BranchArm> arms;
      while (true) {
        std::string lab = expect_name("label");
        expect(Tok::LParen, "'('");
        std::string var = parse_binder_name();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        arms.push_back({lab, var, parse_proc()});
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return Process::branching(chan, role, std::move(arms));
    }
    fail("expected process");
  }

  // chan "[" ROLE "]": returns (subject channel, partner role).
  std::pair<Channel, Role> parse_subject() {
    std::string base = expect_name("channel");
    expect(Tok::LBrack, "'['");
    Role r1{expect_name("role")};
    expect(Tok::RBrack, "']'");
    if (peek().kind == Tok::LBrack) {
      next();
      Role r2{expect_name("role")};
      expect(Tok::RBrack, "']'");
      return {Channel::session_role(base, r1), r2};
    }
    return {Channel::variable(base), r1};
  }

  std::string parse_binder_name() {
    Token t = expect(Tok::Ident, "binder");
    if (kKeywords.count(t.text))
      throw ParseError("keyword '" + t.text + "' cannot bind", t.line, t.col);
    return t.text;
  }

  Payload parse_arg() {
    switch (peek().kind) {
      case Tok::Int:
        return Payload::from_constant({Sort::Int, next().text});
      case Tok::Real:
        return Payload::from_constant({Sort::Real, next().text});
      case Tok::Str:
        return Payload::from_constant({Sort::Str, "\"" + next().text + "\""});
      case Tok::LParen:
        next();
        expect(Tok::RParen, "')'");
        return Payload::unit();
      case Tok::Ident: {
        if (peek().text == "true" || peek().text == "false")
          return Payload::from_constant({Sort::Bool, next().text});
        std::string base = expect_name("argument");
        if (peek().kind == Tok::LBrack) {
          next();
          Role r{expect_name("role")};
          expect(Tok::RBrack, "']'");
          return Payload::from_channel(Channel::session_role(base, r));
        }
        return Payload::from_channel(Channel::variable(base));
      }
      default:
        fail("expected argument");
    }
  }

  size_t pos_ = 0;
  std::vector<Token> toks_;
};

// ---- validation -----------------------------------------------------------

// bound maps each recursion variable in scope to whether a communication
// prefix has been passed since its binder.
void check_gtype(const GlobalPtr& g, std::map<std::string, bool> bound) {
  switch (g->kind) {
    case GlobalType::Kind::End:
      return;
    case GlobalType::Kind::Var: {
      auto it = bound.find(g->var);
      if (it == bound.end()) throw ParseError("unbound type variable " + g->var, 0, 0);
      if (!it->second) throw ParseError("unguarded recursion at variable " + g->var, 0, 0);
      return;
    }
    case GlobalType::Kind::Rec:
      bound[g->var] = false;
      check_gtype(g->body, bound);
      return;
    case GlobalType::Kind::Comm: {
      if (g->sender == g->receiver)
        throw ParseError("interaction has equal sender and receiver " + g->sender.name, 0, 0);
      for (auto& [v, flag] : bound) flag = true;
      std::set<std::string> labels;
      for (const auto& b : g->branches) {
        if (!labels.insert(b.label).second)
          throw ParseError("duplicate label " + b.label, 0, 0);
        if (b.payload.kind == TypeExpr::Kind::GlobalPayload)
          check_gtype(b.payload.global, {});
        check_gtype(b.cont, bound);
      }
      return;
    }
    case GlobalType::Kind::Exist: {
      for (auto& [v, flag] : bound) flag = true;
      std::set<std::string> senders;
      for (const auto& r : g->rows) {
        if (r.sender == g->ex_receiver)
          throw ParseError("existential row has equal sender and receiver", 0, 0);
        if (!senders.insert(r.sender.name).second)
          throw ParseError("duplicate existential sender " + r.sender.name, 0, 0);
        if (r.payload.kind == TypeExpr::Kind::GlobalPayload)
          check_gtype(r.payload.global, {});
        check_gtype(r.cont, bound);
      }
      return;
    }
  }
}

void check_ltype(const LocalPtr& t, std::map<std::string, bool> bound) {
  switch (t->kind) {
    case LocalType::Kind::End:
      return;
    case LocalType::Kind::Var: {
      auto it = bound.find(t->var);
      if (it == bound.end()) throw ParseError("unbound type variable " + t->var, 0, 0);
      if (!it->second) throw ParseError("unguarded recursion at variable " + t->var, 0, 0);
      return;
    }
    case LocalType::Kind::Rec:
      bound[t->var] = false;
      check_ltype(t->body, bound);
      return;
    case LocalType::Kind::Select:
    case LocalType::Kind::Branch: {
      for (auto& [v, flag] : bound) flag = true;
      std::set<std::string> labels;
      for (const auto& b : t->branches) {
        if (!labels.insert(b.label).second)
          throw ParseError("duplicate label " + b.label, 0, 0);
        check_ltype(b.cont, bound);
      }
      return;
    }
    case LocalType::Kind::ExistBranch: {
      for (auto& [v, flag] : bound) flag = true;
      std::set<std::string> partners;
      for (const auto& r : t->rows) {
        if (!partners.insert(r.partner.name).second)
          throw ParseError("duplicate existential partner " + r.partner.name, 0, 0);
        check_ltype(r.cont, bound);
      }
      return;
    }
  }
}

struct DefSig {
  size_t arity;
};

void check_proc(const ProcPtr& p, std::map<std::string, DefSig> defs) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return;
    case Process::Kind::Restriction:
      check_proc(p->body, defs);
      return;
    case Process::Kind::Parallel:
      for (const auto& q : p->parts) check_proc(q, defs);
      return;
    case Process::Kind::Selection:
      check_proc(p->cont, defs);
      return;
    case Process::Kind::Branching: {
      std::set<std::string> labels;
      for (const auto& a : p->arms) {
        if (!labels.insert(a.label).second)
          throw ParseError("duplicate branch label " + a.label, 0, 0);
        check_proc(a.body, defs);
      }
      return;
    }
    case Process::Kind::ExistBranching: {
      std::set<std::string> partners;
      for (const auto& r : p->rows) {
        if (!partners.insert(r.partner.name).second)
          throw ParseError("duplicate existential partner " + r.partner.name, 0, 0);
        check_proc(r.body, defs);
      }
      return;
    }
    case Process::Kind::Definition: {
      // Contiguous def chains are mutually recursive: collect the chain first.
      std::vector<const Process*> chain;
      const Process* cur = p.get();
      while (cur->kind == Process::Kind::Definition) {
        chain.push_back(cur);
        cur = cur->scope.get();
      }
      auto inner = defs;
      for (const auto* d : chain) {
        std::set<std::string> pnames;
        for (const auto& par : d->params)
          if (!pnames.insert(par.name).second)
            throw ParseError("duplicate parameter " + par.name + " of " + d->def_name, 0, 0);
        inner[d->def_name] = DefSig{d->params.size()};
      }
      // Unguarded call cycles through the chain never reach a prefix.
      std::map<std::string, std::set<std::string>> direct;
      for (const auto* d : chain) direct[d->def_name] = unguarded_calls(d->def_body);
      for (const auto* d : chain) {
        std::set<std::string> seen;
        std::vector<std::string> stack{d->def_name};
        while (!stack.empty()) {
          std::string n = stack.back();
          stack.pop_back();
          for (const auto& m : direct[n]) {
            if (m == d->def_name)
              throw ParseError("definition " + d->def_name + " is not guarded", 0, 0);
            if (seen.insert(m).second && direct.count(m)) stack.push_back(m);
          }
        }
      }
      for (const auto* d : chain) check_proc(d->def_body, inner);
      check_proc(chain.back()->scope, inner);
      return;
    }
    case Process::Kind::Call: {
      auto it = defs.find(p->call_name);
      if (it == defs.end())
        throw ParseError("call to undefined process " + p->call_name, 0, 0);
      if (it->second.arity != p->args.size())
        throw ParseError("call to " + p->call_name + " with " + std::to_string(p->args.size()) +
                             " arguments, expected " + std::to_string(it->second.arity),
                         0, 0);
      return;
    }
  }
}

// ---- binder freshening ----------------------------------------------------

struct Freshener {
  std::set<std::string> used;

  std::string intro(const std::string& n) {
    if (!used.count(n)) {
      used.insert(n);
      return n;
    }
    for (int i = 2;; ++i) {
      std::string cand = n + "_" + std::to_string(i);
      if (!used.count(cand)) {
        used.insert(cand);
        return cand;
      }
    }
  }

  ProcPtr walk(const ProcPtr& p, std::map<std::string, std::string> env) {
    auto ren_chan = [&](const Channel& c) {
      auto it = env.find(c.base);
      if (it == env.end()) return c;
      Channel r = c;
      r.base = it->second;
      return r;
    };
    auto ren_payload = [&](const Payload& d) {
      if (d.kind != Payload::Kind::ChannelValue) return d;
      return Payload::from_channel(ren_chan(d.channel));
    };
    switch (p->kind) {
      case Process::Kind::Inaction:
        return p;
      case Process::Kind::Restriction: {
        std::string ns = intro(p->session);
        env[p->session] = ns;
        return Process::restriction(ns, p->global_name, walk(p->body, env));
      }
      case Process::Kind::Parallel: {
        std::vector<ProcPtr> parts;
        for (const auto& q : p->parts) parts.push_back(walk(q, env));
        return Process::parallel(std::move(parts));
      }
      case Process::Kind::Selection:
        return Process::selection(ren_chan(p->subject), p->partner, p->label,
                                  ren_payload(p->payload), walk(p->cont, env));
      case Process::Kind::Branching: {
        std::vector<BranchArm> arms;
        for (const auto& a : p->arms) {
          auto inner = env;
          std::string nv = intro(a.var);
          inner[a.var] = nv;
          arms.push_back({a.label, nv, walk(a.body, inner)});
        }
        return Process::branching(ren_chan(p->subject), p->partner, std::move(arms));
      }
      case Process::Kind::ExistBranching: {
        std::vector<ExistArm> rows;
        for (const auto& r : p->rows) {
          auto inner = env;
          std::string nv = intro(r.var);
          inner[r.var] = nv;
          rows.push_back({r.partner, r.label, nv, walk(r.body, inner)});
        }
        return Process::exist_branching(ren_chan(p->subject), std::move(rows));
      }
      case Process::Kind::Definition: {
        // Names of a contiguous chain are mutually visible; introduce the
        // whole chain before walking bodies.
        std::vector<const Process*> chain;
        const Process* cur = p.get();
        while (cur->kind == Process::Kind::Definition) {
          chain.push_back(cur);
          cur = cur->scope.get();
        }
        auto outer = env;
        std::vector<std::string> names;
        for (const auto* d : chain) {
          std::string nn = intro(d->def_name);
          outer[d->def_name] = nn;
          names.push_back(nn);
        }
        std::function<ProcPtr(size_t, const ProcPtr&)> rebuild =
            [&](size_t i, const ProcPtr& node) -> ProcPtr {
          if (i == chain.size()) return walk(node, outer);
          const Process* d = chain[i];
          auto inner = outer;
          std::vector<Param> params;
          for (const auto& par : d->params) {
            std::string np = intro(par.name);
            inner[par.name] = np;
            params.push_back({np, par.sort});
          }
          return Process::definition(names[i], std::move(params), walk(d->def_body, inner),
                                     rebuild(i + 1, chain[i]->scope));
        };
        return rebuild(0, p);
      }
      case Process::Kind::Call: {
        std::vector<Payload> args;
        for (const auto& a : p->args) args.push_back(ren_payload(a));
        auto it = env.find(p->call_name);
        return Process::call(it == env.end() ? p->call_name : it->second, std::move(args));
      }
    }
    return p;
  }
};

ProcPtr freshen(const ProcPtr& p) {
  Freshener f;
  for (const auto& s : free_sessions(p)) f.used.insert(s);
  for (const auto& v : free_channel_vars(p)) f.used.insert(v);
  return f.walk(p, {});
}

// Top-level process declarations may reference each other as zero-argument
// calls; those are inlined here.
ProcPtr inline_refs(const ProcPtr& p, const std::map<std::string, ProcPtr>& decls,
                    std::set<std::string>& in_flight, std::set<std::string> shadowed);

ProcPtr inline_decl(const std::string& name, const std::map<std::string, ProcPtr>& decls,
                    std::set<std::string>& in_flight) {
  if (in_flight.count(name))
    throw ParseError("cyclic reference between process declarations at " + name, 0, 0);
  in_flight.insert(name);
  auto out = inline_refs(decls.at(name), decls, in_flight, {});
  in_flight.erase(name);
  return out;
}

ProcPtr inline_refs(const ProcPtr& p, const std::map<std::string, ProcPtr>& decls,
                    std::set<std::string>& in_flight, std::set<std::string> shadowed) {
  switch (p->kind) {
    case Process::Kind::Inaction:
      return p;
    case Process::Kind::Restriction:
      return Process::restriction(p->session, p->global_name,
                                  inline_refs(p->body, decls, in_flight, shadowed));
    case Process::Kind::Parallel: {
      std::vector<ProcPtr> parts;
      for (const auto& q : p->parts) parts.push_back(inline_refs(q, decls, in_flight, shadowed));
      return Process::parallel(std::move(parts));
    }
    case Process::Kind::Selection:
      return Process::selection(p->subject, p->partner, p->label, p->payload,
                                inline_refs(p->cont, decls, in_flight, shadowed));
    case Process::Kind::Branching: {
      auto arms = p->arms;
      for (auto& a : arms) a.body = inline_refs(a.body, decls, in_flight, shadowed);
      return Process::branching(p->subject, p->partner, std::move(arms));
    }
    case Process::Kind::ExistBranching: {
      auto rows = p->rows;
      for (auto& r : rows) r.body = inline_refs(r.body, decls, in_flight, shadowed);
      return Process::exist_branching(p->subject, std::move(rows));
    }
    case Process::Kind::Definition: {
      auto sh = shadowed;
      sh.insert(p->def_name);
      return Process::definition(p->def_name, p->params,
                                 inline_refs(p->def_body, decls, in_flight, sh),
                                 inline_refs(p->scope, decls, in_flight, sh));
    }
    case Process::Kind::Call: {
      if (!shadowed.count(p->call_name) && decls.count(p->call_name)) {
        if (!p->args.empty())
          throw ParseError("process declaration " + p->call_name + " takes no arguments", 0, 0);
        return inline_decl(p->call_name, decls, in_flight);
      }
      return p;
    }
  }
  return p;
}

} // namespace

GlobalPtr Program::global(const std::string& name) const {
  auto it = globals.find(name);
  if (it == globals.end()) throw ParseError("unknown global type " + name, 0, 0);
  return it->second;
}

ProcPtr Program::process(const std::string& name) const {
  auto it = processes.find(name);
  if (it == processes.end()) throw ParseError("unknown process " + name, 0, 0);
  return it->second;
}

Program load_program(const std::string& text) {
  Parser parser(text);
  Program prog;
  std::map<std::string, ProcPtr> raw_procs;
  while (parser.peek().kind != Tok::End) {
    Token head = parser.peek();
    if (parser.at_ident("global")) {
      parser.next();
      std::string name = parser.expect_name("global type name");
      parser.expect(Tok::Equal, "'='");
      GlobalPtr g = parser.parse_gtype();
      check_gtype(g, {});
      if (prog.globals.count(name))
        throw ParseError("duplicate global declaration " + name, head.line, head.col);
      prog.globals[name] = g;
      prog.declarations.push_back({Declaration::Kind::Global, name, head.line, head.col});
      continue;
    }
    if (parser.at_ident("local")) {
      parser.next();
      std::string name = parser.expect_name("local type name");
      parser.expect(Tok::Equal, "'='");
      LocalPtr t = parser.parse_ltype();
      check_ltype(t, {});
      if (prog.locals.count(name))
        throw ParseError("duplicate local declaration " + name, head.line, head.col);
      prog.locals[name] = t;
      prog.declarations.push_back({Declaration::Kind::Local, name, head.line, head.col});
      continue;
    }
    if (parser.at_ident("process")) {
      parser.next();
      std::string name = parser.expect_name("process name");
      parser.expect(Tok::Equal, "'='");
      ProcPtr p = parser.parse_proc();
      if (raw_procs.count(name))
        throw ParseError("duplicate process declaration " + name, head.line, head.col);
      raw_procs[name] = p;
      prog.declarations.push_back({Declaration::Kind::Process, name, head.line, head.col});
      continue;
    }
    throw ParseError("expected declaration, got '" + head.text + "'", head.line, head.col);
  }
  for (const auto& [name, p] : raw_procs) {
    std::set<std::string> in_flight{name};
    ProcPtr inlined = inline_refs(p, raw_procs, in_flight, {});
    ProcPtr fresh = freshen(inlined);
    check_proc(fresh, {});
    prog.processes[name] = fresh;
  }
  // Restrictions must name declared globals when annotated.
  for (const auto& [name, p] : prog.processes) {
    std::function<void(const ProcPtr&)> scan = [&](const ProcPtr& q) {
      if (q->kind == Process::Kind::Restriction) {
        if (!q->global_name.empty() && !prog.globals.count(q->global_name))
          throw ParseError("process " + name + " restricts over undeclared global " +
                               q->global_name,
                           0, 0);
        scan(q->body);
        return;
      }
      if (q->kind == Process::Kind::Parallel)
        for (const auto& r : q->parts) scan(r);
      if (q->kind == Process::Kind::Selection) scan(q->cont);
      if (q->kind == Process::Kind::Branching)
        for (const auto& a : q->arms) scan(a.body);
      if (q->kind == Process::Kind::ExistBranching)
        for (const auto& r : q->rows) scan(r.body);
      if (q->kind == Process::Kind::Definition) {
        scan(q->def_body);
        scan(q->scope);
      }
    };
    scan(p);
  }
  return prog;
}

Program load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str());
}

GlobalPtr parse_global(const std::string& text) {
  Parser parser(text);
  GlobalPtr g = parser.parse_gtype();
  if (parser.peek().kind != Tok::End) parser.fail("trailing input after global type");
  check_gtype(g, {});
  return g;
}

LocalPtr parse_local(const std::string& text) {
  Parser parser(text);
  LocalPtr t = parser.parse_ltype();
  if (parser.peek().kind != Tok::End) parser.fail("trailing input after local type");
  check_ltype(t, {});
  return t;
}

ProcPtr parse_process(const std::string& text) {
  Parser parser(text);
  ProcPtr p = parser.parse_proc();
  if (parser.peek().kind != Tok::End) parser.fail("trailing input after process");
  ProcPtr fresh = freshen(p);
  check_proc(fresh, {});
  return fresh;
}

} // namespace mssr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "mssr/parser.hpp"
#include "mssr/printer.hpp"
#include "mssr/projection.hpp"
#include "support/gen.hpp"

using namespace mssr;

TEST_CASE("end parses to the end type") {
  CHECK(parse_global("end")->kind == GlobalType::Kind::End);
}

TEST_CASE("the seller protocol parses to a two-row existential") {
  Program prog = load_file(MSSR_CORPUS_DIR "/seller.mssr");
  GlobalPtr g = prog.global("G");
  REQUIRE(g->kind == GlobalType::Kind::Exist);
  REQUIRE(g->rows.size() == 2);
  CHECK(g->ex_receiver == Role{"r_s"});
  auto domains = exdom(g);
  REQUIRE(domains.size() == 1);
  CHECK(domains.begin()->roles == std::vector<Role>{Role{"r_b"}, Role{"r_d"}});
}

TEST_CASE("unguarded recursion is rejected") {
  CHECK_THROWS_AS(parse_global("rec t . t"), ParseError);
  CHECK_THROWS_AS(parse_global("rec t . rec u . t"), ParseError);
  // Guarded under a prefix is fine even across an inner binder.
  CHECK_NOTHROW(parse_global("rec t . p -> q : { l(int) . rec u . p -> q : { m(int) . t } }"));
}

TEST_CASE("unbound type variables are rejected") {
  CHECK_THROWS_AS(parse_global("t"), ParseError);
  CHECK_THROWS_AS(parse_local("rec t . p & { l(int) . u }"), ParseError);
}

TEST_CASE("inaction and the seller processes parse") {
  CHECK(parse_process("0")->kind == Process::Kind::Inaction);
  Program prog = load_file(MSSR_CORPUS_DIR "/seller.mssr");
  ProcPtr ps = prog.process("Ps");
  REQUIRE(ps->kind == Process::Kind::ExistBranching);
  REQUIRE(ps->rows.size() == 2);
  ProcPtr pb = prog.process("Pb");
  REQUIRE(pb->kind == Process::Kind::Selection);
  CHECK(pb->label == "purchase");
  CHECK(pb->cont->kind == Process::Kind::Branching);
}

TEST_CASE("duplicate branch labels are rejected") {
  CHECK_THROWS_AS(parse_process("c[q][p] & { l(x) . 0, l(y) . 0 }"), ParseError);
  CHECK_THROWS_AS(parse_global("p -> q : { l(int) . end, l(bool) . end }"), ParseError);
}

TEST_CASE("existential rows must have distinct partners and one subject") {
  CHECK_THROWS_AS(parse_process("exists& { s[p][q] & l(x) . 0, s[p][q] & m(y) . 0 }"),
                  ParseError);
  CHECK_THROWS_AS(parse_process("exists& { s[p][q] & l(x) . 0, s[r][w] & m(y) . 0 }"),
                  ParseError);
  CHECK_NOTHROW(parse_process("exists& { s[p][q] & l(x) . 0, s[p][w] & m(y) . 0 }"));
}

TEST_CASE("negative corpus: malformed inputs") {
  const char* bad[] = {
      "global",                                    // missing name
      "global G = p -> p : { l(int) . end }",      // self-interaction
      "global G = exists { p -> q : l(int) . end, r -> w : m(int) . end }", // two receivers
      "process P = s[p][q] + l(1)",                // missing continuation
      "process P = s[p][q] & { }",                 // empty branch set
      "process P = X(1)",                          // unbound call
      "process P = def X(v : int) = 0 in X(1, 2)", // wrong arity
      "local T = p + { l(int) end }",              // missing dot
      "yadda yadda",
  };
  for (const char* text : bad) CHECK_THROWS_AS(load_program(text), ParseError);
}

TEST_CASE("declaration references inline and cycles are rejected") {
  Program prog = load_program("process A = s[p][q] + l(1) . 0\nprocess B = A | A");
  ProcPtr b = prog.process("B");
  REQUIRE(b->kind == Process::Kind::Parallel);
  CHECK(b->parts.size() == 2);
  CHECK_THROWS_AS(load_program("process A = B | 0\nprocess B = A | 0"), ParseError);
}

TEST_CASE("round-trip on the corpus") {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(MSSR_CORPUS_DIR)) {
    if (entry.path().extension() != ".mssr") continue;
    seen++;
    Program prog = load_file(entry.path().string());
    for (const auto& [name, g] : prog.globals) {
      CAPTURE(entry.path().string(), name);
      CHECK(equal_types(canon(parse_global(pretty(g))), canon(g)));
    }
    for (const auto& [name, t] : prog.locals)
      CHECK(equal_types(canon(parse_local(pretty(t))), canon(t)));
    for (const auto& [name, p] : prog.processes) {
      CAPTURE(entry.path().string(), name);
      CHECK(structurally_equivalent(parse_process(pretty(p)), p));
    }
  }
  CHECK(seen >= 5);
}

TEST_CASE("round-trip on fuzz-generated types and processes") {
  gen::Rng rng(23);
  auto globals = gen::well_formed_globals(rng, 60);
  for (const auto& g : globals) CHECK(equal_types(canon(parse_global(pretty(g))), canon(g)));
  std::vector<Role> pool{Role{"p"}, Role{"q"}, Role{"r"}};
  for (int i = 0; i < 100; ++i) {
    LocalPtr t = gen::random_local(rng, 3, pool);
    if (!closed_type(t)) continue;
    CHECK(equal_types(canon(parse_local(pretty(t))), canon(t)));
  }
  for (int i = 0; i < 100; ++i) {
    ProcPtr p = canon(gen::random_process(rng, 4));
    CHECK(structurally_equivalent(parse_process(pretty(p)), p));
  }
}

TEST_CASE("sender annotations on domain selections round-trip") {
  LocalPtr t = parse_local(
      "r_s + { r_b -> purchase(unit) . end, r_d -> deliver(str) . end }");
  REQUIRE(t->kind == LocalType::Kind::Select);
  REQUIRE(t->branches.size() == 2);
  CHECK(t->branches[0].sender.has_value());
  CHECK(equal_types(canon(parse_local(pretty(t))), canon(t)));
  // Mixed annotated/plain branches are rejected.
  CHECK_THROWS_AS(parse_local("p + { a -> l(int) . end, m(int) . end }"), ParseError);
}

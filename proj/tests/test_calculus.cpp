#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mssr/ast.hpp"
#include "mssr/parser.hpp"
#include "mssr/printer.hpp"
#include "support/gen.hpp"

using namespace mssr;

TEST_CASE("substitute leaves terms without the variable alone") {
  ProcPtr zero = Process::inaction();
  CHECK(structurally_equivalent(substitute(zero, "x", Payload::from_constant({Sort::Int, "5"})),
                                zero));
}

TEST_CASE("substitute pushes a payload into a selection argument") {
  ProcPtr p = parse_process("s[q][p] + ok(x) . 0");
  ProcPtr expected = parse_process("s[q][p] + ok(100) . 0");
  ProcPtr got = substitute(p, "x", Payload::from_constant({Sort::Int, "100"}));
  CHECK(structurally_equivalent(got, expected));
}

TEST_CASE("substitute stops at a rebinding branch") {
  ProcPtr p = parse_process("def X(v : int) = c[q][p] + l(v) . 0 in c[q][p] & { l(x) . X(x) }");
  ProcPtr got = substitute(p, "x", Payload::from_constant({Sort::Int, "7"}));
  CHECK(structurally_equivalent(got, p)); // x is bound by the branch arm
}

TEST_CASE("substituting a channel avoids capturing a session binder") {
  // y := s2[a] must not be captured by the inner (new s2).
  ProcPtr p = parse_process("new s2 . (y[b] + l(()) . 0 | s2[c][d] + m(()) . 0)");
  ProcPtr got = substitute(p, "y", Payload::from_channel(Channel::session_role("s2", Role{"a"})));
  // The inner binder must have been renamed away from s2.
  auto sessions = free_sessions(got);
  CHECK(sessions.count("s2") == 1);
  CHECK_FALSE(structurally_equivalent(got, p));
}

TEST_CASE("parallel composition is commutative and associative up to equivalence") {
  ProcPtr p = parse_process("s[a][b] + l(1) . 0");
  ProcPtr q = parse_process("s[b][a] & { l(x) . 0 }");
  ProcPtr r = parse_process("s[c][d] + m(2) . 0");
  CHECK(structurally_equivalent(Process::parallel({p, q}), Process::parallel({q, p})));
  CHECK(structurally_equivalent(Process::parallel({Process::parallel({p, q}), r}),
                                Process::parallel({p, Process::parallel({q, r})})));
}

TEST_CASE("alpha renaming of a branch binder is invisible") {
  ProcPtr a = parse_process("c[q][p] & { l(x) . 0 }");
  ProcPtr b = parse_process("c[q][p] & { l(y) . 0 }");
  CHECK(structurally_equivalent(a, b));
}

TEST_CASE("distinct labels are not equivalent") {
  ProcPtr a = parse_process("c[q][p] & { l(x) . 0 }");
  ProcPtr b = parse_process("c[q][p] & { m(x) . 0 }");
  CHECK_FALSE(structurally_equivalent(a, b));
}

TEST_CASE("roles_of collects subject roles only") {
  CHECK(roles_of(Process::inaction()).empty());

  Program prog = load_file(MSSR_CORPUS_DIR "/seller.mssr");
  auto rb = roles_of(prog.process("Pb"));
  CHECK(rb == std::set<Role>{Role{"r_b"}});

  Program exam4 = load_file(MSSR_CORPUS_DIR "/exam4.mssr");
  auto r2 = roles_of(exam4.process("P2"));
  CHECK(r2 == std::set<Role>{Role{"q"}, Role{"r"}});
}

TEST_CASE("guardedness of definition bodies") {
  ProcPtr guarded = parse_process("def X(d : int) = x1[q] + l(d) . X(d) in X(1)");
  CHECK(check_guarded(guarded->def_body, guarded->def_name));

  // An unguarded direct call is rejected at load time.
  CHECK_THROWS_AS(parse_process("def X(d : int) = X(d) in X(1)"), ParseError);

  CHECK(check_guarded(Process::inaction(), "X"));
}

TEST_CASE("canonicalization is idempotent and drops inert components") {
  gen::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    ProcPtr p = gen::random_process(rng, 4);
    ProcPtr c1 = canon(p);
    ProcPtr c2 = canon(c1);
    CHECK(encode(c1) == encode(c2));
  }
  ProcPtr padded = Process::parallel({Process::inaction(), parse_process("s[a][b] + l(1) . 0")});
  CHECK(structurally_equivalent(padded, parse_process("s[a][b] + l(1) . 0")));
}

TEST_CASE("structural equivalence is an equivalence relation on random terms") {
  gen::Rng rng(11);
  std::vector<ProcPtr> terms;
  for (int i = 0; i < 60; ++i) terms.push_back(gen::random_process(rng, 3));
  for (const auto& p : terms) CHECK(structurally_equivalent(p, p));
  for (size_t i = 0; i < terms.size(); ++i)
    for (size_t j = i + 1; j < terms.size(); ++j) {
      bool ij = structurally_equivalent(terms[i], terms[j]);
      bool ji = structurally_equivalent(terms[j], terms[i]);
      CHECK(ij == ji);
    }
  // transitivity through canonical representatives
  for (size_t i = 0; i + 2 < terms.size(); i += 3) {
    if (structurally_equivalent(terms[i], terms[i + 1]) &&
        structurally_equivalent(terms[i + 1], terms[i + 2]))
      CHECK(structurally_equivalent(terms[i], terms[i + 2]));
  }
}

TEST_CASE("substitutions of disjoint variables commute") {
  gen::Rng rng(13);
  Payload v1 = Payload::from_constant({Sort::Int, "1"});
  Payload v2 = Payload::from_constant({Sort::Int, "2"});
  for (int i = 0; i < 100; ++i) {
    ProcPtr p = gen::random_process(rng, 3);
    ProcPtr a = substitute(substitute(p, "x0", v1), "x1", v2);
    ProcPtr b = substitute(substitute(p, "x1", v2), "x0", v1);
    CHECK(structurally_equivalent(a, b));
  }
}

TEST_CASE("inertness sees through restrictions and definitions") {
  CHECK(inert(parse_process("new s . (0 | 0)")));
  CHECK(inert(parse_process("def X() = c[q][p] + l(()) . 0 in 0")));
  CHECK_FALSE(inert(parse_process("s[a][b] + l(1) . 0")));
}

// Surface syntax for protocols and processes.
//
//   file    := decl*
//   decl    := "global" ID "=" gtype | "local" ID "=" ltype | "process" ID "=" proc
//   gtype   := ROLE "->" ROLE ":" "{" gbranch ("," gbranch)* "}"
//            | "exists" "{" erow ("," erow)* "}"
//            | "rec" TVAR "." gtype | TVAR | "end"
//   gbranch := LABEL "(" btype ")" "." gtype
//   erow    := ROLE "->" ROLE ":" LABEL "(" btype ")" "." gtype
//   btype   := "int" | "bool" | "real" | "str" | "unit" | "<" gtype ">" | ltype
//   ltype   := ROLE "+" "{" lb ("," lb)* "}" | ROLE "&" "{" lb ("," lb)* "}"
//            | "exists&" "{" elb ("," elb)* "}" | "rec" TVAR "." ltype | TVAR | "end"
//   lb      := [ROLE "->"] LABEL "(" btype ")" "." ltype
//   elb     := ROLE "&" LABEL "(" btype ")" "." ltype
//   proc    := term ("|" term)*
//   term    := "0" | "(" proc ")"
//            | "new" ID [":" ID] "." proc
//            | "def" ID "(" params ")" "=" proc "in" proc | ID "(" args ")"
//            | chan "[" ROLE "]" "+" LABEL "(" arg ")" "." proc
//            | chan "[" ROLE "]" "&" "{" pb ("," pb)* "}"
//            | "exists&" "{" epb ("," epb)* "}"
//   pb      := LABEL "(" ID ")" "." proc
//   epb     := chan "[" ROLE "]" "&" LABEL "(" ID ")" "." proc
//   chan    := ID | ID "[" ROLE "]"
//   arg     := INT | REAL | STRING | "true" | "false" | "(" ")" | ID | ID "[" ROLE "]"
//
// The sender prefix in lb appears only on selection types projected for an
// existential domain. Comments run from '#' to end of line. Contiguous def
// chains are mutually recursive.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssr/ast.hpp"
#include "mssr/types.hpp"

namespace mssr {

struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct Declaration {
  enum class Kind { Global, Local, Process };
  Kind kind;
  std::string name;
  int line = 0;
  int col = 0;
};

// A loaded, validated source file: names resolved, top-level process
// references inlined, binders freshened, invariants checked.
struct Program {
  std::vector<Declaration> declarations;
  std::map<std::string, GlobalPtr> globals;
  std::map<std::string, LocalPtr> locals;
  std::map<std::string, ProcPtr> processes;

  GlobalPtr global(const std::string& name) const;
  ProcPtr process(const std::string& name) const;
};

Program load_program(const std::string& text);
Program load_file(const std::string& path);

// Standalone entry points for single terms; same validation as load_program.
GlobalPtr parse_global(const std::string& text);
LocalPtr parse_local(const std::string& text);
ProcPtr parse_process(const std::string& text);

} // namespace mssr

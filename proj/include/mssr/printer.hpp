// Pretty-printing back into the surface syntax; parse(pretty(x)) round-trips.
#pragma once

#include <string>

#include "mssr/ast.hpp"
#include "mssr/types.hpp"

namespace mssr {

std::string pretty(const GlobalPtr& g);
std::string pretty(const LocalPtr& t);
std::string pretty(const TypeExpr& e);
std::string pretty(const ProcPtr& p);

} // namespace mssr

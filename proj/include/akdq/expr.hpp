#ifndef AKDQ_EXPR_HPP
#define AKDQ_EXPR_HPP

#include "akdq/jet.hpp"

namespace akdq {

// Parses a polynomial expression over Q[i] in variables x1..x<dim> and lowers
// it to a Jet of the given order.  Grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' uint)?
//   base   := rational | 'i' | 'x' uint | '(' expr ')'
// Throws errc::input with the offending position on syntax errors or a
// variable index outside 1..dim.
Jet parse_polynomial(const std::string& text, int dim, int order);

}  // namespace akdq

#endif

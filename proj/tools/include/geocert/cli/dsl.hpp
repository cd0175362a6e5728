#pragma once

// Objective expression language.
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := NUMBER | IDENT | IDENT "(" args ")" | "(" expr ")" | "-" factor
//
// "*" is scalar scaling: at least one side must be a constant scalar.
// product(a, b) builds an explicit product node, which analysis never certifies.

#include "geocert/errors.hpp"
#include "geocert/expression.hpp"

#include <map>
#include <string>
#include <string_view>

namespace geocert::cli {

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct NamedConstant {
  NumericArg value;
  Definiteness definiteness = Definiteness::None;
};

/// Names visible to the parser.
struct Environment {
  std::map<std::string, Manifold, std::less<>> variables;
  std::map<std::string, NamedConstant, std::less<>> constants;
  const AtomRegistry* registry = &default_registry();
};

Expression parse_dsl(std::string_view text, const Environment& env);

/// Inverse of parse_dsl for parsed trees: parse_dsl(unparse(e)) == e.
/// Scalars are printed with 17 significant digits.
std::string unparse(const Expression& e);

}  // namespace geocert::cli

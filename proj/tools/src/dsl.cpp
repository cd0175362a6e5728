#include "geocert/cli/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <variant>
#include <vector>

namespace geocert::cli {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

namespace {

constexpr const char* kProductMessage =
    "products are not DGCP-representable: geodesic convexity is not preserved under products "
    "(tr(X) * -logdet(X) breaks midpoint convexity between I and 16 I)";

enum class Tok { Number, Ident, LParen, RParen, Comma, Plus, Minus, Star, Slash, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, {}, 0.0, line, col};
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size())
        throw ParseError("malformed number '" + t.text + "'", line, col);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case ',': t.kind = Tok::Comma; break;
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "end of input", 0.0, line, col});
  return out;
}

using Item = std::variant<Expression, Param>;

class Parser {
 public:
  Parser(std::vector<Token> toks, const Environment& env) : toks_(std::move(toks)), env_(env) {}

  Expression parse() {
    Item it = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'", peek());
    Expression e = need_expr(it, toks_.front());
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what + ", found '" + peek().text + "'", peek());
  }
  [[noreturn]] static void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.column);
  }

  static Expression need_expr(const Item& it, const Token& at) {
    if (const auto* e = std::get_if<Expression>(&it)) return *e;
    const Param& p = std::get<Param>(it);
    fail("constant '" + p.name + "' can only be passed to an atom", at);
  }

  static Expression need_scalar(const Item& it, const Token& at, const char* op) {
    Expression e = need_expr(it, at);
    if (!e.is_scalar()) fail(std::string(op) + " of a matrix-valued expression: " + kProductMessage, at);
    return e;
  }

  static std::optional<double> literal_of(const Expression& e) {
    if (e.kind() == NodeKind::ConstScalar) return e.scalar_value();
    return std::nullopt;
  }

  // Value of a constant scalar subexpression that is not a literal.
  static std::optional<double> constant_of(const Expression& e) {
    if (!e.is_scalar() || !e.is_constant()) return std::nullopt;
    try {
      return evaluate_scalar(e, Bindings{});
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  static Expression negated(const Expression& e) {
    if (e.kind() == NodeKind::ConstScalar) return make_const_scalar(-e.scalar_value());
    return make_scalar_mul(-1.0, e);
  }

  // A term is `scale * item` when its outermost operation scales by a
  // constant; a sum absorbs the scale into its weights.
  struct Term {
    Item item;
    std::optional<double> scale;
  };

  static Item collapse(Term t) {
    if (!t.scale) return std::move(t.item);
    return make_scalar_mul(*t.scale, std::get<Expression>(t.item));
  }

  Item expr() {
    const Token& start = peek();
    std::vector<Term> items{term()};
    std::vector<std::pair<bool, const Token*>> signs{{false, &start}};
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token& op = take();
      signs.emplace_back(op.kind == Tok::Minus, &op);
      items.push_back(term());
    }
    if (items.size() == 1) return collapse(std::move(items.front()));

    std::vector<Expression> terms;
    std::vector<double> weights;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const double sign = signs[i].first ? -1.0 : 1.0;
      terms.push_back(need_scalar(items[i].item, *signs[i].second, "sum"));
      weights.push_back(sign * items[i].scale.value_or(1.0));
    }
    const bool literal = std::all_of(terms.begin(), terms.end(),
                                     [](const Expression& t) { return t.kind() == NodeKind::ConstScalar; });
    if (literal) {
      double s = 0.0;
      for (std::size_t i = 0; i < terms.size(); ++i) s += weights[i] * terms[i].scalar_value();
      return make_const_scalar(s);
    }
    return make_add(std::move(terms), std::move(weights));
  }

  Term term() {
    Term acc{factor(), std::nullopt};
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token& op = take();
      Item rhs_item = factor();
      const Expression lhs = need_scalar(acc.item, op, "product");
      const Expression rhs = need_scalar(rhs_item, op, "product");
      const double lscale = acc.scale.value_or(1.0);
      const auto ll = literal_of(lhs);
      const auto rl = literal_of(rhs);
      if (op.kind == Tok::Slash) {
        const auto rc = rl ? rl : constant_of(rhs);
        if (!rc) fail(std::string("division by a nonconstant expression: ") + kProductMessage, op);
        if (*rc == 0.0) fail("division by zero", op);
        if (ll)
          acc = Term{make_const_scalar(lscale * *ll / *rc), std::nullopt};
        else
          acc.scale = lscale / *rc;
        continue;
      }
      if (ll && rl) {
        acc = Term{make_const_scalar(lscale * *ll * *rl), std::nullopt};
      } else if (ll) {
        acc = Term{rhs, lscale * *ll};
      } else if (rl) {
        acc.scale = lscale * *rl;
      } else if (const auto rc = constant_of(rhs)) {
        acc.scale = lscale * *rc;
      } else if (const auto lc = constant_of(lhs)) {
        acc = Term{rhs, lscale * *lc};
      } else {
        fail(kProductMessage, op);
      }
    }
    return acc;
  }

  Item factor() {
    const Token& t = peek();
    if (accept(Tok::Minus)) {
      Item inner = factor();
      Expression e = need_expr(inner, t);
      if (!e.is_scalar()) fail("negation of a matrix-valued expression is not supported", t);
      return negated(e);
    }
    if (accept(Tok::Number)) return make_const_scalar(t.number);
    if (accept(Tok::LParen)) {
      Item inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (accept(Tok::Ident)) {
      if (peek().kind == Tok::LParen) return call(t);
      return identifier(t);
    }
    fail("expected an expression, found '" + t.text + "'", t);
  }

  Item identifier(const Token& t) {
    if (auto v = env_.variables.find(t.text); v != env_.variables.end())
      return make_variable(t.text, v->second);
    if (auto c = env_.constants.find(t.text); c != env_.constants.end()) {
      const NamedConstant& k = c->second;
      if (const double* d = std::get_if<double>(&k.value)) return make_const_scalar(*d);
      if (const auto* m = std::get_if<spd::Matrix>(&k.value)) {
        try {
          return make_const_matrix(*m, k.definiteness, t.text);
        } catch (const Error& e) {
          fail(e.what(), t);
        }
      }
      return Param(k.value, t.text);
    }
    fail("unknown identifier '" + t.text + "'", t);
  }

  Item call(const Token& name) {
    expect(Tok::LParen, "'('");
    std::vector<Item> args;
    if (peek().kind != Tok::RParen) {
      do {
        args.push_back(expr());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");

    if (name.text == "max") {
      if (args.empty()) fail("max needs at least one argument", name);
      std::vector<Expression> kids;
      for (const auto& a : args) kids.push_back(need_scalar(a, name, "max"));
      return make_max(std::move(kids));
    }
    if (name.text == "product") {
      if (args.size() != 2) fail("product takes two arguments", name);
      return make_product(need_scalar(args[0], name, "product"), need_scalar(args[1], name, "product"));
    }
    if (!env_.registry->contains(name.text)) fail("unknown function '" + name.text + "'", name);
    std::vector<AtomInput> inputs;
    for (auto& a : args) {
      if (auto* e = std::get_if<Expression>(&a))
        inputs.emplace_back(*e);
      else
        inputs.emplace_back(std::get<Param>(a));
    }
    try {
      return apply_atom(*env_.registry, name.text, std::move(inputs));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what(), name);
    }
  }

  std::vector<Token> toks_;
  const Environment& env_;
  std::size_t pos_ = 0;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string param_text(const Param& p) {
  if (!p.name.empty()) return p.name;
  if (const double* d = std::get_if<double>(&p.value)) return number(*d);
  return "<unnamed>";
}

bool needs_parens(const Expression& e) {
  return e.kind() == NodeKind::Add || e.kind() == NodeKind::ScalarMul;
}

std::string wrapped(const Expression& e) {
  return needs_parens(e) ? "(" + unparse(e) + ")" : unparse(e);
}

}  // namespace

Expression parse_dsl(std::string_view text, const Environment& env) {
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw ParseError("empty objective", 1, 1);
  return Parser(lex(text), env).parse();
}

std::string unparse(const Expression& e) {
  switch (e.kind()) {
    case NodeKind::Variable: return e.name();
    case NodeKind::ConstMatrix: return label(e);
    case NodeKind::ConstScalar: return number(e.scalar_value());
    case NodeKind::ScalarMul: return number(e.scalar_value()) + " * " + wrapped(e.children()[0]);
    case NodeKind::Product: return "product(" + unparse(e.children()[0]) + ", " + unparse(e.children()[1]) + ")";
    case NodeKind::Add: {
      std::string out;
      for (std::size_t i = 0; i < e.children().size(); ++i) {
        const Expression& c = e.children()[i];
        const double w = e.weights()[i];
        // Bare scaled terms are absorbed into the weights when parsed, so
        // nested sums and scalings keep their parentheses.
        const std::string body = needs_parens(c) ? "(" + unparse(c) + ")" : unparse(c);
        if (i == 0) {
          out = w == 1.0 ? body : number(w) + " * " + body;
        } else if (w == 1.0) {
          out += " + " + body;
        } else if (w == -1.0) {
          out += " - " + body;
        } else if (w < 0.0) {
          out += " - " + number(-w) + " * " + body;
        } else {
          out += " + " + number(w) + " * " + body;
        }
      }
      return out;
    }
    case NodeKind::MaxOf: {
      std::string out = "max(";
      for (std::size_t i = 0; i < e.children().size(); ++i) out += (i ? ", " : "") + unparse(e.children()[i]);
      return out + ")";
    }
    case NodeKind::AtomApply: {
      std::string out = e.atom().signature.id + "(";
      bool first = true;
      for (const auto& s : e.slots()) {
        out += first ? "" : ", ";
        first = false;
        out += s.is_param ? param_text(e.params()[s.index]) : unparse(e.children()[s.index]);
      }
      return out + ")";
    }
  }
  return "?";
}

}  // namespace geocert::cli

#include "duopt/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <set>

#include "duopt/errors.hpp"

namespace duopt::expr {

namespace {

struct FnEntry {
  const char* name;
  Fn fn;
};
constexpr FnEntry kFunctions[] = {
    {"np.asarray", Fn::Asarray}, {"np.sum", Fn::Sum},         {"np.abs", Fn::Abs},
    {"np.maximum", Fn::Maximum}, {"np.minimum", Fn::Minimum}, {"is_integer", Fn::IsInteger},
    {"is_binary", Fn::IsBinary},
};

std::optional<Fn> lookup_fn(const std::string& name) {
  for (const auto& e : kFunctions)
    if (name == e.name) return e.fn;
  return std::nullopt;
}

enum class Tok {
  Number,
  Ident,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Plus,
  Minus,
  Star,
  Slash,
  At,
  Le,
  Ge,
  EqEq,
  Assign,
  End
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    const std::size_t start = i_;
    if (i_ >= s_.size()) return {Tok::End, start, ""};
    const char c = s_[i_];
    auto one = [&](Tok k) {
      ++i_;
      return Token{k, start, std::string(1, c)};
    };
    switch (c) {
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '[': return one(Tok::LBracket);
      case ']': return one(Tok::RBracket);
      case ',': return one(Tok::Comma);
      case '+': return one(Tok::Plus);
      case '-': return one(Tok::Minus);
      case '*': return one(Tok::Star);
      case '/': return one(Tok::Slash);
      case '@': return one(Tok::At);
      case '<':
      case '>': {
        if (i_ + 1 < s_.size() && s_[i_ + 1] == '=') {
          i_ += 2;
          return {c == '<' ? Tok::Le : Tok::Ge, start, std::string(1, c) + "="};
        }
        fail("SyntaxError",
             "position " + std::to_string(start) + ": expected '<=' or '>='");
      }
      case '=': {
        if (i_ + 1 < s_.size() && s_[i_ + 1] == '=') {
          i_ += 2;
          return {Tok::EqEq, start, "=="};
        }
        ++i_;
        return {Tok::Assign, start, "="};
      }
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
      return lex_number(start);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(start);
    fail("SyntaxError", "position " + std::to_string(start) + ": unexpected character '" +
                            std::string(1, c) + "'");
  }

 private:
  Token lex_number(std::size_t start) {
    std::size_t j = i_;
    while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
    if (j < s_.size() && s_[j] == '.') {
      ++j;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
    }
    if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        ++k;
        while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
        j = k;
      }
    }
    Token t{Tok::Number, start, s_.substr(i_, j - i_)};
    auto res = std::from_chars(s_.data() + i_, s_.data() + j, t.number);
    if (res.ec != std::errc{})
      fail("SyntaxError", "position " + std::to_string(start) + ": malformed number");
    i_ = j;
    return t;
  }

  Token lex_ident(std::size_t start) {
    std::size_t j = i_;
    auto ident_char = [&](std::size_t k) {
      return std::isalnum(static_cast<unsigned char>(s_[k])) || s_[k] == '_';
    };
    while (j < s_.size() && ident_char(j)) ++j;
    // dotted segments form function names like np.sum
    while (j < s_.size() && s_[j] == '.' && j + 1 < s_.size() &&
           (std::isalpha(static_cast<unsigned char>(s_[j + 1])) || s_[j + 1] == '_')) {
      ++j;
      while (j < s_.size() && ident_char(j)) ++j;
    }
    Token t{Tok::Ident, start, s_.substr(i_, j - i_)};
    i_ = j;
    return t;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) { advance(); }

  NodePtr parse() {
    NodePtr e = parse_cmp();
    expect(Tok::End, "end of expression");
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k)
      fail("SyntaxError", "position " + std::to_string(cur_.pos) + ": expected " + what +
                              (cur_.text.empty() ? "" : ", got '" + cur_.text + "'"));
  }

  NodePtr parse_cmp() {
    NodePtr lhs = parse_add();
    if (cur_.kind == Tok::Le || cur_.kind == Tok::Ge || cur_.kind == Tok::EqEq) {
      const CmpKind op = cur_.kind == Tok::Le   ? CmpKind::Le
                         : cur_.kind == Tok::Ge ? CmpKind::Ge
                                                : CmpKind::Eq;
      advance();
      NodePtr rhs = parse_add();
      return make_node(Compare{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  NodePtr parse_add() {
    NodePtr lhs = parse_mul();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const BinKind op = cur_.kind == Tok::Plus ? BinKind::Add : BinKind::Sub;
      advance();
      // rhs parsed into a local first: a throwing initializer inside the
      // braced list would leak the moved-from operand on this compiler
      NodePtr rhs = parse_mul();
      lhs = make_node(BinOp{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  NodePtr parse_mul() {
    NodePtr lhs = parse_unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash || cur_.kind == Tok::At) {
      const BinKind op = cur_.kind == Tok::Star    ? BinKind::Mul
                         : cur_.kind == Tok::Slash ? BinKind::Div
                                                   : BinKind::MatMul;
      advance();
      NodePtr rhs = parse_unary();
      lhs = make_node(BinOp{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (cur_.kind == Tok::Minus) {
      advance();
      return make_node(Neg{parse_unary()});
    }
    return parse_atom();
  }

  NodePtr parse_atom() {
    switch (cur_.kind) {
      case Tok::Number: {
        const double v = cur_.number;
        advance();
        return make_node(NumberLit{v});
      }
      case Tok::LParen: {
        advance();
        NodePtr e = parse_cmp();
        expect(Tok::RParen, "')'");
        advance();
        return e;
      }
      case Tok::LBracket: {
        advance();
        NestedList list;
        list.elements.push_back(parse_cmp());
        while (cur_.kind == Tok::Comma) {
          advance();
          list.elements.push_back(parse_cmp());
        }
        expect(Tok::RBracket, "']'");
        advance();
        return make_node(std::move(list));
      }
      case Tok::Ident: {
        Token name = cur_;
        advance();
        if (cur_.kind == Tok::LParen) return parse_call(name);
        if (name.text.find('.') != std::string::npos)
          fail("SyntaxError", "position " + std::to_string(name.pos) + ": '" + name.text +
                                  "' is only valid as a function call");
        return make_node(Ident{name.text});
      }
      default:
        fail("SyntaxError",
             "position " + std::to_string(cur_.pos) + ": expected a value" +
                 (cur_.text.empty() ? "" : ", got '" + cur_.text + "'"));
    }
  }

  NodePtr parse_call(const Token& name) {
    auto fn = lookup_fn(name.text);
    if (!fn) fail("UnknownFunction", name.text);
    advance();  // consume '('
    Call call{*fn, {}, std::nullopt};
    while (true) {
      if (cur_.kind == Tok::Ident && cur_.text == "axis") {
        Token axis_tok = cur_;
        advance();
        if (cur_.kind == Tok::Assign) {
          advance();
          bool negative = false;
          if (cur_.kind == Tok::Minus) {
            negative = true;
            advance();
          }
          expect(Tok::Number, "integer axis");
          if (cur_.number != std::floor(cur_.number))
            fail("SyntaxError",
                 "position " + std::to_string(cur_.pos) + ": axis must be an integer");
          call.axis = static_cast<std::int64_t>(cur_.number) * (negative ? -1 : 1);
          advance();
          break;  // axis is the final argument
        }
        // plain identifier that happens to be named axis
        NodePtr rest = parse_call_arg_after_ident(axis_tok);
        call.args.push_back(std::move(rest));
      } else {
        call.args.push_back(parse_cmp());
      }
      if (cur_.kind != Tok::Comma) break;
      advance();
    }
    expect(Tok::RParen, "')'");
    advance();
    if (call.args.empty())
      fail("SyntaxError",
           "position " + std::to_string(name.pos) + ": " + name.text + " needs an argument");
    if (call.axis && call.fn != Fn::Sum)
      fail("SyntaxError", "position " + std::to_string(name.pos) +
                              ": axis is only valid in np.sum");
    return make_node(std::move(call));
  }

  // continue parsing an expression whose first token (an identifier) was
  // already consumed while probing for axis=
  NodePtr parse_call_arg_after_ident(const Token& ident) {
    NodePtr lhs = make_node(Ident{ident.text});
    // resume at mul level, then fold into add/cmp manually
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash || cur_.kind == Tok::At) {
      const BinKind op = cur_.kind == Tok::Star    ? BinKind::Mul
                         : cur_.kind == Tok::Slash ? BinKind::Div
                                                   : BinKind::MatMul;
      advance();
      NodePtr rhs = parse_unary();
      lhs = make_node(BinOp{op, std::move(lhs), std::move(rhs)});
    }
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const BinKind op = cur_.kind == Tok::Plus ? BinKind::Add : BinKind::Sub;
      advance();
      NodePtr rhs = parse_mul();
      lhs = make_node(BinOp{op, std::move(lhs), std::move(rhs)});
    }
    if (cur_.kind == Tok::Le || cur_.kind == Tok::Ge || cur_.kind == Tok::EqEq) {
      const CmpKind op = cur_.kind == Tok::Le   ? CmpKind::Le
                         : cur_.kind == Tok::Ge ? CmpKind::Ge
                                                : CmpKind::Eq;
      advance();
      NodePtr rhs = parse_add();
      lhs = make_node(Compare{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Lexer lex_;
  Token cur_{Tok::End, 0, ""};
};

int precedence_of(const Node& n) {
  if (std::holds_alternative<Compare>(n.v)) return 0;
  if (const auto* b = std::get_if<BinOp>(&n.v))
    return (b->op == BinKind::Add || b->op == BinKind::Sub) ? 1 : 2;
  if (std::holds_alternative<Neg>(n.v)) return 3;
  return 4;
}

std::string number_to_string(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_node(const NodePtr& e, std::string& out, int parent_prec) {
  const int prec = precedence_of(*e);
  const bool parens = prec < parent_prec;
  if (parens) out += "(";
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NumberLit>) {
          out += number_to_string(n.value);
        } else if constexpr (std::is_same_v<N, Ident>) {
          out += n.name;
        } else if constexpr (std::is_same_v<N, Call>) {
          out += fn_name(n.fn);
          out += "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_node(n.args[i], out, 0);
          }
          if (n.axis) out += ", axis=" + std::to_string(*n.axis);
          out += ")";
        } else if constexpr (std::is_same_v<N, BinOp>) {
          const char* op = n.op == BinKind::Add   ? " + "
                           : n.op == BinKind::Sub ? " - "
                           : n.op == BinKind::Mul ? " * "
                           : n.op == BinKind::Div ? " / "
                                                  : " @ ";
          print_node(n.lhs, out, prec);
          out += op;
          print_node(n.rhs, out, prec + 1);  // left-associative
        } else if constexpr (std::is_same_v<N, Compare>) {
          print_node(n.lhs, out, prec + 1);
          out += n.op == CmpKind::Le ? " <= " : n.op == CmpKind::Ge ? " >= " : " == ";
          print_node(n.rhs, out, prec + 1);
        } else if constexpr (std::is_same_v<N, Neg>) {
          out += "-";
          print_node(n.operand, out, prec + 1);
        } else if constexpr (std::is_same_v<N, NestedList>) {
          out += "[";
          for (std::size_t i = 0; i < n.elements.size(); ++i) {
            if (i) out += ", ";
            print_node(n.elements[i], out, 0);
          }
          out += "]";
        }
      },
      e->v);
  if (parens) out += ")";
}

void collect_idents(const NodePtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Ident>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<N, Call>) {
          for (const auto& a : n.args) collect_idents(a, out);
        } else if constexpr (std::is_same_v<N, BinOp>) {
          collect_idents(n.lhs, out);
          collect_idents(n.rhs, out);
        } else if constexpr (std::is_same_v<N, Compare>) {
          collect_idents(n.lhs, out);
          collect_idents(n.rhs, out);
        } else if constexpr (std::is_same_v<N, Neg>) {
          collect_idents(n.operand, out);
        } else if constexpr (std::is_same_v<N, NestedList>) {
          for (const auto& el : n.elements) collect_idents(el, out);
        }
      },
      e->v);
}

bool contains_compare(const NodePtr& e) {
  bool found = false;
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Compare>) {
          found = true;
        } else if constexpr (std::is_same_v<N, Call>) {
          for (const auto& a : n.args) found = found || contains_compare(a);
        } else if constexpr (std::is_same_v<N, BinOp>) {
          found = contains_compare(n.lhs) || contains_compare(n.rhs);
        } else if constexpr (std::is_same_v<N, Neg>) {
          found = contains_compare(n.operand);
        } else if constexpr (std::is_same_v<N, NestedList>) {
          for (const auto& el : n.elements) found = found || contains_compare(el);
        }
      },
      e->v);
  return found;
}

Tensor eval_node(const NodePtr& e, const Env& env);

Tensor eval_binop(const BinOp& n, const Env& env) {
  Tensor a = eval_node(n.lhs, env);
  Tensor b = eval_node(n.rhs, env);
  switch (n.op) {
    case BinKind::Add: return zip_with(a, b, [](double x, double y) { return x + y; });
    case BinKind::Sub: return zip_with(a, b, [](double x, double y) { return x - y; });
    case BinKind::Mul: return zip_with(a, b, [](double x, double y) { return x * y; });
    case BinKind::Div:
      return zip_with(a, b, [](double x, double y) {
        if (y == 0.0) fail("DivisionByZero", "division by zero while evaluating expression");
        return x / y;
      });
    case BinKind::MatMul: return matmul(a, b);
  }
  fail("SyntaxError", "unreachable");
}

Tensor eval_call(const Call& n, const Env& env) {
  auto arity = [&](std::size_t want) {
    if (n.args.size() != want)
      fail("SyntaxError", std::string(fn_name(n.fn)) + " takes " + std::to_string(want) +
                              " argument(s), got " + std::to_string(n.args.size()));
  };
  switch (n.fn) {
    case Fn::Asarray: {
      arity(1);
      return eval_node(n.args[0], env);
    }
    case Fn::Sum: {
      arity(1);
      Tensor a = eval_node(n.args[0], env);
      return n.axis ? sum_axis(a, *n.axis) : sum_all(a);
    }
    case Fn::Abs: {
      arity(1);
      return map_tensor(eval_node(n.args[0], env), [](double v) { return std::fabs(v); });
    }
    case Fn::Maximum:
    case Fn::Minimum: {
      arity(2);
      Tensor a = eval_node(n.args[0], env);
      Tensor b = eval_node(n.args[1], env);
      if (n.fn == Fn::Maximum)
        return zip_with(a, b, [](double x, double y) { return std::max(x, y); });
      return zip_with(a, b, [](double x, double y) { return std::min(x, y); });
    }
    case Fn::IsInteger:
    case Fn::IsBinary:
      fail("NotAConstraint",
           std::string(fn_name(n.fn)) + " is a constraint predicate, not a value");
  }
  fail("SyntaxError", "unreachable");
}

Tensor eval_node(const NodePtr& e, const Env& env) {
  return std::visit(
      [&](const auto& n) -> Tensor {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NumberLit>) {
          return Tensor::scalar(n.value);
        } else if constexpr (std::is_same_v<N, Ident>) {
          auto it = env.bindings.find(n.name);
          if (it == env.bindings.end()) fail("UnknownSymbol", n.name);
          return it->second;
        } else if constexpr (std::is_same_v<N, Call>) {
          return eval_call(n, env);
        } else if constexpr (std::is_same_v<N, BinOp>) {
          return eval_binop(n, env);
        } else if constexpr (std::is_same_v<N, Compare>) {
          fail("NotAConstraint", "comparison is not a value");
        } else if constexpr (std::is_same_v<N, Neg>) {
          return map_tensor(eval_node(n.operand, env), [](double v) { return -v; });
        } else if constexpr (std::is_same_v<N, NestedList>) {
          if (n.elements.empty()) fail("SyntaxError", "empty list literal");
          std::vector<Tensor> parts;
          parts.reserve(n.elements.size());
          for (const auto& el : n.elements) parts.push_back(eval_node(el, env));
          return stack(parts);
        }
      },
      e->v);
}

double nearest_integer_distance(double v) { return std::fabs(v - std::nearbyint(v)); }

}  // namespace

const char* fn_name(Fn f) {
  for (const auto& e : kFunctions)
    if (e.fn == f) return e.name;
  return "?";
}

NodePtr parse_expr(const std::string& text) {
  if (text.empty()) fail("SyntaxError", "position 0: empty expression");
  return Parser(text).parse();
}

std::string print_expr(const NodePtr& e) {
  std::string out;
  print_node(e, out, 0);
  return out;
}

bool equal(const NodePtr& a, const NodePtr& b) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using N = std::decay_t<decltype(na)>;
        const auto& nb = std::get<N>(b->v);
        if constexpr (std::is_same_v<N, NumberLit>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<N, Ident>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<N, Call>) {
          if (na.fn != nb.fn || na.axis != nb.axis || na.args.size() != nb.args.size())
            return false;
          for (std::size_t i = 0; i < na.args.size(); ++i)
            if (!equal(na.args[i], nb.args[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<N, BinOp>) {
          return na.op == nb.op && equal(na.lhs, nb.lhs) && equal(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<N, Compare>) {
          return na.op == nb.op && equal(na.lhs, nb.lhs) && equal(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<N, Neg>) {
          return equal(na.operand, nb.operand);
        } else if constexpr (std::is_same_v<N, NestedList>) {
          if (na.elements.size() != nb.elements.size()) return false;
          for (std::size_t i = 0; i < na.elements.size(); ++i)
            if (!equal(na.elements[i], nb.elements[i])) return false;
          return true;
        }
      },
      a->v);
}

bool is_constraint_expr(const NodePtr& e) {
  if (std::holds_alternative<Compare>(e->v)) return true;
  if (const auto* c = std::get_if<Call>(&e->v))
    return c->fn == Fn::IsInteger || c->fn == Fn::IsBinary;
  return false;
}

bool has_nested_compare(const NodePtr& e) {
  if (const auto* c = std::get_if<Compare>(&e->v))
    return contains_compare(c->lhs) || contains_compare(c->rhs);
  return contains_compare(e);
}

std::vector<std::string> free_identifiers(const NodePtr& e) {
  std::set<std::string> names;
  collect_idents(e, names);
  return {names.begin(), names.end()};
}

Tensor eval_expr(const NodePtr& e, const Env& env) { return eval_node(e, env); }

ConstraintCheck check_constraint(const NodePtr& e, const Env& env, double tol_abs) {
  if (const auto* cmp = std::get_if<Compare>(&e->v)) {
    Tensor lhs = eval_node(cmp->lhs, env);
    Tensor rhs = eval_node(cmp->rhs, env);
    Tensor diff = zip_with(lhs, rhs, [](double a, double b) { return a - b; });
    double worst = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < diff.size(); ++i) {
      const double d = diff.flat(i);
      const double v = cmp->op == CmpKind::Le   ? d
                       : cmp->op == CmpKind::Ge ? -d
                                                : std::fabs(d);
      worst = std::max(worst, v);
    }
    return {worst <= tol_abs, std::max(0.0, worst)};
  }
  if (const auto* call = std::get_if<Call>(&e->v)) {
    if (call->fn == Fn::IsInteger || call->fn == Fn::IsBinary) {
      if (call->args.size() != 1)
        fail("SyntaxError", std::string(fn_name(call->fn)) + " takes 1 argument");
      Tensor v = eval_node(call->args[0], env);
      double worst = 0.0;
      for (std::int64_t i = 0; i < v.size(); ++i) {
        const double x = v.flat(i);
        const double d = call->fn == Fn::IsInteger
                             ? nearest_integer_distance(x)
                             : std::min(std::fabs(x), std::fabs(x - 1.0));
        worst = std::max(worst, d);
      }
      return {worst <= tol_abs, worst};
    }
  }
  fail("NotAConstraint", "expression is not a comparison or integrality predicate");
}

}  // namespace duopt::expr

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "duopt/tensor.hpp"
#include "duopt/types.hpp"

namespace duopt::expr {

enum class Fn { Asarray, Sum, Abs, Maximum, Minimum, IsInteger, IsBinary };
enum class BinKind { Add, Sub, Mul, Div, MatMul };
enum class CmpKind { Le, Ge, Eq };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct NumberLit {
  double value;
};
struct Ident {
  std::string name;
};
struct Call {
  Fn fn;
  std::vector<NodePtr> args;
  std::optional<std::int64_t> axis;
};
struct BinOp {
  BinKind op;
  NodePtr lhs, rhs;
};
struct Compare {
  CmpKind op;
  NodePtr lhs, rhs;
};
struct Neg {
  NodePtr operand;
};
struct NestedList {
  std::vector<NodePtr> elements;
};

struct Node {
  std::variant<NumberLit, Ident, Call, BinOp, Compare, Neg, NestedList> v;
};

template <typename T>
NodePtr make_node(T&& payload) {
  return std::make_shared<Node>(Node{std::forward<T>(payload)});
}

/// Parse an expression of the truth mini-language. Throws Error with code
/// "SyntaxError" (message carries the character position) or
/// "UnknownFunction".
NodePtr parse_expr(const std::string& text);

/// Canonical surface form; parse_expr(print_expr(e)) reproduces e.
std::string print_expr(const NodePtr& e);

bool equal(const NodePtr& a, const NodePtr& b);

/// True when the node is a Compare or an is_integer/is_binary call, i.e. a
/// constraint rather than a value.
bool is_constraint_expr(const NodePtr& e);

/// Compare nodes may only appear as the root of a constraint.
bool has_nested_compare(const NodePtr& e);

/// Free identifiers of the expression (function names excluded).
std::vector<std::string> free_identifiers(const NodePtr& e);

const char* fn_name(Fn f);

/// Value environment for numeric evaluation.
struct Env {
  std::map<std::string, Tensor> bindings;
  std::map<std::string, VarKind> integrality;
};

/// Evaluate a value expression. Throws on unbound identifiers, broadcast
/// failures, axis errors, division by zero, and on Compare/predicate nodes
/// (those are constraints, not values).
Tensor eval_expr(const NodePtr& e, const Env& env);

struct ConstraintCheck {
  bool satisfied = false;
  double worst_violation = 0.0;  // always >= 0
};

/// Check a constraint-form expression against an environment with absolute
/// tolerance tol_abs. Throws "NotAConstraint" for value-form expressions.
ConstraintCheck check_constraint(const NodePtr& e, const Env& env, double tol_abs);

inline constexpr double kDefaultFeasTol = 1e-6;

}  // namespace duopt::expr

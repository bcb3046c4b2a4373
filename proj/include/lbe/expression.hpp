#pragma once

// Arithmetic expression trees over lagged outputs and inputs.
//
// Trees are immutable and are evaluated exactly as written: every binary
// node is one IEEE-754 binary64 operation rounded to nearest-even, integer
// powers are left-folded products, and nothing is reassociated, folded or
// distributed. Two algebraically identical trees of different shape are two
// different programs and may round differently.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace lbe {

/// 1-based line/column of a node in model source text; {0, 0} for nodes
/// built programmatically.
struct SourcePosition {
  std::size_t line = 0;
  std::size_t column = 0;

  friend bool operator==(const SourcePosition&, const SourcePosition&) = default;
};

inline std::string to_string(SourcePosition at) {
  if (at.line == 0) return "<synthesized>";
  return std::to_string(at.line) + ":" + std::to_string(at.column);
}

enum class Function { sin, cos };
enum class BinaryOperator { add, subtract, multiply, divide };

inline const char* to_string(Function f) { return f == Function::sin ? "sin" : "cos"; }

inline char to_symbol(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::add: return '+';
    case BinaryOperator::subtract: return '-';
    case BinaryOperator::multiply: return '*';
    case BinaryOperator::divide: return '/';
  }
  return '?';
}

/// Raised for evaluation faults that are not divergence, e.g. division by an
/// exact zero or a lag the context cannot resolve.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& message, SourcePosition where)
      : std::runtime_error(message + " (at " + to_string(where) + ")"), where_(where) {}

  SourcePosition where() const noexcept { return where_; }

 private:
  SourcePosition where_;
};

/// Raised when a computed value is not finite. `step()` is the index of the
/// sample whose computation overflowed or produced NaN.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, SourcePosition where)
      : std::runtime_error("non-finite value while computing sample " + std::to_string(step) +
                           " (at " + to_string(where) + ")"),
        step_(step),
        where_(where) {}

  DivergenceError(const std::string& message, std::size_t step)
      : std::runtime_error(message), step_(step) {}

  std::size_t step() const noexcept { return step_; }
  SourcePosition where() const noexcept { return where_; }

 private:
  std::size_t step_;
  SourcePosition where_{};
};

/// Sliding view of the most recent outputs and inputs. Histories are ordered
/// oldest first, so lag 0 is the last element.
class EvaluationContext {
 public:
  EvaluationContext() = default;
  EvaluationContext(std::span<const double> output_history, std::span<const double> input_history,
                    std::size_t step)
      : outputs_(output_history), inputs_(input_history), step_(step) {}

  bool has_output(std::size_t lag) const noexcept { return lag < outputs_.size(); }
  bool has_input(std::size_t lag) const noexcept { return lag < inputs_.size(); }
  double output(std::size_t lag) const { return outputs_[outputs_.size() - 1 - lag]; }
  double input(std::size_t lag) const { return inputs_[inputs_.size() - 1 - lag]; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::span<const double> outputs_;
  std::span<const double> inputs_;
  std::size_t step_ = 0;
};

class Expression;

namespace node {
struct Constant {
  double value;
};
/// X_{n-lag}
struct LaggedOutput {
  std::size_t lag;
};
/// U_{n-lag}
struct LaggedInput {
  std::size_t lag;
};
}  // namespace node

class Expression {
 public:
  static Expression constant(double value, SourcePosition at = {});
  static Expression output(std::size_t lag, SourcePosition at = {});
  static Expression input(std::size_t lag, SourcePosition at = {});
  static Expression negate(Expression operand, SourcePosition at = {});
  static Expression call(Function function, Expression argument, SourcePosition at = {});
  static Expression binary(BinaryOperator op, Expression left, Expression right,
                           SourcePosition at = {});
  static Expression power(Expression base, unsigned exponent, SourcePosition at = {});

  template <class Visitor>
  decltype(auto) visit(Visitor&& visitor) const;

  SourcePosition position() const;

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

namespace node {
struct Negate {
  Expression operand;
};
struct Call {
  Function function;
  Expression argument;
};
struct Binary {
  BinaryOperator op;
  Expression left;
  Expression right;
};
/// base^exponent with exponent >= 1, evaluated as ((base*base)*base)...
struct Power {
  Expression base;
  unsigned exponent;
};
using Variant = std::variant<Constant, LaggedOutput, LaggedInput, Negate, Call, Binary, Power>;
}  // namespace node

struct Expression::Node {
  node::Variant value;
  SourcePosition position;
};

inline Expression Expression::constant(double value, SourcePosition at) {
  if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
  return Expression(std::make_shared<const Node>(Node{node::Constant{value}, at}));
}

inline Expression Expression::output(std::size_t lag, SourcePosition at) {
  return Expression(std::make_shared<const Node>(Node{node::LaggedOutput{lag}, at}));
}

inline Expression Expression::input(std::size_t lag, SourcePosition at) {
  return Expression(std::make_shared<const Node>(Node{node::LaggedInput{lag}, at}));
}

inline Expression Expression::negate(Expression operand, SourcePosition at) {
  return Expression(std::make_shared<const Node>(Node{node::Negate{std::move(operand)}, at}));
}

inline Expression Expression::call(Function function, Expression argument, SourcePosition at) {
  return Expression(
      std::make_shared<const Node>(Node{node::Call{function, std::move(argument)}, at}));
}

inline Expression Expression::binary(BinaryOperator op, Expression left, Expression right,
                                     SourcePosition at) {
  return Expression(std::make_shared<const Node>(
      Node{node::Binary{op, std::move(left), std::move(right)}, at}));
}

inline Expression Expression::power(Expression base, unsigned exponent, SourcePosition at) {
  if (exponent < 1) throw std::invalid_argument("power exponent must be >= 1");
  return Expression(
      std::make_shared<const Node>(Node{node::Power{std::move(base), exponent}, at}));
}

template <class Visitor>
decltype(auto) Expression::visit(Visitor&& visitor) const {
  return std::visit(std::forward<Visitor>(visitor), node_->value);
}

inline SourcePosition Expression::position() const { return node_->position; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Convenience builders for programmatic trees.
inline Expression operator+(Expression a, Expression b) {
  return Expression::binary(BinaryOperator::add, std::move(a), std::move(b));
}
inline Expression operator-(Expression a, Expression b) {
  return Expression::binary(BinaryOperator::subtract, std::move(a), std::move(b));
}
inline Expression operator*(Expression a, Expression b) {
  return Expression::binary(BinaryOperator::multiply, std::move(a), std::move(b));
}
inline Expression operator/(Expression a, Expression b) {
  return Expression::binary(BinaryOperator::divide, std::move(a), std::move(b));
}

namespace detail {

inline double checked(double value, const EvaluationContext& ctx, SourcePosition at) {
  if (!std::isfinite(value)) throw DivergenceError(ctx.step(), at);
  return value;
}

}  // namespace detail

/// Post-order evaluation with one rounding per binary node.
inline double evaluate(const Expression& expr, const EvaluationContext& ctx) {
  const SourcePosition at = expr.position();
  return expr.visit(overloaded{
      [](const node::Constant& c) { return c.value; },
      [&](const node::LaggedOutput& x) {
        if (!ctx.has_output(x.lag))
          throw EvaluationError("x[" + std::to_string(x.lag) + "] is not in the output history", at);
        return detail::checked(ctx.output(x.lag), ctx, at);
      },
      [&](const node::LaggedInput& u) {
        if (!ctx.has_input(u.lag))
          throw EvaluationError("u[" + std::to_string(u.lag) + "] is not in the input history", at);
        return detail::checked(ctx.input(u.lag), ctx, at);
      },
      [&](const node::Negate& n) { return -evaluate(n.operand, ctx); },
      [&](const node::Call& c) {
        const double arg = evaluate(c.argument, ctx);
        return detail::checked(c.function == Function::sin ? std::sin(arg) : std::cos(arg), ctx, at);
      },
      [&](const node::Binary& b) {
        const double lhs = evaluate(b.left, ctx);
        const double rhs = evaluate(b.right, ctx);
        double result = 0.0;
        switch (b.op) {
          case BinaryOperator::add: result = lhs + rhs; break;
          case BinaryOperator::subtract: result = lhs - rhs; break;
          case BinaryOperator::multiply: result = lhs * rhs; break;
          case BinaryOperator::divide:
            if (rhs == 0.0) throw EvaluationError("division by zero", at);
            result = lhs / rhs;
            break;
        }
        return detail::checked(result, ctx, at);
      },
      [&](const node::Power& p) {
        const double base = evaluate(p.base, ctx);
        double acc = base;
        for (unsigned i = 1; i < p.exponent; ++i) acc = detail::checked(acc * base, ctx, at);
        return acc;
      },
  });
}

/// Evaluates a tree that references no lags.
inline double evaluate(const Expression& expr) { return evaluate(expr, EvaluationContext{}); }

struct LagExtent {
  std::size_t output = 0;
  std::size_t input = 0;
  bool references_input = false;

  friend bool operator==(const LagExtent&, const LagExtent&) = default;
};

inline LagExtent max_lags(const Expression& expr) {
  LagExtent extent;
  auto merge = [&extent](const LagExtent& other) {
    extent.output = std::max(extent.output, other.output);
    extent.input = std::max(extent.input, other.input);
    extent.references_input = extent.references_input || other.references_input;
  };
  expr.visit(overloaded{
      [](const node::Constant&) {},
      [&](const node::LaggedOutput& x) { extent.output = x.lag; },
      [&](const node::LaggedInput& u) {
        extent.input = u.lag;
        extent.references_input = true;
      },
      [&](const node::Negate& n) { merge(max_lags(n.operand)); },
      [&](const node::Call& c) { merge(max_lags(c.argument)); },
      [&](const node::Binary& b) {
        merge(max_lags(b.left));
        merge(max_lags(b.right));
      },
      [&](const node::Power& p) { merge(max_lags(p.base)); },
  });
  return extent;
}

/// Node-for-node comparison including shape. Constants compare by bit
/// pattern, so 0.0 and -0.0 differ. Source positions are ignored.
inline bool structurally_equal(const Expression& a, const Expression& b) {
  return a.visit([&b](const auto& lhs) -> bool {
    using T = std::decay_t<decltype(lhs)>;
    return b.visit([&lhs](const auto& rhs) -> bool {
      using U = std::decay_t<decltype(rhs)>;
      if constexpr (!std::is_same_v<T, U>) {
        return false;
      } else if constexpr (std::is_same_v<T, node::Constant>) {
        return std::bit_cast<std::uint64_t>(lhs.value) == std::bit_cast<std::uint64_t>(rhs.value);
      } else if constexpr (std::is_same_v<T, node::LaggedOutput> ||
                           std::is_same_v<T, node::LaggedInput>) {
        return lhs.lag == rhs.lag;
      } else if constexpr (std::is_same_v<T, node::Negate>) {
        return structurally_equal(lhs.operand, rhs.operand);
      } else if constexpr (std::is_same_v<T, node::Call>) {
        return lhs.function == rhs.function && structurally_equal(lhs.argument, rhs.argument);
      } else if constexpr (std::is_same_v<T, node::Binary>) {
        return lhs.op == rhs.op && structurally_equal(lhs.left, rhs.left) &&
               structurally_equal(lhs.right, rhs.right);
      } else {
        return lhs.exponent == rhs.exponent && structurally_equal(lhs.base, rhs.base);
      }
    });
  });
}

}  // namespace lbe

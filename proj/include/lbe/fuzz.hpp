#pragma once

// Random expression trees for round-trip fuzzing of the model format.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "lbe/dsl.hpp"
#include "lbe/expression.hpp"

namespace lbe::fuzz {

struct TreeLimits {
  std::size_t max_depth = 6;
  std::size_t max_lag = 4;
  unsigned max_exponent = 4;
};

class ExpressionGenerator {
 public:
  explicit ExpressionGenerator(std::uint64_t seed, TreeLimits limits = {}) : rng_(seed), limits_(limits) {}

  Expression next() { return tree(0); }

  double literal() {
    switch (pick(5)) {
      case 0: return static_cast<double>(pick(10));
      case 1: return -static_cast<double>(pick(10));
      case 2: return std::uniform_real_distribution<double>(-10.0, 10.0)(rng_);
      case 3: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng_), static_cast<int>(pick(80)) - 40);
      default: return static_cast<double>(pick(100000)) / 10000.0;  // decimal-looking coefficients
    }
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  Expression leaf() {
    switch (pick(4)) {
      case 0: return Expression::output(pick(limits_.max_lag + 1));
      case 1: return Expression::input(pick(limits_.max_lag + 1));
      default: return Expression::constant(literal());
    }
  }

  Expression tree(std::size_t depth) {
    if (depth >= limits_.max_depth || pick(4) == 0) return leaf();
    switch (pick(8)) {
      case 0: return Expression::negate(tree(depth + 1));
      case 1: return Expression::call(pick(2) == 0 ? Function::sin : Function::cos, tree(depth + 1));
      case 2:
        return Expression::power(tree(depth + 1), static_cast<unsigned>(1 + pick(limits_.max_exponent)));
      default: {
        static constexpr BinaryOperator ops[] = {BinaryOperator::add, BinaryOperator::subtract,
                                                 BinaryOperator::multiply, BinaryOperator::divide};
        const BinaryOperator op = ops[pick(4)];
        Expression left = tree(depth + 1);
        Expression right = tree(depth + 1);
        return Expression::binary(op, std::move(left), std::move(right));
      }
    }
  }

  std::mt19937_64 rng_;
  TreeLimits limits_;
};

struct RoundTripFailure {
  std::string text;
  std::string reason;
};

/// format -> parse -> compare; returns the first failure, if any.
inline std::optional<RoundTripFailure> check_round_trip(const Expression& e) {
  const std::string text = format_expression(e);
  const auto parsed = parse_expression(text);
  if (!parsed.ok())
    return RoundTripFailure{text, parsed.diagnostics.empty() ? "parse failed" : to_string(parsed.diagnostics.front())};
  if (!structurally_equal(*parsed.value, e)) return RoundTripFailure{text, "reparsed tree differs"};
  if (format_expression(*parsed.value) != text) return RoundTripFailure{text, "second format differs"};
  return std::nullopt;
}

}  // namespace lbe::fuzz

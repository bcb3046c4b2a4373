#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lbe/expression.hpp"

namespace lbe {

/// U_n = amplitude * cos(n * period)
struct CosineForcing {
  double amplitude = 0.0;
  double period = 0.0;

  friend bool operator==(const CosineForcing&, const CosineForcing&) = default;
};

/// A recursive model x_{n+1} = F(x_n, ..., x_{n-k_y}, u_n, ..., u_{n-k_u}).
///
/// Initial conditions seed samples 0..k_y; iteration starts after the deepest
/// declared lag. The input lag k_u is derived from the update expression.
class ModelDefinition {
 public:
  ModelDefinition(std::string name, std::size_t output_lags, std::vector<double> initial_conditions,
                  Expression update, bool requires_input,
                  std::optional<CosineForcing> default_forcing = std::nullopt)
      : name_(std::move(name)),
        output_lags_(output_lags),
        initial_conditions_(std::move(initial_conditions)),
        update_(std::move(update)),
        requires_input_(requires_input),
        default_forcing_(default_forcing) {
    const LagExtent extent = max_lags(update_);
    if (name_.empty()) throw std::invalid_argument("model name must not be empty");
    if (initial_conditions_.size() != output_lags_ + 1)
      throw std::invalid_argument("model '" + name_ + "' declares " + std::to_string(output_lags_) +
                                  " lags but has " + std::to_string(initial_conditions_.size()) +
                                  " initial conditions");
    if (extent.output > output_lags_)
      throw std::invalid_argument("model '" + name_ + "' references x[" +
                                  std::to_string(extent.output) + "] beyond its declared lags");
    if (extent.references_input && !requires_input_)
      throw std::invalid_argument("model '" + name_ + "' references u[...] without declaring input");
    if (default_forcing_ && !requires_input_)
      throw std::invalid_argument("model '" + name_ + "' has a forcing but no input");
    input_lags_ = extent.input;
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t max_output_lag() const noexcept { return output_lags_; }
  std::size_t max_input_lag() const noexcept { return input_lags_; }
  const std::vector<double>& initial_conditions() const noexcept { return initial_conditions_; }
  const Expression& update() const noexcept { return update_; }
  bool requires_input() const noexcept { return requires_input_; }
  const std::optional<CosineForcing>& default_forcing() const noexcept { return default_forcing_; }

 private:
  std::string name_;
  std::size_t output_lags_;
  std::size_t input_lags_ = 0;
  std::vector<double> initial_conditions_;
  Expression update_;
  bool requires_input_;
  std::optional<CosineForcing> default_forcing_;
};

inline bool bitwise_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline bool structurally_equal(const ModelDefinition& a, const ModelDefinition& b) {
  if (a.name() != b.name() || a.max_output_lag() != b.max_output_lag() ||
      a.requires_input() != b.requires_input() || a.default_forcing().has_value() != b.default_forcing().has_value())
    return false;
  if (a.default_forcing() && (!bitwise_equal(a.default_forcing()->amplitude, b.default_forcing()->amplitude) ||
                              !bitwise_equal(a.default_forcing()->period, b.default_forcing()->period)))
    return false;
  const auto& ia = a.initial_conditions();
  const auto& ib = b.initial_conditions();
  for (std::size_t i = 0; i < ia.size(); ++i)
    if (!bitwise_equal(ia[i], ib[i])) return false;
  return structurally_equal(a.update(), b.update());
}

}  // namespace lbe

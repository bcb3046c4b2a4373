#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lbe/expression.hpp"
#include "lbe/model.hpp"
#include "lbe/numeric_text.hpp"
#include "lbe/rk4.hpp"

namespace lbe {

/// Samples x_0 .. x_N of one (pseudo-)orbit.
struct Orbit {
  std::vector<double> samples;
  std::string model_name;
  std::string input_name;

  std::size_t iterations() const noexcept { return samples.empty() ? 0 : samples.size() - 1; }
};

struct NoInput {};
struct ExplicitInput {
  std::vector<double> values;
};
using InputKind = std::variant<NoInput, CosineForcing, ExplicitInput>;

struct InputSignal {
  InputKind kind;
  std::vector<double> samples;

  std::string name() const {
    return std::visit(overloaded{
                          [](const NoInput&) -> std::string { return "none"; },
                          [](const CosineForcing& f) {
                            return "cosine(" + format_number(f.amplitude) + ", " + format_number(f.period) + ")";
                          },
                          [](const ExplicitInput&) -> std::string { return "explicit"; },
                      },
                      kind);
  }
};

/// Realizes U_0 .. U_N. Cosine samples are computed independently per n,
/// never by recurrence.
inline InputSignal realize_input(const InputKind& kind, std::size_t n) {
  InputSignal signal{kind, {}};
  std::visit(overloaded{
                 [](const NoInput&) {},
                 [&](const CosineForcing& f) {
                   signal.samples.reserve(n + 1);
                   for (std::size_t i = 0; i <= n; ++i)
                     signal.samples.push_back(f.amplitude * std::cos(static_cast<double>(i) * f.period));
                 },
                 [&](const ExplicitInput& e) {
                   signal.samples.assign(e.values.begin(),
                                         e.values.begin() + static_cast<std::ptrdiff_t>(std::min(e.values.size(), n + 1)));
                 },
             },
             kind);
  return signal;
}

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Divergence with the finite prefix of the orbit that was computed.
class OrbitDivergence : public DivergenceError {
 public:
  OrbitDivergence(const DivergenceError& cause, Orbit truncated)
      : DivergenceError(cause.what(), cause.step()), truncated_(std::move(truncated)) {}

  const Orbit& truncated() const noexcept { return truncated_; }

 private:
  Orbit truncated_;
};

/// Free-run simulation: samples 0..k_y are the initial conditions and sample
/// n+1 is the update evaluated with x[p] = x_{n-p}, u[q] = U_{n-q}.
inline Orbit simulate(const ModelDefinition& model, const InputSignal& input, std::size_t n) {
  const std::size_t ky = model.max_output_lag();
  const std::size_t ku = model.max_input_lag();
  if (n < ky)
    throw std::invalid_argument("model '" + model.name() + "' needs at least " + std::to_string(ky) +
                                " iterations to cover its initial conditions");
  if (model.requires_input()) {
    if (ku > ky)
      throw SimulationError("model '" + model.name() + "' reads u[" + std::to_string(ku) +
                            "] before that input exists; input lags must not exceed output lags");
    if (n > 0 && input.samples.size() < n)
      throw SimulationError("input is too short: model '" + model.name() + "' needs " + std::to_string(n) +
                            " samples, got " + std::to_string(input.samples.size()));
  }

  Orbit orbit{model.initial_conditions(), model.name(), model.requires_input() ? input.name() : "none"};
  orbit.samples.reserve(n + 1);
  const std::span<const double> inputs(input.samples);
  for (std::size_t step = ky; step < n; ++step) {
    const std::span<const double> outputs(orbit.samples.data() + (step - ky), ky + 1);
    const std::span<const double> history =
        model.requires_input() ? inputs.subspan(step - ku, ku + 1) : std::span<const double>{};
    try {
      orbit.samples.push_back(evaluate(model.update(), EvaluationContext(outputs, history, step + 1)));
    } catch (const DivergenceError& e) {
      throw OrbitDivergence(e, orbit);
    }
  }
  return orbit;
}

/// y'' + damping*y' + stiffness*y^3 = amplitude*cos(t), sampled every `period`.
struct DuffingParams {
  double damping = 1.0;
  double stiffness = 0.25;
  double amplitude = 10.0;
  double period = std::numbers::pi / 60.0;
  std::size_t substeps = 100;
};

/// Fixed-step RK4 from rest, h = period / substeps, returning y(n * period)
/// for n = 0..N. Time is recomputed from the step counter, not accumulated.
inline Orbit integrate_duffing(const DuffingParams& p, std::size_t n) {
  if (!(p.period > 0.0)) throw std::invalid_argument("Duffing sampling period must be positive");
  if (p.substeps < 1) throw std::invalid_argument("Duffing substeps must be at least 1");

  const double h = p.period / static_cast<double>(p.substeps);
  auto field = [&p](double t, const State<2>& s) -> State<2> {
    const double y = s[0];
    const double v = s[1];
    return {v, p.amplitude * std::cos(t) - p.damping * v - p.stiffness * (y * y * y)};
  };

  Orbit orbit{{0.0}, "duffing-ode", "continuous cosine(" + format_number(p.amplitude) + ")"};
  orbit.samples.reserve(n + 1);
  State<2> state{0.0, 0.0};
  std::size_t step = 0;
  for (std::size_t sample = 1; sample <= n; ++sample) {
    for (std::size_t j = 0; j < p.substeps; ++j, ++step)
      state = rk4_step<2>(field, static_cast<double>(step) * h, state, h);
    if (!std::isfinite(state[0]) || !std::isfinite(state[1]))
      throw OrbitDivergence(DivergenceError("Duffing integration diverged at sample " + std::to_string(sample), sample),
                            orbit);
    orbit.samples.push_back(state[0]);
  }
  return orbit;
}

}  // namespace lbe

#pragma once

#include <array>
#include <cstddef>

namespace lbe {

template <std::size_t Dim>
using State = std::array<double, Dim>;

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
template <std::size_t Dim, class Field>
State<Dim> rk4_step(Field&& f, double t, const State<Dim>& y, double h) {
  auto shifted = [&y](const State<Dim>& k, double scale) {
    State<Dim> out;
    for (std::size_t i = 0; i < Dim; ++i) out[i] = y[i] + scale * k[i];
    return out;
  };
  const double half = 0.5 * h;
  const State<Dim> k1 = f(t, y);
  const State<Dim> k2 = f(t + half, shifted(k1, half));
  const State<Dim> k3 = f(t + half, shifted(k2, half));
  const State<Dim> k4 = f(t + h, shifted(k3, h));
  State<Dim> next;
  for (std::size_t i = 0; i < Dim; ++i)
    next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return next;
}

}  // namespace lbe

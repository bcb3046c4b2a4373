#pragma once

// Builtin copies of models/sine.nmx and models/duffing.nmx. The test suite
// checks that these strings match the shipped files byte for byte.

#include <string_view>

namespace lbe::builtin {

inline constexpr std::string_view sine_map_source = R"nmx(# Sine map case study.
#
# S is the map x -> 1.2*pi*sin(x), G the identified cubic model and H an
# interval extension of G that regroups the cubic term as (0.2462*x)*x^2.
# All three seed x_0 .. x_3 with 0.5, so iteration starts at sample 4.

model S {
  lags 3
  init 0.5 0.5 0.5 0.5
  update 1.2*3.141592653589793*sin(x[0])
}

model G {
  lags 3
  init 0.5 0.5 0.5 0.5
  update 2.6868*x[0] - 0.2462*x[0]^3
}

model H {
  lags 3
  init 0.5 0.5 0.5 0.5
  update 2.6868*x[0] - (0.2462*x[0])*x[0]^2
}
)nmx";

inline constexpr std::string_view duffing_source = R"nmx(# Duffing-Ueda case study, driven by U_n = 10*cos(n*pi/60).
#
# The reference signal is y'' + y' + 0.25*y^3 = 10*cos(t) integrated with
# RK4; it is selected on the command line with `--system duffing-ode`.
#
# G and H are the same polynomial with the linear and input terms summed in
# a different order. G_verbatim and H_verbatim carry the alternative coefficients:
# u[0] weighs 0.000341 in G_verbatim and the last term of H_verbatim is
# x[2]^2, so that pair is not mathematically equivalent.

model G {
  lags 4
  init 0 0 0 0 0
  input cosine(10, pi/60)
  update 2.1579*x[0] - 1.3203*x[1] + 0.16239*x[2] + 0.0003416*u[0] + 0.0019463*u[1]
         - 0.0048196*x[0]^3 + 0.003523*x[0]^2*x[1] - 0.0012162*x[0]*x[1]*x[2]
         + 0.0002248*x[2]^3
}

model H {
  lags 4
  init 0 0 0 0 0
  input cosine(10, pi/60)
  update 0.0003416*u[0] + 0.0019463*u[1] + 2.1579*x[0] - 1.3203*x[1] + 0.16239*x[2]
         - 0.0048196*x[0]^3 + 0.003523*x[0]^2*x[1] - 0.0012162*x[0]*x[1]*x[2]
         + 0.0002248*x[2]^3
}

model G_verbatim {
  lags 4
  init 0 0 0 0 0
  input cosine(10, pi/60)
  update 2.1579*x[0] - 1.3203*x[1] + 0.16239*x[2] + 0.000341*u[0] + 0.0019463*u[1]
         - 0.0048196*x[0]^3 + 0.003523*x[0]^2*x[1] - 0.0012162*x[0]*x[1]*x[2]
         + 0.0002248*x[2]^3
}

model H_verbatim {
  lags 4
  init 0 0 0 0 0
  input cosine(10, pi/60)
  update 0.0003416*u[0] + 0.0019463*u[1] + 2.1579*x[0] - 1.3203*x[1] + 0.16239*x[2]
         - 0.0048196*x[0]^3 + 0.003523*x[0]^2*x[1] - 0.0012162*x[0]*x[1]*x[2]
         + 0.0002248*x[2]^2
}
)nmx";

}  // namespace lbe::builtin

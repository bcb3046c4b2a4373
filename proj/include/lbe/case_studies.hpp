#pragma once

// The three-step validation procedure on a (system, model, extension) triple:
//
//   1. RMSE/MAPE with y = system orbit, yhat = model orbit.
//   2. delta = LBE of the model and extension pseudo-orbits, then LRMSE/LMAPE
//      on the same y and yhat.
//   3. All four indices again with y = model, yhat = extension, same delta.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lbe/builtin_models.hpp"
#include "lbe/dsl.hpp"
#include "lbe/metrics.hpp"
#include "lbe/model.hpp"
#include "lbe/simulation.hpp"

namespace lbe {

/// `equivalent` uses the corrected models, `paper_verbatim` the `_verbatim`
/// variants of a model file where they exist.
enum class Fidelity { equivalent, paper_verbatim };

inline std::string_view to_string(Fidelity f) {
  return f == Fidelity::equivalent ? "equivalent" : "paper-verbatim";
}

inline std::optional<Fidelity> parse_fidelity(std::string_view text) {
  if (text == "equivalent") return Fidelity::equivalent;
  if (text == "paper-verbatim") return Fidelity::paper_verbatim;
  return std::nullopt;
}

/// Name that selects the Duffing ODE as the reference system.
inline constexpr std::string_view duffing_system_name = "duffing-ode";

using SystemSource = std::variant<ModelDefinition, DuffingParams>;

struct CaseStudy {
  std::string name;
  SystemSource system;
  ModelDefinition model;
  ModelDefinition extension;
  InputKind input;
  std::size_t iterations = 100;
  Fidelity fidelity = Fidelity::equivalent;
};

struct ProcedureOutput {
  Orbit system;
  Orbit model;
  Orbit extension;
  LbeSeries lbe;
  std::size_t k_start = 0;
  ValidationReport step1_2;  // y = system, yhat = model
  ValidationReport step3;    // y = model, yhat = extension
};

class StudyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// First validated sample: one past the deepest declared lag, so seeded
/// initial conditions never enter the sums.
inline std::size_t validation_start(const CaseStudy& study) {
  std::size_t lags = std::max(study.model.max_output_lag(), study.extension.max_output_lag());
  if (const auto* system = std::get_if<ModelDefinition>(&study.system))
    lags = std::max(lags, system->max_output_lag());
  return lags + 1;
}

inline void check_compatible(const CaseStudy& study) {
  auto same_seed = [](const ModelDefinition& a, const ModelDefinition& b) {
    if (a.initial_conditions().size() != b.initial_conditions().size()) return false;
    for (std::size_t i = 0; i < a.initial_conditions().size(); ++i)
      if (!bitwise_equal(a.initial_conditions()[i], b.initial_conditions()[i])) return false;
    return true;
  };
  const ModelDefinition& g = study.model;
  const ModelDefinition& h = study.extension;
  if (g.requires_input() != h.requires_input())
    throw StudyError("model '" + g.name() + "' and extension '" + h.name() + "' disagree on requiring an input");
  if (!same_seed(g, h))
    throw StudyError("model '" + g.name() + "' and extension '" + h.name() +
                     "' must share lags and initial conditions");
  if (const auto* system = std::get_if<ModelDefinition>(&study.system)) {
    if (!same_seed(*system, g))
      throw StudyError("system '" + system->name() + "' and model '" + g.name() +
                       "' must share lags and initial conditions");
    if (system->requires_input() != g.requires_input())
      throw StudyError("system '" + system->name() + "' and model '" + g.name() +
                       "' disagree on requiring an input");
  }
  if (g.requires_input() && std::holds_alternative<NoInput>(study.input))
    throw StudyError("model '" + g.name() + "' requires an input but the study provides none");
  if (study.iterations < validation_start(study))
    throw StudyError("iteration count " + std::to_string(study.iterations) +
                     " does not reach the first validated sample " + std::to_string(validation_start(study)));
}

inline ProcedureOutput run_procedure(const CaseStudy& study) {
  check_compatible(study);
  const std::size_t n = study.iterations;
  const InputSignal input = realize_input(study.input, n);

  ProcedureOutput out;
  out.system = std::visit(overloaded{
                              [&](const ModelDefinition& m) { return simulate(m, input, n); },
                              [&](const DuffingParams& p) { return integrate_duffing(p, n); },
                          },
                          study.system);
  out.model = simulate(study.model, input, n);
  out.extension = simulate(study.extension, input, n);
  out.lbe = lbe(out.model, out.extension);
  out.k_start = validation_start(study);
  const std::string pair = out.model.model_name + "," + out.extension.model_name;
  out.step1_2 = build_report(out.system, out.model, out.lbe, out.k_start, pair);
  out.step3 = build_report(out.model, out.extension, out.lbe, out.k_start, pair);
  return out;
}

struct StudyOptions {
  std::size_t iterations = 100;
  Fidelity fidelity = Fidelity::equivalent;
  std::size_t substeps = 100;
  double damping = 1.0;
  double stiffness = 0.25;
};

/// Looks up `name`, preferring `name_verbatim` in paper-verbatim mode.
inline const ModelDefinition& resolve_model(const ModelFile& file, std::string_view name, Fidelity fidelity) {
  if (fidelity == Fidelity::paper_verbatim)
    if (const auto* m = file.find(std::string(name) + "_verbatim")) return *m;
  if (const auto* m = file.find(name)) return *m;
  throw StudyError("no model named '" + std::string(name) + "'");
}

/// Assembles a study from a model file. `system` names a model in the file or
/// is `duffing-ode`, in which case the ODE is forced with the model's
/// declared cosine input.
inline CaseStudy make_case_study(std::string name, const ModelFile& file, std::string_view system,
                                 std::string_view model, std::string_view extension, const StudyOptions& options) {
  const ModelDefinition& g = resolve_model(file, model, options.fidelity);
  const ModelDefinition& h = resolve_model(file, extension, options.fidelity);
  InputKind input = NoInput{};
  if (g.requires_input()) {
    if (!g.default_forcing())
      throw StudyError("model '" + g.name() + "' requires an input but declares no cosine forcing");
    input = *g.default_forcing();
  }
  if (system == duffing_system_name) {
    if (!g.default_forcing())
      throw StudyError("the Duffing reference needs model '" + g.name() + "' to declare a cosine forcing");
    const DuffingParams params{options.damping, options.stiffness, g.default_forcing()->amplitude,
                               g.default_forcing()->period, options.substeps};
    return CaseStudy{std::move(name), params, g, h, input, options.iterations, options.fidelity};
  }
  return CaseStudy{std::move(name), resolve_model(file, system, options.fidelity), g, h, input,
                   options.iterations, options.fidelity};
}

inline ModelFile parse_builtin(std::string_view source) {
  auto parsed = parse_model_file(source);
  if (!parsed.ok()) throw std::logic_error("builtin model source failed to parse");
  return std::move(*parsed.value);
}

inline const std::vector<std::string_view>& builtin_study_names() {
  static const std::vector<std::string_view> names{"sine-map", "duffing"};
  return names;
}

inline CaseStudy builtin_study(std::string_view name, const StudyOptions& options = {}) {
  if (name == "sine-map")
    return make_case_study("sine-map", parse_builtin(builtin::sine_map_source), "S", "G", "H", options);
  if (name == "duffing")
    return make_case_study("duffing", parse_builtin(builtin::duffing_source), duffing_system_name, "G", "H",
                           options);
  throw StudyError("unknown study '" + std::string(name) + "'");
}

inline std::vector<CaseStudy> builtin_studies(const StudyOptions& options = {}) {
  std::vector<CaseStudy> out;
  for (auto name : builtin_study_names()) out.push_back(builtin_study(name, options));
  return out;
}

}  // namespace lbe

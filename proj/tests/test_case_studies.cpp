#include <gtest/gtest.h>

#include <bit>
#include <cstdint>

#include "lbe/builtin_models.hpp"
#include "lbe/case_studies.hpp"
#include "rational_oracle.hpp"
#include "test_util.hpp"

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

lbe::ModelFile load(const char* name) {
  return lbe::parse_builtin(testing_util::read_file(testing_util::models_dir() / name));
}

void expect_same_orbit(const lbe::Orbit& a, const lbe::Orbit& b) {
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) ASSERT_EQ(bits(a.samples[i]), bits(b.samples[i])) << i;
}

void expect_same_series(const std::vector<std::optional<double>>& a, const std::vector<std::optional<double>>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].has_value(), b[i].has_value()) << i;
    if (a[i]) {
      ASSERT_EQ(bits(*a[i]), bits(*b[i])) << i;
    }
  }
}

void expect_same_report(const lbe::ValidationReport& a, const lbe::ValidationReport& b) {
  expect_same_series(a.rmse.values, b.rmse.values);
  expect_same_series(a.lrmse.values, b.lrmse.values);
  expect_same_series(a.mape.values, b.mape.values);
  expect_same_series(a.lmape.values, b.lmape.values);
  expect_same_series(a.d_rmse_pct, b.d_rmse_pct);
  expect_same_series(a.d_mape_pct, b.d_mape_pct);
}

void expect_same_output(const lbe::ProcedureOutput& a, const lbe::ProcedureOutput& b) {
  expect_same_orbit(a.system, b.system);
  expect_same_orbit(a.model, b.model);
  expect_same_orbit(a.extension, b.extension);
  expect_same_report(a.step1_2, b.step1_2);
  expect_same_report(a.step3, b.step3);
}

std::optional<std::size_t> first_positive(const lbe::LbeSeries& s) {
  for (std::size_t n = 0; n < s.delta.size(); ++n)
    if (s.delta[n] > 0.0) return n;
  return std::nullopt;
}

oracle::Rational coefficient(const oracle::Polynomial& p, const oracle::Monomial& m) {
  const auto it = p.terms().find(m);
  return it == p.terms().end() ? oracle::Rational(0) : it->second;
}

}  // namespace

TEST(Builtin, SourcesMatchShippedFiles) {
  EXPECT_EQ(std::string(lbe::builtin::sine_map_source),
            testing_util::read_file(testing_util::models_dir() / "sine.nmx"));
  EXPECT_EQ(std::string(lbe::builtin::duffing_source),
            testing_util::read_file(testing_util::models_dir() / "duffing.nmx"));
}

TEST(Builtin, StudiesAndDefaults) {
  const auto studies = lbe::builtin_studies();
  ASSERT_EQ(studies.size(), 2u);
  EXPECT_EQ(studies[0].name, "sine-map");
  EXPECT_EQ(studies[1].name, "duffing");
  for (const auto& s : studies) {
    EXPECT_EQ(s.iterations, 100u);
    EXPECT_EQ(s.fidelity, lbe::Fidelity::equivalent);
  }
  EXPECT_EQ(studies[0].model.initial_conditions(), std::vector<double>(4, 0.5));
  EXPECT_EQ(studies[1].model.initial_conditions(), std::vector<double>(5, 0.0));
  const auto& params = std::get<lbe::DuffingParams>(studies[1].system);
  EXPECT_EQ(params.damping, 1.0);
  EXPECT_EQ(params.stiffness, 0.25);
  EXPECT_EQ(params.amplitude, 10.0);
  EXPECT_EQ(params.period, std::numbers::pi / 60.0);
  EXPECT_EQ(params.substeps, 100u);
  const auto& forcing = std::get<lbe::CosineForcing>(studies[1].input);
  EXPECT_EQ(forcing.amplitude, 10.0);
  EXPECT_EQ(forcing.period, std::numbers::pi / 60.0);
  EXPECT_THROW(lbe::builtin_study("logistic"), lbe::StudyError);
}

TEST(Builtin, SineModelCoefficients) {
  const auto p = oracle::expand(lbe::builtin_study("sine-map").model.update());
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(coefficient(p, {{"x0", 1}}), oracle::exact(2.6868));
  EXPECT_EQ(coefficient(p, {{"x0", 3}}), -oracle::exact(0.2462));
}

TEST(Builtin, DuffingModelCoefficients) {
  const auto p = oracle::expand(lbe::builtin_study("duffing").model.update());
  const std::pair<oracle::Monomial, double> expected[] = {
      {{{"x0", 1}}, 2.1579},       {{{"x1", 1}}, -1.3203},
      {{{"x2", 1}}, 0.16239},      {{{"u0", 1}}, 0.0003416},
      {{{"u1", 1}}, 0.0019463},    {{{"x0", 3}}, -0.0048196},
      {{{"x0", 2}, {"x1", 1}}, 0.003523}, {{{"x0", 1}, {"x1", 1}, {"x2", 1}}, -0.0012162},
      {{{"x2", 3}}, 0.0002248},
  };
  EXPECT_EQ(p.terms().size(), std::size(expected));
  for (const auto& [monomial, value] : expected) EXPECT_EQ(coefficient(p, monomial), oracle::exact(value));
}

TEST(Builtin, EquivalentModeExtensionsAreTheSamePolynomial) {
  for (const auto& study : lbe::builtin_studies()) {
    const auto g = oracle::expand(study.model.update());
    const auto h = oracle::expand(study.extension.update());
    EXPECT_EQ(g, h) << study.name;
    EXPECT_FALSE(lbe::structurally_equal(study.model.update(), study.extension.update())) << study.name;
  }
}

TEST(Builtin, VerbatimDuffingPairIsNotEquivalent) {
  lbe::StudyOptions options;
  options.fidelity = lbe::Fidelity::paper_verbatim;
  const auto study = lbe::builtin_study("duffing", options);
  EXPECT_EQ(study.model.name(), "G_verbatim");
  EXPECT_EQ(study.extension.name(), "H_verbatim");
  const auto g = oracle::expand(study.model.update());
  const auto h = oracle::expand(study.extension.update());
  EXPECT_NE(g, h);
  EXPECT_EQ(coefficient(g, {{"u0", 1}}), oracle::exact(0.000341));
  EXPECT_EQ(coefficient(h, {{"x2", 2}}), oracle::exact(0.0002248));
  EXPECT_EQ(coefficient(h, {{"x2", 3}}), 0);

  // The sine study has no verbatim variants and falls back to G and H.
  EXPECT_EQ(lbe::builtin_study("sine-map", options).model.name(), "G");
}

TEST(Builtin, SineSystemIsNotPolynomial) {
  const auto& system = std::get<lbe::ModelDefinition>(lbe::builtin_study("sine-map").system);
  EXPECT_THROW(oracle::expand(system.update()), std::domain_error);
}

TEST(Builtin, ShippedFilesAndBuiltinsGiveEqualReports) {
  const auto from_file = lbe::make_case_study("sine-map", load("sine.nmx"), "S", "G", "H", {});
  expect_same_output(lbe::run_procedure(from_file), lbe::run_procedure(lbe::builtin_study("sine-map")));
  const auto duffing = lbe::make_case_study("duffing", load("duffing.nmx"), "duffing-ode", "G", "H", {});
  expect_same_output(lbe::run_procedure(duffing), lbe::run_procedure(lbe::builtin_study("duffing")));
}

TEST(Procedure, IsDeterministic) {
  for (const auto& study : lbe::builtin_studies())
    expect_same_output(lbe::run_procedure(study), lbe::run_procedure(study));
}

TEST(Procedure, ReportsShareTheLbeSeriesAndShape) {
  for (const auto& study : lbe::builtin_studies()) {
    const auto out = lbe::run_procedure(study);
    EXPECT_EQ(out.step1_2.lbe.delta, out.lbe.delta);
    EXPECT_EQ(out.step3.lbe.delta, out.lbe.delta);
    EXPECT_EQ(out.step1_2.y.size(), study.iterations + 1);
    EXPECT_EQ(out.step3.y, out.model.samples);
    EXPECT_EQ(out.step3.yhat, out.extension.samples);
    EXPECT_EQ(out.step1_2.y, out.system.samples);
    EXPECT_EQ(out.step1_2.provenance.lbe_pair, "G,H");
    EXPECT_EQ(out.step1_2.k_start, out.step3.k_start);
  }
}

TEST(Procedure, ValidationStartsAfterSeeds) {
  EXPECT_EQ(lbe::validation_start(lbe::builtin_study("sine-map")), 4u);
  EXPECT_EQ(lbe::validation_start(lbe::builtin_study("duffing")), 5u);
}

TEST(Procedure, DivergenceOnlyAfterSeededRegion) {
  for (const auto& study : lbe::builtin_studies()) {
    const auto out = lbe::run_procedure(study);
    const auto first = first_positive(out.lbe);
    ASSERT_TRUE(first) << study.name;
    EXPECT_GT(*first, study.model.max_output_lag()) << study.name;
  }
}

TEST(Procedure, SineLrmseStartsAtRmseThenDeparts) {
  const auto out = lbe::run_procedure(lbe::builtin_study("sine-map"));
  const auto& r = out.step1_2;
  const auto first = r.rmse.first_defined();
  ASSERT_TRUE(first);
  EXPECT_EQ(out.lbe.delta[*first], 0.0);
  EXPECT_EQ(bits(*r.lrmse.values[*first]), bits(*r.rmse.values[*first]));
  EXPECT_NE(*r.lrmse.values[65], *r.rmse.values[65]);
}

TEST(Procedure, DuffingStepThreeStartsNearZero) {
  const auto out = lbe::run_procedure(lbe::builtin_study("duffing"));
  const auto first = out.step3.rmse.first_defined();
  ASSERT_TRUE(first);
  EXPECT_LT(*out.step3.rmse.values[*first], 0.01);
}

TEST(Procedure, DuffingStepOneDifferenceIsNegligible) {
  const auto out = lbe::run_procedure(lbe::builtin_study("duffing"));
  ASSERT_TRUE(out.step1_2.d_rmse_pct[65]);
  EXPECT_LT(*out.step1_2.d_rmse_pct[65], 1e-10);
}

TEST(Procedure, IdenticalExtensionGivesZeroLbe) {
  const auto file = lbe::parse_builtin(
      "model S {\n lags 0\n init 0.5\n update 1.2*pi*sin(x[0])\n}\n"
      "model G {\n lags 0\n init 0.5\n update 2.6868*x[0] - 0.2462*x[0]^3\n}\n"
      "model Gcopy {\n lags 0\n init 0.5\n update 2.6868*x[0] - 0.2462*x[0]^3\n}\n");
  const auto out = lbe::run_procedure(lbe::make_case_study("copy", file, "S", "G", "Gcopy", {}));
  for (double d : out.lbe.delta) EXPECT_EQ(d, 0.0);
  EXPECT_FALSE(out.step3.rmse.values[out.k_start]);  // a one-sample window has no spread
  const auto last = out.step3.rmse.values[100];
  ASSERT_TRUE(last);
  EXPECT_EQ(*last, 0.0);
  EXPECT_EQ(*out.step3.lrmse.values[100], 0.0);
  EXPECT_EQ(*out.step3.d_rmse_pct[100], 0.0);
}

TEST(Compatibility, Rejections) {
  const auto file = lbe::parse_builtin(
      "model A {\n lags 1\n init 0 0\n update 0.5*x[0]\n}\n"
      "model B {\n lags 1\n init 0 1\n update 0.5*x[0]\n}\n"
      "model C {\n lags 1\n init 0 0\n input cosine(1, 0.1)\n update 0.5*x[0] + u[0]\n}\n"
      "model D {\n lags 1\n init 0 0\n input\n update 0.5*x[0] + u[0]\n}\n");
  EXPECT_THROW(lbe::run_procedure(lbe::make_case_study("t", file, "A", "A", "B", {})), lbe::StudyError);
  EXPECT_THROW(lbe::run_procedure(lbe::make_case_study("t", file, "A", "A", "C", {})), lbe::StudyError);
  EXPECT_THROW(lbe::run_procedure(lbe::make_case_study("t", file, "B", "A", "A", {})), lbe::StudyError);
  EXPECT_THROW(lbe::make_case_study("t", file, "A", "D", "D", {}), lbe::StudyError);
  EXPECT_THROW(lbe::make_case_study("t", file, "duffing-ode", "A", "A", {}), lbe::StudyError);
  EXPECT_THROW(lbe::make_case_study("t", file, "A", "missing", "A", {}), lbe::StudyError);
  lbe::StudyOptions short_run;
  short_run.iterations = 1;
  EXPECT_THROW(lbe::run_procedure(lbe::make_case_study("t", file, "A", "A", "A", short_run)), lbe::StudyError);
  EXPECT_NO_THROW(lbe::run_procedure(lbe::make_case_study("t", file, "A", "A", "A", {})));
}

TEST(Fidelity, Names) {
  EXPECT_EQ(lbe::to_string(lbe::Fidelity::equivalent), "equivalent");
  EXPECT_EQ(lbe::to_string(lbe::Fidelity::paper_verbatim), "paper-verbatim");
  EXPECT_EQ(lbe::parse_fidelity("paper-verbatim"), lbe::Fidelity::paper_verbatim);
  EXPECT_FALSE(lbe::parse_fidelity("verbatim"));
}

TEST(Fidelity, VerbatimDuffingRunsToCompletion) {
  lbe::StudyOptions options;
  options.fidelity = lbe::Fidelity::paper_verbatim;
  const auto out = lbe::run_procedure(lbe::builtin_study("duffing", options));
  EXPECT_EQ(out.model.model_name, "G_verbatim");
  EXPECT_TRUE(first_positive(out.lbe));
}

#pragma once

// CSV and JSON writers for orbits and validation reports. Numbers are written
// as the shortest decimal that reads back to the same binary64; undefined
// index values are empty CSV cells and JSON nulls.

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lbe/case_studies.hpp"
#include "lbe/dsl.hpp"
#include "lbe/metrics.hpp"
#include "lbe/numeric_text.hpp"
#include "lbe/simulation.hpp"

namespace lbe {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json, both };

inline std::optional<OutputFormat> parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  if (text == "both") return OutputFormat::both;
  return std::nullopt;
}

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline nlohmann::json json_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline void write_orbit_csv(std::ostream& out, const Orbit& orbit) {
  out << "n,value\n";
  for (std::size_t n = 0; n < orbit.samples.size(); ++n) out << n << ',' << format_number(orbit.samples[n]) << '\n';
}

/// Reads the `n,value` layout back; throws IoError on malformed rows.
inline std::vector<double> read_orbit_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,value") throw IoError("missing 'n,value' header");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed orbit row '" + line + "'");
    const auto value = parse_number(std::string_view(line).substr(comma + 1));
    if (!value) throw IoError("malformed orbit value in '" + line + "'");
    values.push_back(*value);
  }
  return values;
}

inline void write_report_csv(std::ostream& out, const ValidationReport& r) {
  out << "n,y,yhat,delta,rmse,lrmse,mape,lmape,d_rmse_pct,d_mape_pct\n";
  for (std::size_t n = 0; n < r.y.size(); ++n) {
    out << n << ',' << format_number(r.y[n]) << ',' << format_number(r.yhat[n]) << ','
        << format_number(r.lbe.delta[n]) << ',' << detail::cell(r.rmse.values[n]) << ','
        << detail::cell(r.lrmse.values[n]) << ',' << detail::cell(r.mape.values[n]) << ','
        << detail::cell(r.lmape.values[n]) << ',' << detail::cell(r.d_rmse_pct[n]) << ','
        << detail::cell(r.d_mape_pct[n]) << '\n';
  }
}

/// Plot-ready pair of one classical index and its LBE counterpart.
inline void write_index_pair_csv(std::ostream& out, const IndexSeries& classical, const IndexSeries& modified,
                                 const std::vector<std::optional<double>>& difference) {
  out << "n," << to_string(classical.kind) << ',' << to_string(modified.kind) << ",d_" << to_string(classical.kind)
      << "_pct\n";
  for (std::size_t n = 0; n < classical.values.size(); ++n)
    out << n << ',' << detail::cell(classical.values[n]) << ',' << detail::cell(modified.values[n]) << ','
        << detail::cell(difference[n]) << '\n';
}

inline nlohmann::json indices_at(const ValidationReport& r, std::size_t n) {
  return {
      {"n", n},
      {"rmse", detail::json_value(r.rmse.at(n))},
      {"lrmse", detail::json_value(r.lrmse.at(n))},
      {"mape", detail::json_value(r.mape.at(n))},
      {"lmape", detail::json_value(r.lmape.at(n))},
      {"d_rmse_pct", detail::json_value(n < r.d_rmse_pct.size() ? r.d_rmse_pct[n] : std::nullopt)},
      {"d_mape_pct", detail::json_value(n < r.d_mape_pct.size() ? r.d_mape_pct[n] : std::nullopt)},
  };
}

inline constexpr std::size_t reported_iteration = 65;

inline nlohmann::json report_summary(const ValidationReport& r) {
  const std::size_t last = r.y.empty() ? 0 : r.y.size() - 1;
  nlohmann::json j;
  j["reference"] = r.provenance.reference;
  j["prediction"] = r.provenance.prediction;
  j["lbe_pair"] = r.provenance.lbe_pair;
  j["final"] = indices_at(r, last);
  j["at_65"] = indices_at(r, reported_iteration);
  j["d_rmse_pct@65"] = j["at_65"]["d_rmse_pct"];
  j["d_mape_pct@65"] = j["at_65"]["d_mape_pct"];
  j["d_rmse_pct@N"] = j["final"]["d_rmse_pct"];
  j["d_mape_pct@N"] = j["final"]["d_mape_pct"];
  j["skipped_samples"] = {{"mape", r.mape.skipped_samples}, {"lmape", r.lmape.skipped_samples}};
  const auto first = r.rmse.first_defined();
  j["first_defined_n"] = first ? nlohmann::json(*first) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json model_summary(const ModelDefinition& m) {
  return {
      {"name", m.name()},
      {"lags", m.max_output_lag()},
      {"initial_conditions", m.initial_conditions()},
      {"update", format_expression(m.update())},
      {"requires_input", m.requires_input()},
  };
}

inline nlohmann::json study_summary(const CaseStudy& study, const ProcedureOutput& out) {
  nlohmann::json params;
  params["iterations"] = study.iterations;
  params["k_start"] = out.k_start;
  params["model"] = model_summary(study.model);
  params["extension"] = model_summary(study.extension);
  params["system"] = std::visit(overloaded{
                                    [](const ModelDefinition& m) {
                                      nlohmann::json s = model_summary(m);
                                      s["kind"] = "model";
                                      return s;
                                    },
                                    [](const DuffingParams& p) {
                                      return nlohmann::json{{"kind", std::string(duffing_system_name)},
                                                            {"damping", p.damping},
                                                            {"stiffness", p.stiffness},
                                                            {"amplitude", p.amplitude},
                                                            {"period", p.period},
                                                            {"substeps", p.substeps},
                                                            {"integrator", "rk4"}};
                                    },
                                },
                                study.system);
  params["input"] = std::visit(overloaded{
                                   [](const NoInput&) { return nlohmann::json{{"kind", "none"}}; },
                                   [](const CosineForcing& f) {
                                     return nlohmann::json{
                                         {"kind", "cosine"}, {"amplitude", f.amplitude}, {"period", f.period}};
                                   },
                                   [](const ExplicitInput& e) {
                                     return nlohmann::json{{"kind", "explicit"}, {"values", e.values}};
                                   },
                               },
                               study.input);

  std::optional<std::size_t> first_positive;
  for (std::size_t n = 0; n < out.lbe.delta.size() && !first_positive; ++n)
    if (out.lbe.delta[n] > 0.0) first_positive = n;

  nlohmann::json j;
  j["fidelity"] = std::string(to_string(study.fidelity));
  j["difference_metric"] = "|modified - classical| / max(|modified|, |classical|) * 100";
  j["parameters"] = params;
  j["lbe"] = {{"first_positive_n", first_positive ? nlohmann::json(*first_positive) : nlohmann::json(nullptr)},
              {"final", out.lbe.delta.empty() ? nlohmann::json(nullptr) : nlohmann::json(out.lbe.delta.back())}};
  j["step1_2"] = report_summary(out.step1_2);
  j["step3"] = report_summary(out.step3);
  return j;
}

namespace detail {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  writer(file);
  file.flush();
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace detail

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

/// step1_2.csv / step3.csv carry every column; the *_rmse.csv and *_mape.csv
/// files hold the four plot series; summary.json the headline numbers.
inline std::vector<std::filesystem::path> write_procedure_outputs(const std::filesystem::path& dir,
                                                                   const CaseStudy& study, const ProcedureOutput& out,
                                                                   OutputFormat format) {
  ensure_directory(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, auto&& writer) {
    detail::write_file(dir / name, writer);
    written.push_back(dir / name);
  };
  if (format != OutputFormat::json) {
    const std::pair<const char*, const ValidationReport*> steps[] = {{"step1_2", &out.step1_2}, {"step3", &out.step3}};
    for (const auto& [prefix, report] : steps) {
      const std::string p(prefix);
      emit(p + ".csv", [&](std::ostream& s) { write_report_csv(s, *report); });
      emit(p + "_rmse.csv",
           [&](std::ostream& s) { write_index_pair_csv(s, report->rmse, report->lrmse, report->d_rmse_pct); });
      emit(p + "_mape.csv",
           [&](std::ostream& s) { write_index_pair_csv(s, report->mape, report->lmape, report->d_mape_pct); });
    }
  }
  if (format != OutputFormat::csv)
    emit("summary.json", [&](std::ostream& s) { s << study_summary(study, out).dump(2) << '\n'; });
  return written;
}

/// Writes manifest.json. The timestamp is the only run-dependent field and
/// sits on its own line.
inline void write_manifest(const std::filesystem::path& dir, nlohmann::json manifest, const std::string& timestamp) {
  ensure_directory(dir);
  manifest["timestamp"] = timestamp;
  detail::write_file(dir / "manifest.json", [&](std::ostream& s) { s << manifest.dump(2) << '\n'; });
}

}  // namespace lbe

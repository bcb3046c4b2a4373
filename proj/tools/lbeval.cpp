// lbeval: simulate .nmx models, compute lower bound errors and validation
// indices, and reproduce the builtin sine-map and Duffing studies.
//
// Exit codes: 0 success, 2 usage, 3 model parse error, 4 numeric divergence,
// 5 I/O error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lbe/case_studies.hpp"
#include "lbe/dsl.hpp"
#include "lbe/fuzz.hpp"
#include "lbe/report_io.hpp"
#include "lbe/simulation.hpp"

namespace {

enum ExitCode { ok = 0, usage = 2, parse_error = 3, divergence = 4, io_error = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

lbe::ModelFile load_models(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lbe::IoError("cannot read model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  auto parsed = lbe::parse_model_file(text.str());
  for (const auto& d : parsed.diagnostics) std::cerr << path << ":" << lbe::to_string(d) << "\n";
  if (!parsed.ok()) throw ModelParseError("'" + path + "' has errors");
  return std::move(*parsed.value);
}

lbe::Fidelity fidelity_from(const std::string& text) {
  if (auto f = lbe::parse_fidelity(text)) return *f;
  throw UsageError("unknown fidelity '" + text + "' (expected equivalent or paper-verbatim)");
}

lbe::OutputFormat format_from(const std::string& text) {
  if (auto f = lbe::parse_output_format(text)) return *f;
  throw UsageError("unknown format '" + text + "' (expected csv, json or both)");
}

nlohmann::json manifest_for(const std::string& command, const std::vector<std::string>& argv, nlohmann::json args,
                            const std::vector<std::filesystem::path>& outputs) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : outputs) files.push_back(p.filename().string());
  return {{"tool", "lbeval"}, {"command", command}, {"argv", argv}, {"arguments", std::move(args)}, {"outputs", files}};
}

struct SimulateArgs {
  std::string model_path;
  std::string name;
  std::size_t n = 100;
  std::string out = ".";
  std::string fidelity = "equivalent";
  std::optional<double> amplitude;
  std::optional<double> period;
  std::string input_csv;
};

int run_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
  const lbe::ModelFile file = load_models(a.model_path);
  const lbe::ModelDefinition* model = nullptr;
  try {
    model = &lbe::resolve_model(file, a.name, fidelity_from(a.fidelity));
  } catch (const lbe::StudyError& e) {
    throw UsageError(e.what());
  }

  lbe::InputKind kind = lbe::NoInput{};
  if (model->requires_input()) {
    if (!a.input_csv.empty()) {
      std::ifstream in(a.input_csv);
      if (!in) throw lbe::IoError("cannot read input file '" + a.input_csv + "'");
      kind = lbe::ExplicitInput{lbe::read_orbit_csv(in)};
    } else {
      lbe::CosineForcing forcing = model->default_forcing().value_or(lbe::CosineForcing{});
      if (!model->default_forcing() && (!a.amplitude || !a.period))
        throw UsageError("model '" + model->name() +
                         "' needs an input: pass --amplitude and --period, or --input-csv");
      if (a.amplitude) forcing.amplitude = *a.amplitude;
      if (a.period) forcing.period = *a.period;
      kind = forcing;
    }
  }
  const lbe::Orbit orbit = lbe::simulate(*model, lbe::realize_input(kind, a.n), a.n);

  const std::filesystem::path dir(a.out);
  lbe::ensure_directory(dir);
  lbe::detail::write_file(dir / "orbit.csv", [&](std::ostream& s) { lbe::write_orbit_csv(s, orbit); });
  nlohmann::json args{{"model", a.model_path}, {"name", a.name},       {"n", a.n},
                      {"out", a.out},          {"fidelity", a.fidelity}, {"input", lbe::realize_input(kind, 0).name()}};
  lbe::write_manifest(dir, manifest_for("simulate", argv, args, {dir / "orbit.csv"}), utc_timestamp());
  return ok;
}

struct StudyArgs {
  std::size_t n = 100;
  std::string out = ".";
  std::string fidelity = "equivalent";
  std::size_t substeps = 100;
  double damping = 1.0;
  double stiffness = 0.25;
  std::string format = "both";
};

lbe::StudyOptions options_from(const StudyArgs& a) {
  if (a.substeps < 1) throw UsageError("--substeps must be at least 1");
  return lbe::StudyOptions{a.n, fidelity_from(a.fidelity), a.substeps, a.damping, a.stiffness};
}

nlohmann::json study_args_json(const StudyArgs& a) {
  return {{"n", a.n},
          {"out", a.out},
          {"fidelity", a.fidelity},
          {"substeps", a.substeps},
          {"damping", a.damping},
          {"stiffness", a.stiffness},
          {"format", a.format}};
}

int write_study(const lbe::CaseStudy& study, const StudyArgs& a, const std::string& command,
                const std::vector<std::string>& argv, nlohmann::json args) {
  const lbe::OutputFormat format = format_from(a.format);
  lbe::ProcedureOutput output;
  try {
    output = lbe::run_procedure(study);
  } catch (const lbe::StudyError& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path dir(a.out);
  const auto written = lbe::write_procedure_outputs(dir, study, output, format);
  lbe::write_manifest(dir, manifest_for(command, argv, std::move(args), written), utc_timestamp());
  return ok;
}

struct ValidateArgs {
  std::string model_path;
  std::string system;
  std::string name;
  std::string extension;
};

int run_validate(const ValidateArgs& v, const StudyArgs& a, const std::vector<std::string>& argv) {
  const lbe::ModelFile file = load_models(v.model_path);
  lbe::CaseStudy study = [&] {
    try {
      return lbe::make_case_study("custom", file, v.system, v.name, v.extension, options_from(a));
    } catch (const lbe::StudyError& e) {
      throw UsageError(e.what());
    }
  }();
  nlohmann::json args = study_args_json(a);
  args["model"] = v.model_path;
  args["system"] = v.system;
  args["name"] = v.name;
  args["extension"] = v.extension;
  return write_study(study, a, "validate", argv, std::move(args));
}

int run_reproduce(const std::string& study_name, const StudyArgs& a, const std::vector<std::string>& argv) {
  const lbe::CaseStudy study = lbe::builtin_study(study_name, options_from(a));
  nlohmann::json args = study_args_json(a);
  args["study"] = study_name;
  return write_study(study, a, "reproduce", argv, std::move(args));
}

int run_fuzz(std::uint64_t seed, std::size_t count) {
  lbe::fuzz::ExpressionGenerator generator(seed);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (auto failure = lbe::fuzz::check_round_trip(generator.next())) {
      ++failures;
      std::cerr << "round-trip failure (" << failure->reason << "): " << failure->text << "\n";
    }
  }
  std::cout << count << " expressions, " << failures << " round-trip failures (seed " << seed << ")\n";
  return failures == 0 ? ok : usage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bound error and LBE-aware validation indices for recursive models", "lbeval"};
  app.require_subcommand(1);
  const std::vector<std::string> raw_args(argv, argv + argc);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Iterate one model and write orbit.csv");
  simulate->add_option("--model", sim.model_path, ".nmx model file")->required();
  simulate->add_option("--name", sim.name, "Model name inside the file")->required();
  simulate->add_option("--n", sim.n, "Number of iterations N (writes N+1 samples)")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--fidelity", sim.fidelity, "equivalent | paper-verbatim")->capture_default_str();
  simulate->add_option("--amplitude", sim.amplitude, "Cosine forcing amplitude (overrides the model's)");
  simulate->add_option("--period", sim.period, "Cosine forcing sample period (overrides the model's)");
  simulate->add_option("--input-csv", sim.input_csv, "Explicit input samples in n,value layout");

  auto add_study_options = [](CLI::App* cmd, StudyArgs& a) {
    cmd->add_option("--n", a.n, "Number of iterations N")->capture_default_str();
    cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
    cmd->add_option("--fidelity", a.fidelity, "equivalent | paper-verbatim")->capture_default_str();
    cmd->add_option("--substeps", a.substeps, "RK4 steps per sample for the Duffing reference")
        ->capture_default_str();
    cmd->add_option("--damping", a.damping, "Duffing damping k")->capture_default_str();
    cmd->add_option("--stiffness", a.stiffness, "Duffing cubic stiffness mu")->capture_default_str();
    cmd->add_option("--format", a.format, "csv | json | both")->capture_default_str();
  };

  ValidateArgs val;
  StudyArgs val_study;
  auto* validate = app.add_subcommand("validate", "Run the three-step procedure on a system/model/extension triple");
  validate->add_option("--model", val.model_path, ".nmx file holding the models")->required();
  validate->add_option("--system", val.system, "Reference model name, or duffing-ode")->required();
  validate->add_option("--name", val.name, "Model name (plays yhat in step 1)")->required();
  validate->add_option("--extension", val.extension, "Interval extension of the model")->required();
  add_study_options(validate, val_study);

  std::string study_name;
  StudyArgs rep_study;
  auto* reproduce = app.add_subcommand("reproduce", "Run a builtin case study (sine-map or duffing)");
  std::vector<std::string> names(lbe::builtin_study_names().begin(), lbe::builtin_study_names().end());
  reproduce->add_option("study", study_name, "Study name")->required()->check(CLI::IsMember(names));
  add_study_options(reproduce, rep_study);

  std::uint64_t seed = 1;
  std::size_t count = 10000;
  auto* fuzz = app.add_subcommand("fuzz-parser", "Round-trip random expressions through the model format");
  fuzz->add_option("--seed", seed, "Random seed")->capture_default_str();
  fuzz->add_option("--count", count, "Number of expressions")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*simulate) return run_simulate(sim, raw_args);
    if (*validate) return run_validate(val, val_study, raw_args);
    if (*reproduce) return run_reproduce(study_name, rep_study, raw_args);
    if (*fuzz) return run_fuzz(seed, count);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const ModelParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return parse_error;
  } catch (const lbe::DivergenceError& e) {
    std::cerr << "error: divergence at step " << e.step() << ": " << e.what() << "\n";
    return divergence;
  } catch (const lbe::EvaluationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return divergence;
  } catch (const lbe::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  return usage;
}

// confspec: flat-torus spectra, conformal second variation, and the deformed
// Galerkin cross-check.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "confspec/errors.hpp"
#include "confspec/parallel.hpp"
#include "confspec/reports.hpp"

namespace fs = std::filesystem;
using confspec::reports::CommandResult;
using confspec::reports::JobConfig;

namespace {

int emit(const CommandResult& result, const std::string& name, const std::string& out_dir,
         confspec::reports::Format format) {
  if (out_dir.empty()) {
    std::cout << result.output;
    return result.exit_code;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const char* ext = format == confspec::reports::Format::Json ? ".json"
                    : format == confspec::reports::Format::Csv ? ".csv"
                                                               : ".txt";
  const fs::path file = fs::path(out_dir) / (name + ext);
  std::ofstream out(file);
  if (!out) {
    std::cerr << "cannot write " << file << "\n";
    return 2;
  }
  out << result.output;
  std::cerr << "wrote " << file.string() << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  confspec::configure_threads_from_env();

  CLI::App app{"Laplace spectra of flat tori under conformal deformation"};
  app.require_subcommand(1);

  JobConfig job;
  std::string format_name;
  std::string out_dir;
  double radius_sq = 0.0;
  double t_step = 0.0;

  auto common = [&](CLI::App* sub, const std::string& default_format) {
    sub->add_option("--lattice", job.lattice_spec, "eye:n, diag:a,b[,c...], ab:a,b, or a JSON file")->required();
    sub->add_option("--format", format_name,
                    "json, csv" + std::string(default_format == "text" ? ", text" : "") + " (default " +
                        default_format + ")");
    sub->add_option("--out", out_dir, "write the report into this directory");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--k", job.k, "eigenvalue level (1 = first nonzero)")->default_val(1);
    sub->add_option("--phi", job.phi_spec, "u1, auto, or a JSON file of Fourier terms")->default_val("u1");
  };

  auto* spectrum = app.add_subcommand("spectrum", "flat eigenvalue levels");
  common(spectrum, "json");
  spectrum->add_option("--levels", job.levels, "number of nonzero levels")->default_val(5);

  auto* admissible = app.add_subcommand("admissible", "orthogonality residuals of a direction");
  common(admissible, "json");
  solver_flags(admissible);

  auto* perturb = app.add_subcommand("perturb", "second-variation report");
  common(perturb, "json");
  solver_flags(perturb);

  auto* verify = app.add_subcommand("verify", "full pipeline with deformed-solver cross-checks");
  common(verify, "json");
  solver_flags(verify);
  verify->add_option("--radius-sq", radius_sq, "Galerkin truncation radius squared");
  verify->add_option("--t-step", t_step, "spacing h of the {0, +-h, +-2h, +-3h} grid");

  auto* sweep = app.add_subcommand("sweep", "one CSV row per lattice of a family");
  sweep->add_option("--family", job.family, "diag (diag:1,s) or ab-circle (ab:a,sqrt(1-a^2))")->default_val("diag");
  sweep->add_option("--range", job.range, "start:stop:step")->required();
  sweep->add_option("--format", format_name, "csv or json (default csv)");
  sweep->add_option("--out", out_dir, "write the report into this directory");

  auto* theorem4 = app.add_subcommand("theorem4", "closed-form casework for phi = u1");
  common(theorem4, "text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    // subcommands share format_name, so defaults are applied after parsing
    if (format_name.empty()) format_name = *sweep ? "csv" : *theorem4 ? "text" : "json";
    job.format = confspec::reports::parse_format(format_name);
    if (radius_sq != 0.0) job.radius_sq = radius_sq;
    if (t_step != 0.0) job.t_step = t_step;

    CommandResult result;
    std::string name;
    if (*spectrum) {
      name = "spectrum", result = confspec::reports::cmd_spectrum(job);
    } else if (*admissible) {
      name = "admissible", result = confspec::reports::cmd_admissible(job);
    } else if (*perturb) {
      name = "perturb", result = confspec::reports::cmd_perturb(job);
    } else if (*verify) {
      name = "verify", result = confspec::reports::cmd_verify(job);
    } else if (*sweep) {
      name = "sweep", result = confspec::reports::cmd_sweep(job);
    } else {
      name = "theorem4", result = confspec::reports::cmd_theorem4(job);
    }
    if (result.exit_code != 0 && result.data.contains("error")) {
      std::cerr << result.data["failed_stage"].get<std::string>() << ": "
                << result.data["error"]["message"].get<std::string>() << "\n";
    }
    return emit(result, name, out_dir, job.format);
  } catch (const confspec::Error& e) {
    std::cerr << e.what() << "\n";
    return confspec::exit_code_for(e.kind());
  }
}

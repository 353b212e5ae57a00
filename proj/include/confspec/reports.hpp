#pragma once

#include <optional>
#include <string>

#include "confspec/json_io.hpp"

// Command implementations behind the CLI. Each returns the rendered output
// and the process exit code instead of printing, so tests can drive them
// in-process.
namespace confspec::reports {

enum class Format { Json, Csv, Text };

struct JobConfig {
  std::string lattice_spec;
  int k = 1;
  std::string phi_spec = "u1";  // "u1", "auto", or a JSON file of terms
  std::optional<double> radius_sq;
  std::optional<double> t_step;  // absolute h of the {0, +-h, +-2h, +-3h} grid
  int levels = 5;
  std::string family = "diag";  // sweep: "diag" -> diag(1,s), "ab-circle" -> ab(a, sqrt(1-a^2))
  std::string range;            // sweep: start:stop:step
  Format format = Format::Json;
};

struct CommandResult {
  int exit_code = 0;
  io::json data;
  std::string output;
};

CommandResult cmd_spectrum(const JobConfig& config);
CommandResult cmd_admissible(const JobConfig& config);
CommandResult cmd_perturb(const JobConfig& config);
CommandResult cmd_verify(const JobConfig& config);
CommandResult cmd_sweep(const JobConfig& config);
CommandResult cmd_theorem4(const JobConfig& config);

Format parse_format(const std::string& name);

}  // namespace confspec::reports

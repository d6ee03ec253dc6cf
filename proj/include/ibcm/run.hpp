#pragma once

#include "ibcm/cases.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace ibcm {

/// Front-end settings. Negative numbers select the case default.
struct RunConfig {
  std::string case_id = "plate";  ///< plate | spline-hole | split | mixed | crack | cylinders
  Theory theory = Theory::RM;
  int p = 3;
  int levels = 1;
  int first_level = -1;
  double tau = -1;
  double beta = -1;
  double gamma1 = 1.0, gamma2 = 1.0;
  Mode mode = Mode::IBCM;
  double load = 1000.0;  ///< normal pressure of the mixed case
  std::string out_dir = "ibcm_out";
  int samples = 41;  ///< VTK lattice size per direction
  bool vtk = true;
  bool triplets = false;
  bool diagnostic = false;  ///< SPD failures do not change the exit code
};

/// Names accepted as case_id.
const std::vector<std::string>& case_ids();

/// Parses the JSON config format; unknown keys are rejected. Fails with
/// ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});
std::string config_to_json(const RunConfig& c);
/// Fails with ConfigError on inconsistent settings (KL with p < 2, ...).
void validate_config(const RunConfig& c);

Mode parse_mode(const std::string& s);
Theory parse_theory(const std::string& s);

/// Builds the case for one level.
Case build_case(const RunConfig& c, int level);

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitSPD = 3, kExitGeometry = 4, kExitOther = 1 };
/// Exit code for a failure of the given kind.
int exit_code_for(ErrorKind k);

struct RunSummary {
  int exit_code = kExitOk;
  ConvergenceStudy study;     ///< error levels, filled for manufactured cases
  std::vector<SPDReport> spd;  ///< one per level
  std::vector<std::string> files;
};

/// Runs every level, writes the artifacts under out_dir and logs progress.
/// Throws on configuration and geometry errors.
RunSummary run(const RunConfig& c, std::ostream& log);

}  // namespace ibcm

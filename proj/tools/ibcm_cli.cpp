// Batch front end: ibcm_cli run <case> [options], ibcm_cli list.
#include "ibcm/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  using namespace ibcm;
  CLI::App app{"Immersed boundary conformal shell analyses"};
  app.require_subcommand(1);

  CLI::App* list = app.add_subcommand("list", "List the case catalog");
  CLI::App* runc = app.add_subcommand("run", "Run a case over one or more refinement levels");
  std::string case_id, config_path, theory, mode;
  RunConfig over;
  bool diagnostic = false, triplets = false, no_vtk = false;
  runc->add_option("case", case_id, "Case id (see list)");
  runc->add_option("--config", config_path, "JSON config file; flags given here take precedence")->check(CLI::ExistingFile);
  runc->add_option("--theory", theory, "rm | kl");
  runc->add_option("--p", over.p, "Spline degree");
  runc->add_option("--levels", over.levels, "Number of dyadic levels");
  runc->add_option("--first-level", over.first_level, "First refinement level (case default when omitted)");
  runc->add_option("--mode", mode, "ibcm | trimmed-single-patch");
  runc->add_option("--tau", over.tau, "Thickness");
  runc->add_option("--beta", over.beta, "Nitsche penalty factor");
  runc->add_option("--gamma1", over.gamma1, "Nitsche symmetry factor (+1, 0, -1)");
  runc->add_option("--gamma2", over.gamma2, "Nitsche average weight of the + side");
  runc->add_option("--load", over.load, "Normal pressure of the mixed case");
  runc->add_option("--out", over.out_dir, "Output directory");
  runc->add_option("--samples", over.samples, "VTK samples per direction");
  runc->add_flag("--diagnostic", diagnostic, "Exit 0 even if a stiffness matrix is not positive definite");
  runc->add_flag("--triplets", triplets, "Write the stiffness triplets of every level");
  runc->add_flag("--no-vtk", no_vtk, "Skip field output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (list->parsed()) {
    for (const auto& id : case_ids()) std::cout << id << "\n";
    return kExitOk;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      std::stringstream ss;
      ss << is.rdbuf();
      cfg = parse_config(ss.str());
    }
    // Command-line values override the file.
    auto given = [&](const char* name) { return runc->count(name) > 0; };
    if (!case_id.empty()) cfg.case_id = case_id;
    if (given("--theory")) cfg.theory = parse_theory(theory);
    if (given("--p")) cfg.p = over.p;
    if (given("--levels")) cfg.levels = over.levels;
    if (given("--first-level")) cfg.first_level = over.first_level;
    if (given("--mode")) cfg.mode = parse_mode(mode);
    if (given("--tau")) cfg.tau = over.tau;
    if (given("--beta")) cfg.beta = over.beta;
    if (given("--gamma1")) cfg.gamma1 = over.gamma1;
    if (given("--gamma2")) cfg.gamma2 = over.gamma2;
    if (given("--load")) cfg.load = over.load;
    if (given("--out")) cfg.out_dir = over.out_dir;
    if (given("--samples")) cfg.samples = over.samples;
    if (diagnostic) cfg.diagnostic = true;
    if (triplets) cfg.triplets = true;
    if (no_vtk) cfg.vtk = false;
    const RunSummary s = run(cfg, std::cout);
    if (s.exit_code == kExitSPD) std::cerr << "error: stiffness matrix not positive definite (use --diagnostic)\n";
    return s.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "ibcm/run.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ibcm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ContractViolation;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ibcm_test_run_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("configs survive a JSON round trip") {
  RunConfig c;
  c.case_id = "crack";
  c.theory = Theory::KL;
  c.p = 2;
  c.levels = 3;
  c.first_level = 1;
  c.tau = 0.5;
  c.beta = 250;
  c.gamma1 = -1;
  c.gamma2 = 0.5;
  c.mode = Mode::Trimmed;
  c.load = 12.5;
  c.out_dir = "x/y";
  c.samples = 7;
  c.vtk = false;
  c.triplets = true;
  c.diagnostic = true;
  const RunConfig r = parse_config(config_to_json(c));
  CHECK(r.case_id == c.case_id);
  CHECK(r.theory == c.theory);
  CHECK(r.p == c.p);
  CHECK(r.levels == c.levels);
  CHECK(r.first_level == c.first_level);
  CHECK(r.tau == c.tau);
  CHECK(r.beta == c.beta);
  CHECK(r.gamma1 == c.gamma1);
  CHECK(r.gamma2 == c.gamma2);
  CHECK(r.mode == c.mode);
  CHECK(r.load == c.load);
  CHECK(r.out_dir == c.out_dir);
  CHECK(r.samples == c.samples);
  CHECK(r.vtk == c.vtk);
  CHECK(r.triplets == c.triplets);
  CHECK(r.diagnostic == c.diagnostic);
  CHECK(config_to_json(r) == config_to_json(c));
}

TEST_CASE("partial configs keep the defaults") {
  const RunConfig r = parse_config(R"({"case": "split", "nitsche": {"beta": 20}})");
  CHECK(r.case_id == "split");
  CHECK(r.beta == 20);
  CHECK(r.gamma1 == 1.0);
  CHECK(r.p == RunConfig{}.p);
}

TEST_CASE("bad configs are rejected as config errors") {
  CHECK(kind_of([] { parse_config(R"({"case": "plate", "colour": 3})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config(R"({"nitsche": {"alpha": 3}})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config(R"({"p": "three"})"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("{not json"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_theory("shell"); }) == ErrorKind::ConfigError);
  CHECK(parse_mode("trimmed") == Mode::Trimmed);
  RunConfig kl;
  kl.theory = Theory::KL;
  kl.p = 1;
  CHECK(kind_of([&] { validate_config(kl); }) == ErrorKind::ConfigError);
  RunConfig trimmed_crack;
  trimmed_crack.case_id = "crack";
  trimmed_crack.mode = Mode::Trimmed;
  CHECK(kind_of([&] { validate_config(trimmed_crack); }) == ErrorKind::ConfigError);
  RunConfig g2;
  g2.gamma2 = 1.5;
  CHECK(kind_of([&] { validate_config(g2); }) == ErrorKind::ConfigError);
  RunConfig unknown;
  unknown.case_id = "sphere";
  CHECK(kind_of([&] { validate_config(unknown); }) == ErrorKind::ConfigError);
}

TEST_CASE("exit codes by failure kind") {
  CHECK(exit_code_for(ErrorKind::ConfigError) == 2);
  CHECK(exit_code_for(ErrorKind::Unsupported) == 2);
  CHECK(exit_code_for(ErrorKind::RefineRequired) == 4);
  CHECK(exit_code_for(ErrorKind::SegmentationFailure) == 4);
  CHECK(exit_code_for(ErrorKind::NumericalFailure) == 1);
  CHECK(case_ids().size() == 6);
}

TEST_CASE("runs write their artifacts and repeat byte for byte") {
  RunConfig c;
  c.case_id = "split";
  c.theory = Theory::RM;
  c.p = 2;
  c.levels = 2;
  c.samples = 5;
  std::ostringstream log;
  const fs::path da = scratch("a"), db = scratch("b");
  c.out_dir = da.string();
  const RunSummary a = run(c, log);
  c.out_dir = db.string();
  const RunSummary b = run(c, log);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.study.levels.size() == 2);
  for (const char* f : {"convergence.csv", "rates.csv", "spd_log.csv", "config.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(da / f));
  }
  CHECK(slurp(da / "convergence.csv") == slurp(db / "convergence.csv"));
  CHECK(slurp(da / "spd_log.csv") == slurp(db / "spd_log.csv"));
  CHECK(slurp(da / "convergence.csv").rfind("level,h,dofs,l2,h1,h2,rate_l2,rate_h1,rate_h2,spd", 0) == 0);
  // The stored config reproduces the run settings.
  const RunConfig back = parse_config(slurp(da / "config.json"));
  CHECK(back.case_id == "split");
  CHECK(back.levels == 2);
  bool vtk = false;
  for (const auto& e : fs::directory_iterator(da)) vtk |= e.path().extension() == ".vtk";
  CHECK(vtk);
  fs::remove_all(da);
  fs::remove_all(db);
}

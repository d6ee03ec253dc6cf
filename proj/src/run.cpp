#include "ibcm/run.hpp"

#include "ibcm/output.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace ibcm {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::ConfigError, what); }

int default_first_level(const std::string& id) {
  if (id == "spline-hole") return 1;
  if (id == "mixed") return 4;
  if (id == "cylinders") return 0;
  return 2;
}

// Linear field used by the spline-hole patch test.
ExactSolution linear_field(Theory t) {
  ExactSolution ex;
  ex.u = polynomial_field({{Vec3(0.01, -0.02, 0.03), 0, 0}, {Vec3(0.1, 0.2, -0.3), 1, 0}, {Vec3(-0.2, 0.05, 0.4), 0, 1}});
  if (t == Theory::RM) ex.theta = polynomial_field({});
  return ex;
}

template <class T>
T take(const json& j, const char* key, const T& def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be a table");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) config_error("unknown key '" + k + "' in " + where);
}

std::string level_tag(int level) { return "L" + std::to_string(level); }

}  // namespace

const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids{"plate", "spline-hole", "split", "mixed", "crack", "cylinders"};
  return ids;
}

Mode parse_mode(const std::string& s) {
  if (s == "ibcm") return Mode::IBCM;
  if (s == "trimmed-single-patch" || s == "trimmed") return Mode::Trimmed;
  config_error("unknown mode '" + s + "' (ibcm | trimmed-single-patch)");
}

Theory parse_theory(const std::string& s) {
  if (s == "rm" || s == "RM") return Theory::RM;
  if (s == "kl" || s == "KL") return Theory::KL;
  config_error("unknown theory '" + s + "' (rm | kl)");
}

RunConfig parse_config(const std::string& text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config parse error: ") + e.what());
  }
  check_keys(j, {"case", "theory", "p", "levels", "first_level", "mode", "load", "diagnostic", "nitsche", "material",
                 "output"},
             "config");
  c.case_id = take(j, "case", c.case_id);
  if (j.contains("theory")) c.theory = parse_theory(take<std::string>(j, "theory", ""));
  c.p = take(j, "p", c.p);
  c.levels = take(j, "levels", c.levels);
  c.first_level = take(j, "first_level", c.first_level);
  if (j.contains("mode")) c.mode = parse_mode(take<std::string>(j, "mode", ""));
  c.load = take(j, "load", c.load);
  c.diagnostic = take(j, "diagnostic", c.diagnostic);
  if (j.contains("nitsche")) {
    const json& n = j["nitsche"];
    check_keys(n, {"beta", "gamma1", "gamma2"}, "nitsche");
    c.beta = take(n, "beta", c.beta);
    c.gamma1 = take(n, "gamma1", c.gamma1);
    c.gamma2 = take(n, "gamma2", c.gamma2);
  }
  if (j.contains("material")) {
    const json& m = j["material"];
    check_keys(m, {"tau"}, "material");
    c.tau = take(m, "tau", c.tau);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"dir", "samples", "vtk", "triplets"}, "output");
    c.out_dir = take(o, "dir", c.out_dir);
    c.samples = take(o, "samples", c.samples);
    c.vtk = take(o, "vtk", c.vtk);
    c.triplets = take(o, "triplets", c.triplets);
  }
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["case"] = c.case_id;
  j["theory"] = c.theory == Theory::RM ? "rm" : "kl";
  j["p"] = c.p;
  j["levels"] = c.levels;
  j["first_level"] = c.first_level;
  j["mode"] = c.mode == Mode::IBCM ? "ibcm" : "trimmed-single-patch";
  j["load"] = c.load;
  j["diagnostic"] = c.diagnostic;
  j["nitsche"] = {{"beta", c.beta}, {"gamma1", c.gamma1}, {"gamma2", c.gamma2}};
  j["material"] = {{"tau", c.tau}};
  j["output"] = {{"dir", c.out_dir}, {"samples", c.samples}, {"vtk", c.vtk}, {"triplets", c.triplets}};
  return j.dump(2) + "\n";
}

void validate_config(const RunConfig& c) {
  const auto& ids = case_ids();
  if (std::find(ids.begin(), ids.end(), c.case_id) == ids.end()) config_error("unknown case '" + c.case_id + "'");
  if (c.p < 1 || c.p > 6) config_error("degree p must lie in [1, 6]");
  const bool kl = c.theory == Theory::KL || c.case_id == "mixed";
  if (kl && c.p < 2) config_error("Kirchhoff-Love patches need C1 spaces, so p >= 2");
  if (c.levels < 1) config_error("levels must be positive");
  if (c.mode == Mode::Trimmed && c.case_id != "plate") config_error("the trimmed comparison exists for the plate only");
  if (c.case_id == "crack" && c.first_level == 0) config_error("the cracked cylinder needs level >= 1");
  if (c.samples < 2) config_error("samples must be at least 2");
  if (c.gamma2 < 0 || c.gamma2 > 1) config_error("gamma2 must lie in [0, 1]");
}

Case build_case(const RunConfig& c, int level) {
  CaseOptions o;
  o.theory = c.theory;
  o.p = c.p;
  o.level = level;
  o.tau = c.tau;
  o.beta = c.beta;
  o.gamma1 = c.gamma1;
  o.gamma2 = c.gamma2;
  o.mode = c.mode;
  const std::string& id = c.case_id;
  if (id == "plate") return plate_with_hole(o);
  if (id == "spline-hole") return spline_hole_plate(o, linear_field(c.theory));
  if (id == "split") return split_square(o, true, plate_exact_solution(c.theory));
  if (id == "mixed") return clamped_plate(o, true, c.load);
  if (id == "crack") return cracked_cylinder(o, 1.0);
  if (id == "cylinders") return intersecting_cylinders(o);
  config_error("unknown case '" + id + "'");
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidInput:
    case ErrorKind::Unsupported:
    case ErrorKind::InvalidMaterial:
    case ErrorKind::InvalidLoad:
      return kExitConfig;
    case ErrorKind::GeometryFailure:
    case ErrorKind::SegmentationFailure:
    case ErrorKind::RefineRequired:
    case ErrorKind::SingularGeometry:
    case ErrorKind::SingularCurve:
    case ErrorKind::InvalidOffset:
    case ErrorKind::CannotCoupleStrongly:
      return kExitGeometry;
    default:
      return kExitOther;
  }
}

RunSummary run(const RunConfig& c, std::ostream& log) {
  validate_config(c);
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);
  const fs::path dir(c.out_dir);
  RunSummary sum;
  auto open = [&](const std::string& name) {
    const std::string path = (dir / name).string();
    std::ofstream os(path);
    if (!os) fail(ErrorKind::InvalidInput, "cannot write " + path);
    sum.files.push_back(path);
    return os;
  };
  {
    auto os = open("config.json");
    os << config_to_json(c);
  }
  std::ofstream spd = open("spd_log.csv");
  write_spd_header(spd);
  std::ofstream extras = open("extras.csv");
  extras << "level,key,value\n";
  const int first = c.first_level >= 0 ? c.first_level : default_first_level(c.case_id);
  bool any_spd_failure = false, manufactured = false;

  for (int level = first; level < first + c.levels; ++level) {
    const Case cs = build_case(c, level);
    const Problem& pb = cs.problem;
    const bool symmetric = pb.nitsche.gamma1 == 1.0;
    const DofMap dofs(pb);
    const LinearSystem sys = assemble(pb, dofs);
    if (c.triplets) {
      const std::string path = (dir / ("K_" + level_tag(level) + ".txt")).string();
      write_triplets(sys.K, path);
      sum.files.push_back(path);
    }
    const SolveResult res = solve(pb, dofs, sys, symmetric);
    write_spd_line(spd, cs.name + "-" + level_tag(level), res.report);
    sum.spd.push_back(res.report);
    const bool ok = res.report.spd || (!symmetric && res.report.message.empty());
    log << cs.name << " level " << level << ": dofs " << res.report.n << ", " << (ok ? "solved" : "FAILED")
        << (symmetric ? (res.report.spd ? " (SPD)" : " (not SPD)") : "") << ", pivot ratio "
        << format_number(res.report.pivot_ratio) << ", residual " << format_number(res.report.residual);
    if (!res.report.message.empty()) log << ", " << res.report.message;
    log << "\n";
    if (!ok) any_spd_failure = true;

    ErrorReport er;
    er.level = level;
    er.h = cs.h;
    er.dofs = res.report.n;
    er.spd = res.report;
    er.spd.spd = ok;
    if (pb.exact) {
      manufactured = true;
      bool any_kl = false;
      for (const auto& p : pb.patches) any_kl = any_kl || p.theory == Theory::KL;
      if (ok) er.err = error_norms(pb, res.field, *pb.exact, any_kl);
      sum.study.levels.push_back(er);
    }
    if (!ok) continue;

    auto extra = [&](const std::string& key, double v) { extras << level << "," << key << "," << format_number(v) << "\n"; };
    for (const auto& itf : pb.interfaces) extra("jump:" + itf.name, interface_jump_norm(pb, res.field, itf));
    if (c.case_id == "crack") {
      extra("crack_opening", crack_opening(cs, res.field));
      const double a = cs.info.at("a");
      for (double ra : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        const std::string tag = "r/a=" + format_number(ra);
        extra("N11_ratio:" + tag, crack_tip_ratio(cs, res.field, ra * a));
        extra("folias:" + tag, folias_reference(ra * a, a, cs.info.at("R"), cs.info.at("tau"), cs.info.at("nu")));
      }
    }
    if (c.case_id == "cylinders") extra("coupled_edge_mismatch", coupled_edge_mismatch(cs, res.field));
    if (c.vtk)
      for (size_t ip = 0; ip < pb.patches.size(); ++ip) {
        const std::string path = (dir / (cs.name + "_" + level_tag(level) + "_P" + std::to_string(ip) + "_" +
                                         pb.patches[ip].name + ".vtk"))
                                     .string();
        write_patch_vtk(path, pb, res.field, static_cast<int>(ip), c.samples);
        sum.files.push_back(path);
      }
  }

  if (manufactured) {
    sum.study.fit(c.p);
    auto conv = open("convergence.csv");
    write_convergence_csv(conv, sum.study);
    auto rates = open("rates.csv");
    write_rates_csv(rates, sum.study);
    auto show = [](const std::optional<double>& r) { return r ? format_number(*r) : std::string("n/a"); };
    log << "fitted rates: L2 " << show(sum.study.rate_l2) << ", H1 " << show(sum.study.rate_h1) << ", H2 "
        << show(sum.study.rate_h2) << (sum.study.locking_flag ? " (locking flag raised)" : "") << "\n";
  }
  if (any_spd_failure && !c.diagnostic) sum.exit_code = kExitSPD;
  return sum;
}

}  // namespace ibcm

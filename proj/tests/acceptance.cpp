// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance [output-dir]
#include "ibcm/run.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace ibcm;
using namespace ibcm::test;

namespace {

std::string out_root = "acceptance_out";

std::string fmt(double v, const char* pattern = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::ostringstream notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes << "    " << (ok ? "ok   " : "FAIL ") << what << "\n";
  }
  void note(const std::string& what) { notes << "    info " << what << "\n"; }
};

CaseOptions opts(Theory t, int p, int level, double tau = -1) {
  CaseOptions o;
  o.theory = t;
  o.p = p;
  o.level = level;
  o.tau = tau;
  return o;
}

double active_area(int q) {
  const TrimmedDomain d = classify_elements(uniform_grid({0, 1, 0, 1}, 8, 8),
                                            Region{{0, 1, 0, 1}, {make_circle({0.5, 0.5}, 0.2, true)}}, q);
  double a = 0;
  for (const auto& cr : domain_quadrature(d, q + 1, q + 1))
    for (const auto& qp : cr.pts) a += qp.w;
  return a;
}

void criterion1(Verdict& v) {
  const double exact = 1.0 - kPi * 0.04;
  double prev = 1.0;
  bool monotone = true;
  for (int q = 1; q <= 5; ++q) {
    const double err = std::abs(active_area(q) - exact) / exact;
    v.note("q=" + std::to_string(q) + " relative area error " + fmt(err));
    // Below 1e-13 the error is roundoff and no longer ordered.
    if (prev > 1e-13 && err >= prev) monotone = false;
    if (q == 3) v.require(err <= 1e-8, "q=3 relative error " + fmt(err) + " <= 1e-8");
    prev = err;
  }
  v.require(monotone, "error decreases with q down to the roundoff floor");
}

void criterion2(Verdict& v) {
  for (Theory t : {Theory::RM, Theory::KL}) {
    const std::string th = to_string(t);
    const ExactSolution ex = linear_field(t);
    for (int level : {2, 3}) {
      const Case c = spline_hole_plate(opts(t, 3, level), ex);
      const SolveResult r = run_problem(c.problem);
      const double e = error_norms(c.problem, r.field, ex, false).l2 / solution_norms(c.problem, r.field, false).l2;
      v.require(r.report.spd && e <= 1e-11,
                th + " linear field, level " + std::to_string(level) + ": relative L2 error " + fmt(e) + " <= 1e-11");
    }
    const Case c = spline_hole_plate(opts(t, 3, 3), ex);
    const Problem pb = without_data(c.problem);
    const DofMap dofs(pb);
    const auto K = assemble(pb, dofs, kInterior | kNitsche).K;
    for (const auto& [name, mode] : plate_rigid_modes(t)) {
      const double en = relative_energy(pb, dofs, K, mode);
      v.require(en <= 1e-10, th + " rigid mode " + name + ": relative energy " + fmt(en) + " <= 1e-10");
    }
  }
}

// Relative L2 difference between the single-square and split-square fields.
// Both use identity plane maps, so parameters are physical coordinates.
double split_difference(const Case& single, const SolveResult& rs, const Case& split, const SolveResult& rt) {
  const JetField diff = [&](int patch, const Vec2& xi, const SurfaceFrame&, int order) {
    FieldJet a = rt.field.eval(split.problem, patch, xi, order);
    const FieldJet b = rs.field.eval(single.problem, 0, xi, order);
    for (size_t k = 0; k < a.u.size(); ++k) a.u[k] -= b.u[k];
    for (size_t k = 0; k < a.th.size(); ++k) a.th[k] -= b.th[k];
    return a;
  };
  return integrate_norms(split.problem, diff, false).l2 / solution_norms(single.problem, rs.field, false).l2;
}

void criterion3(Verdict& v) {
  // A field in both spline spaces isolates the coupling from discretization error.
  ExactSolution poly;
  poly.u = polynomial_field({{Vec3(0.1, 0.2, 0.3), 3, 2}, {Vec3(-0.1, 0.05, 0.2), 1, 3}, {Vec3(0.02, 0.01, -0.04), 2, 2}});
  for (Theory t : {Theory::RM, Theory::KL}) {
    ExactSolution ex = poly;
    if (t == Theory::RM) ex.theta = polynomial_field({{Vec3(0.1, -0.2, 0.0), 2, 3}});
    for (int level : {2, 3}) {
      const CaseOptions o = opts(t, 3, level);
      const Case a = split_square(o, false, ex), b = split_square(o, true, ex);
      const SolveResult ra = run_problem(a.problem), rb = run_problem(b.problem);
      const double d = split_difference(a, ra, b, rb);
      v.require(ra.report.spd && rb.report.spd && d < 1e-8, std::string(to_string(t)) + " level " +
                                                                std::to_string(level) + ": split vs single " + fmt(d) +
                                                                " < 1e-8");
    }
    // The sine changes at the level of the discretization error; reported only.
    const ExactSolution sx = plate_exact_solution(t);
    const Case a = split_square(opts(t, 3, 3), false, sx), b = split_square(opts(t, 3, 3), true, sx);
    const SolveResult ra = run_problem(a.problem), rb = run_problem(b.problem);
    v.note(std::string(to_string(t)) + " sine field, level 3: split vs single " +
           fmt(split_difference(a, ra, b, rb)) +
           ", single-patch error " +
           fmt(error_norms(a.problem, ra.field, sx, false).l2 / solution_norms(a.problem, ra.field, false).l2));
  }
}

struct Study {
  std::string label;
  RunSummary summary;
};

Study plate_study(Theory t, int p, double tau, Mode mode) {
  RunConfig c;
  c.case_id = "plate";
  c.theory = t;
  c.p = p;
  c.tau = tau;
  c.mode = mode;
  c.levels = 4;
  c.first_level = 2;
  c.vtk = false;
  c.diagnostic = true;
  Study s;
  s.label = std::string(to_string(t)) + " p=" + std::to_string(p) + " tau=" + fmt(tau * 1000, "%g") + "mm" +
            (mode == Mode::Trimmed ? " trimmed" : "");
  c.out_dir = out_root + "/plate_" + to_string(t) + "_p" + std::to_string(p) + "_tau" + fmt(tau, "%g") +
              (mode == Mode::Trimmed ? "_trimmed" : "");
  std::ostringstream log;
  s.summary = run(c, log);
  return s;
}

std::string rate_text(const std::optional<double>& r) { return r ? fmt(*r, "%.2f") : std::string("n/a"); }

std::vector<Study> ibcm_studies;

void criterion4(Verdict& v) {
  for (int p : {2, 3})
    for (double tau : {0.1, 0.01}) {
      Study s = plate_study(Theory::RM, p, tau, Mode::IBCM);
      const auto& st = s.summary.study;
      v.require(st.rate_l2 && *st.rate_l2 >= p + 0.6,
                s.label + ": L2 rate " + rate_text(st.rate_l2) + " >= " + fmt(p + 0.6, "%.1f"));
      v.require(st.rate_h1 && *st.rate_h1 >= p - 0.4,
                s.label + ": H1 rate " + rate_text(st.rate_h1) + " >= " + fmt(p - 0.4, "%.1f"));
      ibcm_studies.push_back(std::move(s));
    }
  Study lock = plate_study(Theory::RM, 1, 0.001, Mode::IBCM);
  const auto& st = lock.summary.study;
  v.require(st.locking_flag, lock.label + ": locking flag raised (L2 rate " + rate_text(st.rate_l2) + ", H1 rate " +
                                 rate_text(st.rate_h1) + ", no rate asserted)");
  ibcm_studies.push_back(std::move(lock));
}

void criterion5(Verdict& v) {
  Study s = plate_study(Theory::KL, 3, 0.01, Mode::IBCM);
  const auto& st = s.summary.study;
  v.require(st.rate_l2 && *st.rate_l2 >= 3.6, s.label + ": L2 rate " + rate_text(st.rate_l2) + " >= 3.6");
  v.require(st.rate_h1 && *st.rate_h1 >= 2.6, s.label + ": H1 rate " + rate_text(st.rate_h1) + " >= 2.6");
  v.require(st.rate_h2 && *st.rate_h2 >= 1.6, s.label + ": H2 rate " + rate_text(st.rate_h2) + " >= 1.6");
  ibcm_studies.push_back(std::move(s));
}

void criterion6(Verdict& v) {
  int ibcm_runs = 0, ibcm_fail = 0;
  for (const auto& s : ibcm_studies)
    for (const auto& r : s.summary.spd) {
      ++ibcm_runs;
      if (!r.spd) {
        ++ibcm_fail;
        v.note("IBCM failure: " + s.label + ": " + r.message);
      }
    }
  v.require(ibcm_runs > 0 && ibcm_fail == 0,
            "IBCM configurations passing Cholesky: " + std::to_string(ibcm_runs - ibcm_fail) + "/" +
                std::to_string(ibcm_runs));
  int flagged = 0;
  const std::vector<std::pair<Theory, int>> trimmed{{Theory::RM, 2}, {Theory::RM, 3}, {Theory::RM, 4}, {Theory::KL, 3}};
  for (const auto& [t, p] : trimmed) {
    const Study s = plate_study(t, p, 0.01, Mode::Trimmed);
    for (size_t k = 0; k < s.summary.spd.size(); ++k) {
      const SPDReport& r = s.summary.spd[k];
      const bool ill = r.spd && r.pivot_ratio > 1e14;
      if (!r.spd || ill) {
        ++flagged;
        v.note(s.label + " level " + std::to_string(2 + k) + ": " +
               (r.spd ? "pivot ratio " + fmt(r.pivot_ratio) : "not SPD (" + r.message + ")"));
      }
    }
  }
  v.require(flagged > 0, "trimmed single-patch levels failing or severely ill-conditioned: " + std::to_string(flagged));
}

void criterion7(Verdict& v) {
  const int level = 5;
  CaseOptions o = opts(Theory::KL, 3, level, 0.001);
  const Case m = clamped_plate(o, true, 1000.0), k = clamped_plate(o, false, 1000.0);
  const SolveResult rm = run_problem(m.problem), rk = run_problem(k.problem);
  const double d = difference_norms(m.problem, rm.field, k.problem, rk.field, false).l2 /
                   solution_norms(k.problem, rk.field, false).l2;
  v.require(rm.report.spd && rk.report.spd, "mixed and pure KL systems SPD at level " + std::to_string(level));
  v.require(d < 0.01, "tau=1mm level " + std::to_string(level) + ": mixed vs pure KL relative L2 difference " +
                          fmt(d) + " < 0.01");
}

void criterion8(Verdict& v) {
  struct Run {
    Theory t;
    int p, level;
    bool asserted;
  };
  for (const Run& run_spec : {Run{Theory::KL, 2, 4, true}, Run{Theory::RM, 2, 3, false}}) {
    const Case c = cracked_cylinder(opts(run_spec.t, run_spec.p, run_spec.level));
    const SolveResult r = run_problem(c.problem);
    const std::string tag = std::string(to_string(run_spec.t)) + " p=" + std::to_string(run_spec.p) + " level " +
                            std::to_string(run_spec.level);
    const double a = c.info.at("a"), R = c.info.at("R"), tau = c.info.at("tau"), nu = c.info.at("nu");
    const double opening = crack_opening(c, r.field);
    double worst = 0;
    std::string row;
    for (double ra : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
      const double num = crack_tip_ratio(c, r.field, ra * a), ref = folias_reference(ra * a, a, R, tau, nu);
      worst = std::max(worst, std::abs(num - ref) / ref);
      row += " " + fmt(ra, "%.1f") + ":" + fmt(num, "%.1f") + "/" + fmt(ref, "%.1f");
    }
    if (run_spec.asserted) {
      v.require(r.report.spd && opening > 0, tag + ": SPD, crack opening " + fmt(opening) + " > 0");
      v.require(worst <= 0.10, tag + ": worst deviation from the Folias expression over r/a in [0.3, 1] " +
                                   fmt(100 * worst, "%.1f") + "% <= 10%");
    } else {
      v.note(tag + " cross-check: opening " + fmt(opening) + ", worst deviation " + fmt(100 * worst, "%.1f") + "%");
    }
    v.note(tag + " r/a:computed/reference" + row);
  }
  v.note("lambda = " + fmt(folias_lambda(5, 20, 1, 1.0 / 3.0)) + "; see README for the analysis of this deviation");
}

void criterion9(Verdict& v) {
  for (Theory t : {Theory::RM, Theory::KL}) {
    const Case c = intersecting_cylinders(opts(t, 2, 1));
    const DofMap dofs(c.problem);
    const SolveResult r = solve(c.problem, dofs, assemble(c.problem, dofs), true);
    const double mismatch = coupled_edge_mismatch(c, r.field);
    const std::string th = to_string(t);
    v.require(c.info.at("locus_residual") < 1e-10, th + ": intersection locus residual " +
                                                       fmt(c.info.at("locus_residual")) + " < 1e-10");
    v.require(dofs.num_shared() > 0, th + ": shared DOF classes " + std::to_string(dofs.num_shared()));
    v.require(r.report.spd, th + ": Cholesky passes (pivot ratio " + fmt(r.report.pivot_ratio) + ")");
    v.require(mismatch < 1e-10, th + ": relative displacement mismatch across the junction " + fmt(mismatch) +
                                    " < 1e-10");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) out_root = argv[1];
  std::filesystem::create_directories(out_root);
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"trimmed-plate area quadrature", criterion1},
      {"patch tests and rigid motions", criterion2},
      {"conformal Nitsche split", criterion3},
      {"RM plate convergence", criterion4},
      {"KL plate convergence", criterion5},
      {"SPD gate: IBCM vs trimmed single patch", criterion6},
      {"mixed KL-RM plate vs pure KL", criterion7},
      {"cracked cylinder vs Folias", criterion8},
      {"intersecting cylinders", criterion9},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::cout << "criterion " << i + 1 << ": " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
              << fmt(secs, "%.1f") << " s)\n"
              << v.notes.str() << std::flush;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}

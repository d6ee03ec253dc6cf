#include "ibcm/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace ibcm {

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

struct PointSample {
  Vec3 x = Vec3::Zero(), u = Vec3::Zero();
  double n11 = 0, m11 = 0, g1 = 0;
  bool active = false;
};

PointSample sample_point(const Problem& pb, const FieldSolution& sol, int ip, const Vec2& eta) {
  const Patch& p = pb.patches[ip];
  const SurfaceFrame f = patch_frame(p, eta, 2);
  PointSample s;
  s.x = f.x;
  s.active = p.inside(eta);
  // Points outside the active region carry zeros.
  if (!s.active) return s;
  const bool rm = p.theory == Theory::RM;
  const FieldJet j = sol.eval(pb, ip, eta, rm ? 1 : 2);
  const Strain e = rm ? rm_strains(j, f) : kl_strains(j, f);
  const Stress st = generalized_stress(e, to_covariant(laminate_abds(pb.laminate), f), p.theory);
  s.u = j.u[0];
  s.n11 = st.N[0];
  s.m11 = st.M[0];
  s.g1 = e.g[0];
  return s;
}

}  // namespace

void write_patch_vtk(std::ostream& os, const Problem& pb, const FieldSolution& u, int patch, int n) {
  if (patch < 0 || patch >= static_cast<int>(pb.patches.size())) fail(ErrorKind::InvalidInput, "patch index out of range");
  if (n < 2) fail(ErrorKind::InvalidInput, "a structured grid needs at least two samples per direction");
  const Patch& p = pb.patches[patch];
  const auto r = p.rect();
  std::vector<PointSample> pts;
  pts.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 eta(r[0] + (r[1] - r[0]) * i / (n - 1), r[2] + (r[3] - r[2]) * j / (n - 1));
      pts.push_back(sample_point(pb, u, patch, eta));
    }
  const bool rm = p.theory == Theory::RM;
  os << "# vtk DataFile Version 3.0\n" << p.name << " " << to_string(p.theory) << "\nASCII\nDATASET STRUCTURED_GRID\n";
  os << "DIMENSIONS " << n << " " << n << " 1\nPOINTS " << pts.size() << " double\n";
  for (const auto& s : pts)
    os << format_number(s.x[0]) << " " << format_number(s.x[1]) << " " << format_number(s.x[2]) << "\n";
  os << "POINT_DATA " << pts.size() << "\nSCALARS active int 1\nLOOKUP_TABLE default\n";
  for (const auto& s : pts) os << (s.active ? 1 : 0) << "\n";
  os << "VECTORS u double\n";
  for (const auto& s : pts)
    os << format_number(s.u[0]) << " " << format_number(s.u[1]) << " " << format_number(s.u[2]) << "\n";
  auto scalar = [&](const char* name, auto get) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& s : pts) os << format_number(get(s)) << "\n";
  };
  scalar("N11", [](const PointSample& s) { return s.n11; });
  scalar("M11", [](const PointSample& s) { return s.m11; });
  if (rm) scalar("gamma1", [](const PointSample& s) { return s.g1; });
}

void write_patch_vtk(const std::string& path, const Problem& pb, const FieldSolution& u, int patch, int n) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::InvalidInput, "cannot open " + path);
  write_patch_vtk(os, pb, u, patch, n);
}

void write_convergence_csv(std::ostream& os, const ConvergenceStudy& st) {
  os << "level,h,dofs,l2,h1,h2,rate_l2,rate_h1,rate_h2,spd\n";
  const ErrorReport* prev = nullptr;
  for (const auto& r : st.levels) {
    auto rate = [&](double a, double b) -> std::string {
      if (!prev || !r.spd.spd || !(a > 0) || !(b > 0)) return "";
      return format_number(std::log(b / a) / std::log(r.h / prev->h));
    };
    os << r.level << "," << format_number(r.h) << "," << r.dofs << "," << format_number(r.err.l2) << ","
       << format_number(r.err.h1) << "," << (r.err.has_h2 ? format_number(r.err.h2) : "") << ",";
    os << (prev ? rate(prev->err.l2, r.err.l2) : "") << "," << (prev ? rate(prev->err.h1, r.err.h1) : "") << ","
       << (prev && r.err.has_h2 ? rate(prev->err.h2, r.err.h2) : "") << "," << (r.spd.spd ? 1 : 0) << "\n";
    if (r.spd.spd) prev = &r;
  }
}

void write_rates_csv(std::ostream& os, const ConvergenceStudy& st) {
  auto v = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
  os << "norm,rate\nl2," << v(st.rate_l2) << "\nh1," << v(st.rate_h1) << "\nh2," << v(st.rate_h2)
     << "\nlocking_flag," << (st.locking_flag ? 1 : 0) << "\n";
}

void write_spd_header(std::ostream& os) { os << "label,n,spd,symmetric,pivot_ratio,residual,message\n"; }

void write_spd_line(std::ostream& os, const std::string& label, const SPDReport& r) {
  std::string msg = r.message;
  for (char& c : msg)
    if (c == ',' || c == '\n') c = ';';
  os << label << "," << r.n << "," << (r.spd ? 1 : 0) << "," << (r.symmetric ? 1 : 0) << ","
     << format_number(r.pivot_ratio) << "," << format_number(r.residual) << "," << msg << "\n";
}

}  // namespace ibcm

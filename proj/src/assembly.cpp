#include "ibcm/assembly.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace ibcm {

// ---------------------------------------------------------------- edges

std::vector<int> edge_functions(const Patch& p, Side side) {
  const auto& sp = p.space;
  const int n0 = sp.n(0), n1 = sp.n(1);
  const bool along_v = side == Side::ULo || side == Side::UHi;
  if (sp.dir(along_v ? 0 : 1).is_periodic())
    fail(ErrorKind::InvalidInput, "patch " + p.name + " has no edge across a periodic direction");
  std::vector<int> f;
  if (along_v) {
    const int i = side == Side::ULo ? 0 : n0 - 1;
    for (int j = 0; j < n1; ++j) f.push_back(sp.index(i, j));
  } else {
    const int j = side == Side::VLo ? 0 : n1 - 1;
    for (int i = 0; i < n0; ++i) f.push_back(sp.index(i, j));
  }
  return f;
}

const KnotVector& edge_knots(const Patch& p, Side side) {
  return p.space.dir(side == Side::ULo || side == Side::UHi ? 1 : 0);
}

Vec2 edge_point(const Patch& p, Side side, double t) {
  const auto r = p.rect();
  switch (side) {
    case Side::ULo: return {r[0], t};
    case Side::UHi: return {r[1], t};
    case Side::VLo: return {t, r[2]};
    case Side::VHi: return {t, r[3]};
  }
  return {t, r[2]};
}

std::vector<std::pair<int, int>> match_edge_functions(const Problem& pb, const StrongCoupling& c) {
  const Patch& pa = pb.patches[c.patch_a];
  const Patch& pbb = pb.patches[c.patch_b];
  const KnotVector& ka = edge_knots(pa, c.side_a);
  const KnotVector& kb = edge_knots(pbb, c.side_b);
  const auto fa = edge_functions(pa, c.side_a);
  const auto fb = edge_functions(pbb, c.side_b);
  if (fa.size() != fb.size()) fail(ErrorKind::CannotCoupleStrongly, "edge spaces have different dimensions");
  const int na = static_cast<int>(fa.size());
  // Trace samples: p+2 points in every element of edge a.
  std::vector<double> ta;
  const auto& br = ka.breaks();
  for (size_t e = 0; e + 1 < br.size(); ++e)
    for (int k = 0; k < ka.degree() + 2; ++k) ta.push_back(br[e] + (br[e + 1] - br[e]) * (k + 0.5) / (ka.degree() + 2));
  const int m = static_cast<int>(ta.size());
  Eigen::MatrixXd va = Eigen::MatrixXd::Zero(m, na), vb = Eigen::MatrixXd::Zero(m, na);
  double scale = 0;
  for (int q = 0; q < m; ++q) {
    const double tb = c.map(ta[q]);
    const Vec3 xa = pa.map->eval(edge_point(pa, c.side_a, ta[q]), 0).v;
    const Vec3 xb = pbb.map->eval(edge_point(pbb, c.side_b, kb.is_periodic() ? tb : std::clamp(tb, kb.lower(), kb.upper())), 0).v;
    scale = std::max(scale, xa.norm());
    if ((xa - xb).norm() > 1e-8 * std::max(1.0, scale))
      fail(ErrorKind::CannotCoupleStrongly, "edges do not coincide in space");
    const BasisValues ba = ka.eval(ta[q], 0);
    for (int j = 0; j <= ba.p; ++j) va(q, ka.wrap(ba.first + j)) += ba.d[0][j];
    double tbw = tb;
    if (kb.is_periodic()) {
      const double len = kb.upper() - kb.lower();
      tbw = kb.lower() + std::fmod(std::fmod(tb - kb.lower(), len) + len, len);
    }
    const BasisValues bb = kb.eval(tbw, 0);
    for (int j = 0; j <= bb.p; ++j) vb(q, kb.wrap(bb.first + j)) += bb.d[0][j];
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<char> used(na, 0);
  for (int i = 0; i < na; ++i) {
    int hit = -1;
    for (int j = 0; j < na; ++j) {
      if ((va.col(i) - vb.col(j)).lpNorm<Eigen::Infinity>() < 1e-9) {
        if (hit >= 0) fail(ErrorKind::CannotCoupleStrongly, "edge functions match ambiguously");
        hit = j;
      }
    }
    if (hit < 0 || used[hit]) fail(ErrorKind::CannotCoupleStrongly, "edge functions do not match one to one");
    used[hit] = 1;
    pairs.emplace_back(fa[i], fb[hit]);
  }
  return pairs;
}

// ---------------------------------------------------------------- DofMap

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Smaller index becomes the root, which keeps the numbering deterministic.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

std::vector<char> active_functions(const Patch& p) {
  std::vector<char> act(p.nfun(), p.trim ? 0 : 1);
  if (!p.trim) return act;
  const auto& dom = *p.trim;
  for (int c = 0; c < dom.grid.num_cells(); ++c) {
    if (dom.kind[c] == CellKind::Empty) continue;
    const auto b = dom.grid.box(c);
    const auto sp = p.cell_spans(c);
    const auto s = p.space.eval(Vec2(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3])), 0, sp[0], sp[1]);
    for (int f : s.fun) act[f] = 1;
  }
  return act;
}

}  // namespace

DofMap::DofMap(const Problem& pb) {
  int total = 0;
  for (const auto& p : pb.patches) {
    offset_.push_back(total);
    total += p.num_dofs();
  }
  state_.assign(total, kFree);
  value_.assign(total, 0.0);
  std::vector<char> has_value(total, 0);
  for (size_t ip = 0; ip < pb.patches.size(); ++ip) {
    const Patch& p = pb.patches[ip];
    const auto act = active_functions(p);
    for (int f = 0; f < p.nfun(); ++f)
      if (!act[f])
        for (int c = 0; c < p.ncomp(); ++c) state_[offset_[ip] + p.dof(c, f)] = kInactive;
  }
  auto fix = [&](int r, double v) {
    if (has_value[r] && std::abs(value_[r] - v) > 1e-10 * std::max(1.0, std::abs(v)))
      fail(ErrorKind::InvalidInput, "conflicting strong Dirichlet values");
    value_[r] = v;
    has_value[r] = 1;
  };
  for (const auto& d : pb.dirichlet) {
    const Patch& p = pb.patches[d.patch];
    const auto funs = edge_functions(p, d.side);
    const KnotVector& kv = edge_knots(p, d.side);
    for (int c : d.comps) {
      if (c < 0 || c >= p.ncomp()) fail(ErrorKind::InvalidInput, "Dirichlet component out of range");
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<int>(funs.size()));
      if (d.value) {
        const Side side = d.side;
        coef = l2_project(
            kv, [&](double t) { return d.value(c, edge_point(p, side, t)); }, kv.degree() + 3);
      }
      for (size_t i = 0; i < funs.size(); ++i) fix(offset_[d.patch] + p.dof(c, funs[i]), coef[i]);
    }
  }
  for (const auto& pin : pb.pins) fix(offset_[pin.patch] + pb.patches[pin.patch].dof(pin.comp, pin.fun), pin.value);

  UnionFind uf(total);
  for (const auto& cpl : pb.couplings) {
    const auto pairs = match_edge_functions(pb, cpl);
    const Patch& pa = pb.patches[cpl.patch_a];
    const Patch& pbb = pb.patches[cpl.patch_b];
    for (const auto& [fa, fb] : pairs)
      for (int c : cpl.comps) uf.unite(offset_[cpl.patch_a] + pa.dof(c, fa), offset_[cpl.patch_b] + pbb.dof(c, fb));
  }
  // Class state: fixed if any member is fixed, inactive only if all are.
  std::vector<int> members(total, 0);
  std::vector<char> cls_active(total, 0), cls_fixed(total, 0);
  std::vector<double> cls_value(total, 0.0);
  for (int r = 0; r < total; ++r) {
    const int root = uf.find(r);
    ++members[root];
    if (state_[r] != kInactive) cls_active[root] = 1;
    if (has_value[r]) {
      if (cls_fixed[root] && std::abs(cls_value[root] - value_[r]) > 1e-10 * std::max(1.0, std::abs(value_[r])))
        fail(ErrorKind::InvalidInput, "coupled DOFs carry different Dirichlet values");
      cls_fixed[root] = 1;
      cls_value[root] = value_[r];
    }
  }
  index_.assign(total, -1);
  std::vector<int> root_index(total, -1);
  for (int r = 0; r < total; ++r) {
    const int root = uf.find(r);
    if (!cls_active[root]) {
      state_[r] = kInactive;
      value_[r] = 0.0;
      continue;
    }
    if (cls_fixed[root]) {
      state_[r] = kFixed;
      value_[r] = cls_value[root];
      continue;
    }
    state_[r] = kFree;
    if (root_index[root] < 0) root_index[root] = nfree_++;
    index_[r] = root_index[root];
  }
  for (int r = 0; r < total; ++r)
    if (uf.find(r) == r && members[r] > 1) ++shared_;
}

int DofMap::num_fixed() const { return static_cast<int>(std::count(state_.begin(), state_.end(), kFixed)); }

Penalty nitsche_penalty(const Laminate& lam, double beta, double h) {
  const double E = lam.max_modulus(), t = lam.thickness();
  return {beta * E * t / h, beta * E * t * t * t / h};
}

// ---------------------------------------------------------------- assembly helpers

namespace {

// Contributions of one block of elements or segments.
struct Scatter {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::pair<int, double>> rhs;
};

// Local DOF columns of a sample: column c*nb + k is component c of basis k.
struct LocalCols {
  std::vector<int> global;
  std::vector<double> fixed;  // value for fixed entries
  std::vector<char> state;    // 0 free, 1 fixed, 2 dropped

  void append(const Problem& pb, const DofMap& dm, int patch, const std::vector<int>& fun) {
    const Patch& p = pb.patches[patch];
    for (int c = 0; c < p.ncomp(); ++c)
      for (int f : fun) {
        const int d = p.dof(c, f);
        global.push_back(dm.global(patch, d));
        if (dm.is_fixed(patch, d)) {
          state.push_back(1);
          fixed.push_back(dm.fixed_value(patch, d));
        } else {
          state.push_back(dm.is_inactive(patch, d) ? 2 : 0);
          fixed.push_back(0.0);
        }
      }
  }
  int size() const { return static_cast<int>(global.size()); }
};

void scatter(const LocalCols& lc, const Eigen::MatrixXd* Ke, const Eigen::VectorXd* be, Scatter& out) {
  const int n = lc.size();
  for (int i = 0; i < n; ++i) {
    if (lc.state[i] != 0) continue;
    const int gi = lc.global[i];
    double r = be ? (*be)[i] : 0.0;
    if (Ke)
      for (int j = 0; j < n; ++j) {
        const double v = (*Ke)(i, j);
        if (v == 0.0) continue;
        if (lc.state[j] == 0)
          out.trip.emplace_back(gi, lc.global[j], v);
        else if (lc.state[j] == 1)
          r -= v * lc.fixed[j];
      }
    if (r != 0.0) out.rhs.emplace_back(gi, r);
  }
}

// Runs f(block, scatter) over nblocks with worker_threads() threads.
template <class F>
std::vector<Scatter> run_blocks(int nblocks, F&& f) {
  std::vector<Scatter> out(nblocks);
  const int nt = std::max(1, std::min(worker_threads(), nblocks));
  if (nt == 1) {
    for (int b = 0; b < nblocks; ++b) f(b, out[b]);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int b = next++;
        if (b >= nblocks) return;
        try {
          f(b, out[b]);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
          next = nblocks;
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

Eigen::MatrixXd constitutive(const CovariantStiffness& C, Theory t) {
  const int n = t == Theory::RM ? 8 : 6;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  D.block<3, 3>(0, 0) = C.A;
  D.block<3, 3>(0, 3) = C.B;
  D.block<3, 3>(3, 0) = C.B;
  D.block<3, 3>(3, 3) = C.D;
  if (t == Theory::RM) D.block<2, 2>(6, 6) = C.S;
  return D;
}

Eigen::VectorXd strain_vector(const Strain& e, Theory t) {
  Eigen::VectorXd v(t == Theory::RM ? 8 : 6);
  v.segment<3>(0) = e.e;
  v.segment<3>(3) = e.k;
  if (t == Theory::RM) v.segment<2>(6) = e.g;
  return v;
}

Strain strains(const FieldJet& f, const SurfaceFrame& s, Theory t) {
  return t == Theory::RM ? rm_strains(f, s) : kl_strains(f, s);
}

// Strain-row matrix of a sample: column c*nb + k.
Eigen::MatrixXd strain_rows(const Patch& p, const TensorSplineSpace::Sample& smp, const SurfaceFrame& f) {
  const int nb = static_cast<int>(smp.fun.size());
  const int nc = p.ncomp();
  Eigen::MatrixXd B(p.theory == Theory::RM ? 8 : 6, nc * nb);
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < nb; ++k) B.col(c * nb + k) = strain_vector(strains(unit_field(smp, k, c), f, p.theory), p.theory);
  return B;
}

std::vector<CellRule> patch_rules(const Patch& p, int npts) {
  if (p.trim) return domain_quadrature(*p.trim, npts, npts);
  std::vector<CellRule> out;
  const auto& bu = p.space.dir(0).breaks();
  const auto& bv = p.space.dir(1).breaks();
  const int nu = static_cast<int>(bu.size()) - 1, nv = static_cast<int>(bv.size()) - 1;
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) out.push_back({i + nu * j, cell_quadrature({bu[i], bu[i + 1], bv[j], bv[j + 1]}, npts)});
  return out;
}

constexpr int kCellsPerBlock = 16;

// Interior stiffness, surface loads, point loads and the manufactured interior term.
void assemble_patch(const Problem& pb, const DofMap& dm, int ip, const GeneralizedStiffness& gs, unsigned parts,
                    std::vector<Scatter>& all) {
  const Patch& p = pb.patches[ip];
  const int pdeg = p.degree();
  const int nint = pb.quadrature.interior > 0 ? pb.quadrature.interior : pdeg + 1;
  const int nrhs = pb.quadrature.rhs > 0 ? pb.quadrature.rhs : pdeg + 3;
  const int border = p.theory == Theory::RM ? 1 : 2;
  const bool do_k = parts & kInterior;
  const bool do_ext = parts & kExternal;
  bool has_surface_load = false;
  for (const auto& l : pb.surface_loads) has_surface_load |= (l.patch < 0 || l.patch == ip);
  const bool do_ex = do_ext && pb.exact.has_value();

  const auto rules = patch_rules(p, nint);
  const auto rules_rhs = do_ex ? patch_rules(p, nrhs) : std::vector<CellRule>{};
  const int nblocks = (static_cast<int>(rules.size()) + kCellsPerBlock - 1) / kCellsPerBlock;
  auto blocks = run_blocks(nblocks, [&](int b, Scatter& out) {
    const int c0 = b * kCellsPerBlock, c1 = std::min<int>(c0 + kCellsPerBlock, rules.size());
    for (int ci = c0; ci < c1; ++ci) {
      const CellRule& cr = rules[ci];
      if (cr.pts.empty()) continue;
      const auto sp = p.cell_spans(cr.cell);
      const auto s0 = p.space.eval(cr.pts[0].x, border, sp[0], sp[1]);
      LocalCols lc;
      lc.append(pb, dm, ip, s0.fun);
      const int n = lc.size();
      Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd be = Eigen::VectorXd::Zero(n);
      const int nb = static_cast<int>(s0.fun.size());
      for (const auto& q : cr.pts) {
        const auto smp = p.space.eval(q.x, border, sp[0], sp[1]);
        const SurfaceFrame f = patch_frame(p, q.x, 2);
        const double w = q.w * f.sqrt_a;
        if (do_k) {
          const CovariantStiffness C = to_covariant(gs, f);
          const Eigen::MatrixXd B = strain_rows(p, smp, f);
          Ke.noalias() += (B.transpose() * (w * constitutive(C, p.theory))) * B;
        }
        if (do_ext && has_surface_load) {
          for (const auto& l : pb.surface_loads) {
            if (l.patch >= 0 && l.patch != ip) continue;
            const Vec3 fv = l.force ? l.force(f.x, f) : Vec3::Zero();
            const Vec3 mv = l.moment ? l.moment(f.x, f) : Vec3::Zero();
            if (l.moment && std::abs(mv.dot(f.a3)) > 1e-10 * std::max(1.0, mv.norm()))
              fail(ErrorKind::InvalidLoad, "moment load has a normal component");
            for (int k = 0; k < nb; ++k) {
              const double N = smp.d(0, k);
              for (int c = 0; c < 3; ++c) be[c * nb + k] += w * N * fv[c];
              if (p.theory == Theory::RM) {
                for (int a = 0; a < 2; ++a) be[(3 + a) * nb + k] += w * N * f.acon[a].dot(mv);
              } else {
                // theta_alpha = -a_3 . u_{,alpha}
                const Vec3 grad = smp.d(1, k) * f.acon[0] + smp.d(2, k) * f.acon[1];
                const double g = grad.dot(mv);
                for (int c = 0; c < 3; ++c) be[c * nb + k] -= w * g * f.a3[c];
              }
            }
          }
        }
      }
      if (do_ex) {
        const int order = p.theory == Theory::RM ? 1 : 2;
        if (rules_rhs[ci].cell != cr.cell) fail(ErrorKind::AssemblyFailure, "quadrature rules disagree on cell order");
        for (const auto& q : rules_rhs[ci].pts) {
          const auto smp = p.space.eval(q.x, border, sp[0], sp[1]);
          const SurfaceFrame f = patch_frame(p, q.x, 2);
          const CovariantStiffness C = to_covariant(gs, f);
          const FieldJet ex = exact_field(p, *pb.exact, q.x, f, order);
          const Eigen::VectorXd sig = constitutive(C, p.theory) * strain_vector(strains(ex, f, p.theory), p.theory);
          be.noalias() += (q.w * f.sqrt_a) * (strain_rows(p, smp, f).transpose() * sig);
        }
      }
      if (!Ke.allFinite() || !be.allFinite())
        fail(ErrorKind::AssemblyFailure, "non-finite entries in patch " + p.name + " element " + std::to_string(cr.cell));
      scatter(lc, do_k ? &Ke : nullptr, &be, out);
    }
  });
  for (auto& b : blocks) all.push_back(std::move(b));

  if (do_ext) {
    Scatter out;
    for (const auto& pl : pb.point_loads) {
      if (pl.patch != ip) continue;
      const auto smp = p.space.eval(pl.eta, 0);
      LocalCols lc;
      lc.append(pb, dm, ip, smp.fun);
      const int nb = static_cast<int>(smp.fun.size());
      Eigen::VectorXd be = Eigen::VectorXd::Zero(lc.size());
      for (int k = 0; k < nb; ++k)
        for (int c = 0; c < 3; ++c) be[c * nb + k] = smp.d(0, k) * pl.force[c];
      scatter(lc, nullptr, &be, out);
    }
    all.push_back(std::move(out));
  }
}

// Rows of one interface side at one point. Columns follow LocalCols order.
struct SideRows {
  int ncols = 0;
  Eigen::MatrixXd U, TH, FU, FTH;
  Eigen::RowVectorXd THN, FTHN;
  // Exact-field values in the same layout (manufactured mode).
  Vec3 exU = Vec3::Zero(), exTH = Vec3::Zero(), exFU = Vec3::Zero(), exFTH = Vec3::Zero();
  double exTHN = 0, exFTHN = 0;
  Vec3 x = Vec3::Zero(), n = Vec3::Zero();
  double jac = 0;
  std::vector<int> fun;
  SurfaceFrame frame;
  CurveFrame cf;
};

struct FluxOut {
  Vec3 fu = Vec3::Zero(), fth = Vec3::Zero();
  double fthn = 0;
};

FluxOut side_flux(const Patch& p, const FieldJet& fj, const SurfaceFrame& f, const CurveFrame& cf,
                  const CovariantStiffness& C, const std::array<CovariantStiffness, 2>* dC) {
  FluxOut o;
  if (p.theory == Theory::RM) {
    const RMFlux fl = rm_flux(generalized_stress(rm_strains(fj, f), C, Theory::RM), f, cf);
    o.fu = fl.Nn;
    o.fth = fl.Mn;
    o.fthn = fl.Mnn;
  } else {
    const KLFlux fl = kl_flux(fj, f, cf, C, *dC);
    o.fu = fl.Tn;
    o.fthn = fl.Mnn;
  }
  return o;
}

Vec3 side_rotation(const Patch& p, const FieldJet& fj, const SurfaceFrame& f) {
  if (p.theory == Theory::RM) return rotation_vector(fj.th[0], f);
  return rotation_vector(kl_rotation(fj, f), f);
}

SideRows side_rows(const Problem& pb, const Patch& p, const ParamCurve& curve, double s, const std::array<int, 2>& sp,
                   bool left, bool need_flux, const GeneralizedStiffness& gs) {
  SideRows r;
  const CurveJet cj = curve.eval(s);
  const bool kl = p.theory == Theory::KL;
  const int forder = (kl && need_flux) ? 3 : 2;
  const int border = kl ? (need_flux ? 3 : 1) : 1;
  r.frame = patch_frame(p, cj.p, forder);
  r.cf = curve_frame(r.frame, cj.d1, cj.d2, left);
  r.x = r.frame.x;
  r.n = r.cf.n;
  r.jac = r.cf.jac;
  const auto smp = p.space.eval(cj.p, border, sp[0], sp[1]);
  r.fun = smp.fun;
  const int nb = static_cast<int>(smp.fun.size());
  const int nc = p.ncomp();
  r.ncols = nb * nc;
  r.U = Eigen::MatrixXd::Zero(3, r.ncols);
  r.TH = Eigen::MatrixXd::Zero(3, r.ncols);
  r.THN = Eigen::RowVectorXd::Zero(r.ncols);
  r.FU = Eigen::MatrixXd::Zero(3, r.ncols);
  r.FTH = Eigen::MatrixXd::Zero(3, r.ncols);
  r.FTHN = Eigen::RowVectorXd::Zero(r.ncols);
  CovariantStiffness C;
  std::array<CovariantStiffness, 2> dC;
  if (need_flux) {
    C = to_covariant(gs, r.frame);
    if (kl) dC = covariant_derivatives(gs, r.frame);
  }
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < nb; ++k) {
      const int col = c * nb + k;
      const FieldJet fj = unit_field(smp, k, c);
      r.U.col(col) = fj.u[0];
      const Vec3 th = side_rotation(p, fj, r.frame);
      r.TH.col(col) = th;
      r.THN[col] = th.dot(r.n);
      if (need_flux) {
        const FluxOut fo = side_flux(p, fj, r.frame, r.cf, C, kl ? &dC : nullptr);
        r.FU.col(col) = fo.fu;
        r.FTH.col(col) = fo.fth;
        r.FTHN[col] = fo.fthn;
      }
    }
  if (pb.exact) {
    const FieldJet ex = exact_field(p, *pb.exact, cj.p, r.frame, kl && need_flux ? 3 : 1);
    r.exU = ex.u[0];
    r.exTH = side_rotation(p, ex, r.frame);
    r.exTHN = r.exTH.dot(r.n);
    if (need_flux) {
      const FluxOut fo = side_flux(p, ex, r.frame, r.cf, C, kl ? &dC : nullptr);
      r.exFU = fo.fu;
      r.exFTH = fo.fth;
      r.exFTHN = fo.fthn;
    }
  }
  return r;
}

// -J^T F - gamma1 F^T J + mu J^T J, and the same form against a data column.
void nitsche_block(const Eigen::MatrixXd& J, const Eigen::MatrixXd& F, double g1, double mu, double w,
                   Eigen::MatrixXd& Ke) {
  Ke.noalias() += w * (-(J.transpose() * F) - g1 * (F.transpose() * J) + mu * (J.transpose() * J));
}
void nitsche_column(const Eigen::MatrixXd& J, const Eigen::MatrixXd& F, const Eigen::VectorXd& Jc,
                    const Eigen::VectorXd& Fc, double g1, double mu, double w, Eigen::VectorXd& out) {
  out.noalias() += w * (-(J.transpose() * Fc) - g1 * (F.transpose() * Jc) + mu * (J.transpose() * Jc));
}

constexpr int kSegmentsPerBlock = 8;

void assemble_interface(const Problem& pb, const DofMap& dm, const NitscheInterface& itf,
                        const GeneralizedStiffness& gs, std::vector<Scatter>& all) {
  const InterfaceLayout lay = segment_nitsche_interface(pb, itf);
  const Patch& pp = pb.patches[itf.plus.patch];
  const bool two = itf.minus.patch >= 0;
  const Patch* pm = two ? &pb.patches[itf.minus.patch] : nullptr;
  const double g1 = pb.nitsche.gamma1;
  const double g2 = two ? pb.nitsche.gamma2 : 1.0;
  const Penalty pen = nitsche_penalty(pb.laminate, pb.nitsche.beta, itf.h);
  int pdeg = pp.degree();
  if (pm) pdeg = std::max(pdeg, pm->degree());
  const int nq = pb.quadrature.interface > 0 ? pb.quadrature.interface : pdeg + 2;
  const GaussRule& gr = gauss01(nq);
  const bool manufactured = pb.exact.has_value();
  const int nseg = static_cast<int>(lay.segments.size());
  const int nblocks = (nseg + kSegmentsPerBlock - 1) / kSegmentsPerBlock;

  auto blocks = run_blocks(nblocks, [&](int b, Scatter& out) {
    const int i0 = b * kSegmentsPerBlock, i1 = std::min(i0 + kSegmentsPerBlock, nseg);
    for (int is = i0; is < i1; ++is) {
      const InterfaceSegment& sg = lay.segments[is];
      const double len = sg.s1 - sg.s0;
      // Column layout is fixed per segment: plus columns, then minus columns.
      const double smid = 0.5 * (sg.s0 + sg.s1);
      const auto fp0 = pp.space.eval(itf.plus.curve->eval(smid).p, 0, sg.plus_spans[0], sg.plus_spans[1]).fun;
      LocalCols lc;
      lc.append(pb, dm, itf.plus.patch, fp0);
      const int np = lc.size();
      if (two) {
        const auto fm0 = pm->space.eval(itf.minus.curve->eval(smid).p, 0, sg.minus_spans[0], sg.minus_spans[1]).fun;
        lc.append(pb, dm, itf.minus.patch, fm0);
      }
      const int n = lc.size();
      const int nm = n - np;
      Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd be = Eigen::VectorXd::Zero(n);
      for (size_t q = 0; q < gr.x.size(); ++q) {
        const double s = sg.s0 + len * gr.x[q];
        const SideRows P = side_rows(pb, pp, *itf.plus.curve, s, sg.plus_spans, lay.plus_left, g2 > 0.0, gs);
        SideRows M;
        if (two) M = side_rows(pb, *pm, *itf.minus.curve, s, sg.minus_spans, !lay.minus_left, g2 < 1.0, gs);
        const double w = gr.w[q] * len * P.jac;

        auto pair_rows = [&](const Eigen::MatrixXd& Ap, const Eigen::MatrixXd& Fp, const Eigen::MatrixXd& Am,
                             const Eigen::MatrixXd& Fm, int rows, Eigen::MatrixXd& J, Eigen::MatrixXd& F) {
          J = Eigen::MatrixXd::Zero(rows, n);
          F = Eigen::MatrixXd::Zero(rows, n);
          J.leftCols(np) = Ap;
          F.leftCols(np) = g2 * Fp;
          if (two) {
            J.rightCols(nm) = -Am;
            F.rightCols(nm) = (1.0 - g2) * Fm;
          }
        };
        auto apply = [&](const Eigen::MatrixXd& J, const Eigen::MatrixXd& F, double mu, const Eigen::VectorXd& exJ,
                         const Eigen::VectorXd& exF, const Eigen::VectorXd& data) {
          nitsche_block(J, F, g1, mu, w, Ke);
          if (manufactured) {
            nitsche_column(J, F, exJ, exF, g1, mu, w, be);
          } else if (!two && data.size() > 0) {
            // Prescribed trace g enters as the exterior value: J(u) = u - g.
            Eigen::VectorXd tmp = Eigen::VectorXd::Zero(n);
            nitsche_column(J, F, -data, Eigen::VectorXd::Zero(data.size()), g1, mu, w, tmp);
            be -= tmp;
          }
        };

        if (itf.couple_u) {
          Eigen::MatrixXd J, F;
          pair_rows(P.U, P.FU, M.U, M.FU, 3, J, F);
          Eigen::VectorXd exJ = P.exU - (two ? M.exU : Vec3::Zero());
          Eigen::VectorXd exF = g2 * P.exFU + (two ? Vec3((1.0 - g2) * M.exFU) : Vec3::Zero());
          Eigen::VectorXd data;
          if (!two) data = itf.u_data ? Vec3(itf.u_data(s, P.x)) : Vec3::Zero();
          apply(J, F, pen.mu_u, exJ, exF, data);
        }
        if (itf.rotation == RotationCoupling::Full) {
          Eigen::MatrixXd J, F;
          pair_rows(P.TH, P.FTH, M.TH, M.FTH, 3, J, F);
          Eigen::VectorXd exJ = P.exTH - (two ? M.exTH : Vec3::Zero());
          Eigen::VectorXd exF = g2 * P.exFTH + (two ? Vec3((1.0 - g2) * M.exFTH) : Vec3::Zero());
          Eigen::VectorXd data;
          if (!two) data = itf.theta_data ? Vec3(itf.theta_data(s, P.x)) : Vec3::Zero();
          apply(J, F, pen.mu_theta, exJ, exF, data);
        } else if (itf.rotation == RotationCoupling::Normal) {
          Eigen::MatrixXd J, F;
          pair_rows(P.THN, P.FTHN, M.THN, M.FTHN, 1, J, F);
          Eigen::VectorXd exJ(1), exF(1);
          exJ[0] = P.exTHN - (two ? M.exTHN : 0.0);
          exF[0] = g2 * P.exFTHN + (two ? (1.0 - g2) * M.exFTHN : 0.0);
          Eigen::VectorXd data;
          if (!two) {
            data.resize(1);
            data[0] = itf.theta_data ? itf.theta_data(s, P.x).dot(P.n) : 0.0;
          }
          apply(J, F, pen.mu_theta, exJ, exF, data);
        }
      }
      if (!Ke.allFinite() || !be.allFinite())
        fail(ErrorKind::AssemblyFailure, "non-finite entries on interface " + itf.name + " segment " + std::to_string(is));
      scatter(lc, &Ke, &be, out);
    }
  });
  for (auto& b : blocks) all.push_back(std::move(b));
}

void assemble_edge_load(const Problem& pb, const DofMap& dm, const EdgeLoad& el, std::vector<Scatter>& all) {
  NitscheInterface probe;
  probe.name = "edge load";
  probe.plus = el.where;
  probe.s0 = el.s0;
  probe.s1 = el.s1;
  const InterfaceLayout lay = segment_nitsche_interface(pb, probe);
  const Patch& p = pb.patches[el.where.patch];
  const GaussRule& gr = gauss01(p.degree() + 2);
  const bool kl = p.theory == Theory::KL;
  Scatter out;
  for (const auto& sg : lay.segments) {
    const double len = sg.s1 - sg.s0;
    const auto f0 = p.space.eval(el.where.curve->eval(0.5 * (sg.s0 + sg.s1)).p, 0, sg.plus_spans[0], sg.plus_spans[1]).fun;
    LocalCols lc;
    lc.append(pb, dm, el.where.patch, f0);
    Eigen::VectorXd be = Eigen::VectorXd::Zero(lc.size());
    for (size_t q = 0; q < gr.x.size(); ++q) {
      const double s = sg.s0 + len * gr.x[q];
      const CurveJet cj = el.where.curve->eval(s);
      const SurfaceFrame f = patch_frame(p, cj.p, 2);
      const CurveFrame cf = curve_frame(f, cj.d1, cj.d2, lay.plus_left);
      const auto smp = p.space.eval(cj.p, 1, sg.plus_spans[0], sg.plus_spans[1]);
      const int nb = static_cast<int>(smp.fun.size());
      const double w = gr.w[q] * len * cf.jac;
      Vec3 F = el.force ? el.force(s, f.x) : Vec3::Zero();
      const Vec3 Mv = el.moment ? el.moment(s, f.x) : Vec3::Zero();
      if (el.moment && std::abs(Mv.dot(f.a3)) > 1e-10 * std::max(1.0, Mv.norm()))
        fail(ErrorKind::InvalidLoad, "edge moment has a normal component");
      if (kl) {
        // Twisting part enters the ersatz force; the derivative is taken along t.
        double dMt = 0;
        if (el.moment) {
          const double hs = 1e-5 * len;
          auto mt = [&](double ss) {
            const CurveJet c2 = el.where.curve->eval(ss);
            const SurfaceFrame f2 = patch_frame(p, c2.p, 2);
            const CurveFrame cf2 = curve_frame(f2, c2.d1, c2.d2, lay.plus_left);
            return el.moment(ss, f2.x).dot(cf2.t);
          };
          const Vec3 tc = f.a[0] * cf.deta_ds[0] + f.a[1] * cf.deta_ds[1];
          const double dir = tc.dot(cf.t) >= 0 ? 1.0 : -1.0;
          dMt = dir * (mt(s + hs) - mt(s - hs)) / (2 * hs * cf.jac);
        }
        F = ersatz_load(F, Mv.dot(cf.t), dMt, f, cf);
      }
      for (int k = 0; k < nb; ++k) {
        const double N = smp.d(0, k);
        for (int c = 0; c < 3; ++c) be[c * nb + k] += w * N * F[c];
        if (!el.moment) continue;
        if (kl) {
          // theta_n = theta_alpha n^alpha with theta_alpha = -a_3 . u_{,alpha}
          const double dn = smp.d(1, k) * cf.n_con[0] + smp.d(2, k) * cf.n_con[1];
          const double Mn = Mv.dot(cf.n);
          for (int c = 0; c < 3; ++c) be[c * nb + k] -= w * Mn * dn * f.a3[c];
        } else {
          for (int a = 0; a < 2; ++a) be[(3 + a) * nb + k] += w * N * f.acon[a].dot(Mv);
        }
      }
    }
    scatter(lc, nullptr, &be, out);
  }
  all.push_back(std::move(out));
}

}  // namespace

LinearSystem assemble(const Problem& pb, const DofMap& dofs, unsigned parts) {
  pb.validate();
  const GeneralizedStiffness gs = laminate_abds(pb.laminate);
  std::vector<Scatter> all;
  for (size_t ip = 0; ip < pb.patches.size(); ++ip)
    if (parts & (kInterior | kExternal)) assemble_patch(pb, dofs, static_cast<int>(ip), gs, parts, all);
  if (parts & kNitsche)
    for (const auto& itf : pb.interfaces) assemble_interface(pb, dofs, itf, gs, all);
  if (parts & kExternal)
    for (const auto& el : pb.edge_loads) assemble_edge_load(pb, dofs, el, all);

  LinearSystem sys;
  const int n = dofs.num_free();
  size_t nt = 0;
  for (const auto& s : all) nt += s.trip.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nt);
  sys.b = Eigen::VectorXd::Zero(n);
  for (const auto& s : all) {
    trip.insert(trip.end(), s.trip.begin(), s.trip.end());
    for (const auto& [i, v] : s.rhs) sys.b[i] += v;
  }
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.K.makeCompressed();
  return sys;
}

namespace {
std::string fmt_g(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}
}  // namespace

Eigen::VectorXd jacobi_vector(const Eigen::SparseMatrix<double>& K) {
  Eigen::VectorXd d = K.diagonal();
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0))
      fail(ErrorKind::NumericalFailure, "non-positive diagonal entry " + std::to_string(i) + " = " + fmt_g(d[i]));
    d[i] = 1.0 / std::sqrt(d[i]);
  }
  return d;
}

FieldJet FieldSolution::eval(const Problem& pb, int patch, const Vec2& eta, int order) const {
  const Patch& p = pb.patches[patch];
  const auto smp = p.space.eval(eta, std::min(order, 3));
  const Eigen::VectorXd& c = coef[patch];
  FieldJet f;
  const int nb = static_cast<int>(smp.fun.size());
  const int rows = static_cast<int>(smp.d.rows());
  for (int k = 0; k < nb; ++k) {
    const int fn = smp.fun[k];
    const Vec3 u(c[p.dof(0, fn)], c[p.dof(1, fn)], c[p.dof(2, fn)]);
    for (int r = 0; r < rows; ++r) f.u[r] += smp.d(r, k) * u;
    if (p.theory == Theory::RM) {
      const Vec2 th(c[p.dof(3, fn)], c[p.dof(4, fn)]);
      for (int r = 0; r < std::min(rows, 3); ++r) f.th[r] += smp.d(r, k) * th;
    }
  }
  return f;
}

FieldSolution expand_solution(const Problem& pb, const DofMap& dofs, const Eigen::VectorXd& x) {
  FieldSolution s;
  for (size_t ip = 0; ip < pb.patches.size(); ++ip) {
    const Patch& p = pb.patches[ip];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p.num_dofs());
    for (int d = 0; d < p.num_dofs(); ++d) {
      const int g = dofs.global(static_cast<int>(ip), d);
      if (g >= 0)
        c[d] = x[g];
      else if (dofs.is_fixed(static_cast<int>(ip), d))
        c[d] = dofs.fixed_value(static_cast<int>(ip), d);
    }
    s.coef.push_back(std::move(c));
  }
  return s;
}

SolveResult solve(const Problem& pb, const DofMap& dofs, const LinearSystem& sys, bool symmetric, bool scale) {
  SolveResult res;
  const int n = static_cast<int>(sys.b.size());
  res.report.n = n;
  res.report.symmetric = symmetric;
  if (n == 0) {
    res.report.spd = true;
    res.x = Eigen::VectorXd::Zero(0);
    res.field = expand_solution(pb, dofs, res.x);
    return res;
  }
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  if (scale) {
    try {
      d = jacobi_vector(sys.K);
    } catch (const Error& e) {
      res.report.spd = false;
      res.report.message = e.what();
      res.x = Eigen::VectorXd::Zero(n);
      res.field = expand_solution(pb, dofs, res.x);
      return res;
    }
  }
  const Eigen::SparseMatrix<double> Ks = d.asDiagonal() * sys.K * d.asDiagonal();
  const Eigen::VectorXd bs = d.cwiseProduct(sys.b);
  Eigen::VectorXd y;
  if (symmetric) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Ks);
    if (llt.info() != Eigen::Success) {
      res.report.spd = false;
      res.report.message = "Cholesky factorization failed: matrix not positive definite";
      res.x = Eigen::VectorXd::Zero(n);
      res.field = expand_solution(pb, dofs, res.x);
      return res;
    }
    const Eigen::VectorXd ld = Eigen::SparseMatrix<double>(llt.matrixL()).diagonal();
    const double lmax = ld.maxCoeff(), lmin = ld.minCoeff();
    res.report.pivot_ratio = (lmax / lmin) * (lmax / lmin);
    res.report.spd = true;
    y = llt.solve(bs);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(Ks);
    lu.factorize(Ks);
    if (lu.info() != Eigen::Success) {
      res.report.message = "LU factorization failed";
      res.x = Eigen::VectorXd::Zero(n);
      res.field = expand_solution(pb, dofs, res.x);
      return res;
    }
    y = lu.solve(bs);
  }
  res.x = d.cwiseProduct(y);
  const double bn = sys.b.norm();
  res.report.residual = (sys.K * res.x - sys.b).norm() / (bn > 0 ? bn : 1.0);
  res.field = expand_solution(pb, dofs, res.x);
  return res;
}

SolveResult run_problem(const Problem& pb, bool scale) {
  const DofMap dofs(pb);
  const LinearSystem sys = assemble(pb, dofs);
  return solve(pb, dofs, sys, pb.nitsche.gamma1 == 1.0, scale);
}

void write_triplets(const Eigen::SparseMatrix<double>& K, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::InvalidInput, "cannot open " + path);
  os.precision(17);
  os << "# row col value (0-based), " << K.rows() << " x " << K.cols() << "\n";
  for (int k = 0; k < K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace ibcm

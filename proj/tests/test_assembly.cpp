#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace ibcm;

namespace {

Case small_plate(Theory t, int p, int level, double gamma1 = 1.0) {
  CaseOptions o;
  o.theory = t;
  o.p = p;
  o.level = level;
  o.tau = 0.01;
  o.gamma1 = gamma1;
  return plate_with_hole(o);
}

Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& K) { return Eigen::MatrixXd(K); }

struct ThreadEnv {
  explicit ThreadEnv(const char* n) { setenv("IBCM_THREADS", n, 1); }
  ~ThreadEnv() { unsetenv("IBCM_THREADS"); }
};

}  // namespace

TEST_CASE("penalty values follow beta E tau / h") {
  // beta = 10, E = 25 GPa, tau = 0.01, h = 1/16.
  const Penalty pen = nitsche_penalty(Laminate::isotropic(25e9, 0.2, 0.01), 10.0, 1.0 / 16);
  CHECK(pen.mu_u == doctest::Approx(4.0e10));
  CHECK(pen.mu_theta == doctest::Approx(4.0e6));
  // E is the largest layer modulus.
  const Penalty o = nitsche_penalty(Laminate::orthotropic(10e9, 140e9, 0.3, 5e9, {0.0}, 0.01), 1.0, 0.5);
  CHECK(o.mu_u == doctest::Approx(140e9 * 0.01 / 0.5));
}

TEST_CASE("symmetric Nitsche gives a symmetric stiffness") {
  for (Theory t : {Theory::RM, Theory::KL}) {
    const Case c = small_plate(t, 2, 2);
    const DofMap dofs(c.problem);
    const Eigen::MatrixXd K = dense(assemble(c.problem, dofs).K);
    CHECK(K.rows() == dofs.num_free());
    CHECK((K - K.transpose()).norm() < 1e-12 * K.norm());
    // Nonsymmetric variant.
    const Case n = small_plate(t, 2, 2, -1.0);
    const Eigen::MatrixXd Kn = dense(assemble(n.problem, DofMap(n.problem)).K);
    CHECK((Kn - Kn.transpose()).norm() > 1e-6 * Kn.norm());
  }
}

TEST_CASE("assembly parts add up") {
  const Case c = small_plate(Theory::RM, 2, 2);
  const DofMap dofs(c.problem);
  const LinearSystem all = assemble(c.problem, dofs);
  const LinearSystem a = assemble(c.problem, dofs, kInterior), b = assemble(c.problem, dofs, kExternal),
                     n = assemble(c.problem, dofs, kNitsche);
  CHECK((dense(all.K) - dense(a.K) - dense(b.K) - dense(n.K)).norm() < 1e-12 * dense(all.K).norm());
  CHECK((all.b - a.b - b.b - n.b).norm() <= 1e-12 * (1 + all.b.norm()));
}

TEST_CASE("assembly does not depend on the thread count") {
  const Case c = small_plate(Theory::KL, 3, 3);
  const DofMap dofs(c.problem);
  LinearSystem one, four;
  {
    ThreadEnv env("1");
    one = assemble(c.problem, dofs);
  }
  {
    ThreadEnv env("4");
    four = assemble(c.problem, dofs);
  }
  CHECK(one.K.nonZeros() == four.K.nonZeros());
  // Bitwise equality.
  CHECK((dense(one.K) - dense(four.K)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((one.b - four.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("DOF numbering accounts for every raw DOF") {
  for (Theory t : {Theory::RM, Theory::KL}) {
    const Case c = small_plate(t, 2, 4);
    const DofMap dofs(c.problem);
    int raw = 0, inactive = 0, fixed = 0;
    std::vector<int> seen(dofs.num_free(), 0);
    for (size_t ip = 0; ip < c.problem.patches.size(); ++ip) {
      const Patch& p = c.problem.patches[ip];
      raw += p.num_dofs();
      for (int k = 0; k < p.num_dofs(); ++k) {
        const int g = dofs.global(static_cast<int>(ip), k);
        if (dofs.is_inactive(static_cast<int>(ip), k)) ++inactive;
        else if (dofs.is_fixed(static_cast<int>(ip), k)) ++fixed;
        else ++seen.at(g);
      }
    }
    CHECK(raw == dofs.num_raw());
    CHECK(fixed == dofs.num_fixed());
    CHECK(inactive > 0);  // functions supported only inside the hole
    CHECK(dofs.num_shared() == 0);
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    // The layer's hole edge is clamped for every component.
    const Patch& layer = c.problem.patches[c.layers.at(0)];
    CHECK(dofs.num_fixed() >= layer.ncomp() * static_cast<int>(edge_functions(layer, Side::VLo).size()));
  }
}

TEST_CASE("Jacobi scaling does not change the solution") {
  const Case c = small_plate(Theory::RM, 2, 2);
  const DofMap dofs(c.problem);
  const LinearSystem sys = assemble(c.problem, dofs);
  const SolveResult s = solve(c.problem, dofs, sys, true, true), u = solve(c.problem, dofs, sys, true, false);
  CHECK(s.report.spd);
  CHECK(s.report.residual < 1e-8);
  CHECK((s.x - u.x).norm() < 1e-8 * s.x.norm());
  const Eigen::VectorXd d = jacobi_vector(sys.K);
  for (int i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(1.0 / std::sqrt(sys.K.coeff(i, i))));
}

TEST_CASE("non-positive diagonals are reported") {
  Eigen::SparseMatrix<double> K(2, 2);
  K.insert(0, 0) = 1.0;
  K.insert(1, 1) = -1.0;
  CHECK_THROWS_AS(jacobi_vector(K), Error);
}

TEST_CASE("triplet output lists every stored entry") {
  const Case c = small_plate(Theory::RM, 2, 1);
  const LinearSystem sys = assemble(c.problem, DofMap(c.problem));
  const auto path = std::filesystem::temp_directory_path() / "ibcm_test_triplets.txt";
  write_triplets(sys.K, path.string());
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header.rfind("#", 0) == 0);
  int rows = 0, r, col;
  double v, sum = 0;
  while (is >> r >> col >> v) {
    ++rows;
    sum += v;
    CHECK(v == sys.K.coeff(r, col));
  }
  CHECK(rows == sys.K.nonZeros());
  CHECK(sum == doctest::Approx(Eigen::VectorXd::Ones(sys.K.rows()).dot(sys.K * Eigen::VectorXd::Ones(sys.K.cols()))));
  std::filesystem::remove(path);
}

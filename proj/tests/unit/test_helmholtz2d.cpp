#include "doctest.h"

#include <cmath>
#include <random>

#include "bornsob/greens.hpp"
#include "bornsob/helmholtz2d.hpp"
#include "bornsob/series.hpp"

using namespace bornsob;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

GridField bump(const SolverSetup& s, double xc, double zc, double radius, double amp) {
  GridField f = s.model_zeros();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::hypot(f.coord(i, 1) - xc, f.coord(i, 0) - zc) / radius;
    if (r < 1.0) f.values[i] = amp * std::exp(1.0 - 1.0 / (1.0 - r * r));
  }
  return f;
}

GridField random_field(const SolverSetup& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  GridField f = s.model_zeros();
  for (auto& v : f.values) v = g(rng);
  return f;
}

MatrixXcd random_residual(Eigen::Index nr, Eigen::Index ns, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd d(nr, ns);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = {g(rng), g(rng)};
  return d;
}

double field_dot(const GridField& a, const GridField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.values[i].real() * b.values[i].real();
  return acc;
}

}  // namespace

TEST_CASE("standard setup geometry") {
  const auto s = SolverSetup::standard();
  CHECK(s.nx == 51);
  CHECK(s.nz == 51);
  CHECK(s.k() == doctest::Approx(8.4));
  CHECK(s.sources.size() == 21);
  CHECK(s.receivers.size() == 101);
  CHECK(s.sources.back()[0] == doctest::Approx(1.0));
  CHECK(s.receivers[37][1] == doctest::Approx(0.95));
  CHECK(s.receiver_spacing() == doctest::Approx(0.01));
  CHECK(s.source_spacing() == doctest::Approx(0.05));
  CHECK(SolverSetup::standard(0.005).nx == 201);
}

TEST_CASE("setup validation") {
  auto s = SolverSetup::standard();
  s.omega = 2.5 * 30.0;  // k dx = 0.6
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = SolverSetup::standard();
  s.receivers.push_back({0.5, 1.2});
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = SolverSetup::standard();
  GridField eta = s.model_zeros();
  eta.values[100] = -1.5;
  CHECK_THROWS_AS(assemble_operator(s, eta), DomainError);
}

TEST_CASE("operator is complex symmetric") {
  auto s = SolverSetup::standard();
  s.nx = s.nz = 21;
  s.sources = {{0.1, 0.1}};
  s.receivers = {{0.2, 0.3}};
  const auto A = assemble_operator(s, bump(s, 0.2, 0.2, 0.1, 0.3));
  const Eigen::SparseMatrix<cplx> diff = A - Eigen::SparseMatrix<cplx>(A.transpose());
  CHECK(diff.norm() <= 1e-14 * A.norm());
}

TEST_CASE("zero contrast reproduces the incident field") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const auto w = solver.solve(s.model_zeros());
  for (std::size_t q = 0; q < w.total.size(); ++q) CHECK((w.total[q] - w.incident[q]).norm() == 0.0);
  CHECK(solver.sample(w).norm() == 0.0);
}

TEST_CASE("one factorization serves every source") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const auto before = solver.stats();
  const auto w = solver.solve(bump(s, 0.5, 0.5, 0.2, 0.1));
  CHECK(w.stats.factorizations == 1);
  CHECK(w.stats.solves == 21);
  CHECK(w.factor->solves() == 21);
  CHECK(solver.stats().factorizations == before.factorizations + 1);
  CHECK(solver.stats().solves == before.solves + 21);
}

TEST_CASE("reciprocity with co-located sources and receivers") {
  auto s = SolverSetup::standard();
  s.sources = {{0.13, 0.1}, {0.5, 0.27}, {0.91, 0.66}, {0.3, 0.95}};
  s.receivers = s.sources;
  HelmholtzSolver solver(s);
  const auto w = solver.solve(bump(s, 0.45, 0.55, 0.25, 0.2));
  MatrixXcd total(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    const VectorXcd p = point_weights(s, s.receivers[r]).cast<cplx>();
    for (std::size_t q = 0; q < 4; ++q) total(Eigen::Index(r), Eigen::Index(q)) = p.dot(w.total[q]);
  }
  const MatrixXcd scat = solver.sample(w);
  CHECK((total - total.transpose()).norm() <= 1e-8 * total.norm());
  CHECK((scat - scat.transpose()).norm() <= 1e-8 * scat.norm());
}

TEST_CASE("free-space field matches the Hankel function away from the layers") {
  auto s = SolverSetup::standard();
  s.sources = {{0.5, 0.5}};
  const auto f = solve(s.model_zeros(), s).field(s, 0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::hypot(f.coord(i, 1) - 0.5, f.coord(i, 0) - 0.5);
    if (r < 0.15) continue;
    const cplx exact = cplx(0.0, 0.25) * hankel1_0(s.k() * r);
    num += std::norm(f.values[i] - exact);
    den += std::norm(exact);
  }
  CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("absorbing layer reflects under one percent of the energy") {
  // A much larger domain sees no reflection inside the unit square; the difference is what the layer sends back.
  auto s = SolverSetup::standard();
  s.sources = {{0.5, 0.5}, {0.05, 0.9}};
  auto big = s;
  big.nx = big.nz = 151;
  big.x0 = big.z0 = -1.0;
  const auto ws = solve(s.model_zeros(), s);
  const auto wb = solve(big.model_zeros(), big);
  for (std::size_t q = 0; q < 2; ++q) {
    const auto fs = ws.field(s, q), fb = wb.field(big, q);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double r = std::hypot(fs.coord(i, 1) - s.sources[q][0], fs.coord(i, 0) - s.sources[q][1]);
      if (r < 0.15) continue;
      const cplx ref = fb.values[(i / 51 + 50) * 151 + i % 51 + 50];
      num += std::norm(fs.values[i] - ref);
      den += std::norm(ref);
    }
    CHECK(num / den < 0.01);
  }
}

TEST_CASE("adjoint dot test") {
  std::mt19937_64 rng(11);
  auto small = SolverSetup::standard();
  small.nx = 31;
  small.nz = 41;
  small.x0 = -0.1;
  small.sources = {{0.0, 0.1}, {0.25, 0.05}, {0.4, 0.2}};
  small.receivers = {{-0.05, 0.7}, {0.1, 0.7}, {0.2, 0.7}, {0.33, 0.75}, {0.5, 0.7}};
  for (const auto& s : {SolverSetup::standard(), small}) {
    HelmholtzSolver solver(s);
    const auto state = solver.solve(bump(s, s.x0 + 0.3, 0.4, 0.15, 0.1));
    for (int t = 0; t < 10; ++t) {
      const GridField x = random_field(s, rng);
      const MatrixXcd y = random_residual(Eigen::Index(s.receivers.size()), Eigen::Index(s.sources.size()), rng);
      const MatrixXcd jx = solver.jacobian_apply(state, x);
      const double lhs = (y.adjoint() * jx).trace().real();
      const double rhs = field_dot(x, solver.adjoint_apply(state, y));
      CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(lhs));
    }
  }
}

TEST_CASE("zero perturbation and zero residual") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const auto state = solver.solve(bump(s, 0.5, 0.5, 0.2, 0.1));
  CHECK(solver.jacobian_apply(state, s.model_zeros()).norm() == 0.0);
  const GridField g = solver.adjoint_apply(state, MatrixXcd::Zero(101, 21));
  for (const auto& v : g.values) CHECK(v == cplx(0.0));
}

TEST_CASE("Born limit is first order in the contrast") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const GridField eta = bump(s, 0.5, 0.5, 0.2, 1.0);
  const MatrixXcd lin = solver.jacobian_apply(solver.solve(s.model_zeros()), eta);
  double prev = 0.0;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    GridField scaled = eta;
    for (auto& v : scaled.values) v *= eps;
    const double err = (solver.forward_map(scaled) / eps - lin).norm() / lin.norm();
    CHECK(err < 0.1);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("Jacobian at a nonzero background matches central differences") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const GridField eta0 = bump(s, 0.4, 0.5, 0.2, 0.2);
  const GridField dir = bump(s, 0.6, 0.45, 0.15, 1.0);
  const double h = 1e-4;
  GridField ep = eta0, em = eta0;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    ep.values[i] += h * dir.values[i];
    em.values[i] -= h * dir.values[i];
  }
  const MatrixXcd fd = (solver.forward_map(ep) - solver.forward_map(em)) / (2.0 * h);
  const MatrixXcd lin = solver.jacobian_apply(solver.solve(eta0), dir);
  CHECK((fd - lin).norm() <= 1e-6 * lin.norm());
}

TEST_CASE("background Jacobian agrees with the integral-equation K1") {
  const auto s = SolverSetup::standard();
  HelmholtzSolver solver(s);
  const double xc = 0.5, zc = 0.5, radius = 0.1;
  const GridField eta = bump(s, xc, zc, radius, 1.0);
  const MatrixXcd lin = solver.jacobian_apply(solver.solve(s.model_zeros()), eta);

  // Same nodes and geometry, with the analytic kernel, centred on the scatterer.
  DiscretizedScene scene;
  scene.wave = {s.k(), WaveKind::Helmholtz, 2};
  scene.ball_radius = radius;
  std::vector<cplx> vals;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta.values[i] == cplx(0.0)) continue;
    scene.nodes.push_back({eta.coord(i, 1) - xc, eta.coord(i, 0) - zc, 0.0});
    scene.weights.push_back(s.dx * s.dx);
    vals.push_back(eta.values[i]);
  }
  for (const auto& p : s.receivers) scene.receivers.push_back({p[0] - xc, p[1] - zc, 0.0});
  for (const auto& p : s.sources) scene.sources.push_back({p[0] - xc, p[1] - zc, 0.0});
  scene.source_weights.assign(s.sources.size(), 1.0);
  scene.lattice_shape = {scene.nodes.size()};
  scene.assemble();
  const VectorXcd v = Eigen::Map<const VectorXcd>(vals.data(), Eigen::Index(vals.size()));
  const MatrixXcd ref = apply_K(1, std::vector<VectorXcd>{v}, scene);
  CHECK((lin - ref).norm() <= 0.02 * ref.norm());
}

TEST_CASE("deeper scatterer delays the back-scattered phase by k times the extra path") {
  auto s = SolverSetup::standard();
  s.sources = {{0.5, 0.1}};
  s.receivers = {{0.5, 0.1}};
  HelmholtzSolver solver(s);
  const auto bg = solver.solve(s.model_zeros());
  const double z1 = 0.5, dz = 0.1;
  const cplx d1 = solver.jacobian_apply(bg, bump(s, 0.5, z1, 0.06, 1.0))(0, 0);
  const cplx d2 = solver.jacobian_apply(bg, bump(s, 0.5, z1 + dz, 0.06, 1.0))(0, 0);
  // Two-way path grows by 2 dz; far-field amplitude falls like 1 / distance.
  const double measured = std::arg(d2 / d1);
  const double expected = std::remainder(2.0 * s.k() * dz, 2.0 * kPi);
  CHECK(std::abs(std::remainder(measured - expected, 2.0 * kPi)) < 0.15);
  CHECK(std::abs(d2) < std::abs(d1));
}

#include "bornsob/helmholtz2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bornsob {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

// Distance into the absorbing layer of a coordinate, zero inside the physical interval.
double layer_depth(double c, double lo, double hi) { return std::max({0.0, lo - c, c - hi}); }

struct Stretch {
  double lo, hi, width, sigma_max, k;
  int power;
  cplx at(double c) const {
    const double d = layer_depth(c, lo, hi);
    if (d == 0.0 || width == 0.0) return 1.0;
    return {1.0, sigma_max * std::pow(std::min(d / width, 1.0), power) / k};
  }
};

Stretch make_stretch(const SolverSetup& s, double lo, std::size_t n) {
  const double width = double(s.pml.cells) * s.dx;
  const double sigma_max = width > 0.0 ? double(s.pml.power + 1) * std::log(1.0 / s.pml.reflection) / (2.0 * width) : 0.0;
  return {lo, lo + double(n - 1) * s.dx, width, sigma_max, s.k(), s.pml.power};
}

double step_of(const std::vector<Point2>& pts, int axis) {
  if (pts.size() < 2) return 1.0;
  const double h = std::abs(pts[1][axis] - pts[0][axis]);
  return h > 0.0 ? h : 1.0;
}

}  // namespace

double SolverSetup::receiver_spacing() const { return step_of(receivers, 0); }
double SolverSetup::source_spacing() const { return step_of(sources, 0); }

GridField SolverSetup::model_zeros() const { return GridField::zeros({nz, nx}, {dx, dx}, {z0, x0}); }

void SolverSetup::validate() const {
  if (!(omega > 0.0) || !(c0 > 0.0)) throw DomainError("solver: omega and c0 must be positive");
  if (!(dx > 0.0)) throw DomainError("solver: dx must be positive");
  if (nx < 2 || nz < 2) throw DomainError("solver: grid needs at least 2 x 2 physical nodes");
  if (!(k() * dx < 0.5)) throw DomainError("solver: k dx = " + std::to_string(k() * dx) + " must stay below 0.5");
  if (!(pml.reflection > 0.0 && pml.reflection < 1.0)) throw DomainError("solver: pml reflection must lie in (0,1)");
  if (pml.power < 0) throw DomainError("solver: pml power must be nonnegative");
  if (sources.empty() || receivers.empty()) throw DomainError("solver: need at least one source and one receiver");
  const double x1 = x0 + double(nx - 1) * dx, z1 = z0 + double(nz - 1) * dx;
  const double eps = 1e-12 * (1.0 + std::abs(x1) + std::abs(z1));
  auto inside = [&](const Point2& p) {
    return p[0] >= x0 - eps && p[0] <= x1 + eps && p[1] >= z0 - eps && p[1] <= z1 + eps;
  };
  for (const auto& p : sources)
    if (!inside(p)) throw DomainError("solver: source outside the physical region");
  for (const auto& p : receivers)
    if (!inside(p)) throw DomainError("solver: receiver outside the physical region");
}

SolverSetup SolverSetup::standard(double dx) {
  SolverSetup s;
  s.dx = dx;
  s.nx = s.nz = std::size_t(std::llround(1.0 / dx)) + 1;
  for (int i = 0; i <= 20; ++i) s.sources.push_back({0.05 * i, 0.1});
  for (int i = 0; i <= 100; ++i) s.receivers.push_back({0.01 * i, 0.95});
  return s;
}

Eigen::SparseMatrix<cplx> assemble_operator(const SolverSetup& setup, const GridField& eta) {
  setup.validate();
  if (eta.shape != std::vector<std::size_t>{setup.nz, setup.nx})
    throw DomainError("solver: eta must have the physical grid shape {nz, nx}");
  for (const auto& v : eta.values)
    if (!(1.0 + v.real() > 0.0)) throw DomainError("solver: 1 + eta must be positive");

  const std::size_t P = setup.pml.cells, Nx = setup.padded_nx(), Nz = setup.padded_nz();
  const double h = setup.dx, inv_h2 = 1.0 / (h * h), k2 = setup.k() * setup.k();
  const Stretch sx = make_stretch(setup, setup.x0, setup.nx);
  const Stretch sz = make_stretch(setup, setup.z0, setup.nz);
  auto xc = [&](double j) { return setup.x0 + (j - double(P)) * h; };
  auto zc = [&](double i) { return setup.z0 + (i - double(P)) * h; };

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(5 * Nx * Nz);
  for (std::size_t i = 0; i < Nz; ++i) {
    const cplx szi = sz.at(zc(double(i)));
    for (std::size_t j = 0; j < Nx; ++j) {
      const cplx sxj = sx.at(xc(double(j)));
      const std::size_t row = i * Nx + j;
      const cplx wl = szi / sx.at(xc(double(j) - 0.5)) * inv_h2;
      const cplx wr = szi / sx.at(xc(double(j) + 0.5)) * inv_h2;
      const cplx wu = sxj / sz.at(zc(double(i) - 0.5)) * inv_h2;
      const cplx wd = sxj / sz.at(zc(double(i) + 0.5)) * inv_h2;
      double eta_here = 0.0;
      if (i >= P && i < P + setup.nz && j >= P && j < P + setup.nx)
        eta_here = eta.values[(i - P) * setup.nx + (j - P)].real();
      trip.emplace_back(row, row, wl + wr + wu + wd - sxj * szi * k2 * (1.0 + eta_here));
      if (j > 0) trip.emplace_back(row, row - 1, -wl);
      if (j + 1 < Nx) trip.emplace_back(row, row + 1, -wr);
      if (i > 0) trip.emplace_back(row, row - Nx, -wu);
      if (i + 1 < Nz) trip.emplace_back(row, row + Nx, -wd);
    }
  }
  SpMat A(Eigen::Index(Nx * Nz), Eigen::Index(Nx * Nz));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

Eigen::SparseVector<double> point_weights(const SolverSetup& setup, const Point2& p, double scale) {
  const std::size_t P = setup.pml.cells, Nx = setup.padded_nx(), Nz = setup.padded_nz();
  const double fx = (p[0] - setup.x0) / setup.dx + double(P);
  const double fz = (p[1] - setup.z0) / setup.dx + double(P);
  const auto j0 = std::size_t(std::clamp(std::floor(fx), 0.0, double(Nx - 2)));
  const auto i0 = std::size_t(std::clamp(std::floor(fz), 0.0, double(Nz - 2)));
  const double tx = fx - double(j0), tz = fz - double(i0);
  Eigen::SparseVector<double> w(Eigen::Index(Nx * Nz));
  const double c[4] = {(1 - tz) * (1 - tx), (1 - tz) * tx, tz * (1 - tx), tz * tx};
  const std::size_t idx[4] = {i0 * Nx + j0, i0 * Nx + j0 + 1, (i0 + 1) * Nx + j0, (i0 + 1) * Nx + j0 + 1};
  for (int q = 0; q < 4; ++q)
    if (std::abs(c[q]) > 1e-14) w.coeffRef(Eigen::Index(idx[q])) += c[q] * scale;
  return w;
}

HelmholtzFactor::HelmholtzFactor(const SolverSetup& setup, const GridField& eta) : A_(assemble_operator(setup, eta)) {
  lu_.analyzePattern(A_);
  lu_.factorize(A_);
  if (lu_.info() != Eigen::Success)
    throw NumericError("solver: sparse LU failed (singular or near-resonant system): " + lu_.lastErrorMessage());
}

Eigen::VectorXcd HelmholtzFactor::solve(const Eigen::VectorXcd& rhs) const {
  ++solves_;
  Eigen::VectorXcd x = lu_.solve(rhs);
  if (!x.allFinite()) throw NumericError("solver: non-finite solution, system is numerically singular");
  return x;
}

Eigen::VectorXcd HelmholtzFactor::solve_adjoint(const Eigen::VectorXcd& rhs) const {
  return solve(rhs.conjugate()).conjugate();
}

GridField WaveFieldSet::field(const SolverSetup& setup, std::size_t s, bool scattered) const {
  GridField f = setup.model_zeros();
  f.complex_valued = true;
  const std::size_t P = setup.pml.cells, Nx = setup.padded_nx();
  for (std::size_t i = 0; i < setup.nz; ++i)
    for (std::size_t j = 0; j < setup.nx; ++j) {
      const auto g = Eigen::Index((i + P) * Nx + j + P);
      f.values[i * setup.nx + j] = scattered ? total[s][g] - incident[s][g] : total[s][g];
    }
  return f;
}

HelmholtzSolver::HelmholtzSolver(SolverSetup setup) : setup_(std::move(setup)) {
  setup_.validate();
  receivers_.resize(Eigen::Index(setup_.unknowns()), Eigen::Index(setup_.receivers.size()));
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < setup_.receivers.size(); ++r) {
    const auto w = point_weights(setup_, setup_.receivers[r]);
    for (Eigen::SparseVector<double>::InnerIterator it(w); it; ++it) trip.emplace_back(it.index(), Eigen::Index(r), it.value());
  }
  receivers_.setFromTriplets(trip.begin(), trip.end());

  background_ = std::make_shared<const HelmholtzFactor>(setup_, setup_.model_zeros());
  ++factorizations_;
  incident_.resize(setup_.sources.size());
  parallel_for(incident_.size(), [&](std::size_t s) { incident_[s] = background_->solve(source_rhs(s)); });
  solves_ += incident_.size();
}

const std::vector<Eigen::VectorXcd>& HelmholtzSolver::incident() const { return incident_; }

Eigen::VectorXcd HelmholtzSolver::source_rhs(std::size_t s) const {
  return Eigen::VectorXcd(point_weights(setup_, setup_.sources[s], 1.0 / (setup_.dx * setup_.dx)).cast<cplx>());
}

Eigen::VectorXcd HelmholtzSolver::embed(const GridField& f) const {
  if (f.shape != std::vector<std::size_t>{setup_.nz, setup_.nx})
    throw DomainError("solver: field must have the physical grid shape {nz, nx}");
  const std::size_t P = setup_.pml.cells, Nx = setup_.padded_nx();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(setup_.unknowns()));
  for (std::size_t i = 0; i < setup_.nz; ++i)
    for (std::size_t j = 0; j < setup_.nx; ++j) v[Eigen::Index((i + P) * Nx + j + P)] = f.values[i * setup_.nx + j];
  return v;
}

GridField HelmholtzSolver::restrict_real(const Eigen::VectorXcd& v) const {
  GridField f = setup_.model_zeros();
  const std::size_t P = setup_.pml.cells, Nx = setup_.padded_nx();
  for (std::size_t i = 0; i < setup_.nz; ++i)
    for (std::size_t j = 0; j < setup_.nx; ++j) f.values[i * setup_.nx + j] = v[Eigen::Index((i + P) * Nx + j + P)].real();
  return f;
}

WaveFieldSet HelmholtzSolver::solve(const GridField& eta) const {
  WaveFieldSet out;
  out.factor = std::make_shared<const HelmholtzFactor>(setup_, eta);
  out.incident = incident_;
  out.total.resize(setup_.sources.size());
  parallel_for(out.total.size(), [&](std::size_t s) { out.total[s] = out.factor->solve(source_rhs(s)); });
  out.stats = {1, out.total.size()};
  ++factorizations_;
  solves_ += out.total.size();
  return out;
}

Eigen::MatrixXcd HelmholtzSolver::sample(const WaveFieldSet& w) const {
  Eigen::MatrixXcd d(receivers_.cols(), Eigen::Index(w.total.size()));
  for (std::size_t s = 0; s < w.total.size(); ++s)
    d.col(Eigen::Index(s)) = receivers_.transpose().cast<cplx>() * (w.total[s] - w.incident[s]);
  return d;
}

Eigen::MatrixXcd HelmholtzSolver::forward_map(const GridField& eta) const { return sample(solve(eta)); }

Eigen::MatrixXcd HelmholtzSolver::jacobian_apply(const WaveFieldSet& state, const GridField& delta_eta) const {
  const Eigen::VectorXcd de = embed(delta_eta);
  const double k2 = setup_.k() * setup_.k();
  Eigen::MatrixXcd d(receivers_.cols(), Eigen::Index(state.total.size()));
  parallel_for(state.total.size(), [&](std::size_t s) {
    const Eigen::VectorXcd rhs = k2 * de.cwiseProduct(state.total[s]);
    d.col(Eigen::Index(s)) = receivers_.transpose().cast<cplx>() * state.factor->solve(rhs);
  });
  solves_ += state.total.size();
  return d;
}

GridField HelmholtzSolver::adjoint_apply(const WaveFieldSet& state, const Eigen::MatrixXcd& residual) const {
  if (residual.rows() != receivers_.cols() || std::size_t(residual.cols()) != state.total.size())
    throw DomainError("solver: residual must be receivers x sources");
  const double k2 = setup_.k() * setup_.k();
  std::vector<Eigen::VectorXcd> parts(state.total.size());
  parallel_for(parts.size(), [&](std::size_t s) {
    const Eigen::VectorXcd lam = state.factor->solve_adjoint(receivers_.cast<cplx>() * residual.col(Eigen::Index(s)));
    parts[s] = (k2 * state.total[s]).conjugate().cwiseProduct(lam);
  });
  solves_ += parts.size();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(Eigen::Index(setup_.unknowns()));
  for (const auto& p : parts) acc += p;  // fixed order keeps the sum reproducible
  return restrict_real(acc);
}

WaveFieldSet solve(const GridField& eta, const SolverSetup& setup) { return HelmholtzSolver(setup).solve(eta); }

Eigen::MatrixXcd forward_map(const GridField& eta, const SolverSetup& setup) {
  return HelmholtzSolver(setup).forward_map(eta);
}

Eigen::MatrixXcd jacobian_apply(const GridField& eta0, const GridField& delta_eta, const SolverSetup& setup) {
  HelmholtzSolver solver(setup);
  return solver.jacobian_apply(solver.solve(eta0), delta_eta);
}

GridField adjoint_apply(const GridField& eta0, const Eigen::MatrixXcd& residual, const SolverSetup& setup) {
  HelmholtzSolver solver(setup);
  return solver.adjoint_apply(solver.solve(eta0), residual);
}

}  // namespace bornsob

#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bornsob/common.hpp"
#include "bornsob/sobolev.hpp"

namespace bornsob {

/// A point (x, z) with z the depth.
using Point2 = std::array<double, 2>;

struct PmlProfile {
  std::size_t cells = 20;
  double reflection = 1e-6;  // target normal-incidence reflection of the continuous layer
  int power = 2;
};

/// Physical region [x0, x0 + (nx-1) dx] x [z0, z0 + (nz-1) dx], padded by absorbing cells on every side.
struct SolverSetup {
  double omega = 21.0;
  double c0 = 2.5;
  double dx = 0.02;
  std::size_t nx = 51;
  std::size_t nz = 51;
  double x0 = 0.0;
  double z0 = 0.0;
  std::vector<Point2> sources;
  std::vector<Point2> receivers;
  PmlProfile pml;

  double k() const { return omega / c0; }
  std::size_t padded_nx() const { return nx + 2 * pml.cells; }
  std::size_t padded_nz() const { return nz + 2 * pml.cells; }
  std::size_t unknowns() const { return padded_nx() * padded_nz(); }
  /// Receiver-axis sample spacing, taken from the first two receivers.
  double receiver_spacing() const;
  double source_spacing() const;
  /// Zero field on the physical region, shape {nz, nx}.
  GridField model_zeros() const;
  void validate() const;

  /// Unit square at spacing dx: 21 sources at depth 0.1 stepping 0.05, 101 receivers at depth 0.95 stepping 0.01.
  static SolverSetup standard(double dx = 0.02);
};

struct SolverStats {
  std::size_t factorizations = 0;
  std::size_t solves = 0;
};

/// Sparse LU of the stretched 5-point operator A(eta) = -(Delta_pml + k^2 (1 + eta)).
/// The matrix is complex symmetric, so A^H x = conj(A^{-1} conj(x)) reuses the factors.
class HelmholtzFactor {
 public:
  HelmholtzFactor(const SolverSetup& setup, const GridField& eta);
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
  Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& rhs) const;
  const Eigen::SparseMatrix<cplx>& matrix() const { return A_; }
  std::size_t solves() const { return solves_.load(); }

 private:
  Eigen::SparseMatrix<cplx> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu_;
  mutable std::atomic<std::size_t> solves_{0};
};

/// Stretched operator without factorising; rows follow the padded grid, x fastest.
Eigen::SparseMatrix<cplx> assemble_operator(const SolverSetup& setup, const GridField& eta);

/// Bilinear weights of p on the padded grid, scaled by `scale`.
Eigen::SparseVector<double> point_weights(const SolverSetup& setup, const Point2& p, double scale = 1.0);

struct WaveFieldSet {
  std::vector<Eigen::VectorXcd> total;     // per source, padded grid
  std::vector<Eigen::VectorXcd> incident;  // per source, eta = 0
  std::shared_ptr<const HelmholtzFactor> factor;
  SolverStats stats;  // work done by the call that produced this set

  /// Physical-region field of source s; the scattered part when `scattered` is set.
  GridField field(const SolverSetup& setup, std::size_t s, bool scattered = false) const;
};

/// Shares the eta = 0 factorization and incident fields across calls.
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(SolverSetup setup);

  const SolverSetup& setup() const { return setup_; }
  const std::vector<Eigen::VectorXcd>& incident() const;

  WaveFieldSet solve(const GridField& eta) const;
  /// Receiver x source samples of u - u_i.
  Eigen::MatrixXcd sample(const WaveFieldSet& w) const;
  Eigen::MatrixXcd forward_map(const GridField& eta) const;

  /// Born perturbation: A(eta0) v = k^2 u delta_eta, sampled at the receivers.
  Eigen::MatrixXcd jacobian_apply(const WaveFieldSet& state, const GridField& delta_eta) const;
  /// Euclidean adjoint of jacobian_apply on real perturbations: Re sum_s conj(k^2 u_s) A^{-H} P_r y_s.
  GridField adjoint_apply(const WaveFieldSet& state, const Eigen::MatrixXcd& residual) const;

  SolverStats stats() const { return {factorizations_.load(), solves_.load()}; }

 private:
  Eigen::VectorXcd source_rhs(std::size_t s) const;
  Eigen::VectorXcd embed(const GridField& f) const;
  GridField restrict_real(const Eigen::VectorXcd& v) const;

  SolverSetup setup_;
  Eigen::SparseMatrix<double> receivers_;  // padded unknowns x receivers
  mutable std::shared_ptr<const HelmholtzFactor> background_;
  mutable std::vector<Eigen::VectorXcd> incident_;
  mutable std::atomic<std::size_t> factorizations_{0};
  mutable std::atomic<std::size_t> solves_{0};
};

/// Free functions over a one-shot solver.
WaveFieldSet solve(const GridField& eta, const SolverSetup& setup);
Eigen::MatrixXcd forward_map(const GridField& eta, const SolverSetup& setup);
Eigen::MatrixXcd jacobian_apply(const GridField& eta0, const GridField& delta_eta, const SolverSetup& setup);
GridField adjoint_apply(const GridField& eta0, const Eigen::MatrixXcd& residual, const SolverSetup& setup);

}  // namespace bornsob

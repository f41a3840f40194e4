#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bornsob/common.hpp"
#include "bornsob/greens.hpp"
#include "bornsob/sobolev.hpp"

namespace bornsob {

/// Quadrature nodes of B_a on a regular lattice, with receivers and sources outside the ball.
struct DiscretizedScene {
  WaveParams wave;
  double ball_radius = 1.0;
  std::vector<std::size_t> lattice_shape;  // one entry per dimension
  double node_spacing = 0.0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<Vec3> receivers;
  std::vector<Vec3> sources;
  double receiver_spacing = 1.0;  // sets the frequencies of the receiver-axis H^b multiplier
  double receiver_weight = 1.0;
  std::vector<double> source_weights;

  Eigen::MatrixXcd kernel;    // G(y_i, y_l), self cell replaced by its cell average
  Eigen::MatrixXcd to_rx;     // G(x_r, y_i)
  Eigen::MatrixXcd incident;  // u_i(y_i, x_s) = G(y_i, x_s)

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_receivers() const { return receivers.size(); }
  std::size_t n_sources() const { return sources.size(); }
  std::size_t n_data() const { return receivers.size() * sources.size(); }
  double coupling() const { return wave.coupling(); }
  Eigen::VectorXd weight_vector() const;

  GridField to_field(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd from_field(const GridField& f) const;

  /// Fills the kernel blocks; throws DomainError if a receiver or source sits on a node.
  void assemble();
  void validate() const;
};

/// n midpoint nodes on [-a, a]; receivers and sources at {-R, R}.
DiscretizedScene make_scene_1d(WaveParams wave, double a, std::size_t n, double outer = -1.0);

/// m x m cell centres of the square inscribed in the disk of radius a, equal weights pi a^2 / m^2;
/// nr receivers on the line y = R and ns sources on x = -R, evenly spaced over [-R, R].
/// Perpendicular lines avoid the mirror symmetry that costs K_1 two ranks.
DiscretizedScene make_scene_2d(WaveParams wave, double a, std::size_t m, std::size_t nr, std::size_t ns,
                               double outer = -1.0);

/// Receiver x source matrix of scattered-field samples.
using ScatterData = Eigen::MatrixXcd;

/// K_j(eta_1, ..., eta_j) by nested kernel sums.
ScatterData apply_K(int j, const std::vector<Eigen::VectorXcd>& etas, const DiscretizedScene& scene);
ScatterData apply_K(int j, const std::vector<GridField>& etas, const DiscretizedScene& scene);

/// Partial Born sum through order N via the fixed-point iteration of the field.
ScatterData forward_born(const Eigen::VectorXcd& eta, const DiscretizedScene& scene, int N);

/// Dense Lippmann-Schwinger solve; throws NumericError when the system is singular.
ScatterData solve_direct(const Eigen::VectorXcd& eta, const DiscretizedScene& scene);

/// Column i is vec(apply_K(1, e_i)) with entry index r + n_receivers * s.
Eigen::MatrixXcd build_K1_matrix(const DiscretizedScene& scene);

Eigen::VectorXcd vec(const ScatterData& d);
ScatterData unvec(const Eigen::VectorXcd& v, const DiscretizedScene& scene);

/// Gram matrices of the model H^a norm and the data (H^b receivers) x (L^2 sources) norm.
struct SceneNorms {
  SobolevPair sobolev;
  Eigen::MatrixXd model_gram;   // sum_{|alpha| <= a} (D^alpha)^T diag(w) D^alpha
  Eigen::MatrixXcd data_gram;   // diag(source weights) kron receiver Gram
  Eigen::MatrixXcd receiver_gram;
  Eigen::MatrixXd model_chol;   // lower factor L_a, model_gram = L_a L_a^T
  Eigen::MatrixXcd data_chol;   // lower factor L_b

  double model(const Eigen::VectorXcd& eta) const;
  double data(const ScatterData& phi) const;
  /// H^b norm of one receiver-axis column.
  double receiver(const Eigen::VectorXcd& g) const;
};

SceneNorms build_norms(const DiscretizedScene& scene, const SobolevPair& sobolev);

/// Discrete analogues of mu, nu, C_a from sups over the scene's nodes.
struct DiscreteConstants {
  double P = 1.0;
  double mu = 0.0;
  double nu = 0.0;
  double c_a = 0.0;
};

DiscreteConstants discrete_constants(const DiscretizedScene& scene, const SceneNorms& norms);

/// Operator norm of M from model H^a to data H^b (or back), by power iteration on the
/// Cholesky-transformed matrix.
double weighted_operator_norm(const Eigen::MatrixXcd& M, const SceneNorms& norms, bool model_to_data,
                              double tol = 1e-6);

struct PseudoInverse {
  Eigen::MatrixXcd op;  // nodes x data
  double lambda = 0.0;
  double norm_ba = 0.0;    // ||calK_1|| from data H^b to model H^a
  double k1_norm_ab = 0.0;  // ||K_1|| from model H^a to data H^b
  double condition = 0.0;   // of K^H W_b K + lambda W_a
  bool ill_conditioned = false;
};

/// (K^H W_b K + lambda W_a)^{-1} K^H W_b; at lambda = 0 the weighted minimum-norm pseudo-inverse.
PseudoInverse pseudo_inverse_K1(const Eigen::MatrixXcd& K1, double lambda, const SceneNorms& norms);

/// lambda with ||calK_1|| = target, by bisection on log lambda.
PseudoInverse pseudo_inverse_for_norm(const Eigen::MatrixXcd& K1, double target, const SceneNorms& norms,
                                      double rel_tol = 1e-6);

struct InverseSeriesResult {
  Eigen::VectorXcd estimate;                 // partial sum through N
  std::vector<Eigen::VectorXcd> terms;       // calK_j phi^{(x) j}, j = 1..N
  std::vector<Eigen::VectorXcd> partial_sums;
  std::vector<double> term_norms;            // model H^a norms
  std::size_t memo_entries = 0;
};

struct InverseSeriesOptions {
  int ceiling = 6;
};

InverseSeriesResult inverse_series(const ScatterData& phi, int N, const PseudoInverse& k1_inv,
                                   const DiscretizedScene& scene, const SceneNorms& norms,
                                   const InverseSeriesOptions& opt = {});

struct BoundCheck {
  std::string name;
  int order = 0;
  double measured = 0.0;
  double bound = 0.0;
  bool applicable = true;
  bool holds() const { return !applicable || measured <= bound; }
};

struct InverseBoundsReport {
  DiscreteConstants constants;
  double lambda = 0.0;
  double k1_inv_norm = 0.0;
  double C = 0.0, C_star = 0.0, C_ab = 0.0;
  double series_ratio = 0.0;  // (mu + nu) ||calK_1 phi||
  double script_M = 0.0;
  std::vector<BoundCheck> checks;
  std::vector<double> recovery_error;  // ||S_N - S_ref||, N = 1..
  std::vector<double> true_error;      // ||S_N - eta||
  bool all_hold() const;
};

struct InverseBoundsOptions {
  double lambda = -1.0;  // < 0: bisection to ||calK_1|| = Q / (mu + nu)
  double Q = 0.5;
  int reference_order = 8;
};

/// Measured sides and bounds of the per-term, tail and approximation inequalities for N' <= N.
InverseBoundsReport check_inverse_bounds(const DiscretizedScene& scene, const SceneNorms& norms,
                                         const Eigen::VectorXcd& eta, int N,
                                         const InverseBoundsOptions& opt = {});

/// sup over random probes of ||K_j(eta_1..eta_j)||_b / prod ||eta_t||_a; a lower estimate of ||K_j||.
double probe_K_norm(int j, const DiscretizedScene& scene, const SceneNorms& norms, int probes, std::uint64_t seed);

}  // namespace bornsob

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bornsob/helmholtz2d.hpp"
#include "bornsob/sobolev.hpp"

namespace bornsob {

enum class ScattererKind { RoughDisc, SmoothDisc };

std::string to_string(ScattererKind kind);
/// Accepts "rough_disc" / "rough" / "one" and "smooth_disc" / "smooth" / "two".
ScattererKind parse_scatterer_kind(const std::string& name);

struct ScattererSpec {
  ScattererKind kind = ScattererKind::RoughDisc;
  double amplitude = 0.1;
  double center_x = 0.5;
  double center_z = 0.5;
  double radius = 0.2;
  double edge = 0.04;       // width of the smooth step at the rim
  double smoothing = 0.05;  // Gaussian standard deviation of the smooth variant
};

/// Rough: amplitude times a C-infinity step from 1 inside radius - edge to 0 at radius.
/// Smooth: the rough field convolved with a Gaussian (zero outside the grid).
GridField make_scatterer(const ScattererSpec& spec, const SolverSetup& setup);

/// Adds complex white Gaussian noise with Frobenius norm level * ||phi||.
Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& phi, double level, std::uint64_t seed);

/// ||est - truth|| / ||truth|| in L^2 over the physical grid.
double relative_model_error(const GridField& est, const GridField& truth);

/// J_b and its gradients for a fixed solver and observed data.
class Misfit {
 public:
  Misfit(const HelmholtzSolver& solver, Eigen::MatrixXcd observed, SobolevPair sobolev);

  struct Eval {
    double J = 0.0;
    Eigen::MatrixXcd residual;  // F(eta) - phi
    GridField grad_l2;          // G_{0b}: L^2 Riesz representer
    GridField grad;             // G_{ab} = (I - Delta)^{-a} G_{0b}
  };

  /// 1/2 w_r w_s sum_s r_s^H (I - Delta_r)^b r_s with w the receiver and source spacings.
  double data_term(const Eigen::MatrixXcd& residual) const;
  double objective(const GridField& eta) const;
  Eval evaluate(const GridField& eta) const;
  /// G_{ab} for a given state and residual; skips the forward solve.
  Eval gradient_at(const WaveFieldSet& state, const Eigen::MatrixXcd& residual) const;

  const SobolevPair& sobolev() const { return sobolev_; }
  const HelmholtzSolver& solver() const { return solver_; }

 private:
  const HelmholtzSolver& solver_;
  Eigen::MatrixXcd observed_;
  SobolevPair sobolev_;
};

double objective(const GridField& eta, const Eigen::MatrixXcd& observed, const HelmholtzSolver& solver,
                 const SobolevPair& sobolev);
GridField gradient(const GridField& eta, const Eigen::MatrixXcd& observed, const HelmholtzSolver& solver,
                   const SobolevPair& sobolev);

struct LbfgsOptions {
  int memory = 10;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
  double initial_step = 0.02;  // largest |update| of the first trial step
};

struct InversionConfig {
  SobolevPair sobolev;
  SolverSetup setup = SolverSetup::standard();
  ScattererSpec truth;
  double noise = 0.0;
  std::uint64_t seed = 7;
  int iterations = 100;
  LbfgsOptions lbfgs;

  void validate() const;
  /// Setting one: rough disc; setting two: its Gaussian-smoothed version.
  static InversionConfig setting(int which, SobolevPair sobolev, double noise = 0.0, double dx = 0.02);
};

struct TraceRow {
  int iter = 0;
  double J = 0.0;
  double model_error = 0.0;
  double grad_norm = 0.0;  // H^a norm of G_ab
};

struct InversionTrace {
  std::vector<TraceRow> rows;
  GridField estimate;
  GridField truth;
  Eigen::MatrixXcd observed;
  bool line_search_failed = false;
  double final_error() const { return rows.empty() ? 0.0 : rows.back().model_error; }
};

/// L-BFGS on J_b in the H^a metric, starting from eta = 0.
InversionTrace run_inversion(const InversionConfig& cfg);

}  // namespace bornsob

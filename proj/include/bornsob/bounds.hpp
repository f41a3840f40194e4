#pragma once

#include <string>
#include <vector>

#include "bornsob/common.hpp"
#include "bornsob/greens.hpp"
#include "bornsob/sobolev.hpp"

namespace bornsob {

/// Ball B_a (scatterer support) inside the measurement sphere of radius R centred at 0.
struct ScatteringConfig {
  WaveParams wave{1.0, WaveKind::Helmholtz, 3};
  double omega = 0.0;
  double c0 = 0.0;
  double ball_radius = 1.0;
  Vec3 ball_center{98.0, 0.0, 0.0};
  double outer_radius = 100.0;
  SobolevPair sobolev;

  /// R = 100, ball of radius 1 centred at (98, 0, 0).
  static ScatteringConfig offset_geometry(WaveKind kind, double k = 1.0);
  bool ball_inside_sphere() const;
  /// Throws DomainError on a nonpositive radius or, when `need_sphere`, a ball that meets the sphere.
  void validate(bool need_sphere) const;
};

struct LmaxPolicy {
  int initial = -1;       // -1: 2 ceil(k R) + 16
  double rel_tol = 1e-4;  // stop doubling once the norm moves less than this
  int cap = 32768;
};

/// Sample of B_a for the sup over y: centre, 6 poles at radius a(1 - 1e-6),
/// 26 shell points at radius a/2, and the point nearest the sphere.
std::vector<Vec3> sup_sample_points(const ScatteringConfig& cfg);

double mu_closed_form(const ScatteringConfig& cfg);
double mu_quadrature(const ScatteringConfig& cfg, double rel_tol = 1e-10);

struct SphereNorm {
  double value = 0.0;
  int lmax = 0;
};

/// ||G(y, .)||_{H^b(sphere)} for |y| = rho, by the zonal spectrum with the doubling policy.
SphereNorm kernel_sphere_norm(WaveKind kind, double k, double outer_radius, double rho, double b,
                              const LmaxPolicy& policy = {});

struct NuResult {
  double nu = 0.0;
  double c_a = 0.0;
  double sup_hb = 0.0;  // sup_y ||G(y, .)||_{H^b}
  double sup_l2 = 0.0;  // sup_y ||G(y, .)||_{L^2}
  int lmax = 0;         // largest band limit used
};

NuResult nu_spectral(const ScatteringConfig& cfg, const LmaxPolicy& policy = {});

double radius_classic(double mu, double nu);
double radius_geometric(double mu, double nu, double k1_norm);

struct ClassicConstants {
  double C = 0.0, C_star = 0.0, C_tilde = 0.0, C_ab = 0.0;
  std::vector<std::string> flags;
};

/// Constants under the assumption ||calK_1|| = Q/(mu+nu).
ClassicConstants classic_constants(double mu, double nu, double Q, double M, double script_M);

struct GeometricConstants {
  double C1 = 0.0, C_tilde_ab = 0.0;
  double m1_limit = 0.0;  // script_M1 must stay below this
  bool valid = false;
};

GeometricConstants geometric_constants(double mu, double nu, double k1_norm, double script_M1);
/// (1 + R)(1 - sqrt(R Q / (1 + R + R Q))).
double q2_constraint(double R, double Q);

struct BoundsOptions {
  double Q = 0.5;
  double Q2 = 0.5;            // script_M = script_M1 = Q2/(mu+nu) unless given
  double M = 0.0;
  double script_M = -1.0;     // < 0: use Q2
  double script_M1 = -1.0;    // < 0: use Q2
  bool mu_only = false;
  LmaxPolicy lmax;
};

struct BoundsReport {
  double mu = 0.0, nu = 0.0, c_a = 0.0;
  double r_forward = 0.0, r_classic = 0.0, r_geometric = 0.0;
  double C = 0.0, C_star = 0.0, C_tilde = 0.0, C_ab = 0.0;
  double C1 = 0.0, C_tilde_ab = 0.0;
  double Q = 0.0, Q2 = 0.0, M = 0.0, script_M = 0.0, script_M1 = 0.0;
  double R_ratio = 0.0, k1_norm = 0.0, q2_bound = 0.0;
  int lmax = 0;
  std::vector<std::string> flags;

  std::string flag_string() const;
};

BoundsReport compute_report(const ScatteringConfig& cfg, const BoundsOptions& opt = {});

enum class SweepAxis { BallRadius, AParam, BData };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  double axis_value = 0.0;
  ScatteringConfig cfg;
  BoundsReport report;
};

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& values, const ScatteringConfig& base,
                            const BoundsOptions& opt = {});

}  // namespace bornsob

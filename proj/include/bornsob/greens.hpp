#pragma once

#include <string>

#include "bornsob/common.hpp"

namespace bornsob {

enum class WaveKind { Helmholtz, Diffuse };

std::string to_string(WaveKind kind);
/// Accepts "helmholtz" or "diffuse" (case-insensitive).
WaveKind parse_wave_kind(const std::string& name);

struct WaveParams {
  double k = 1.0;
  WaveKind kind = WaveKind::Helmholtz;
  int dim = 3;

  void validate() const;
  /// Signed coefficient of the scattering potential: +k^2 for Delta + k^2,
  /// -k^2 for Delta - k^2 (absorption lowers the field).
  double coupling() const;
};

/// Free-space Green's function of Delta G +- k^2 G = -delta at distance r.
cplx greens_value(const WaveParams& p, double r);

/// Integral of G(0, y) over the disk (dim 2) or ball (dim 3) of radius rho.
cplx greens_cell_integral(const WaveParams& p, double rho);

double bessel_j0(double x);
double bessel_y0(double x);
double bessel_j1(double x);
double bessel_y1(double x);
double bessel_k0(double x);
double bessel_k1(double x);
cplx hankel1_0(double x);
cplx hankel1_1(double x);

}  // namespace bornsob

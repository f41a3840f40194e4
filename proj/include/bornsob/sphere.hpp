#pragma once

#include <cstdint>
#include <vector>

#include "bornsob/common.hpp"

namespace bornsob {

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussLegendre {
  std::vector<double> x, w;
};

/// Cached; safe to call concurrently.
const GaussLegendre& gauss_legendre(std::size_t n);

/// Gauss-Legendre colatitude x uniform longitude sampling of a sphere.
struct SphereGrid {
  double radius = 1.0;
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;
  std::vector<double> cos_theta;  // ascending
  std::vector<Vec3> directions;   // ring-major: index = i_theta * n_phi + i_phi
  std::vector<double> weights;    // area weights, sum = 4 pi radius^2

  static SphereGrid for_band_limit(double radius, int lmax);
  double phi(std::size_t i_phi) const;
  std::size_t size() const { return directions.size(); }
};

/// Coefficients of the orthonormal complex basis Y_{l,m} on the unit sphere;
/// k = m + l + 1 runs over 1..2l+1.
struct ShCoefficients {
  int lmax = 0;
  std::vector<cplx> coeffs;  // index l*l + (k - 1)

  explicit ShCoefficients(int lmax = 0);
  cplx& at(int l, int k);
  const cplx& at(int l, int k) const;
};

/// N(n, l): dimension of degree-l spherical harmonics on S^{n-1}.
std::uint64_t harmonic_dimension(int n, int ell);

ShCoefficients sh_analyze(const std::vector<cplx>& samples, const SphereGrid& grid, int lmax);
std::vector<cplx> sh_synthesize(const ShCoefficients& c, const SphereGrid& grid);

/// radius * (sum (1+l)^{2s} |c_{lk}|^2)^{1/2}: the H^s norm on a sphere of the
/// given radius for coefficients taken on the unit sphere.
double spherical_sobolev_norm(const ShCoefficients& c, double s, double radius);

/// Per-degree energy sum_m |f_lm|^2 on the unit sphere of a zonal function
/// f(x) = g(x . e), given g sampled at the nodes of `rule`.
std::vector<double> zonal_degree_energy(const std::vector<cplx>& g_at_nodes, const GaussLegendre& rule, int lmax);

/// H^s norm from per-degree energies: radius * (sum (1+l)^{2s} E_l)^{1/2}.
double degree_energy_norm(const std::vector<double>& energy, double s, double radius, int lmax = -1);

}  // namespace bornsob

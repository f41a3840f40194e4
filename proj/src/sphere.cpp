#include "bornsob/sphere.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace bornsob {

namespace {

GaussLegendre compute_gauss_legendre(std::size_t n) {
  GaussLegendre r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (std::size_t l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * double(l) - 1.0) * z * p1 - (double(l) - 1.0) * p0) / double(l);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = double(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0, p1 = z;
    for (std::size_t l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * double(l) - 1.0) * z * p1 - (double(l) - 1.0) * p0) / double(l);
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = double(n) * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

// Orthonormal associated Legendre values Pbar_l^m(x), m >= 0, including the
// (-1)^m Condon-Shortley phase, for all l <= lmax. Index l(l+1)/2 + m.
std::vector<double> normalized_legendre(int lmax, double x) {
  std::vector<double> p(std::size_t((lmax + 1) * (lmax + 2) / 2), 0.0);
  auto idx = [](int l, int m) { return std::size_t(l * (l + 1) / 2 + m); };
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    p[idx(m, m)] = pmm;
    if (m + 1 <= lmax) p[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= lmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l * l) - double(m * m)));
      const double b = std::sqrt((double((l - 1) * (l - 1)) - double(m * m)) / (4.0 * (l - 1) * (l - 1) - 1.0));
      p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
    }
  }
  return p;
}

void require_band_limit(const SphereGrid& grid, int lmax) {
  if (lmax < 0) throw DomainError("band limit must be nonnegative");
  if (grid.n_theta < std::size_t(lmax) + 1 || grid.n_phi < 2 * std::size_t(lmax) + 1)
    throw DomainError("sphere grid too coarse for the requested band limit");
}

}  // namespace

const GaussLegendre& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussLegendre>> cache;
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<GaussLegendre>(compute_gauss_legendre(n))).first;
  return *it->second;
}

SphereGrid SphereGrid::for_band_limit(double radius, int lmax) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  if (lmax < 0) throw DomainError("band limit must be nonnegative");
  SphereGrid g;
  g.radius = radius;
  g.n_theta = std::size_t(lmax) + 1;
  g.n_phi = 2 * std::size_t(lmax) + 1;
  const GaussLegendre& gl = gauss_legendre(g.n_theta);
  g.cos_theta = gl.x;
  const double dphi = 2.0 * kPi / double(g.n_phi);
  for (std::size_t i = 0; i < g.n_theta; ++i) {
    const double ct = gl.x[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (std::size_t j = 0; j < g.n_phi; ++j) {
      const double ph = dphi * double(j);
      g.directions.push_back({st * std::cos(ph), st * std::sin(ph), ct});
      g.weights.push_back(gl.w[i] * dphi * radius * radius);
    }
  }
  return g;
}

double SphereGrid::phi(std::size_t i_phi) const { return 2.0 * kPi * double(i_phi) / double(n_phi); }

ShCoefficients::ShCoefficients(int lmax_) : lmax(lmax_), coeffs(std::size_t((lmax_ + 1) * (lmax_ + 1))) {}

cplx& ShCoefficients::at(int l, int k) {
  if (l < 0 || l > lmax || k < 1 || k > 2 * l + 1) throw DomainError("coefficient index out of range");
  return coeffs[std::size_t(l * l + k - 1)];
}

const cplx& ShCoefficients::at(int l, int k) const {
  if (l < 0 || l > lmax || k < 1 || k > 2 * l + 1) throw DomainError("coefficient index out of range");
  return coeffs[std::size_t(l * l + k - 1)];
}

std::uint64_t harmonic_dimension(int n, int ell) {
  if (n < 2) throw DomainError("harmonic_dimension: n must be at least 2");
  if (ell < 0) throw DomainError("harmonic_dimension: degree must be nonnegative");
  if (ell == 0) return 1;
  // N = (2l+n-2)/(l+n-2) * C(l+n-2, l)
  long double c = 1.0L;
  for (int i = 1; i <= ell; ++i) c = c * static_cast<long double>(n - 2 + i) / static_cast<long double>(i);
  const long double v = c * static_cast<long double>(2 * ell + n - 2) / static_cast<long double>(ell + n - 2);
  return static_cast<std::uint64_t>(std::llround(v));
}

ShCoefficients sh_analyze(const std::vector<cplx>& samples, const SphereGrid& grid, int lmax) {
  require_band_limit(grid, lmax);
  if (samples.size() != grid.size()) throw DomainError("sh_analyze: sample count does not match grid");
  ShCoefficients out(lmax);
  const GaussLegendre& gl = gauss_legendre(grid.n_theta);
  const double dphi = 2.0 * kPi / double(grid.n_phi);
  std::vector<cplx> ring(std::size_t(2 * lmax + 1));
  for (std::size_t i = 0; i < grid.n_theta; ++i) {
    // F_m = dphi * sum_p f(theta_i, phi_p) e^{-i m phi_p}
    for (int m = -lmax; m <= lmax; ++m) {
      cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < grid.n_phi; ++j)
        acc += samples[i * grid.n_phi + j] * std::polar(1.0, -double(m) * grid.phi(j));
      ring[std::size_t(m + lmax)] = acc * dphi;
    }
    const auto p = normalized_legendre(lmax, grid.cos_theta[i]);
    for (int l = 0; l <= lmax; ++l) {
      for (int m = -l; m <= l; ++m) {
        const int am = std::abs(m);
        double plm = p[std::size_t(l * (l + 1) / 2 + am)];
        if (m < 0 && (am % 2 == 1)) plm = -plm;
        out.at(l, m + l + 1) += gl.w[i] * plm * ring[std::size_t(m + lmax)];
      }
    }
  }
  return out;
}

std::vector<cplx> sh_synthesize(const ShCoefficients& c, const SphereGrid& grid) {
  require_band_limit(grid, c.lmax);
  std::vector<cplx> out(grid.size());
  const int lmax = c.lmax;
  for (std::size_t i = 0; i < grid.n_theta; ++i) {
    const auto p = normalized_legendre(lmax, grid.cos_theta[i]);
    std::vector<cplx> fm(std::size_t(2 * lmax + 1));
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) {
        const int am = std::abs(m);
        double plm = p[std::size_t(l * (l + 1) / 2 + am)];
        if (m < 0 && (am % 2 == 1)) plm = -plm;
        fm[std::size_t(m + lmax)] += c.at(l, m + l + 1) * plm;
      }
    for (std::size_t j = 0; j < grid.n_phi; ++j) {
      cplx acc(0.0, 0.0);
      for (int m = -lmax; m <= lmax; ++m) acc += fm[std::size_t(m + lmax)] * std::polar(1.0, double(m) * grid.phi(j));
      out[i * grid.n_phi + j] = acc;
    }
  }
  return out;
}

double spherical_sobolev_norm(const ShCoefficients& c, double s, double radius) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  double acc = 0.0;
  for (int l = 0; l <= c.lmax; ++l) {
    const double w = std::pow(1.0 + l, 2.0 * s);
    for (int k = 1; k <= 2 * l + 1; ++k) acc += w * std::norm(c.at(l, k));
  }
  return radius * std::sqrt(acc);
}

std::vector<double> zonal_degree_energy(const std::vector<cplx>& g, const GaussLegendre& rule, int lmax) {
  const std::size_t n = rule.x.size();
  if (g.size() != n) throw DomainError("zonal_degree_energy: sample count does not match rule");
  if (lmax < 0) throw DomainError("band limit must be nonnegative");
  std::vector<double> energy(std::size_t(lmax) + 1, 0.0);
  std::vector<double> p_prev(n, 1.0), p_cur(rule.x), wre(n), wim(n);
  for (std::size_t i = 0; i < n; ++i) {
    wre[i] = rule.w[i] * g[i].real();
    wim[i] = rule.w[i] * g[i].imag();
  }
  auto project = [&](const std::vector<double>& p, int l) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += wre[i] * p[i];
      im += wim[i] * p[i];
    }
    // g_l = 2 pi int g P_l ; sum_m |f_lm|^2 = |g_l|^2 (2l+1)/(4 pi)
    const double gl2 = 4.0 * kPi * kPi * (re * re + im * im);
    energy[std::size_t(l)] = gl2 * (2.0 * l + 1.0) / (4.0 * kPi);
  };
  project(p_prev, 0);
  if (lmax >= 1) project(p_cur, 1);
  for (int l = 2; l <= lmax; ++l) {
    const double a = (2.0 * l - 1.0) / double(l), b = (l - 1.0) / double(l);
    for (std::size_t i = 0; i < n; ++i) {
      const double next = a * rule.x[i] * p_cur[i] - b * p_prev[i];
      p_prev[i] = p_cur[i];
      p_cur[i] = next;
    }
    project(p_cur, l);
  }
  return energy;
}

double degree_energy_norm(const std::vector<double>& energy, double s, double radius, int lmax) {
  const std::size_t top = lmax < 0 ? energy.size() : std::min(energy.size(), std::size_t(lmax) + 1);
  double acc = 0.0;
  for (std::size_t l = 0; l < top; ++l) acc += std::pow(1.0 + double(l), 2.0 * s) * energy[l];
  return radius * std::sqrt(acc);
}

}  // namespace bornsob

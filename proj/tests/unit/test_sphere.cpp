/// Spherical-harmonic analysis, Sobolev norm on the sphere, and the zonal fast path.
#include "doctest.h"

#include <cmath>
#include <random>

#include "bornsob/sphere.hpp"

using namespace bornsob;

namespace {

ShCoefficients random_coeffs(int lmax, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ShCoefficients c(lmax);
  for (auto& v : c.coeffs) v = cplx(nd(rng), nd(rng));
  return c;
}

double max_diff(const ShCoefficients& a, const ShCoefficients& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
  return m;
}

}  // namespace

TEST_CASE("harmonic dimension") {
  CHECK(harmonic_dimension(3, 0) == 1);
  CHECK(harmonic_dimension(3, 1) == 3);
  CHECK(harmonic_dimension(3, 2) == 5);
  for (int l = 0; l < 50; ++l) CHECK(harmonic_dimension(3, l) == std::uint64_t(2 * l + 1));
  CHECK(harmonic_dimension(2, 5) == 2);
  CHECK(harmonic_dimension(4, 2) == 9);  // (l+1)^2 on S^3
  std::uint64_t total = 0;
  for (int l = 0; l <= 10; ++l) total += harmonic_dimension(3, l);
  CHECK(total == 121);
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  for (std::size_t n : {1u, 2u, 7u, 64u, 501u}) {
    const auto& gl = gauss_legendre(n);
    for (int deg = 0; deg < int(2 * n); deg += std::max(1, int(n) / 5)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += gl.w[i] * std::pow(gl.x[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1.0);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("sphere grid weights sum to the area") {
  for (double r : {1.0, 100.0}) {
    const auto g = SphereGrid::for_band_limit(r, 20);
    double s = 0.0;
    for (double w : g.weights) s += w;
    CHECK(s == doctest::Approx(4 * kPi * r * r).epsilon(1e-10));
  }
}

TEST_CASE("analysis of single harmonics") {
  const int L = 8;
  const auto grid = SphereGrid::for_band_limit(1.0, L);
  std::vector<cplx> y00(grid.size(), cplx(1.0 / std::sqrt(4 * kPi), 0.0));
  auto c = sh_analyze(y00, grid, L);
  CHECK(std::abs(c.at(0, 1) - 1.0) < 1e-12);
  for (std::size_t i = 1; i < c.coeffs.size(); ++i) CHECK(std::abs(c.coeffs[i]) < 1e-12);

  ShCoefficients two(L);
  two.at(1, 3) = 2.0;
  auto back = sh_analyze(sh_synthesize(two, grid), grid, L);
  CHECK(max_diff(back, two) < 1e-12);
  // Y_10 = sqrt(3/(4pi)) cos theta
  std::vector<cplx> y10(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) y10[i] = 2.0 * std::sqrt(3.0 / (4 * kPi)) * grid.directions[i][2];
  CHECK(std::abs(sh_analyze(y10, grid, L).at(1, 2) - 2.0) < 1e-12);
}

TEST_CASE("synthesize-analyze roundtrip up to band limit 60") {
  for (int L : {5, 23, 60}) {
    const auto grid = SphereGrid::for_band_limit(3.0, L);
    const auto c = random_coeffs(L, 11u + unsigned(L));
    CHECK(max_diff(sh_analyze(sh_synthesize(c, grid), grid, L), c) < 1e-10);
  }
  const auto coarse = SphereGrid::for_band_limit(1.0, 4);
  CHECK_THROWS_AS(sh_analyze(std::vector<cplx>(coarse.size()), coarse, 5), DomainError);
}

TEST_CASE("spherical sobolev norm") {
  ShCoefficients c(3);
  c.at(0, 1) = 1.0;
  CHECK(spherical_sobolev_norm(c, 2.5, 1.0) == doctest::Approx(1.0));
  ShCoefficients d(3);
  d.at(1, 2) = 1.0;
  CHECK(spherical_sobolev_norm(d, 1.0, 1.0) == doctest::Approx(2.0));

  const int L = 12;
  const double R = 7.0;
  const auto grid = SphereGrid::for_band_limit(R, L);
  const auto r = random_coeffs(L, 5);
  const auto f = sh_synthesize(r, grid);
  double l2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) l2 += grid.weights[i] * std::norm(f[i]);
  CHECK(spherical_sobolev_norm(r, 0.0, R) == doctest::Approx(std::sqrt(l2)).epsilon(1e-10));

  double prev = 0.0;
  for (double s = -3; s <= 3; s += 0.5) {
    const double v = spherical_sobolev_norm(r, s, R);
    CHECK(v >= prev);
    prev = v;
    const double n0 = spherical_sobolev_norm(r, 0.0, R);
    CHECK(spherical_sobolev_norm(r, s, R) * spherical_sobolev_norm(r, -s, R) >= n0 * n0 * (1 - 1e-14));
  }
}

TEST_CASE("zonal degree energies match the full transform") {
  // G(y, .) for a point source at distance rho on the z axis, sampled on the unit sphere.
  const double rho = 0.6, k = 2.0;
  auto g = [&](double t) {
    const double d = std::sqrt(1.0 + rho * rho - 2.0 * rho * t);
    return std::exp(cplx(0.0, k * d)) / (4 * kPi * d);
  };
  const int L = 40;
  const auto grid = SphereGrid::for_band_limit(1.0, L);
  std::vector<cplx> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = g(grid.directions[i][2]);
  const auto full = sh_analyze(samples, grid, L);

  const auto& rule = gauss_legendre(2 * L + 64);
  std::vector<cplx> gv(rule.x.size());
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = g(rule.x[i]);
  const auto energy = zonal_degree_energy(gv, rule, L);
  for (int l = 0; l <= 30; ++l) {
    double e = 0.0;
    for (int kk = 1; kk <= 2 * l + 1; ++kk) e += std::norm(full.at(l, kk));
    CHECK(energy[std::size_t(l)] == doctest::Approx(e).epsilon(1e-8));
  }
  // off-axis source: same energies by rotation invariance
  const Vec3 y{0.3, -0.4, std::sqrt(rho * rho - 0.25)};
  for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = g((grid.directions[i][0] * y[0] + grid.directions[i][1] * y[1] + grid.directions[i][2] * y[2]) / rho);
  const auto rotated = sh_analyze(samples, grid, L);
  for (int l = 0; l <= 20; ++l) {
    double e = 0.0;
    for (int kk = 1; kk <= 2 * l + 1; ++kk) e += std::norm(rotated.at(l, kk));
    CHECK(energy[std::size_t(l)] == doctest::Approx(e).epsilon(1e-8));
  }
}

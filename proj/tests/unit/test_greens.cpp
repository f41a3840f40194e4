/// Green's functions and Bessel kernels against independent oracles:
/// 50-digit power series and adaptive quadrature of the K0 integral.
#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <vector>

#include "bornsob/greens.hpp"

using namespace bornsob;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

const mp kGammaMp("0.57721566490153286060651209008240243104215933593992");

// J_nu and Y_nu (nu = 0, 1) from their power series in 50-digit arithmetic.
std::pair<mp, mp> jy_oracle(int nu, double xd) {
  const mp x = xd, q = x * x / 4, pi = boost::multiprecision::acos(mp(-1));
  mp term = (nu == 0) ? mp(1) : x / 2;
  mp j = term, hk = 0, hk1 = (nu == 0) ? mp(0) : mp(1);
  mp tail = (nu == 0) ? mp(0) : term * (hk + hk1 - 2 * kGammaMp);
  for (int k = 1; k < 600; ++k) {
    term *= -q / (mp(k) * mp(k + nu));
    hk += mp(1) / k;
    if (nu == 1) hk1 += mp(1) / (k + 1);
    j += term;
    tail += (nu == 0) ? -hk * term : term * (hk + hk1 - 2 * kGammaMp);
    if (abs(term) < mp("1e-45")) break;
  }
  mp y;
  if (nu == 0)
    y = 2 / pi * ((log(x / 2) + kGammaMp) * j + tail);
  else
    y = 2 / pi * log(x / 2) * j - 2 / (pi * x) - tail / pi;
  return {j, y};
}

double k0_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([x](double t) { return std::exp(-x * std::cosh(t)); }, 0.0,
                              std::numeric_limits<double>::infinity());
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return xs;
}

}  // namespace

TEST_CASE("green's function table values") {
  const WaveParams h3{1.0, WaveKind::Helmholtz, 3};
  const cplx g = greens_value(h3, 1.0);
  CHECK(std::abs(g - std::exp(cplx(0, 1)) / (4 * kPi)) < 1e-15);
  CHECK(std::abs(g) == doctest::Approx(0.0795775).epsilon(1e-6));
  CHECK(greens_value({2.0, WaveKind::Diffuse, 1}, 0.0).real() == doctest::Approx(0.25));
  // e^{-1}/(4 pi) = 0.02927492...
  CHECK(greens_value({1.0, WaveKind::Diffuse, 3}, 1.0).real() == doctest::Approx(std::exp(-1.0) / (4 * kPi)).epsilon(1e-15));
  CHECK_THROWS_AS(greens_value(h3, 0.0), DomainError);
  CHECK_THROWS_AS(greens_value({1.0, WaveKind::Helmholtz, 2}, 0.0), DomainError);
  CHECK_NOTHROW(greens_value({1.0, WaveKind::Helmholtz, 1}, 0.0));
}

TEST_CASE("diffuse green's functions are positive and decreasing") {
  for (int dim = 1; dim <= 3; ++dim) {
    const WaveParams p{1.3, WaveKind::Diffuse, dim};
    double prev = greens_value(p, 0.01).real();
    CHECK(prev > 0.0);
    for (double r : log_grid(0.02, 30.0, 40)) {
      const cplx g = greens_value(p, r);
      CHECK(g.imag() == 0.0);
      CHECK(g.real() > 0.0);
      CHECK(g.real() < prev);
      prev = g.real();
    }
  }
}

TEST_CASE("K0 matches adaptive quadrature of its integral representation") {
  CHECK(bessel_k0(1.0) == doctest::Approx(0.4210244).epsilon(1e-7));
  for (double x : log_grid(1e-3, 50.0, 50)) {
    const double ref = k0_quadrature(x);
    CHECK(std::fabs(bessel_k0(x) - ref) <= 1e-10 * ref);
  }
  for (double x : {2.0, 5.0, 10.0}) CHECK(bessel_k0(x) < std::exp(-x));
  CHECK(bessel_k0(10.0) < bessel_k0(5.0));
  CHECK_THROWS_AS(bessel_k0(0.0), DomainError);
}

TEST_CASE("K1 matches the derivative identity K1 = -K0'") {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double x : log_grid(1e-3, 50.0, 30)) {
    const double ref = integrator.integrate(
        [x](double t) {
          const double c = std::cosh(t);
          return x * c > 700.0 ? 0.0 : c * std::exp(-x * c);
        }, 0.0,
        std::numeric_limits<double>::infinity());
    CHECK(std::fabs(bessel_k1(x) - ref) <= 1e-10 * ref);
  }
}

TEST_CASE("Hankel functions match 50-digit power series") {
  CHECK(hankel1_0(1.0).real() == doctest::Approx(0.7651977).epsilon(1e-7));
  for (double x : log_grid(1e-3, 50.0, 50)) {
    for (int nu = 0; nu <= 1; ++nu) {
      const auto [j, y] = jy_oracle(nu, x);
      const cplx ref{static_cast<double>(j), static_cast<double>(y)};
      const cplx got = nu == 0 ? hankel1_0(x) : hankel1_1(x);
      CHECK(std::abs(got - ref) <= 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("Hankel asymptotic amplitude and small-argument singularity") {
  const double x = 50.0;
  CHECK(std::abs(hankel1_0(x)) == doctest::Approx(std::sqrt(2.0 / (kPi * x))).epsilon(1e-2));
  CHECK(hankel1_0(1e-3).imag() < hankel1_0(1e-2).imag());
  CHECK(hankel1_0(1e-8).imag() < -10.0);
  // Wronskian J1 Y0 - J0 Y1 = 2/(pi x)
  for (double xx : log_grid(1e-2, 40.0, 25)) {
    const cplx h0 = hankel1_0(xx), h1 = hankel1_1(xx);
    const double w = h1.real() * h0.imag() - h0.real() * h1.imag();
    CHECK(w == doctest::Approx(2.0 / (kPi * xx)).epsilon(1e-10));
  }
}

TEST_CASE("cell integrals agree with radial quadrature") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse}) {
    for (int dim = 2; dim <= 3; ++dim) {
      const WaveParams p{2.1, kind, dim};
      const double rho = 0.37;
      auto part = [&](bool imag) {
        return ts.integrate([&](double r) {
          const cplx g = greens_value(p, r);
          const double shell = dim == 2 ? 2 * kPi * r : 4 * kPi * r * r;
          return (imag ? g.imag() : g.real()) * shell;
        }, 0.0, rho);
      };
      const cplx ref(part(false), part(true));
      CHECK(std::abs(greens_cell_integral(p, rho) - ref) < 1e-9 * std::abs(ref));
    }
  }
}

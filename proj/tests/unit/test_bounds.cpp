/// Bound constants: closed forms, quadrature, spherical kernel norms against
/// addition-theorem series, and the trend and scaling properties of sweeps.
#include "doctest.h"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <random>

#include "bornsob/bounds.hpp"

using namespace bornsob;

namespace {

ScatteringConfig centred(WaveKind kind, double k, double a, int a_param = 0) {
  ScatteringConfig cfg;
  cfg.wave = {k, kind, 3};
  cfg.ball_radius = a;
  cfg.ball_center = {0.0, 0.0, 0.0};
  cfg.outer_radius = 10.0;
  cfg.sobolev.a_param = a_param;
  return cfg;
}

double sphere_l2_oracle(WaveKind kind, double k, double R, double rho) {
  const double pre = R / (8.0 * kPi * rho);
  if (kind == WaveKind::Helmholtz) return std::sqrt(pre * std::log((R + rho) / (R - rho)));
  using boost::math::expint;
  return std::sqrt(pre * (expint(1, 2.0 * k * (R - rho)) - expint(1, 2.0 * k * (R + rho))));
}

// Degree energies of G(y, .) on the unit sphere from the addition theorem.
double sphere_hb_oracle(WaveKind kind, double k, double R, double rho, double b) {
  double acc = 0.0;
  for (int l = 0; l <= 160; ++l) {
    double amp;
    if (kind == WaveKind::Helmholtz) {
      const double j = boost::math::sph_bessel(l, k * rho);
      const double jr = boost::math::sph_bessel(l, k * R), yr = boost::math::sph_neumann(l, k * R);
      amp = k * std::abs(j) * std::hypot(jr, yr);
    } else {
      const double x = k * rho, z = k * R;
      const double i = std::sqrt(kPi / (2.0 * x)) * boost::math::cyl_bessel_i(l + 0.5, x);
      const double kk = std::sqrt(kPi / (2.0 * z)) * boost::math::cyl_bessel_k(l + 0.5, z);
      amp = 2.0 * k / kPi * i * kk;
    }
    acc += std::pow(1.0 + l, 2.0 * b) * amp * amp * (2.0 * l + 1.0) / (4.0 * kPi);
  }
  return R * std::sqrt(acc);
}

}  // namespace

TEST_CASE("mu closed form reference values") {
  CHECK(mu_closed_form(centred(WaveKind::Helmholtz, 1, 1)) == doctest::Approx(0.2820948).epsilon(1e-7));
  CHECK(mu_closed_form(centred(WaveKind::Diffuse, 1, 1)) == doctest::Approx(0.185479).epsilon(2e-5));
  CHECK(mu_closed_form(centred(WaveKind::Helmholtz, 1, 1, 1)) == doctest::Approx(0.178413).epsilon(2e-6));
  CHECK(1.0 / mu_closed_form(centred(WaveKind::Helmholtz, 1, 1)) == doctest::Approx(3.5449).epsilon(1e-4));
  auto cfg = centred(WaveKind::Helmholtz, 1, 1);
  cfg.wave.dim = 2;
  CHECK_THROWS_AS(mu_closed_form(cfg), DomainError);
}

TEST_CASE("mu quadrature agrees with the closed form on the (k, a) grid") {
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse})
    for (double k : {0.5, 1.0, 2.0})
      for (double a : {0.5, 1.0, 1.5}) {
        const auto cfg = centred(kind, k, a, 1);
        CHECK(mu_quadrature(cfg) == doctest::Approx(mu_closed_form(cfg)).epsilon(1e-3));
      }
  const double m1 = mu_quadrature(centred(WaveKind::Helmholtz, 1, 1));
  const double m2 = mu_quadrature(centred(WaveKind::Helmholtz, 2, 1));
  CHECK(m2 / m1 == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("sup sample covers centre, poles, shell and the nearest point") {
  const auto cfg = ScatteringConfig::offset_geometry(WaveKind::Helmholtz);
  const auto pts = sup_sample_points(cfg);
  CHECK(pts.size() == 34);
  double far = 0.0;
  for (const auto& p : pts) {
    CHECK(dist3(p, cfg.ball_center) <= cfg.ball_radius);
    far = std::max(far, norm3(p));
  }
  CHECK(far == doctest::Approx(99.0));
}

TEST_CASE("sphere L2 norm of the kernel matches the closed forms") {
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse})
    for (double rho : {0.5, 50.0, 97.0, 99.0}) {
      const auto n = kernel_sphere_norm(kind, 1.0, 100.0, rho, 0.0);
      CHECK(n.value == doctest::Approx(sphere_l2_oracle(kind, 1.0, 100.0, rho)).epsilon(2e-4));
    }
}

TEST_CASE("sphere H^b norm of the kernel matches the addition theorem") {
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse})
    for (double b : {-1.0, 0.5, 1.5, 3.0}) {
      const auto n = kernel_sphere_norm(kind, 1.0, 10.0, 5.0, b);
      CHECK(n.value == doctest::Approx(sphere_hb_oracle(kind, 1.0, 10.0, 5.0, b)).epsilon(2e-4));
    }
  CHECK_THROWS_AS(kernel_sphere_norm(WaveKind::Helmholtz, 1.0, 10.0, 10.0, 0.0), DomainError);
  LmaxPolicy tight;
  tight.cap = 64;
  CHECK_THROWS_AS(kernel_sphere_norm(WaveKind::Helmholtz, 1.0, 100.0, 99.0, 3.0, tight), NumericError);
}

TEST_CASE("nu at b = 0 squares the L2 sup") {
  auto cfg = ScatteringConfig::offset_geometry(WaveKind::Diffuse);
  const NuResult r = nu_spectral(cfg);
  const double vol = 4.0 / 3.0 * kPi;
  CHECK(r.sup_hb == r.sup_l2);
  CHECK(r.nu == doctest::Approx(std::sqrt(vol) * r.sup_l2 * r.sup_l2).epsilon(1e-12));
  CHECK(r.c_a == doctest::Approx(std::sqrt(vol) * r.sup_l2).epsilon(1e-12));
  cfg.ball_radius = 2.5;
  CHECK_THROWS_AS(nu_spectral(cfg), DomainError);
}

TEST_CASE("nu strictly increases with b on the offset geometry") {
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse}) {
    auto cfg = ScatteringConfig::offset_geometry(kind);
    double prev = 0.0;
    for (int b = -2; b <= 6; ++b) {
      cfg.sobolev.b_data = b;
      const double nu = nu_spectral(cfg).nu;
      CHECK(nu > prev);
      prev = nu;
    }
  }
}

TEST_CASE("radii") {
  CHECK(radius_classic(0.25, 0.75) == doctest::Approx(1.0));
  CHECK(radius_geometric(1.0, 0.0, 0.0) == doctest::Approx((std::sqrt(65.0) - 8.0) / 2.0).epsilon(1e-14));
  CHECK(radius_geometric(1.0, 0.0, 0.0) == doctest::Approx(0.0311288).epsilon(1e-6));
  CHECK(radius_geometric(2.0, 3.0, 1.0) == doctest::Approx((std::sqrt(145.0) - 12.0) / 4.0).epsilon(1e-14));
  CHECK_THROWS_AS(radius_classic(0.0, 1.0), DomainError);

  // Under the Q-assumption C1 = 2, so the geometric radius wins iff nu > mu (2 sqrt 65 + 15).
  const double threshold = 2.0 * std::sqrt(65.0) + 15.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const double mu = std::pow(10.0, lg(rng)), nu = mu * threshold * std::pow(10.0, 0.2 * lg(rng));
    const double k1 = 0.5 / (mu + nu);
    const bool wins = radius_geometric(mu, nu, k1) > radius_classic(mu, nu);
    CHECK(wins == (nu > mu * threshold));
  }
}

TEST_CASE("classic constants") {
  auto c = classic_constants(0.4, 0.6, 0.5, 0.0, 0.0);
  CHECK(c.C == doctest::Approx(0.5 * std::exp(2.0)));
  CHECK(c.C == doctest::Approx(3.6945).epsilon(1e-4));
  CHECK(c.C_star == c.C);
  CHECK(c.C_tilde == doctest::Approx(c.C_star * 0.5));
  CHECK(c.C_ab == doctest::Approx(0.5 * std::exp(2.0)));
  CHECK(c.flags.empty());

  double prev = 0.0;
  for (double Q : {0.9, 0.95, 0.99}) {
    const double C = classic_constants(1.0, 0.0, Q, 0.0, 0.0).C;
    CHECK(C > 10.0 * std::max(prev, 1.0));
    prev = C;
  }
  CHECK(classic_constants(1.0, 0.0, 1.0, 0.0, 0.0).flags == std::vector<std::string>{"Q_range"});
  const auto bad = classic_constants(1.0, 0.0, 0.5, 3.0, 1.5);
  CHECK(bad.flags == std::vector<std::string>{"M_range", "script_M_range"});
  CHECK(std::isnan(bad.C_tilde));
  CHECK(std::isnan(bad.C_ab));
  CHECK(std::isfinite(bad.C));

  // small Q: C < 1/(mu+nu) so C* takes the reciprocal
  const auto small = classic_constants(2.0, 2.0, 0.1, 0.0, 0.0);
  CHECK(small.C_star == doctest::Approx(0.25));
}

TEST_CASE("constants scale as 1/c under mu, nu -> c mu, c nu") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (int t = 0; t < 100; ++t) {
    const double mu = 3.0 * u(rng), nu = 2.0 * u(rng), Q = u(rng), M = u(rng), sM = u(rng);
    const double c = 0.1 + 5.0 * u(rng);
    const auto a = classic_constants(mu, nu, Q, M, sM / (mu + nu));
    const auto b = classic_constants(c * mu, c * nu, Q, M, sM / (c * (mu + nu)));
    CHECK(b.C == doctest::Approx(a.C / c).epsilon(1e-12));
    CHECK(b.C_star == doctest::Approx(a.C_star / c).epsilon(1e-12));
    CHECK(b.C_tilde == doctest::Approx(a.C_tilde / c).epsilon(1e-12));
    CHECK(b.C_ab == doctest::Approx(a.C_ab).epsilon(1e-12));
    CHECK(radius_classic(c * mu, c * nu) == doctest::Approx(radius_classic(mu, nu) / c).epsilon(1e-12));
    CHECK(radius_geometric(c * mu, c * nu, Q / (c * (mu + nu))) ==
          doctest::Approx(radius_geometric(mu, nu, Q / (mu + nu)) / c).epsilon(1e-12));
  }
}

TEST_CASE("geometric constants and the Q2 constraint") {
  const auto g0 = geometric_constants(1.0, 0.0, 5.0, 0.3);
  CHECK(g0.C_tilde_ab == doctest::Approx(1.0));
  CHECK(g0.C1 == 2.0);
  CHECK(g0.valid);
  CHECK(g0.m1_limit == doctest::Approx(1.0));

  const auto g = geometric_constants(1.0, 4.0, 1.0, 0.5);
  CHECK(g.C1 == 4.0);
  CHECK(g.C_tilde_ab == doctest::Approx(1.0 / (1.0 - 4.0 / (4.5 * 4.5))));
  CHECK(g.m1_limit == doctest::Approx(1.0 - std::sqrt(0.8)));
  CHECK_FALSE(g.valid);

  // script_M1 = Q2/(mu+nu) and nu ||K1|| = Q R/(1+R) turn the validity test into Q2 < bound.
  for (double R : {0.1, 1.0, 30.0})
    for (double Q : {0.2, 0.7}) {
      const double mu = 1.0, nu = R, bound = q2_constraint(R, Q);
      const double k1 = Q / (mu + nu);
      CHECK(geometric_constants(mu, nu, k1, 0.999 * bound / (mu + nu)).valid);
      CHECK_FALSE(geometric_constants(mu, nu, k1, 1.001 * bound / (mu + nu)).valid);
    }

  double lowest = 1e300;
  for (int i = 0; i <= 4000; ++i) {
    const double R = std::pow(10.0, -3.0 + 7.0 * i / 4000.0);
    for (double Q : {0.5, 0.9, 0.99, 1.0 - 1e-9}) lowest = std::min(lowest, q2_constraint(R, Q));
  }
  CHECK(lowest == doctest::Approx(0.737).epsilon(2e-3));
  CHECK(q2_constraint(1e4, 0.5) > 1.0);
}

TEST_CASE("report on the offset geometry") {
  const auto r = compute_report(ScatteringConfig::offset_geometry(WaveKind::Helmholtz));
  CHECK(r.r_classic == doctest::Approx(1.0 / (r.mu + r.nu)));
  CHECK(r.r_forward == doctest::Approx(1.0 / r.mu));
  CHECK(r.R_ratio == doctest::Approx(r.nu / r.mu));
  CHECK(r.flag_string() == "ok");
  for (double v : {r.mu, r.nu, r.c_a, r.C, r.C_star, r.C_tilde, r.C_ab, r.C_tilde_ab}) CHECK(v > 0.0);
  CHECK(r.lmax >= 216);

  BoundsOptions opt;
  opt.Q2 = 0.99;
  opt.mu_only = true;
  const auto m = compute_report(ScatteringConfig::offset_geometry(WaveKind::Helmholtz), opt);
  CHECK(m.flag_string() == "nu_unavailable");
  CHECK(std::isnan(m.nu));
}

TEST_CASE("ball radius sweep: Helmholtz radius shrinks, diffuse stays bounded") {
  std::vector<double> radii;
  for (int a = 1; a <= 11; ++a) radii.push_back(a);
  for (int ap : {0, 1}) {
    auto base = ScatteringConfig::offset_geometry(WaveKind::Helmholtz);
    base.sobolev.a_param = ap;
    BoundsOptions opt;
    opt.mu_only = true;
    const auto h = sweep(SweepAxis::BallRadius, radii, base, opt);
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i].report.r_forward < h[i - 1].report.r_forward);
    CHECK(h.back().report.r_forward / h.front().report.r_forward < 0.35);
    base.wave.kind = WaveKind::Diffuse;
    const auto d = sweep(SweepAxis::BallRadius, radii, base, opt);
    CHECK(d[10].report.r_forward > 0.5 * d[3].report.r_forward);
  }
}

TEST_CASE("a_param sweep: radius grows with a_param") {
  std::vector<double> ap;
  for (int i = 0; i <= 10; ++i) ap.push_back(i);
  BoundsOptions opt;
  opt.mu_only = true;
  for (auto kind : {WaveKind::Helmholtz, WaveKind::Diffuse}) {
    auto base = ScatteringConfig::offset_geometry(kind);
    const auto rows = sweep(SweepAxis::AParam, ap, base, opt);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].report.r_forward > rows[i - 1].report.r_forward);
    // at ball radius 1 the Poincare sum converges, so the increments die out
    const double d1 = rows[1].report.r_forward - rows[0].report.r_forward;
    const double d10 = rows[10].report.r_forward - rows[9].report.r_forward;
    CHECK(d10 < 0.05 * d1);
    base.ball_radius = 0.5;
    const auto half = sweep(SweepAxis::AParam, ap, base, opt);
    CHECK(half[10].report.r_forward > 10.0 * half[0].report.r_forward);
  }
  CHECK_THROWS_AS(sweep(SweepAxis::AParam, {0.5}, ScatteringConfig::offset_geometry(WaveKind::Helmholtz)),
                  DomainError);
}

TEST_CASE("b sweep: classic radius nonincreasing, geometric constant, Helmholtz crossover near 1") {
  std::vector<double> bs;
  for (int b = -2; b <= 6; ++b) bs.push_back(b);
  const auto rows = sweep(SweepAxis::BData, bs, ScatteringConfig::offset_geometry(WaveKind::Helmholtz));
  int crossover = 99;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    if (i > 0) {
      CHECK(r.r_classic <= rows[i - 1].report.r_classic);
      CHECK(r.r_geometric == rows[0].report.r_geometric);
    }
    if (r.r_geometric > r.r_classic && crossover == 99) crossover = int(rows[i].axis_value);
  }
  CHECK(crossover >= 0);
  CHECK(crossover <= 2);
  const auto again = sweep(SweepAxis::BData, bs, ScatteringConfig::offset_geometry(WaveKind::Helmholtz));
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].report.nu == rows[i].report.nu);
}

TEST_CASE("sweep axis names") {
  CHECK(parse_sweep_axis("ball") == SweepAxis::BallRadius);
  CHECK(parse_sweep_axis("a") == SweepAxis::AParam);
  CHECK(parse_sweep_axis("b_data") == SweepAxis::BData);
  CHECK(to_string(SweepAxis::AParam) == "a_param");
  CHECK_THROWS_AS(parse_sweep_axis("k"), DomainError);
}

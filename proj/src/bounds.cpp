#include "bornsob/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bornsob/sphere.hpp"

namespace bornsob {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ball_volume(double a) { return 4.0 / 3.0 * kPi * a * a * a; }

WaveParams dim3(const ScatteringConfig& cfg) {
  WaveParams p = cfg.wave;
  if (p.dim != 3) throw DomainError("bounds are computed for three-dimensional geometry only");
  p.validate();
  return p;
}

/// |G(r)|^2 r^2, the radial integrand of ||G(y, .)||^2 in spherical coordinates about y.
double radial_density(const WaveParams& p, double r) {
  const double base = 1.0 / (16.0 * kPi * kPi);
  return p.kind == WaveKind::Helmholtz ? base : base * std::exp(-2.0 * p.k * r);
}

/// int_{B_a} |G(x - y)|^2 dx with n-point Gauss rules on each u-panel and on the radial segment.
double ball_l2_squared(const WaveParams& p, double v, double a, const std::vector<double>& breaks, std::size_t n) {
  const GaussLegendre& gl = gauss_legendre(n);
  const double c = a * a - v * v;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double lo = breaks[j], hi = breaks[j + 1];
    const double hu = 0.5 * (hi - lo), mu = 0.5 * (hi + lo);
    double panel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = mu + hu * gl.x[i];
      const double rmax = -v * u + std::sqrt(std::max(0.0, v * v * u * u + c));
      double inner = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const double r = 0.5 * rmax * (1.0 + gl.x[q]);
        inner += gl.w[q] * radial_density(p, r);
      }
      panel += gl.w[i] * 0.5 * rmax * inner;
    }
    total += hu * panel;
  }
  return 2.0 * kPi * total;
}

/// u-panels graded toward 0, where the chord length turns sharply when y sits near the ball surface.
std::vector<double> u_breaks(double v, double a) {
  std::vector<double> pos{0.0};
  if (v > 0.0) {
    const double knee = std::sqrt(std::max(0.0, a * a - v * v)) / v;
    for (double s = 0.5; s > knee && s > 1e-12; s *= 0.25) pos.push_back(s);
  }
  pos.push_back(1.0);
  std::sort(pos.begin(), pos.end());
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it > 0.0) out.push_back(-*it);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

}  // namespace

ScatteringConfig ScatteringConfig::offset_geometry(WaveKind kind, double k) {
  ScatteringConfig cfg;
  cfg.wave = WaveParams{k, kind, 3};
  cfg.ball_radius = 1.0;
  cfg.ball_center = {98.0, 0.0, 0.0};
  cfg.outer_radius = 100.0;
  return cfg;
}

bool ScatteringConfig::ball_inside_sphere() const { return outer_radius > norm3(ball_center) + ball_radius; }

void ScatteringConfig::validate(bool need_sphere) const {
  wave.validate();
  if (!(ball_radius > 0.0) || !std::isfinite(ball_radius)) throw DomainError("ball radius must be positive");
  if (!(outer_radius > 0.0)) throw DomainError("outer radius must be positive");
  if (need_sphere && !ball_inside_sphere())
    throw DomainError("ball must lie strictly inside the measurement sphere");
}

std::vector<Vec3> sup_sample_points(const ScatteringConfig& cfg) {
  const Vec3& c = cfg.ball_center;
  const double a = cfg.ball_radius;
  std::vector<Vec3> pts;
  pts.push_back(c);
  const double rp = a * (1.0 - 1e-6);
  for (int axis = 0; axis < 3; ++axis)
    for (int sgn : {1, -1}) {
      Vec3 p = c;
      p[std::size_t(axis)] += sgn * rp;
      pts.push_back(p);
    }
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int l = -1; l <= 1; ++l) {
        if (i == 0 && j == 0 && l == 0) continue;
        const double n = std::sqrt(double(i * i + j * j + l * l));
        pts.push_back({c[0] + 0.5 * a * i / n, c[1] + 0.5 * a * j / n, c[2] + 0.5 * a * l / n});
      }
  const double cn = norm3(c);
  Vec3 dir = cn > 0.0 ? Vec3{c[0] / cn, c[1] / cn, c[2] / cn} : Vec3{1.0, 0.0, 0.0};
  pts.push_back({c[0] + a * dir[0], c[1] + a * dir[1], c[2] + a * dir[2]});
  return pts;
}

double mu_closed_form(const ScatteringConfig& cfg) {
  const WaveParams p = dim3(cfg);
  cfg.validate(false);
  const double k = p.k, a = cfg.ball_radius;
  const double P = poincare_constant(cfg.sobolev.a_param, a, 3);
  if (p.kind == WaveKind::Helmholtz) return k * k * P * std::sqrt(a / (4.0 * kPi));
  return k * k * std::exp(-0.5 * k * a) * P * std::sqrt(std::sinh(k * a) / (4.0 * kPi * k));
}

double mu_quadrature(const ScatteringConfig& cfg, double rel_tol) {
  const WaveParams p = dim3(cfg);
  cfg.validate(false);
  const double a = cfg.ball_radius;
  double sup = 0.0;
  for (const Vec3& y : sup_sample_points(cfg)) {
    const double v = std::min(dist3(y, cfg.ball_center), a);
    const auto breaks = u_breaks(v, a);
    double prev = ball_l2_squared(p, v, a, breaks, 8);
    double cur = prev;
    for (std::size_t n = 16;; n *= 2) {
      if (n > 4096) throw NumericError("mu_quadrature: refinement stalled");
      cur = ball_l2_squared(p, v, a, breaks, n);
      if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) break;
      prev = cur;
    }
    sup = std::max(sup, cur);
  }
  return p.k * p.k * poincare_constant(cfg.sobolev.a_param, a, 3) * std::sqrt(sup);
}

SphereNorm kernel_sphere_norm(WaveKind kind, double k, double outer_radius, double rho, double b,
                              const LmaxPolicy& policy) {
  if (!(rho >= 0.0 && rho < outer_radius)) throw DomainError("source point must lie inside the sphere");
  const WaveParams p{k, kind, 3};
  int L = policy.initial > 0 ? policy.initial : 2 * int(std::ceil(k * outer_radius)) + 16;
  auto norm_at = [&](int lmax) {
    const GaussLegendre& rule = gauss_legendre(std::size_t(2 * lmax + 64));
    std::vector<cplx> g(rule.x.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d2 = outer_radius * outer_radius + rho * rho - 2.0 * outer_radius * rho * rule.x[i];
      g[i] = greens_value(p, std::sqrt(std::max(d2, 0.0)));
    }
    return degree_energy_norm(zonal_degree_energy(g, rule, lmax), b, outer_radius);
  };
  double prev = norm_at(L);
  while (true) {
    const int next = 2 * L;
    if (next > policy.cap) throw NumericError("spherical band limit did not converge below the cap");
    const double cur = norm_at(next);
    if (std::abs(cur - prev) < policy.rel_tol * std::abs(cur)) return {cur, next};
    prev = cur;
    L = next;
  }
}

NuResult nu_spectral(const ScatteringConfig& cfg, const LmaxPolicy& policy) {
  const WaveParams p = dim3(cfg);
  cfg.validate(true);
  std::map<double, std::pair<SphereNorm, SphereNorm>> by_radius;  // rho -> (L^2, H^b)
  NuResult out;
  for (const Vec3& y : sup_sample_points(cfg)) {
    const double rho = norm3(y);
    auto it = by_radius.find(rho);
    if (it == by_radius.end()) {
      const SphereNorm l2 = kernel_sphere_norm(p.kind, p.k, cfg.outer_radius, rho, 0.0, policy);
      const SphereNorm hb = cfg.sobolev.b_data == 0.0
                                ? l2
                                : kernel_sphere_norm(p.kind, p.k, cfg.outer_radius, rho, cfg.sobolev.b_data, policy);
      it = by_radius.emplace(rho, std::make_pair(l2, hb)).first;
    }
    out.sup_l2 = std::max(out.sup_l2, it->second.first.value);
    out.sup_hb = std::max(out.sup_hb, it->second.second.value);
    out.lmax = std::max({out.lmax, it->second.first.lmax, it->second.second.lmax});
  }
  out.c_a = std::sqrt(ball_volume(cfg.ball_radius)) * out.sup_l2;
  out.nu = p.k * p.k * poincare_constant(cfg.sobolev.a_param, cfg.ball_radius, 3) * out.c_a * out.sup_hb;
  return out;
}

double radius_classic(double mu, double nu) {
  if (!(mu > 0.0) || !(nu >= 0.0)) throw DomainError("radius_classic needs mu > 0 and nu >= 0");
  return 1.0 / (mu + nu);
}

double radius_geometric(double mu, double nu, double k1_norm) {
  if (!(mu > 0.0)) throw DomainError("radius_geometric needs mu > 0");
  const double C1 = std::max(2.0, k1_norm * nu);
  return (std::sqrt(16.0 * C1 * C1 + 1.0) - 4.0 * C1) / (2.0 * mu);
}

ClassicConstants classic_constants(double mu, double nu, double Q, double M, double script_M) {
  ClassicConstants out;
  const double s = mu + nu;
  if (!(Q > 0.0 && Q < 1.0)) {
    out.flags.push_back("Q_range");
    out.C = out.C_star = out.C_tilde = out.C_ab = kNaN;
    return out;
  }
  const double growth = Q * std::exp(1.0 / (1.0 - Q));
  out.C = growth / s;
  out.C_star = std::max(1.0 / s, out.C);
  if (Q * M < 1.0) {
    const double d = 1.0 - Q * M;
    out.C_tilde = out.C_star * Q / (d * d);
  } else {
    out.flags.push_back("M_range");
    out.C_tilde = kNaN;
  }
  if (s * script_M < 1.0) {
    const double d = 1.0 - s * script_M;
    out.C_ab = std::max(1.0, growth) / (d * d);
  } else {
    out.flags.push_back("script_M_range");
    out.C_ab = kNaN;
  }
  return out;
}

GeometricConstants geometric_constants(double mu, double nu, double k1_norm, double script_M1) {
  GeometricConstants out;
  const double vk = nu * k1_norm;
  out.C1 = std::max(2.0, vk);
  out.m1_limit = (1.0 - std::sqrt(vk / (1.0 + vk))) / mu;
  out.valid = script_M1 < out.m1_limit;
  const double d = 1.0 + vk - mu * script_M1;
  out.C_tilde_ab = 1.0 / (1.0 - vk / (d * d));
  return out;
}

double q2_constraint(double R, double Q) { return (1.0 + R) * (1.0 - std::sqrt(R * Q / (1.0 + R + R * Q))); }

std::string BoundsReport::flag_string() const {
  if (flags.empty()) return "ok";
  std::string s;
  for (const auto& f : flags) s += (s.empty() ? "" : "|") + f;
  return s;
}

BoundsReport compute_report(const ScatteringConfig& cfg, const BoundsOptions& opt) {
  BoundsReport r;
  r.Q = opt.Q;
  r.Q2 = opt.Q2;
  r.M = opt.M;
  r.mu = mu_closed_form(cfg);
  r.r_forward = 1.0 / r.mu;
  if (opt.mu_only || !cfg.ball_inside_sphere()) {
    r.flags.push_back("nu_unavailable");
    r.nu = r.c_a = r.r_classic = r.r_geometric = r.C = r.C_star = r.C_tilde = r.C_ab = kNaN;
    r.C1 = r.C_tilde_ab = r.script_M = r.script_M1 = r.R_ratio = r.k1_norm = r.q2_bound = kNaN;
    return r;
  }
  try {
    const NuResult nu = nu_spectral(cfg, opt.lmax);
    r.nu = nu.nu;
    r.c_a = nu.c_a;
    r.lmax = nu.lmax;
  } catch (const NumericError&) {
    r.flags.push_back("nu_failed");
    r.nu = kNaN;
  }
  const double s = r.mu + r.nu;
  r.R_ratio = r.nu / r.mu;
  r.k1_norm = r.Q / s;
  r.script_M = opt.script_M >= 0.0 ? opt.script_M : r.Q2 / s;
  r.script_M1 = opt.script_M1 >= 0.0 ? opt.script_M1 : r.Q2 / s;
  r.r_classic = 1.0 / s;
  r.r_geometric = radius_geometric(r.mu, r.nu, r.k1_norm);
  const ClassicConstants cc = classic_constants(r.mu, r.nu, r.Q, r.M, r.script_M);
  r.C = cc.C;
  r.C_star = cc.C_star;
  r.C_tilde = cc.C_tilde;
  r.C_ab = cc.C_ab;
  r.flags.insert(r.flags.end(), cc.flags.begin(), cc.flags.end());
  const GeometricConstants gc = geometric_constants(r.mu, r.nu, r.k1_norm, r.script_M1);
  r.C1 = gc.C1;
  r.C_tilde_ab = gc.C_tilde_ab;
  if (!gc.valid) r.flags.push_back("script_M1_range");
  r.q2_bound = q2_constraint(r.R_ratio, r.Q);
  return r;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "ball" || name == "ball_radius") return SweepAxis::BallRadius;
  if (name == "a" || name == "a_param") return SweepAxis::AParam;
  if (name == "b" || name == "b_data") return SweepAxis::BData;
  throw DomainError("unknown sweep axis: " + name);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::BallRadius: return "ball_radius";
    case SweepAxis::AParam: return "a_param";
    case SweepAxis::BData: return "b_data";
  }
  return "?";
}

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& values, const ScatteringConfig& base,
                            const BoundsOptions& opt) {
  if (values.empty()) throw DomainError("sweep range is empty");
  if (axis == SweepAxis::AParam)
    for (double v : values)
      if (v < 0.0 || v != std::floor(v)) throw DomainError("a_param sweep values must be nonnegative integers");
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.axis_value = values[i];
    row.cfg = base;
    switch (axis) {
      case SweepAxis::BallRadius: row.cfg.ball_radius = values[i]; break;
      case SweepAxis::AParam: row.cfg.sobolev.a_param = int(values[i]); break;
      case SweepAxis::BData: row.cfg.sobolev.b_data = values[i]; break;
    }
    row.report = compute_report(row.cfg, opt);
  });
  return rows;
}

}  // namespace bornsob

#include "bornsob/invert.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <random>

namespace bornsob {

namespace {

using Eigen::MatrixXcd;

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

std::vector<double> gaussian_taps(double sigma, double h) {
  const int half = int(std::ceil(4.0 * sigma / h));
  std::vector<double> taps(std::size_t(2 * half + 1));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double x = double(i) * h / sigma;
    taps[std::size_t(i + half)] = std::exp(-0.5 * x * x);
    sum += taps[std::size_t(i + half)];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable convolution with zero extension; axis 0 is z, axis 1 is x.
GridField convolve(const GridField& f, const std::vector<double>& taps) {
  const auto nz = f.shape[0], nx = f.shape[1];
  const int half = int(taps.size() / 2);
  GridField tmp = f, out = f;
  for (std::size_t i = 0; i < nz; ++i)
    for (std::size_t j = 0; j < nx; ++j) {
      cplx acc = 0.0;
      for (int t = -half; t <= half; ++t) {
        const long jj = long(j) + t;
        if (jj >= 0 && jj < long(nx)) acc += taps[std::size_t(t + half)] * f.values[i * nx + std::size_t(jj)];
      }
      tmp.values[i * nx + j] = acc;
    }
  for (std::size_t i = 0; i < nz; ++i)
    for (std::size_t j = 0; j < nx; ++j) {
      cplx acc = 0.0;
      for (int t = -half; t <= half; ++t) {
        const long ii = long(i) + t;
        if (ii >= 0 && ii < long(nz)) acc += taps[std::size_t(t + half)] * tmp.values[std::size_t(ii) * nx + j];
      }
      out.values[i * nx + j] = acc;
    }
  return out;
}

double l2_dot(const GridField& a, const GridField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.values[i].real() * b.values[i].real();
  return acc * a.cell_volume();
}

GridField axpy(const GridField& x, double alpha, const GridField& d) {
  GridField out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = x.values[i].real() + alpha * d.values[i].real();
  return out;
}

GridField scaled(const GridField& x, double alpha) { return axpy(x, alpha - 1.0, x); }

double max_abs(const GridField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v.real()));
  return m;
}

GridField smooth_by(const GridField& g, int a) {
  if (a == 0) return g;
  GridField out = apply_spectral_operator(g, -double(a));
  for (auto& v : out.values) v = v.real();
  return out;
}

}  // namespace

std::string to_string(ScattererKind kind) { return kind == ScattererKind::RoughDisc ? "rough_disc" : "smooth_disc"; }

ScattererKind parse_scatterer_kind(const std::string& name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  if (s == "rough_disc" || s == "rough" || s == "one" || s == "1") return ScattererKind::RoughDisc;
  if (s == "smooth_disc" || s == "smooth" || s == "two" || s == "2") return ScattererKind::SmoothDisc;
  throw DomainError("unknown scatterer kind: " + name);
}

GridField make_scatterer(const ScattererSpec& spec, const SolverSetup& setup) {
  if (!(spec.radius > 0.0) || !(spec.edge > 0.0) || spec.edge > spec.radius)
    throw DomainError("scatterer: need 0 < edge <= radius");
  GridField f = setup.model_zeros();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::hypot(f.coord(i, 1) - spec.center_x, f.coord(i, 0) - spec.center_z);
    f.values[i] = spec.amplitude * smooth_step((spec.radius - r) / spec.edge);
  }
  if (spec.kind == ScattererKind::SmoothDisc) {
    if (!(spec.smoothing > 0.0)) throw DomainError("scatterer: smoothing width must be positive");
    f = convolve(f, gaussian_taps(spec.smoothing, setup.dx));
  }
  return f;
}

Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& phi, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw DomainError("noise level must be nonnegative");
  if (level == 0.0) return phi;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MatrixXcd n(phi.rows(), phi.cols());
  for (Eigen::Index j = 0; j < n.cols(); ++j)
    for (Eigen::Index i = 0; i < n.rows(); ++i) {
      const double re = g(rng), im = g(rng);
      n(i, j) = {re, im};
    }
  const double nn = n.norm();
  return nn > 0.0 ? MatrixXcd(phi + n * (level * phi.norm() / nn)) : phi;
}

double relative_model_error(const GridField& est, const GridField& truth) {
  if (est.size() != truth.size()) throw DomainError("model error: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    num += std::norm(est.values[i] - truth.values[i]);
    den += std::norm(truth.values[i]);
  }
  if (!(den > 0.0)) throw DomainError("model error: truth is identically zero");
  return std::sqrt(num / den);
}

Misfit::Misfit(const HelmholtzSolver& solver, Eigen::MatrixXcd observed, SobolevPair sobolev)
    : solver_(solver), observed_(std::move(observed)), sobolev_(sobolev) {
  const auto& s = solver_.setup();
  if (std::size_t(observed_.rows()) != s.receivers.size() || std::size_t(observed_.cols()) != s.sources.size())
    throw DomainError("misfit: observed data must be receivers x sources");
}

double Misfit::data_term(const Eigen::MatrixXcd& residual) const {
  const auto& s = solver_.setup();
  const MatrixXcd w = apply_receiver_operator(residual, s.receiver_spacing(), sobolev_.b_data);
  return 0.5 * s.receiver_spacing() * s.source_spacing() * residual.conjugate().cwiseProduct(w).sum().real();
}

double Misfit::objective(const GridField& eta) const { return data_term(solver_.forward_map(eta) - observed_); }

Misfit::Eval Misfit::gradient_at(const WaveFieldSet& state, const Eigen::MatrixXcd& residual) const {
  const auto& s = solver_.setup();
  Eval e;
  e.residual = residual;
  e.J = data_term(residual);
  const double w = s.receiver_spacing() * s.source_spacing();
  const MatrixXcd weighted = w * apply_receiver_operator(residual, s.receiver_spacing(), sobolev_.b_data);
  e.grad_l2 = solver_.adjoint_apply(state, weighted);
  const double inv_cell = 1.0 / e.grad_l2.cell_volume();
  for (auto& v : e.grad_l2.values) v *= inv_cell;
  e.grad = smooth_by(e.grad_l2, sobolev_.a_param);
  return e;
}

Misfit::Eval Misfit::evaluate(const GridField& eta) const {
  const WaveFieldSet state = solver_.solve(eta);
  return gradient_at(state, solver_.sample(state) - observed_);
}

double objective(const GridField& eta, const Eigen::MatrixXcd& observed, const HelmholtzSolver& solver,
                 const SobolevPair& sobolev) {
  return Misfit(solver, observed, sobolev).objective(eta);
}

GridField gradient(const GridField& eta, const Eigen::MatrixXcd& observed, const HelmholtzSolver& solver,
                   const SobolevPair& sobolev) {
  return Misfit(solver, observed, sobolev).evaluate(eta).grad;
}

void InversionConfig::validate() const {
  setup.validate();
  if (iterations < 1) throw DomainError("inversion: iteration count must be at least 1");
  if (!(noise >= 0.0)) throw DomainError("inversion: noise level must be nonnegative");
  if (lbfgs.memory < 1 || !(lbfgs.armijo > 0.0 && lbfgs.armijo < 1.0) || !(lbfgs.shrink > 0.0 && lbfgs.shrink < 1.0) ||
      lbfgs.max_backtracks < 1 || !(lbfgs.initial_step > 0.0))
    throw DomainError("inversion: invalid L-BFGS options");
}

InversionConfig InversionConfig::setting(int which, SobolevPair sobolev, double noise, double dx) {
  if (which != 1 && which != 2) throw DomainError("inversion: setting must be 1 or 2");
  InversionConfig c;
  c.sobolev = sobolev;
  c.setup = SolverSetup::standard(dx);
  c.truth.kind = which == 1 ? ScattererKind::RoughDisc : ScattererKind::SmoothDisc;
  c.noise = noise;
  return c;
}

InversionTrace run_inversion(const InversionConfig& cfg) {
  cfg.validate();
  const HelmholtzSolver solver(cfg.setup);
  InversionTrace trace;
  trace.truth = make_scatterer(cfg.truth, cfg.setup);
  const MatrixXcd observed = add_noise(solver.forward_map(trace.truth), cfg.noise, cfg.seed);
  trace.observed = observed;
  const Misfit misfit(solver, observed, cfg.sobolev);
  const int a = cfg.sobolev.a_param;

  GridField eta = cfg.setup.model_zeros();
  Misfit::Eval cur = misfit.evaluate(eta);
  auto record = [&](int it) {
    trace.rows.push_back({it, cur.J, relative_model_error(eta, trace.truth), std::sqrt(std::max(0.0, l2_dot(cur.grad, cur.grad_l2)))});
  };
  record(0);

  std::deque<std::pair<GridField, GridField>> pairs;  // (s, y), newest last
  for (int it = 1; it <= cfg.iterations; ++it) {
    // Two-loop recursion with H0 = gamma (I - Delta)^{-a}, inner products in L^2.
    GridField q = cur.grad_l2;
    std::vector<double> alphas(pairs.size());
    for (std::size_t m = pairs.size(); m-- > 0;) {
      const auto& [s, y] = pairs[m];
      alphas[m] = l2_dot(s, q) / l2_dot(y, s);
      q = axpy(q, -alphas[m], y);
    }
    GridField d = smooth_by(q, a);
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      d = scaled(d, l2_dot(s, y) / l2_dot(y, smooth_by(y, a)));
    }
    for (std::size_t m = 0; m < pairs.size(); ++m) {
      const auto& [s, y] = pairs[m];
      const double beta = l2_dot(y, d) / l2_dot(y, s);
      d = axpy(d, alphas[m] - beta, s);
    }
    d = scaled(d, -1.0);
    double slope = l2_dot(cur.grad_l2, d);
    if (!(slope < 0.0)) {
      pairs.clear();
      d = scaled(cur.grad, -1.0);
      slope = l2_dot(cur.grad_l2, d);
    }
    if (!(slope < 0.0)) break;  // stationary point
    double step = pairs.empty() ? cfg.lbfgs.initial_step / max_abs(d) : 1.0;

    bool accepted = false;
    GridField trial;
    Misfit::Eval next;
    for (int bt = 0; bt < cfg.lbfgs.max_backtracks; ++bt, step *= cfg.lbfgs.shrink) {
      trial = axpy(eta, step, d);
      try {
        const WaveFieldSet state = solver.solve(trial);
        const MatrixXcd res = solver.sample(state) - observed;
        const double J = misfit.data_term(res);
        if (J <= cur.J + cfg.lbfgs.armijo * step * slope && J < cur.J) {
          next = misfit.gradient_at(state, res);
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      } catch (const NumericError&) {
      }
    }
    if (!accepted) {
      trace.line_search_failed = true;
      break;
    }
    GridField s = axpy(trial, -1.0, eta);
    GridField y = axpy(next.grad_l2, -1.0, cur.grad_l2);
    if (l2_dot(s, y) > 1e-12 * std::sqrt(l2_dot(s, s) * l2_dot(y, y))) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (int(pairs.size()) > cfg.lbfgs.memory) pairs.pop_front();
    }
    eta = std::move(trial);
    cur = std::move(next);
    record(it);
  }
  trace.estimate = eta;
  return trace;
}

}  // namespace bornsob

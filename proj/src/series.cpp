#include "bornsob/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace bornsob {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// ---------------------------------------------------------------- scenes

VectorXd DiscretizedScene::weight_vector() const {
  VectorXd w(static_cast<Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) w(Index(i)) = weights[i];
  return w;
}

GridField DiscretizedScene::to_field(const VectorXcd& v) const {
  if (std::size_t(v.size()) != n_nodes()) throw DomainError("vector length does not match the scene");
  std::vector<double> spacing(lattice_shape.size(), node_spacing), offset(lattice_shape.size());
  for (std::size_t ax = 0; ax < lattice_shape.size(); ++ax)
    offset[ax] = -0.5 * node_spacing * double(lattice_shape[ax] - 1);
  GridField f = GridField::zeros(lattice_shape, spacing, offset, true);
  for (std::size_t i = 0; i < n_nodes(); ++i) f.values[i] = v(Index(i));
  return f;
}

VectorXcd DiscretizedScene::from_field(const GridField& f) const {
  if (f.shape != lattice_shape) throw DomainError("field shape does not match the scene lattice");
  VectorXcd v(static_cast<Index>(n_nodes()));
  for (std::size_t i = 0; i < n_nodes(); ++i) v(Index(i)) = f.values[i];
  return v;
}

void DiscretizedScene::validate() const {
  wave.validate();
  if (nodes.empty() || nodes.size() != weights.size()) throw DomainError("scene needs one weight per node");
  for (double w : weights)
    if (!(w > 0.0)) throw DomainError("scene weights must be positive");
  if (receivers.empty() || sources.empty()) throw DomainError("scene needs receivers and sources");
  if (source_weights.size() != sources.size()) throw DomainError("scene needs one weight per source");
  for (const auto& pts : {receivers, sources})
    for (const Vec3& x : pts)
      if (norm3(x) <= ball_radius) throw DomainError("receivers and sources must lie outside the ball");
}

void DiscretizedScene::assemble() {
  validate();
  const Index n = Index(n_nodes()), nr = Index(n_receivers()), ns = Index(n_sources());
  kernel.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < n; ++l) {
      if (i == l) continue;
      kernel(i, l) = greens_value(wave, dist3(nodes[std::size_t(i)], nodes[std::size_t(l)]));
    }
    const double w = weights[std::size_t(i)];
    if (wave.dim == 1) {
      kernel(i, i) = greens_value(wave, 0.0);
    } else {
      const double rho = wave.dim == 2 ? std::sqrt(w / kPi) : std::cbrt(3.0 * w / (4.0 * kPi));
      kernel(i, i) = greens_cell_integral(wave, rho) / w;
    }
  }
  auto block = [&](const std::vector<Vec3>& pts, Index rows) {
    MatrixXcd m(rows, n);
    for (Index r = 0; r < rows; ++r)
      for (Index i = 0; i < n; ++i) {
        const double d = dist3(pts[std::size_t(r)], nodes[std::size_t(i)]);
        if (d == 0.0) throw DomainError("a receiver or source coincides with a node");
        m(r, i) = greens_value(wave, d);
      }
    return m;
  };
  to_rx = block(receivers, nr);
  incident = block(sources, ns).transpose();
}

DiscretizedScene make_scene_1d(WaveParams wave, double a, std::size_t n, double outer) {
  if (wave.dim != 1) throw DomainError("make_scene_1d needs a one-dimensional wave");
  if (n < 1 || !(a > 0.0)) throw DomainError("1D scene needs n >= 1 nodes and a > 0");
  const double R = outer > 0.0 ? outer : 2.0 * a;
  if (!(R > a)) throw DomainError("receivers must lie outside the ball");
  DiscretizedScene s;
  s.wave = wave;
  s.ball_radius = a;
  s.lattice_shape = {n};
  s.node_spacing = 2.0 * a / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.nodes.push_back({-a + (double(i) + 0.5) * s.node_spacing, 0.0, 0.0});
    s.weights.push_back(s.node_spacing);
  }
  s.receivers = {{-R, 0.0, 0.0}, {R, 0.0, 0.0}};
  s.sources = s.receivers;
  s.receiver_spacing = 2.0 * R;
  s.receiver_weight = 1.0;
  s.source_weights = {1.0, 1.0};
  s.assemble();
  return s;
}

DiscretizedScene make_scene_2d(WaveParams wave, double a, std::size_t m, std::size_t nr, std::size_t ns,
                               double outer) {
  if (wave.dim != 2) throw DomainError("make_scene_2d needs a two-dimensional wave");
  if (m < 1 || nr < 2 || ns < 2 || !(a > 0.0)) throw DomainError("2D scene needs m >= 1, nr, ns >= 2, a > 0");
  const double R = outer > 0.0 ? outer : 2.0 * a;
  if (!(R > a)) throw DomainError("receivers must lie outside the ball");
  DiscretizedScene s;
  s.wave = wave;
  s.ball_radius = a;
  s.lattice_shape = {m, m};
  s.node_spacing = std::sqrt(2.0) * a / double(m);
  const double w = kPi * a * a / double(m * m);
  const double half = 0.5 * s.node_spacing * double(m - 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      s.nodes.push_back({-half + double(i) * s.node_spacing, -half + double(j) * s.node_spacing, 0.0});
      s.weights.push_back(w);
    }
  for (std::size_t i = 0; i < nr; ++i) s.receivers.push_back({-R + 2.0 * R * double(i) / double(nr - 1), R, 0.0});
  for (std::size_t i = 0; i < ns; ++i) s.sources.push_back({-R, -R + 2.0 * R * double(i) / double(ns - 1), 0.0});
  s.receiver_spacing = 2.0 * R / double(nr - 1);
  s.receiver_weight = s.receiver_spacing;
  s.source_weights.assign(ns, 2.0 * R / double(ns - 1));
  s.assemble();
  return s;
}

// ---------------------------------------------------------------- forward operators

namespace {

void check_eta(const VectorXcd& eta, const DiscretizedScene& scene) {
  if (std::size_t(eta.size()) != scene.n_nodes()) throw DomainError("contrast length does not match the scene");
}

}  // namespace

ScatterData apply_K(int j, const std::vector<VectorXcd>& etas, const DiscretizedScene& scene) {
  if (j < 1 || std::size_t(j) != etas.size()) throw DomainError("apply_K needs j >= 1 contrasts");
  for (const auto& e : etas) check_eta(e, scene);
  const cplx kappa = scene.coupling();
  const VectorXd w = scene.weight_vector();
  MatrixXcd W = etas[std::size_t(j - 1)].asDiagonal() * scene.incident;
  for (int t = j - 1; t >= 1; --t) {
    MatrixXcd next = kappa * (scene.kernel * (w.cast<cplx>().asDiagonal() * W));
    W = etas[std::size_t(t - 1)].asDiagonal() * next;
  }
  return kappa * (scene.to_rx * (w.cast<cplx>().asDiagonal() * W));
}

ScatterData apply_K(int j, const std::vector<GridField>& etas, const DiscretizedScene& scene) {
  std::vector<VectorXcd> v;
  for (const auto& f : etas) v.push_back(scene.from_field(f));
  return apply_K(j, v, scene);
}

ScatterData forward_born(const VectorXcd& eta, const DiscretizedScene& scene, int N) {
  if (N < 1) throw DomainError("forward_born needs N >= 1");
  check_eta(eta, scene);
  const cplx kappa = scene.coupling();
  const VectorXcd weta = scene.weight_vector().cast<cplx>().cwiseProduct(eta);
  MatrixXcd u = scene.incident;
  for (int m = 1; m < N; ++m) u = scene.incident + kappa * (scene.kernel * (weta.asDiagonal() * u));
  return kappa * (scene.to_rx * (weta.asDiagonal() * u));
}

ScatterData solve_direct(const VectorXcd& eta, const DiscretizedScene& scene) {
  check_eta(eta, scene);
  const cplx kappa = scene.coupling();
  const VectorXcd weta = scene.weight_vector().cast<cplx>().cwiseProduct(eta);
  const Index n = Index(scene.n_nodes());
  MatrixXcd A = MatrixXcd::Identity(n, n) - kappa * (scene.kernel * weta.asDiagonal());
  Eigen::PartialPivLU<MatrixXcd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NumericError("Lippmann-Schwinger system is singular (condition estimate " + std::to_string(1.0 / rcond) +
                       ")");
  const MatrixXcd u = lu.solve(scene.incident);
  return kappa * (scene.to_rx * (weta.asDiagonal() * u));
}

MatrixXcd build_K1_matrix(const DiscretizedScene& scene) {
  const Index n = Index(scene.n_nodes()), nr = Index(scene.n_receivers()), ns = Index(scene.n_sources());
  const cplx kappa = scene.coupling();
  MatrixXcd K(nr * ns, n);
  for (Index i = 0; i < n; ++i) {
    const cplx c = kappa * scene.weights[std::size_t(i)];
    for (Index s = 0; s < ns; ++s)
      for (Index r = 0; r < nr; ++r) K(r + nr * s, i) = c * scene.to_rx(r, i) * scene.incident(i, s);
  }
  return K;
}

VectorXcd vec(const ScatterData& d) { return Eigen::Map<const VectorXcd>(d.data(), d.size()); }

ScatterData unvec(const VectorXcd& v, const DiscretizedScene& scene) {
  if (std::size_t(v.size()) != scene.n_data()) throw DomainError("data vector length does not match the scene");
  return Eigen::Map<const MatrixXcd>(v.data(), Index(scene.n_receivers()), Index(scene.n_sources()));
}

// ---------------------------------------------------------------- norms

namespace {

/// Forward difference along `axis` on a lattice, zero beyond the last sample.
MatrixXd forward_difference(const std::vector<std::size_t>& shape, std::size_t axis, double h) {
  std::size_t total = 1, stride = 1;
  for (auto s : shape) total *= s;
  for (std::size_t ax = shape.size(); ax-- > axis + 1;) stride *= shape[ax];
  MatrixXd D = MatrixXd::Zero(Index(total), Index(total));
  for (std::size_t f = 0; f < total; ++f) {
    const std::size_t i = (f / stride) % shape[axis];
    D(Index(f), Index(f)) = -1.0 / h;
    if (i + 1 < shape[axis]) D(Index(f), Index(f + stride)) = 1.0 / h;
  }
  return D;
}

void multi_indices(int order, std::size_t dims, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (cur.size() + 1 == dims) {
    cur.push_back(order);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= order; ++k) {
    cur.push_back(k);
    multi_indices(order - k, dims, cur, out);
    cur.pop_back();
  }
}

}  // namespace

double SceneNorms::model(const VectorXcd& eta) const {
  return std::sqrt(std::max(0.0, (eta.adjoint() * model_gram.cast<cplx>() * eta)(0, 0).real()));
}

double SceneNorms::data(const ScatterData& phi) const {
  const VectorXcd v = vec(phi);
  return std::sqrt(std::max(0.0, (v.adjoint() * data_gram * v)(0, 0).real()));
}

double SceneNorms::receiver(const VectorXcd& g) const {
  return std::sqrt(std::max(0.0, (g.adjoint() * receiver_gram * g)(0, 0).real()));
}

SceneNorms build_norms(const DiscretizedScene& scene, const SobolevPair& sobolev) {
  if (sobolev.a_param < 0) throw DomainError("series norms need a_param >= 0");
  SceneNorms out;
  out.sobolev = sobolev;
  const std::size_t dims = scene.lattice_shape.size();
  const int a = sobolev.a_param;
  // Pad by a cells per side so every difference of the zero-extended field is kept.
  std::vector<std::size_t> padded = scene.lattice_shape;
  for (auto& s : padded) s += 2 * std::size_t(a);
  std::size_t total = 1;
  for (auto s : padded) total *= s;
  MatrixXd E = MatrixXd::Zero(Index(total), Index(scene.n_nodes()));
  for (std::size_t i = 0; i < scene.n_nodes(); ++i) {
    std::size_t rem = i, flat = 0, stride_in = scene.n_nodes();
    for (std::size_t ax = 0; ax < dims; ++ax) {
      stride_in /= scene.lattice_shape[ax];
      const std::size_t idx = rem / stride_in;
      rem %= stride_in;
      flat = flat * padded[ax] + idx + std::size_t(a);
    }
    E(Index(flat), Index(i)) = 1.0;
  }
  std::vector<MatrixXd> D;
  for (std::size_t ax = 0; ax < dims; ++ax) D.push_back(forward_difference(padded, ax, scene.node_spacing));
  const double w = scene.weights.front();
  out.model_gram = MatrixXd::Zero(Index(scene.n_nodes()), Index(scene.n_nodes()));
  for (int order = 0; order <= a; ++order) {
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur;
    multi_indices(order, dims, cur, alphas);
    for (const auto& alpha : alphas) {
      MatrixXd M = E;
      for (std::size_t ax = 0; ax < dims; ++ax)
        for (int p = 0; p < alpha[ax]; ++p) M = D[ax] * M;
      out.model_gram += w * M.transpose() * M;
    }
  }
  out.model_gram = 0.5 * (out.model_gram + out.model_gram.transpose());

  const Index nr = Index(scene.n_receivers()), ns = Index(scene.n_sources());
  out.receiver_gram = receiver_gram(scene.n_receivers(), scene.receiver_spacing, sobolev.b_data, scene.receiver_weight);
  out.data_gram = MatrixXcd::Zero(nr * ns, nr * ns);
  for (Index s = 0; s < ns; ++s) out.data_gram.block(s * nr, s * nr, nr, nr) = scene.source_weights[std::size_t(s)] * out.receiver_gram;

  Eigen::LLT<MatrixXd> la(out.model_gram);
  Eigen::LLT<MatrixXcd> lb(out.data_gram);
  if (la.info() != Eigen::Success || lb.info() != Eigen::Success) throw NumericError("norm Gram matrix is not positive definite");
  out.model_chol = la.matrixL();
  out.data_chol = lb.matrixL();
  return out;
}

DiscreteConstants discrete_constants(const DiscretizedScene& scene, const SceneNorms& norms) {
  DiscreteConstants c;
  c.P = poincare_constant(norms.sobolev.a_param, scene.ball_radius, int(scene.lattice_shape.size()));
  const double kap = std::abs(scene.coupling());
  const VectorXd w = scene.weight_vector();
  double sup_kernel = 0.0, sup_inc = 0.0, sup_rx = 0.0;
  for (Index i = 0; i < Index(scene.n_nodes()); ++i) {
    sup_kernel = std::max(sup_kernel, std::sqrt((scene.kernel.row(i).cwiseAbs2().transpose().cwiseProduct(w)).sum()));
    double inc = 0.0;
    for (Index s = 0; s < Index(scene.n_sources()); ++s)
      inc += scene.source_weights[std::size_t(s)] * std::norm(scene.incident(i, s));
    sup_inc = std::max(sup_inc, std::sqrt(inc));
    sup_rx = std::max(sup_rx, norms.receiver(scene.to_rx.col(i)));
  }
  c.mu = kap * c.P * sup_kernel;
  c.c_a = std::sqrt(w.sum()) * sup_inc;
  c.nu = kap * c.P * c.c_a * sup_rx;
  return c;
}

namespace {

/// T = L_out^H M L_in^{-H}, so that ||M||_{in->out} = ||T||_2.
MatrixXcd transformed(const MatrixXcd& M, const SceneNorms& norms, bool model_to_data) {
  const MatrixXcd La = norms.model_chol.cast<cplx>();
  const MatrixXcd& Lb = norms.data_chol;
  const MatrixXcd& Lin = model_to_data ? La : Lb;
  const MatrixXcd& Lout = model_to_data ? Lb : La;
  // M L_in^{-H} = (L_in^{-1} M^H)^H
  const MatrixXcd right = Lin.triangularView<Eigen::Lower>().solve(M.adjoint()).adjoint();
  return Lout.adjoint() * right;
}

}  // namespace

double weighted_operator_norm(const MatrixXcd& M, const SceneNorms& norms, bool model_to_data, double tol) {
  const MatrixXcd T = transformed(M, norms, model_to_data);
  const MatrixXcd TT = T.adjoint() * T;
  VectorXcd v(TT.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = cplx(1.0 + 0.37 * double(i % 7), 0.11 * double(i % 5));
  v.normalize();
  // Rayleigh quotients converge at twice the rate of the iterates; stop well inside tol.
  double est = 0.0;
  for (int it = 0; it < 100000; ++it) {
    const VectorXcd next = TT * v;
    const double lam = v.dot(next).real();
    const double len = next.norm();
    if (len == 0.0) return 0.0;
    v = next / len;
    if (std::abs(lam - est) <= 1e-3 * tol * lam) return std::sqrt(lam);
    est = lam;
  }
  return std::sqrt(est);
}

namespace {

struct WeightedSvd {
  Eigen::MatrixXcd U, V;
  Eigen::VectorXd s;
  Index n_model = 0;
};

WeightedSvd weighted_svd(const MatrixXcd& K1, const SceneNorms& norms) {
  WeightedSvd w;
  Eigen::BDCSVD<MatrixXcd> svd(transformed(K1, norms, true), Eigen::ComputeThinU | Eigen::ComputeThinV);
  w.U = svd.matrixU();
  w.V = svd.matrixV();
  w.s = svd.singularValues();
  w.n_model = K1.cols();
  return w;
}

VectorXd filter(const WeightedSvd& w, double lambda) {
  VectorXd f(w.s.size());
  const double smax = w.s.size() ? w.s(0) : 0.0;
  for (Index i = 0; i < w.s.size(); ++i) {
    const double s = w.s(i);
    if (lambda == 0.0)
      f(i) = s > 1e-12 * smax ? 1.0 / s : 0.0;
    else
      f(i) = s / (s * s + lambda);
  }
  return f;
}

PseudoInverse assemble_inverse(const WeightedSvd& w, double lambda, const SceneNorms& norms) {
  PseudoInverse out;
  out.lambda = lambda;
  const VectorXd f = filter(w, lambda);
  out.norm_ba = f.size() ? f.maxCoeff() : 0.0;
  out.k1_norm_ab = w.s.size() ? w.s(0) : 0.0;
  // calK_1 = L_a^{-H} V diag(f) U^H L_b^H
  const MatrixXcd core = w.V * f.cast<cplx>().asDiagonal() * w.U.adjoint() * norms.data_chol.adjoint();
  out.op = norms.model_chol.cast<cplx>().adjoint().triangularView<Eigen::Upper>().solve(core);
  const double smax = w.s.size() ? w.s(0) : 0.0;
  const double smin = (w.s.size() < w.n_model || w.s.size() == 0) ? 0.0 : w.s(w.s.size() - 1);
  const double lo = smin * smin + lambda;
  out.condition = lo > 0.0 ? (smax * smax + lambda) / lo : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.condition > 1e12;
  return out;
}

}  // namespace

PseudoInverse pseudo_inverse_K1(const MatrixXcd& K1, double lambda, const SceneNorms& norms) {
  if (!(lambda >= 0.0)) throw DomainError("regularization must be nonnegative");
  return assemble_inverse(weighted_svd(K1, norms), lambda, norms);
}

PseudoInverse pseudo_inverse_for_norm(const MatrixXcd& K1, double target, const SceneNorms& norms, double rel_tol) {
  if (!(target > 0.0)) throw DomainError("target norm must be positive");
  const WeightedSvd w = weighted_svd(K1, norms);
  if (w.s.size() == 0 || w.s(0) == 0.0) throw NumericError("K1 vanishes; no regularization reaches the target");
  auto norm_at = [&](double lambda) {
    const VectorXd f = filter(w, lambda);
    return f.maxCoeff();
  };
  if (norm_at(0.0) <= target) return assemble_inverse(w, 0.0, norms);
  const double scale = w.s(0) * w.s(0);
  double lo = std::log(scale * 1e-30), hi = std::log(scale * 1e30);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double n = norm_at(std::exp(mid));
    if (std::abs(n - target) <= rel_tol * target) {
      lo = hi = mid;
      break;
    }
    (n > target ? lo : hi) = mid;
  }
  return assemble_inverse(w, std::exp(0.5 * (lo + hi)), norms);
}

// ---------------------------------------------------------------- inverse series

namespace {

/// Memoized evaluation of calK_m(h_1, ..., h_m) on interned data arguments.
class InverseEngine {
 public:
  InverseEngine(const PseudoInverse& inv, const DiscretizedScene& scene) : inv_(inv), scene_(scene) {}

  int intern_data(const VectorXcd& d) {
    data_.push_back(d);
    pre_.emplace_back();
    return int(data_.size() - 1);
  }

  VectorXcd eval(int m, const std::vector<int>& args) {
    if (m == 1) return pre(args[0]);
    std::vector<int> key{m};
    key.insert(key.end(), args.begin(), args.end());
    if (auto it = eval_memo_.find(key); it != eval_memo_.end()) return it->second;
    VectorXcd acc = VectorXcd::Zero(Index(scene_.n_nodes()));
    std::vector<int> parts;
    for (int mm = 1; mm < m; ++mm) compositions(m, mm, parts, [&](const std::vector<int>& comp) {
        std::vector<int> g;
        std::size_t pos = 0;
        for (int len : comp) {
          g.push_back(apply(std::vector<int>(args.begin() + Index(pos), args.begin() + Index(pos) + len)));
          pos += std::size_t(len);
        }
        acc -= eval(mm, g);
      });
    eval_memo_.emplace(key, acc);
    return acc;
  }

  std::size_t entries() const { return eval_memo_.size() + apply_memo_.size() + data_.size(); }

 private:
  const VectorXcd& pre(int id) {
    auto& slot = pre_[std::size_t(id)];
    if (slot.size() == 0) slot = inv_.op * data_[std::size_t(id)];
    return slot;
  }

  /// Interned vec(K_len(calK_1 h_1, ..., calK_1 h_len)).
  int apply(const std::vector<int>& block) {
    if (auto it = apply_memo_.find(block); it != apply_memo_.end()) return it->second;
    std::vector<VectorXcd> etas;
    for (int id : block) etas.push_back(pre(id));
    const int id = intern_data(vec(apply_K(int(block.size()), etas, scene_)));
    apply_memo_.emplace(block, id);
    return id;
  }

  template <class F>
  static void compositions(int total, int parts, std::vector<int>& cur, F&& visit) {
    if (parts == 1) {
      cur.push_back(total);
      visit(cur);
      cur.pop_back();
      return;
    }
    for (int first = 1; first <= total - parts + 1; ++first) {
      cur.push_back(first);
      compositions(total - first, parts - 1, cur, visit);
      cur.pop_back();
    }
  }

  const PseudoInverse& inv_;
  const DiscretizedScene& scene_;
  std::vector<VectorXcd> data_;
  std::vector<VectorXcd> pre_;
  std::map<std::vector<int>, int> apply_memo_;
  std::map<std::vector<int>, VectorXcd> eval_memo_;
};

}  // namespace

InverseSeriesResult inverse_series(const ScatterData& phi, int N, const PseudoInverse& k1_inv,
                                   const DiscretizedScene& scene, const SceneNorms& norms,
                                   const InverseSeriesOptions& opt) {
  if (N < 1) throw DomainError("inverse_series needs N >= 1");
  if (N > opt.ceiling)
    throw BudgetError("inverse series order " + std::to_string(N) + " exceeds the ceiling " +
                      std::to_string(opt.ceiling));
  if (phi.rows() != Index(scene.n_receivers()) || phi.cols() != Index(scene.n_sources()))
    throw DomainError("data shape does not match the scene");
  InverseEngine engine(k1_inv, scene);
  const int root = engine.intern_data(vec(phi));
  InverseSeriesResult out;
  out.estimate = VectorXcd::Zero(Index(scene.n_nodes()));
  for (int j = 1; j <= N; ++j) {
    const VectorXcd term = engine.eval(j, std::vector<int>(std::size_t(j), root));
    out.estimate += term;
    out.terms.push_back(term);
    out.partial_sums.push_back(out.estimate);
    out.term_norms.push_back(norms.model(term));
  }
  out.memo_entries = engine.entries();
  return out;
}

bool InverseBoundsReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.holds(); });
}

InverseBoundsReport check_inverse_bounds(const DiscretizedScene& scene, const SceneNorms& norms,
                                         const VectorXcd& eta, int N, const InverseBoundsOptions& opt) {
  if (N < 1) throw DomainError("bound checks need N >= 1");
  InverseBoundsReport rep;
  rep.constants = discrete_constants(scene, norms);
  const double s = rep.constants.mu + rep.constants.nu;
  const MatrixXcd K1 = build_K1_matrix(scene);
  const PseudoInverse inv =
      opt.lambda >= 0.0 ? pseudo_inverse_K1(K1, opt.lambda, norms) : pseudo_inverse_for_norm(K1, opt.Q / s, norms);
  rep.lambda = inv.lambda;
  rep.k1_inv_norm = inv.norm_ba;

  const ScatterData phi = solve_direct(eta, scene);
  const VectorXcd eta1 = inv.op * vec(phi);
  const double n1 = norms.model(eta1);
  rep.series_ratio = s * n1;
  const bool op_small = s * inv.norm_ba < 1.0;
  rep.C = op_small ? inv.norm_ba * std::exp(1.0 / (1.0 - s * inv.norm_ba)) : std::numeric_limits<double>::infinity();
  rep.C_star = std::max(1.0 / s, rep.C);
  const VectorXcd proj = inv.op * (K1 * eta);
  rep.script_M = std::max(norms.model(eta), norms.model(proj));
  const bool m_small = s * rep.script_M < 1.0;
  rep.C_ab = m_small ? rep.C_star * s / std::pow(1.0 - s * rep.script_M, 2) : std::numeric_limits<double>::infinity();
  const bool converges = op_small && rep.series_ratio < 1.0;

  const int top = std::max(N, opt.reference_order);
  InverseSeriesOptions so;
  so.ceiling = top;
  const InverseSeriesResult series = inverse_series(phi, top, inv, scene, norms, so);
  const VectorXcd& ref = series.partial_sums.back();
  const double floor_term = norms.model(eta - proj);

  for (int j = 2; j <= N; ++j) {
    BoundCheck c{"term", j, series.term_norms[std::size_t(j - 1)], rep.C * std::pow(s * n1, j), op_small};
    rep.checks.push_back(c);
  }
  for (int n = 1; n <= N; ++n) {
    const VectorXcd& Sn = series.partial_sums[std::size_t(n - 1)];
    const double tail = converges ? rep.C * std::pow(rep.series_ratio, n + 1) / (1.0 - rep.series_ratio)
                                  : std::numeric_limits<double>::infinity();
    rep.checks.push_back({"tail", n, norms.model(ref - Sn), tail, converges});
    rep.checks.push_back({"approximation", n, norms.model(eta - Sn), rep.C_ab * floor_term + tail, converges && m_small});
    rep.recovery_error.push_back(norms.model(ref - Sn));
    rep.true_error.push_back(norms.model(eta - Sn));
  }
  return rep;
}

double probe_K_norm(int j, const DiscretizedScene& scene, const SceneNorms& norms, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    std::vector<VectorXcd> etas;
    double denom = 1.0;
    for (int t = 0; t < j; ++t) {
      VectorXcd e(static_cast<Index>(scene.n_nodes()));
      for (Index i = 0; i < e.size(); ++i) e(i) = cplx(g(rng), g(rng));
      denom *= norms.model(e);
      etas.push_back(std::move(e));
    }
    best = std::max(best, norms.data(apply_K(j, etas, scene)) / denom);
  }
  return best;
}

}  // namespace bornsob

#include "bornsob/sobolev.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numeric>

namespace bornsob {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double angular_frequency(std::size_t m, std::size_t n, double h) {
  const double mm = (m <= n / 2) ? double(m) : double(m) - double(n);
  return 2.0 * kPi * mm / (double(n) * h);
}

// In-place unnormalised DFT over the given shape.
void dft(std::vector<cplx>& data, const std::vector<std::size_t>& shape, int sign) {
  std::vector<int> dims(shape.begin(), shape.end());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(int(dims.size()), dims.data(), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

// Per-sample |xi|^2 for the DFT layout of `shape`.
std::vector<double> xi_squared(const std::vector<std::size_t>& shape, const std::vector<double>& h) {
  std::size_t total = 1;
  for (auto n : shape) total *= n;
  std::vector<double> out(total, 0.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double acc = 0.0;
    for (std::size_t ax = shape.size(); ax-- > 0;) {
      const std::size_t m = rem % shape[ax];
      rem /= shape[ax];
      const double xi = angular_frequency(m, shape[ax], h[ax]);
      acc += xi * xi;
    }
    out[flat] = acc;
  }
  return out;
}

}  // namespace

GridField GridField::zeros(std::vector<std::size_t> shape, std::vector<double> spacing,
                           std::vector<double> offset, bool complex_valued) {
  GridField f;
  std::size_t total = 1;
  for (auto n : shape) total *= n;
  if (offset.empty()) offset.assign(shape.size(), 0.0);
  f.shape = std::move(shape);
  f.spacing = std::move(spacing);
  f.offset = std::move(offset);
  f.values.assign(total, cplx(0.0, 0.0));
  f.complex_valued = complex_valued;
  f.validate();
  return f;
}

double GridField::cell_volume() const {
  return std::accumulate(spacing.begin(), spacing.end(), 1.0, std::multiplies<>());
}

double GridField::coord(std::size_t flat, std::size_t axis) const {
  std::size_t stride = 1;
  for (std::size_t ax = shape.size(); ax-- > axis + 1;) stride *= shape[ax];
  const std::size_t idx = (flat / stride) % shape[axis];
  return offset[axis] + double(idx) * spacing[axis];
}

std::vector<double> GridField::real_part() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

void GridField::validate() const {
  if (shape.empty() || shape.size() != spacing.size() || shape.size() != offset.size())
    throw DomainError("grid field: shape, spacing and offset must have equal nonzero rank");
  std::size_t total = 1;
  for (auto n : shape) {
    if (n == 0) throw DomainError("grid field: empty axis");
    total *= n;
  }
  for (double h : spacing)
    if (!(h > 0.0)) throw DomainError("grid field: spacing must be positive");
  if (total != values.size()) throw DomainError("grid field: shape does not match sample count");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

double poincare_constant(int s, double a, int n) {
  if (s < 0) throw DomainError("poincare_constant: s must be nonnegative");
  if (!(a > 0.0)) throw DomainError("poincare_constant: a must be positive");
  if (n < 1) throw DomainError("poincare_constant: n must be at least 1");
  const double q = 1.0 / (2.0 * a * a);
  double sum = 0.0, qj = 1.0;
  for (int j = 0; j <= s; ++j) {
    sum += binomial(n + j - 1, n - 1) * qj;
    qj *= q;
  }
  return 1.0 / std::sqrt(sum);
}

GridField apply_spectral_operator(const GridField& f, double s) {
  f.validate();
  GridField out = f;
  if (s == 0.0) return out;
  dft(out.values, out.shape, FFTW_FORWARD);
  const auto xi2 = xi_squared(out.shape, out.spacing);
  const double inv_n = 1.0 / double(out.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= std::pow(1.0 + xi2[i], s) * inv_n;
  dft(out.values, out.shape, FFTW_BACKWARD);
  if (!out.complex_valued)
    for (auto& v : out.values) v = cplx(v.real(), 0.0);
  return out;
}

double sobolev_norm(const GridField& f, double s) {
  const GridField g = apply_spectral_operator(f, 0.5 * s);
  double acc = 0.0;
  for (const auto& v : g.values) acc += std::norm(v);
  return std::sqrt(acc * f.cell_volume());
}

Eigen::MatrixXcd apply_receiver_operator(const Eigen::MatrixXcd& data, double spacing, double s) {
  if (!(spacing > 0.0)) throw DomainError("receiver spacing must be positive");
  if (s == 0.0 || data.rows() == 0) return data;
  const std::size_t n = std::size_t(data.rows());
  std::vector<double> mult(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double xi = angular_frequency(m, n, spacing);
    mult[m] = std::pow(1.0 + xi * xi, s) / double(n);
  }
  Eigen::MatrixXcd out(data.rows(), data.cols());
  std::vector<cplx> col(n);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = data(Eigen::Index(r), c);
    dft(col, {n}, FFTW_FORWARD);
    for (std::size_t r = 0; r < n; ++r) col[r] *= mult[r];
    dft(col, {n}, FFTW_BACKWARD);
    for (std::size_t r = 0; r < n; ++r) out(Eigen::Index(r), c) = col[r];
  }
  return out;
}

Eigen::MatrixXcd receiver_gram(std::size_t n, double spacing, double b, double weight) {
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(Eigen::Index(n), Eigen::Index(n));
  Eigen::MatrixXcd g = apply_receiver_operator(id, spacing, b) * weight;
  return 0.5 * (g + g.adjoint());
}

namespace {

// Centered first difference along `axis`, one-sided at the grid edges.
std::vector<double> diff_axis(const std::vector<double>& f, const std::vector<std::size_t>& shape,
                              std::size_t axis, double h) {
  std::size_t stride = 1;
  for (std::size_t ax = shape.size(); ax-- > axis + 1;) stride *= shape[ax];
  const std::size_t n = shape[axis];
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const std::size_t i = (flat / stride) % n;
    if (n == 1) continue;
    if (i == 0)
      out[flat] = (f[flat + stride] - f[flat]) / h;
    else if (i + 1 == n)
      out[flat] = (f[flat] - f[flat - stride]) / h;
    else
      out[flat] = (f[flat + stride] - f[flat - stride]) / (2.0 * h);
  }
  return out;
}

// Sum over multi-indices |alpha| = order of ||D^alpha f||^2.
double derivative_energy(const std::vector<double>& f, const GridField& g, int order, std::size_t first_axis) {
  double cell = g.cell_volume();
  if (order == 0) {
    double acc = 0.0;
    for (double v : f) acc += v * v;
    return acc * cell;
  }
  double total = 0.0;
  for (std::size_t ax = first_axis; ax < g.dims(); ++ax)
    total += derivative_energy(diff_axis(f, g.shape, ax, g.spacing[ax]), g, order - 1, ax);
  return total;
}

}  // namespace

std::vector<ChainLink> check_poincare_chain(const GridField& f, int s, double a) {
  f.validate();
  if (s < 0) throw DomainError("check_poincare_chain: s must be nonnegative");
  if (!(a > 0.0)) throw DomainError("check_poincare_chain: a must be positive");
  const std::size_t d = f.dims();
  const std::size_t margin = std::size_t(s) + 2;
  std::vector<double> centre(d);
  for (std::size_t ax = 0; ax < d; ++ax)
    centre[ax] = f.offset[ax] + 0.5 * double(f.shape[ax] - 1) * f.spacing[ax];
  const std::vector<double> vals = f.real_part();
  for (std::size_t flat = 0; flat < vals.size(); ++flat) {
    if (vals[flat] == 0.0) continue;
    double r2 = 0.0;
    std::size_t rem = flat;
    for (std::size_t ax = d; ax-- > 0;) {
      const std::size_t i = rem % f.shape[ax];
      rem /= f.shape[ax];
      if (i < margin || i + margin >= f.shape[ax])
        throw DomainError("check_poincare_chain: support touches the grid boundary");
      const double x = f.coord(flat, ax) - centre[ax];
      r2 += x * x;
    }
    if (r2 > a * a * (1.0 + 1e-12)) throw DomainError("check_poincare_chain: support leaves B_a");
  }
  const int n = int(d);
  std::vector<ChainLink> links;
  double energy_j = derivative_energy(vals, f, 0, 0);
  for (int j = 0; j <= s; ++j) {
    const double energy_next = derivative_energy(vals, f, j + 1, 0);
    ChainLink link;
    link.order = j;
    link.lhs = energy_j / binomial(n + j - 1, n - 1);
    link.rhs = 2.0 * a * a / binomial(n + j, n - 1) * energy_next;
    links.push_back(link);
    energy_j = energy_next;
  }
  return links;
}

}  // namespace bornsob

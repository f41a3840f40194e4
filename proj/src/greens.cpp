#include "bornsob/greens.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bornsob {

namespace {

constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// Power series and Hankel asymptotics meet at this argument; both are good to ~1e-12 there.
constexpr double kJYSwitch = 17.0;

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw DomainError(std::string(name) + ": argument must be positive");
}

struct JY {
  double j, y;
};

// Order-0 series: J0 and Y0 share the (x^2/4)^k/(k!)^2 terms.
JY jy0_series(double xd) {
  const long double x = xd, q = x * x / 4.0L;
  long double term = 1.0L, j = 1.0L, tail = 0.0L, harmonic = 0.0L;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * static_cast<long double>(k));
    harmonic += 1.0L / static_cast<long double>(k);
    j += term;
    tail -= harmonic * term;
    if (std::fabs(term) * (1.0L + harmonic) < 1e-22L * (std::fabs(j) + std::fabs(tail) + 1e-300L)) break;
  }
  const long double y = (2.0L / kPiL) * ((std::log(x / 2.0L) + kEulerGamma) * j + tail);
  return {double(j), double(y)};
}

JY jy1_series(double xd) {
  const long double x = xd, q = x * x / 4.0L;
  // psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
  long double term = x / 2.0L, j = term, hk = 0.0L, hk1 = 1.0L;
  long double tail = term * (hk + hk1 - 2.0L * kEulerGamma);
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * static_cast<long double>(k + 1));
    hk += 1.0L / static_cast<long double>(k);
    hk1 += 1.0L / static_cast<long double>(k + 1);
    j += term;
    tail += term * (hk + hk1 - 2.0L * kEulerGamma);
    if (std::fabs(term) * (1.0L + hk1) < 1e-22L * (std::fabs(j) + std::fabs(tail) + 1e-300L)) break;
  }
  const long double y = (2.0L / kPiL) * std::log(x / 2.0L) * j - 2.0L / (kPiL * x) - tail / kPiL;
  return {double(j), double(y)};
}

JY jy_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0, q = 0.0, term = 1.0, last = 1e300;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      const double f = (mu - double((2 * k - 1) * (2 * k - 1))) / (double(k) * 8.0 * x);
      term *= f;
    }
    const double mag = std::fabs(term);
    if (mag > last) break;
    last = mag;
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      default: q -= term; break;
    }
    if (mag < 1e-18 * std::fabs(p)) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * x));
  const double c = std::cos(chi), s = std::sin(chi);
  return {amp * (p * c - q * s), amp * (p * s + q * c)};
}

JY jy0(double x) { return x < kJYSwitch ? jy0_series(x) : jy_asymptotic(0, x); }
JY jy1(double x) { return x < kJYSwitch ? jy1_series(x) : jy_asymptotic(1, x); }

struct KPair {
  double k0, k1;
};

KPair k_series(double xd) {
  const long double x = xd, q = x * x / 4.0L, lg = std::log(x / 2.0L);
  // K0 = -(ln(x/2)+gamma) I0 + sum H_k q^k/(k!)^2
  long double t0 = 1.0L, i0 = 1.0L, s0 = 0.0L, h = 0.0L;
  // K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
  long double t1 = 1.0L, i1 = 1.0L, hk = 0.0L, hk1 = 1.0L;
  long double s1 = hk + hk1 - 2.0L * kEulerGamma;
  for (int k = 1; k < 200; ++k) {
    t0 *= q / (static_cast<long double>(k) * static_cast<long double>(k));
    h += 1.0L / static_cast<long double>(k);
    i0 += t0;
    s0 += h * t0;
    t1 *= q / (static_cast<long double>(k) * static_cast<long double>(k + 1));
    hk += 1.0L / static_cast<long double>(k);
    hk1 += 1.0L / static_cast<long double>(k + 1);
    i1 += t1;
    s1 += t1 * (hk + hk1 - 2.0L * kEulerGamma);
    if (t0 * (1.0L + h) < 1e-22L * i0 && t1 * (1.0L + hk1) < 1e-22L * i1) break;
  }
  const long double k0 = -(lg + kEulerGamma) * i0 + s0;
  const long double k1 = 1.0L / x + lg * (x / 2.0L) * i1 - (x / 4.0L) * s1;
  return {double(k0), double(k1)};
}

// Steed's continued fraction for K0, K1 (Temme / Thompson-Barnett form).
KPair k_continued_fraction(double x) {
  double b = 2.0 * (1.0 + x), d = 1.0 / b, h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < 1e-17) break;
  }
  h = a1 * h;
  const double k0 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  const double k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

KPair kpair(double x) { return x <= 2.0 ? k_series(x) : k_continued_fraction(x); }

}  // namespace

std::string to_string(WaveKind kind) { return kind == WaveKind::Helmholtz ? "helmholtz" : "diffuse"; }

WaveKind parse_wave_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  if (s == "helmholtz" || s == "scalar") return WaveKind::Helmholtz;
  if (s == "diffuse") return WaveKind::Diffuse;
  throw DomainError("unknown wave kind: " + name);
}

void WaveParams::validate() const {
  if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
  if (dim < 1 || dim > 3) throw DomainError("dimension must be 1, 2 or 3");
}

double WaveParams::coupling() const { return kind == WaveKind::Helmholtz ? k * k : -k * k; }

double bessel_j0(double x) {
  require_positive(x, "bessel_j0");
  return jy0(x).j;
}
double bessel_y0(double x) {
  require_positive(x, "bessel_y0");
  return jy0(x).y;
}
double bessel_j1(double x) {
  require_positive(x, "bessel_j1");
  return jy1(x).j;
}
double bessel_y1(double x) {
  require_positive(x, "bessel_y1");
  return jy1(x).y;
}
cplx hankel1_0(double x) {
  require_positive(x, "hankel1_0");
  const JY r = jy0(x);
  return {r.j, r.y};
}
cplx hankel1_1(double x) {
  require_positive(x, "hankel1_1");
  const JY r = jy1(x);
  return {r.j, r.y};
}
double bessel_k0(double x) {
  require_positive(x, "bessel_k0");
  return kpair(x).k0;
}
double bessel_k1(double x) {
  require_positive(x, "bessel_k1");
  return kpair(x).k1;
}

cplx greens_value(const WaveParams& p, double r) {
  p.validate();
  if (r < 0.0 || !std::isfinite(r)) throw DomainError("greens_value: distance must be finite and nonnegative");
  if (r == 0.0 && p.dim >= 2) throw DomainError("greens_value: singular at r = 0 in dimension 2 or 3");
  const double k = p.k;
  if (p.kind == WaveKind::Helmholtz) {
    switch (p.dim) {
      case 1: return cplx(0.0, 1.0) * std::exp(cplx(0.0, k * r)) / (2.0 * k);
      case 2: return cplx(0.0, 0.25) * hankel1_0(k * r);
      default: return std::exp(cplx(0.0, k * r)) / (4.0 * kPi * r);
    }
  }
  switch (p.dim) {
    case 1: return std::exp(-k * r) / (2.0 * k);
    case 2: return bessel_k0(k * r) / (2.0 * kPi);
    default: return std::exp(-k * r) / (4.0 * kPi * r);
  }
}

cplx greens_cell_integral(const WaveParams& p, double rho) {
  p.validate();
  if (!(rho > 0.0)) throw DomainError("greens_cell_integral: radius must be positive");
  const double k = p.k, z = k * rho;
  const cplx i(0.0, 1.0);
  if (p.kind == WaveKind::Helmholtz) {
    switch (p.dim) {
      case 1: return (std::exp(i * z) - 1.0) / (k * k);
      // (i/4) 2 pi int_0^rho H0(kr) r dr, using d/dz[z H1(z)] = z H0(z) and z H1(z) -> -2i/pi.
      case 2: return i * kPi / (2.0 * k * k) * (z * hankel1_1(z)) - 1.0 / (k * k);
      default: return (std::exp(i * z) * (1.0 - i * z) - 1.0) / (k * k);
    }
  }
  switch (p.dim) {
    case 1: return (1.0 - std::exp(-z)) / (k * k);
    case 2: return (1.0 - z * bessel_k1(z)) / (k * k);
    default: return (1.0 - std::exp(-z) * (1.0 + z)) / (k * k);
  }
}

}  // namespace bornsob

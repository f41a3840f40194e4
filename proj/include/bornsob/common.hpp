#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace bornsob {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Invalid argument outside an operation's mathematical domain.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed: singular system, stalled refinement, divergence.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested work exceeds a configured ceiling.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double norm3(const Vec3& v);
Vec3 sub3(const Vec3& a, const Vec3& b);
double dist3(const Vec3& a, const Vec3& b);

/// Worker count: hardware concurrency capped by BORN_SOBOLEV_THREADS.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Work is split into fixed contiguous blocks,
/// so results written to slot i are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bornsob

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bornsob/common.hpp"

namespace bornsob {

/// Orders of the parameter-space norm H^a and the data-space norm H^b.
struct SobolevPair {
  int a_param = 0;
  double b_data = 0.0;
};

/// Samples on a regular grid, row-major with the last axis fastest.
struct GridField {
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  std::vector<double> offset;
  std::vector<cplx> values;
  bool complex_valued = false;

  static GridField zeros(std::vector<std::size_t> shape, std::vector<double> spacing,
                         std::vector<double> offset = {}, bool complex_valued = false);

  std::size_t size() const { return values.size(); }
  std::size_t dims() const { return shape.size(); }
  double cell_volume() const;
  /// Coordinate of sample `flat` along `axis`.
  double coord(std::size_t flat, std::size_t axis) const;
  std::vector<double> real_part() const;
  /// Throws DomainError on nonpositive spacing or a size mismatch.
  void validate() const;
};

double binomial(int n, int k);

/// P(s,a,n) = (sum_{j<=s} C(n+j-1,n-1) / (2a^2)^j)^{-1/2}.
double poincare_constant(int s, double a, int n);

/// (I - Delta)^s as the periodic DFT multiplier (1 + |xi|^2)^s.
GridField apply_spectral_operator(const GridField& f, double s);

/// ||(I - Delta)^{s/2} f||_{L^2} with uniform cell weights.
double sobolev_norm(const GridField& f, double s);

/// Applies (1 + xi^2)^s along the rows (receiver axis) of every column.
Eigen::MatrixXcd apply_receiver_operator(const Eigen::MatrixXcd& data, double spacing, double s);

/// Hermitian Gram matrix of the receiver-axis H^b norm: v^H R v = w * sum (1+xi^2)^b |v_hat|^2.
Eigen::MatrixXcd receiver_gram(std::size_t n, double spacing, double b, double weight);

struct ChainLink {
  int order = 0;
  double lhs = 0.0;  // (1/C(n+j-1,n-1)) sum_{|alpha|=j} ||D^alpha f||^2
  double rhs = 0.0;  // (2a^2/C(n+j,n-1)) sum_{|beta|=j+1} ||D^beta f||^2
};

/// Both sides of each link j = 0..s of the derivative-energy chain for f
/// supported in the ball of radius a about the grid centre.
std::vector<ChainLink> check_poincare_chain(const GridField& f, int s, double a);

}  // namespace bornsob

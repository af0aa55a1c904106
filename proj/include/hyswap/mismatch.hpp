#pragma once

#include <utility>

#include <Eigen/Dense>

#include "hyswap/protocol.hpp"

namespace hyswap {

// One-sided Gaussian spread of the channel mismatch.
struct MismatchSpec {
  double Delta = 0.0;
  int quad_points = 64;
  double upper_cut = -1.0;  // negative: min(6*Delta, T)
};

// Density sqrt(2/(pi Delta^2)) exp(-delta^2 / (2 Delta^2)) on delta >= 0.
double mismatch_weight(double delta, double Delta);

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n);

// Quadrature average of the post-measurement state over the mismatch
// distribution, trace-renormalized. p.delta is ignored (it is the
// integration variable). raw_trace, when given, receives the averaged trace
// before renormalization (1 minus the truncated distribution tail).
Eigen::MatrixXcd averaged_density(const ProtocolParams& p,
                                  const MismatchSpec& spec,
                                  double* raw_trace = nullptr);

// Same average applied to the vacuum-outcome probability.
double averaged_success_probability(const ProtocolParams& p,
                                    const MismatchSpec& spec);

}  // namespace hyswap

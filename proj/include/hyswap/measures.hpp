#pragma once

#include <Eigen/Dense>

#include "hyswap/fock.hpp"

namespace hyswap {

struct MeasureSet {
  double negativity = 0.0;
  double fidelity = 0.0;
  double linear_entropy = 0.0;
  double success_prob = 0.0;
};

// <target|rho|target> for a pure target of matching dimension.
double fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& target);

// -2 * (sum of partial-transpose eigenvalues below -1e-12), two-qubit input.
double negativity(const Eigen::MatrixXcd& rho);

// 1 - Tr[rho^2].
double linear_entropy(const Eigen::MatrixXcd& rho);

// 0.5 * trace norm of (rho1 - rho2).
double trace_distance(const Eigen::MatrixXcd& rho1,
                      const Eigen::MatrixXcd& rho2);

// Balanced-detection signal 2*beta*<x_theta> for a single-mode input.
double intensity_difference_expectation(const FockVector& input, double beta,
                                        double theta);
double intensity_difference_expectation(cplx coherent_label, double beta,
                                        double theta);

// (|00> + |11>)/sqrt(2).
Eigen::Vector4cd bell_phi_plus();

}  // namespace hyswap

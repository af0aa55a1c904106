#include "hyswap/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace hyswap {

double fidelity(const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& target) {
  if (rho.rows() != rho.cols() || rho.rows() != target.size())
    throw std::invalid_argument("state dimensions do not match");
  return (target.adjoint() * rho * target)(0, 0).real();
}

double negativity(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("negativity expects a two-qubit state");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("negativity expects a Hermitian input");
  const Eigen::MatrixXcd pt = partial_transpose(rho, 0, {2, 2});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt,
                                                     Eigen::EigenvaluesOnly);
  double neg_sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] < -1e-12) neg_sum += es.eigenvalues()[i];
  return neg_sum < 0.0 ? -2.0 * neg_sum : 0.0;
}

double linear_entropy(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("density matrix must be square");
  return 1.0 - (rho * rho).trace().real();
}

double trace_distance(const Eigen::MatrixXcd& rho1,
                      const Eigen::MatrixXcd& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw std::invalid_argument("state dimensions do not match");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho1 - rho2,
                                                     Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double intensity_difference_expectation(const FockVector& input, double beta,
                                        double theta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  cplx lower = 0.0;
  for (int n = 0; n + 1 < input.amps.size(); ++n)
    lower += std::conj(input.amps[n]) * input.amps[n + 1] * std::sqrt(n + 1.0);
  return 2.0 * beta * (std::polar(1.0, -theta) * lower).real();
}

double intensity_difference_expectation(cplx coherent_label, double beta,
                                        double theta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  return 2.0 * beta * std::abs(coherent_label) *
         std::cos(std::arg(coherent_label) - theta);
}

Eigen::Vector4cd bell_phi_plus() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace hyswap

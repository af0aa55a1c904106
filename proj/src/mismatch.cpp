#include "hyswap/mismatch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyswap {

namespace {

struct QuadRule {
  Eigen::VectorXd nodes;    // mapped to [0, upper]
  Eigen::VectorXd weights;  // includes the distribution density
  double mass = 0.0;        // integral of the density over [0, upper]
};

void validate_spec(const ProtocolParams& p, const MismatchSpec& spec) {
  ProtocolParams base = p;
  base.delta = 0.0;
  validate(base);
  if (!(spec.Delta >= 0.0) || !std::isfinite(spec.Delta))
    throw std::invalid_argument("mismatch width must be finite and >= 0");
  if (spec.quad_points < 2)
    throw std::invalid_argument("quadrature needs at least 2 points");
  if (spec.upper_cut >= 0.0 && spec.upper_cut > p.T)
    throw std::invalid_argument("integration cut must not exceed T");
}

QuadRule build_rule(const ProtocolParams& p, const MismatchSpec& spec) {
  const double upper =
      (spec.upper_cut >= 0.0) ? spec.upper_cut : std::min(6.0 * spec.Delta, p.T);
  if (!(upper > 0.0))
    throw std::invalid_argument("integration range is empty");
  const auto [x, w] = gauss_legendre(spec.quad_points);
  QuadRule rule;
  rule.nodes.resize(x.size());
  rule.weights.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    rule.nodes[i] = upper * (x[i] + 1.0) / 2.0;
    rule.weights[i] =
        (upper / 2.0) * w[i] * mismatch_weight(rule.nodes[i], spec.Delta);
    rule.mass += rule.weights[i];
  }
  return rule;
}

}  // namespace

double mismatch_weight(double delta, double Delta) {
  if (!(Delta > 0.0))
    throw std::invalid_argument("width must be positive (zero width is the point-mass case)");
  if (!(delta >= 0.0)) throw std::invalid_argument("mismatch must be >= 0");
  return std::sqrt(2.0 / (std::numbers::pi * Delta * Delta)) *
         std::exp(-delta * delta / (2.0 * Delta * Delta));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  Eigen::VectorXd x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return {x, w};
}

Eigen::MatrixXcd averaged_density(const ProtocolParams& p,
                                  const MismatchSpec& spec,
                                  double* raw_trace) {
  validate_spec(p, spec);
  ProtocolParams point = p;
  if (spec.Delta == 0.0) {
    point.delta = 0.0;
    if (raw_trace) *raw_trace = 1.0;
    return branches_to_density(analytic_branches(point));
  }
  const QuadRule rule = build_rule(p, spec);
  Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    point.delta = rule.nodes[i];
    acc += rule.weights[i] * branches_to_density(analytic_branches(point));
  }
  if (!acc.allFinite())
    throw std::runtime_error("quadrature failure: non-finite integrand");
  if (raw_trace) *raw_trace = acc.trace().real();
  Eigen::MatrixXcd rho = acc / acc.trace().real();
  check_density(rho);
  return rho;
}

double averaged_success_probability(const ProtocolParams& p,
                                    const MismatchSpec& spec) {
  validate_spec(p, spec);
  ProtocolParams point = p;
  if (spec.Delta == 0.0) {
    point.delta = 0.0;
    return success_probability(point);
  }
  const QuadRule rule = build_rule(p, spec);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    point.delta = rule.nodes[i];
    acc += rule.weights[i] * success_probability(point);
  }
  return acc / rule.mass;
}

}  // namespace hyswap

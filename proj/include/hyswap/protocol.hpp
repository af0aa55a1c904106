#pragma once

#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyswap/fock.hpp"

namespace hyswap {

// Physical knobs of one protocol run. The two channels transmit at T and
// T - delta; x is the recorded quadrature outcome at angle theta.
struct ProtocolParams {
  double alpha = 1.0;
  double T = 1.0;
  double delta = 0.0;
  double x = 0.0;
  double theta = std::numbers::pi / 2;
  bool phase_corrected = true;
  int n_trunc_branches = -1;  // negative: size from epsilon_branch
  double epsilon_branch = 1e-14;
};
void validate(const ProtocolParams& p);

// One environment photon-number pair (n, m) of the post-measurement state:
// weight is the joint coherent-expansion coefficient, v the (already
// weighted, globally normalized) amplitudes on |00>,|01>,|10>,|11> of the
// two retained qubits.
struct Branch {
  int n = 0;
  int m = 0;
  double weight = 0.0;
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
};
struct BranchDecomposition {
  std::vector<Branch> branches;
  double norm_constant = 0.0;  // overall amplitude absorbed by normalization
};

// (|0>_A |alpha>_B + |1>_A |-alpha>_B)/sqrt(2); mode A is two-dimensional.
// n_trunc < 0 sizes mode B automatically.
MultiModeState build_hybrid_state(double alpha, int n_trunc = -1);

// Splits the given mode against an appended vacuum environment mode at
// transmission T. env_dim < 0 copies the signal mode dimension.
MultiModeState apply_loss(const MultiModeState& s, int mode, double T,
                          int env_dim = -1);

// Closed-form branch family of the post-measurement two-qubit state after
// vacuum projection on one mixed output and a quadrature projection on the
// other. Channel transmissions (T, T - delta).
BranchDecomposition analytic_branches(const ProtocolParams& p);
// Same, with the two channel transmissions given independently.
BranchDecomposition analytic_branches_channels(double alpha, double t_b,
                                               double t_d, double x,
                                               double theta,
                                               bool phase_corrected,
                                               double epsilon_branch,
                                               int n_trunc = -1);
// Specialized closed form for identical channels (delta = 0).
BranchDecomposition equal_loss_branches(double alpha, double T, double x,
                                        bool phase_corrected,
                                        double epsilon_branch,
                                        int n_trunc = -1);

// rho = sum of |v><v| over branches, trace-normalized.
Eigen::MatrixXcd branches_to_density(const BranchDecomposition& b);

// Large-T*alpha^2 approximation: rank-2 state on {|00>,|11>} with coherence
// exp(-4(1-T)alpha^2). Sets *warning when the regime assumption is weak.
Eigen::MatrixXcd ideal_limit_density(const ProtocolParams& p,
                                     std::string* warning = nullptr);

// Independent numeric route: explicit Fock-register circuit (hybrid states,
// loss splitters, balanced mixing, vacuum + quadrature projections, trace
// over the environments). The balanced mixing and both projections are
// contracted through a measurement kernel, avoiding the full joint tensor.
Eigen::MatrixXcd oracle_density(const ProtocolParams& p,
                                double eps_trunc = 1e-15);
Eigen::MatrixXcd oracle_density_channels(double alpha, double t_b, double t_d,
                                         double x, double theta,
                                         bool phase_corrected,
                                         double eps_trunc = 1e-15);
// Same circuit with every intermediate state materialized; heavier, used to
// cross-check the contracted route at moderate alpha.
Eigen::MatrixXcd oracle_density_circuit(const ProtocolParams& p,
                                        double eps_trunc = 1e-12);

// Probability of the vacuum outcome, marginal over the quadrature record.
double success_probability(const ProtocolParams& p);
double oracle_success_probability(const ProtocolParams& p,
                                  double eps_trunc = 1e-12);

// Heralded preparation of the hybrid pair from a single-photon source
// (success probability p_c) and a down-conversion stage (efficiency eta).
struct HeraldParams {
  double p_c = 0.01;
  double eta = 0.01;
  double alpha = 1.0;
  int herald_outcome = 1;
  int n_trunc = -1;
};
struct HeraldResult {
  MultiModeState state;     // modes (A, B) after the herald projection
  double probability = 0.0; // of the herald outcome
  double target_overlap = 0.0;  // squared overlap with the ideal hybrid pair
};
HeraldResult herald_hybrid_state(const HeraldParams& h);

}  // namespace hyswap

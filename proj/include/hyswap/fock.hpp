#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hyswap {

using cplx = std::complex<double>;

// Photon-number expansion of a single bosonic mode, indices 0..n_trunc.
// tail_prob is the probability mass lost to truncation for the state the
// vector was built from.
struct FockVector {
  Eigen::VectorXcd amps;
  double tail_prob = 0.0;
  int n_trunc() const { return static_cast<int>(amps.size()) - 1; }
};

// Truncation heuristics for coherent amplitudes.
int default_n_trunc(double amp_mag);
// Smallest dimension whose Poisson tail (mean = amp_mag^2) is below eps.
int fock_dim_for_tail(double amp_mag, double eps);
// Tail mass beyond n_trunc for a coherent state of magnitude amp_mag.
double coherent_tail_prob(double amp_mag, int n_trunc);

// c_n = e^{-|a|^2/2} a^n / sqrt(n!). With strict set, throws when the tail
// exceeds eps_trunc.
FockVector coherent_fock_vector(cplx alpha, int n_trunc, bool strict = false,
                                double eps_trunc = 1e-12);

// Two coherent labels under a transmission-t splitter:
// (a, b) -> (a*sqrt(t) - b*sqrt(1-t), a*sqrt(1-t) + b*sqrt(t)).
std::pair<cplx, cplx> beam_splitter_coherent(cplx alpha, cplx beta, double t);

// Number-conserving two-mode splitter, stored block-per-total-photon-number.
// blocks[n] is the full (n+1)x(n+1) rotation on span{|k, n-k>}; application
// to a truncated register clips to the available rectangle.
struct BeamSplitterUnitary {
  double t = 1.0;
  int dim_a = 0;
  int dim_b = 0;
  std::vector<Eigen::MatrixXcd> blocks;
  // Dense (dim_a*dim_b)^2 matrix, row index a*dim_b + b. Intended for small
  // dimensions only.
  Eigen::MatrixXcd dense() const;
};
BeamSplitterUnitary beam_splitter_unitary(double t, int dim_a, int dim_b);

// Quadrature eigenstate overlap <x_theta|alpha> for a coherent state,
// Dirac-normalized (|<x|alpha>|^2 integrates to 1 over x).
cplx homodyne_amplitude(double x, double theta, cplx alpha);
// Harmonic-oscillator wavefunctions psi_n(x), n < dim.
Eigen::VectorXd quadrature_wavefunctions(double x, int dim);
// <x_theta|n> = psi_n(x) e^{-i n theta}, n < dim.
Eigen::VectorXcd homodyne_fock_bra(double x, double theta, int dim);

// Flat row-major amplitude array over a list of truncated modes.
struct MultiModeState {
  std::vector<int> mode_dims;
  Eigen::VectorXcd amps;
  int num_modes() const { return static_cast<int>(mode_dims.size()); }
  double squared_norm() const { return amps.squaredNorm(); }
};

MultiModeState single_mode(const FockVector& v);
MultiModeState qubit_mode(cplx c0, cplx c1);
MultiModeState tensor(const MultiModeState& a, const MultiModeState& b);
MultiModeState append_vacuum(const MultiModeState& s, int dim);
// Mixes modes ma (splitter port a) and mb (port b) in place.
void apply_beam_splitter(MultiModeState& s, int mode_a, int mode_b,
                         const BeamSplitterUnitary& u);
// Contracts one mode against a bra row vector (bra[k] multiplies the
// amplitude at photon number k); the mode is removed from the register.
MultiModeState project_mode(const MultiModeState& s, int mode,
                            const Eigen::VectorXcd& bra);

// Reduced density matrix on the modes not listed, in their original order.
Eigen::MatrixXcd partial_trace(const MultiModeState& s,
                               const std::vector<int>& modes_to_trace);
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho,
                               const std::vector<int>& dims,
                               const std::vector<int>& modes_to_trace);

// Transpose on one factor of a d1 x d2 bipartition (subsystem 0 or 1).
Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, int subsystem,
                                   std::pair<int, int> dims);

// Throws when rho is not Hermitian / trace-one / positive within tolerance.
void check_density(const Eigen::MatrixXcd& rho, double herm_tol = 1e-12,
                   double trace_tol = 1e-10, double eig_floor = -1e-10);

}  // namespace hyswap

#include "hyswap/protocol.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyswap {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_channels(double alpha, double t_b, double t_d) {
  if (!(std::isfinite(alpha) && alpha >= 0.0))
    throw std::invalid_argument("alpha must be finite and >= 0");
  if (!(t_b > 0.0 && t_b <= 1.0))
    throw std::invalid_argument("channel transmission must lie in (0,1]");
  if (!(t_d > 0.0 && t_d <= 1.0))
    throw std::invalid_argument("channel transmission must lie in (0,1]");
}

int branch_axis_dim(double env_mag, double eps_axis, int n_trunc) {
  if (n_trunc >= 0) return n_trunc + 1;
  return fock_dim_for_tail(env_mag, eps_axis);
}

// Shared assembly: entries(q1,q2) are the measurement amplitudes of the four
// sign branches; the environment pair (n, m) contributes parities s1^n s2^m.
BranchDecomposition assemble_branches(double alpha, double env_b, double env_d,
                                      const Eigen::Vector4cd& entries,
                                      double epsilon_branch, int n_trunc) {
  const double eps_axis = epsilon_branch / 2.0;
  const int nb = branch_axis_dim(env_b, eps_axis, n_trunc);
  const int nd = branch_axis_dim(env_d, eps_axis, n_trunc);
  const Eigen::VectorXcd wb = coherent_fock_vector(env_b, nb - 1).amps;
  const Eigen::VectorXcd wd = coherent_fock_vector(env_d, nd - 1).amps;

  BranchDecomposition out;
  out.branches.reserve(static_cast<size_t>(nb) * nd);
  double total = 0.0;
  for (int n = 0; n < nb; ++n)
    for (int m = 0; m < nd; ++m) {
      Branch br;
      br.n = n;
      br.m = m;
      br.weight = wb[n].real() * wd[m].real();
      const double sn = (n % 2 == 0) ? 1.0 : -1.0;
      const double sm = (m % 2 == 0) ? 1.0 : -1.0;
      br.v[0] = br.weight * entries[0];
      br.v[1] = br.weight * sm * entries[1];
      br.v[2] = br.weight * sn * entries[2];
      br.v[3] = br.weight * sn * sm * entries[3];
      total += br.v.squaredNorm();
      out.branches.push_back(std::move(br));
    }
  if (!(total > 1e-300))
    throw std::runtime_error(
        "measurement record has zero weight; no state is conditioned on it");
  out.norm_constant = std::sqrt(total);
  for (Branch& br : out.branches) br.v /= out.norm_constant;
  return out;
}

Eigen::Vector4cd correction_phases(double alpha, double t_b, double t_d,
                                   double x) {
  Eigen::Vector4cd ph;
  const double rb = std::sqrt(t_b), rd = std::sqrt(t_d);
  int idx = 0;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0})
      ph[idx++] = std::polar(1.0, (s1 * rb + s2 * rd) * alpha * x);
  return ph;
}

}  // namespace

void validate(const ProtocolParams& p) {
  validate_channels(p.alpha, p.T, 1.0);
  if (!(p.delta >= 0.0 && p.delta < p.T))
    throw std::invalid_argument("loss mismatch must lie in [0, T)");
  if (!std::isfinite(p.x) || !std::isfinite(p.theta))
    throw std::invalid_argument("measurement parameters must be finite");
  if (!(p.epsilon_branch > 0.0 && p.epsilon_branch < 1.0))
    throw std::invalid_argument("branch cutoff must lie in (0,1)");
}

MultiModeState build_hybrid_state(double alpha, int n_trunc) {
  if (!(std::isfinite(alpha) && alpha >= 0.0))
    throw std::invalid_argument("alpha must be finite and >= 0");
  const int nt = (n_trunc >= 0) ? n_trunc : default_n_trunc(alpha);
  const FockVector plus = coherent_fock_vector(alpha, nt);
  const FockVector minus = coherent_fock_vector(-alpha, nt);
  MultiModeState s;
  s.mode_dims = {2, nt + 1};
  s.amps.resize(2 * (nt + 1));
  const double r = 1.0 / std::sqrt(2.0);
  s.amps.head(nt + 1) = r * plus.amps;
  s.amps.tail(nt + 1) = r * minus.amps;
  return s;
}

MultiModeState apply_loss(const MultiModeState& s, int mode, double T,
                          int env_dim) {
  if (!(T >= 0.0 && T <= 1.0))
    throw std::invalid_argument("transmission must lie in [0,1]");
  if (mode < 0 || mode >= s.num_modes())
    throw std::invalid_argument("invalid mode index");
  const int de = (env_dim >= 1) ? env_dim : s.mode_dims[mode];
  MultiModeState out = append_vacuum(s, de);
  const BeamSplitterUnitary u =
      beam_splitter_unitary(T, s.mode_dims[mode], de);
  apply_beam_splitter(out, mode, out.num_modes() - 1, u);
  return out;
}

BranchDecomposition analytic_branches_channels(double alpha, double t_b,
                                               double t_d, double x,
                                               double theta,
                                               bool phase_corrected,
                                               double epsilon_branch,
                                               int n_trunc) {
  validate_channels(alpha, t_b, t_d);
  if (!(epsilon_branch > 0.0 && epsilon_branch < 1.0))
    throw std::invalid_argument("branch cutoff must lie in (0,1)");
  const double rb = std::sqrt(t_b), rd = std::sqrt(t_d);
  Eigen::Vector4cd entries;
  int idx = 0;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      const double vac_label = alpha * (s1 * rb - s2 * rd) / std::sqrt(2.0);
      const double quad_label = alpha * (s1 * rb + s2 * rd) / std::sqrt(2.0);
      entries[idx++] = 0.5 * std::exp(-0.5 * vac_label * vac_label) *
                       homodyne_amplitude(x, theta, quad_label);
    }
  if (phase_corrected)
    entries = entries.cwiseProduct(correction_phases(alpha, t_b, t_d, x));
  return assemble_branches(alpha, alpha * std::sqrt(1.0 - t_b),
                           alpha * std::sqrt(1.0 - t_d), entries,
                           epsilon_branch, n_trunc);
}

BranchDecomposition analytic_branches(const ProtocolParams& p) {
  validate(p);
  return analytic_branches_channels(p.alpha, p.T, p.T - p.delta, p.x, p.theta,
                                    p.phase_corrected, p.epsilon_branch,
                                    p.n_trunc_branches);
}

BranchDecomposition equal_loss_branches(double alpha, double T, double x,
                                        bool phase_corrected,
                                        double epsilon_branch, int n_trunc) {
  validate_channels(alpha, T, T);
  const double common = 0.5 * std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  const double damp = std::exp(-T * alpha * alpha);
  const double phase = 2.0 * std::sqrt(T) * alpha * x;
  Eigen::Vector4cd entries;
  entries[0] = common * std::polar(1.0, phase_corrected ? 0.0 : -phase);
  entries[1] = common * damp;
  entries[2] = common * damp;
  entries[3] = common * std::polar(1.0, phase_corrected ? 0.0 : phase);
  return assemble_branches(alpha, alpha * std::sqrt(1.0 - T),
                           alpha * std::sqrt(1.0 - T), entries, epsilon_branch,
                           n_trunc);
}

Eigen::MatrixXcd branches_to_density(const BranchDecomposition& b) {
  if (b.branches.empty())
    throw std::invalid_argument("branch decomposition is empty");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (const Branch& br : b.branches) rho += br.v * br.v.adjoint();
  const double tr = rho.trace().real();
  if (!(tr > 1e-300))
    throw std::runtime_error(
        "measurement record has zero weight; no state is conditioned on it");
  rho /= tr;
  check_density(rho);
  return rho;
}

Eigen::MatrixXcd ideal_limit_density(const ProtocolParams& p,
                                     std::string* warning) {
  validate(p);
  if (warning) {
    warning->clear();
    if (p.T * p.alpha * p.alpha < 3.0)
      *warning = "approximation assumes T*alpha^2 well above 1; got " +
                 std::to_string(p.T * p.alpha * p.alpha);
  }
  const double coherence = std::exp(-4.0 * (1.0 - p.T) * p.alpha * p.alpha);
  const cplx phase = p.phase_corrected
                         ? cplx(1.0, 0.0)
                         : std::polar(1.0, -4.0 * std::sqrt(p.T) * p.alpha * p.x);
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 3) = 0.5 * coherence * phase;
  rho(3, 0) = std::conj(rho(0, 3));
  return rho;
}

Eigen::MatrixXcd oracle_density_channels(double alpha, double t_b, double t_d,
                                         double x, double theta,
                                         bool phase_corrected,
                                         double eps_trunc) {
  validate_channels(alpha, t_b, t_d);
  const int d_sig = fock_dim_for_tail(alpha, eps_trunc);
  const int d_eb = fock_dim_for_tail(alpha * std::sqrt(1.0 - t_b), eps_trunc);
  const int d_ed = fock_dim_for_tail(alpha * std::sqrt(1.0 - t_d), eps_trunc);

  const MultiModeState psi1 =
      apply_loss(build_hybrid_state(alpha, d_sig - 1), 1, t_b, d_eb);
  const MultiModeState psi2 =
      apply_loss(build_hybrid_state(alpha, d_sig - 1), 1, t_d, d_ed);

  // Measurement kernel over the two mixed outputs: vacuum on the first,
  // quadrature x at angle theta on the second. Total photon number is
  // conserved, so only the (0, b+d) output element of each block enters.
  const int n_tot = 2 * (d_sig - 1);
  const BeamSplitterUnitary half = beam_splitter_unitary(0.5, d_sig, d_sig);
  const Eigen::VectorXcd hom = homodyne_fock_bra(x, theta, n_tot + 1);
  Eigen::MatrixXcd kernel(d_sig, d_sig);
  for (int b = 0; b < d_sig; ++b)
    for (int d = 0; d < d_sig; ++d)
      kernel(b, d) = hom[b + d] * half.blocks[b + d](0, b);

  auto signal_env_matrix = [&](const MultiModeState& s, int qubit,
                               int d_env) {
    Eigen::MatrixXcd m(d_sig, d_env);
    for (int b = 0; b < d_sig; ++b)
      for (int e = 0; e < d_env; ++e)
        m(b, e) = s.amps[(Eigen::Index(qubit) * d_sig + b) * d_env + e];
    return m;
  };

  Eigen::MatrixXcd f[2][2];
  for (int a = 0; a < 2; ++a) {
    const Eigen::MatrixXcd q =
        signal_env_matrix(psi1, a, d_eb).transpose() * kernel;
    for (int c = 0; c < 2; ++c)
      f[a][c] = q * signal_env_matrix(psi2, c, d_ed);
  }

  Eigen::Matrix4cd rho;
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2)
          rho(a * 2 + c, a2 * 2 + c2) =
              f[a][c].cwiseProduct(f[a2][c2].conjugate()).sum();

  if (phase_corrected) {
    const Eigen::Vector4cd ph = correction_phases(alpha, t_b, t_d, x);
    rho = ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
  }
  const double tr = rho.trace().real();
  if (!(tr > 1e-300))
    throw std::runtime_error(
        "measurement record has zero weight; no state is conditioned on it");
  rho /= tr;
  check_density(rho);
  return rho;
}

Eigen::MatrixXcd oracle_density(const ProtocolParams& p, double eps_trunc) {
  validate(p);
  return oracle_density_channels(p.alpha, p.T, p.T - p.delta, p.x, p.theta,
                                 p.phase_corrected, eps_trunc);
}

Eigen::MatrixXcd oracle_density_circuit(const ProtocolParams& p,
                                        double eps_trunc) {
  validate(p);
  const double t_b = p.T, t_d = p.T - p.delta;
  const int d_sig = fock_dim_for_tail(std::sqrt(2.0) * p.alpha, eps_trunc);
  const int d_eb =
      fock_dim_for_tail(p.alpha * std::sqrt(1.0 - t_b), eps_trunc);
  const int d_ed =
      fock_dim_for_tail(p.alpha * std::sqrt(1.0 - t_d), eps_trunc);

  const MultiModeState h1 =
      apply_loss(build_hybrid_state(p.alpha, d_sig - 1), 1, t_b, d_eb);
  const MultiModeState h2 =
      apply_loss(build_hybrid_state(p.alpha, d_sig - 1), 1, t_d, d_ed);
  MultiModeState s = tensor(h1, h2);  // modes (A, B, eB, C, D, eD)

  apply_beam_splitter(s, 1, 4, beam_splitter_unitary(0.5, d_sig, d_sig));
  Eigen::VectorXcd vac_bra = Eigen::VectorXcd::Zero(d_sig);
  vac_bra[0] = 1.0;
  s = project_mode(s, 1, vac_bra);  // (A, eB, C, D, eD)
  s = project_mode(s, 3, homodyne_fock_bra(p.x, p.theta, d_sig));

  Eigen::MatrixXcd rho = partial_trace(s, {1, 3});  // keep (A, C)
  if (p.phase_corrected) {
    const Eigen::Vector4cd ph = correction_phases(p.alpha, t_b, t_d, p.x);
    rho = ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
  }
  const double tr = rho.trace().real();
  if (!(tr > 1e-300))
    throw std::runtime_error(
        "measurement record has zero weight; no state is conditioned on it");
  rho /= tr;
  check_density(rho);
  return rho;
}

double success_probability(const ProtocolParams& p) {
  validate(p);
  const double rb = std::sqrt(p.T);
  const double rd = std::sqrt(p.T - p.delta);
  const double a2 = p.alpha * p.alpha;
  const double diff = rb - rd, sum = rb + rd;
  return 0.5 * (std::exp(-a2 * diff * diff / 2.0) +
                std::exp(-a2 * sum * sum / 2.0));
}

double oracle_success_probability(const ProtocolParams& p, double eps_trunc) {
  validate(p);
  const double t_b = p.T, t_d = p.T - p.delta;
  const int d_sig = fock_dim_for_tail(std::sqrt(2.0) * p.alpha, eps_trunc);
  const int d_eb =
      fock_dim_for_tail(p.alpha * std::sqrt(1.0 - t_b), eps_trunc);
  const int d_ed =
      fock_dim_for_tail(p.alpha * std::sqrt(1.0 - t_d), eps_trunc);

  const MultiModeState h1 =
      apply_loss(build_hybrid_state(p.alpha, d_sig - 1), 1, t_b, d_eb);
  const MultiModeState h2 =
      apply_loss(build_hybrid_state(p.alpha, d_sig - 1), 1, t_d, d_ed);
  MultiModeState s = tensor(h1, h2);
  const double norm0 = s.squared_norm();

  apply_beam_splitter(s, 1, 4, beam_splitter_unitary(0.5, d_sig, d_sig));
  Eigen::VectorXcd vac_bra = Eigen::VectorXcd::Zero(d_sig);
  vac_bra[0] = 1.0;
  const MultiModeState proj = project_mode(s, 1, vac_bra);
  return proj.squared_norm() / norm0;
}

HeraldResult herald_hybrid_state(const HeraldParams& h) {
  if (!(h.p_c >= 0.0 && h.p_c <= 1.0 && h.eta >= 0.0 && h.eta <= 1.0))
    throw std::invalid_argument("probabilities must lie in [0,1]");
  if (!(std::isfinite(h.alpha) && h.alpha >= 0.0))
    throw std::invalid_argument("alpha must be finite and >= 0");
  if (h.herald_outcome < 0 || h.herald_outcome > 2)
    throw std::invalid_argument("herald outcome must be 0, 1 or 2");

  const int db =
      (h.n_trunc >= 0) ? h.n_trunc + 1 : default_n_trunc(h.alpha) + 2;
  const Eigen::VectorXcd coh = coherent_fock_vector(h.alpha, db - 1).amps;
  Eigen::VectorXcd raised = Eigen::VectorXcd::Zero(db);
  for (int n = 1; n < db; ++n) raised[n] = std::sqrt(double(n)) * coh[n - 1];

  // Terms (A qubit, herald count, B register, coefficient).
  struct Term {
    int a;
    int q;
    const Eigen::VectorXcd* b;
    double c;
  };
  const Term terms[4] = {
      {0, 0, &coh, std::sqrt((1.0 - h.eta) * (1.0 - h.p_c))},
      {0, 1, &raised, std::sqrt(h.eta * (1.0 - h.p_c))},
      {1, 1, &coh, std::sqrt((1.0 - h.eta) * h.p_c)},
      {1, 2, &raised, std::sqrt(h.eta * h.p_c)},
  };

  MultiModeState full;
  full.mode_dims = {2, db, 3};
  full.amps = Eigen::VectorXcd::Zero(2 * db * 3);
  for (const Term& t : terms)
    for (int n = 0; n < db; ++n)
      full.amps[(Eigen::Index(t.a) * db + n) * 3 + t.q] += t.c * (*t.b)[n];
  full.amps /= std::sqrt(full.squared_norm());

  Eigen::VectorXcd herald_bra = Eigen::VectorXcd::Zero(3);
  herald_bra[h.herald_outcome] = 1.0;
  MultiModeState cond = project_mode(full, 2, herald_bra);
  const double prob = cond.squared_norm();
  if (prob < 1e-15)
    throw std::runtime_error("herald outcome has negligible probability");
  cond.amps /= std::sqrt(prob);

  const MultiModeState target = build_hybrid_state(h.alpha, db - 1);
  const cplx ov = target.amps.dot(cond.amps);
  return {std::move(cond), prob, std::norm(ov)};
}

}  // namespace hyswap

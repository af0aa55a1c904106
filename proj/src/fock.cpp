#include "hyswap/fock.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyswap {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Eigen::Index> row_major_strides(const std::vector<int>& dims) {
  std::vector<Eigen::Index> strides(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * dims[i + 1];
  return strides;
}

Eigen::Index total_size(const std::vector<int>& dims) {
  Eigen::Index n = 1;
  for (int d : dims) n *= d;
  return n;
}

}  // namespace

int default_n_trunc(double amp_mag) {
  if (!(amp_mag >= 0.0)) throw std::invalid_argument("amplitude magnitude must be >= 0");
  return static_cast<int>(std::ceil(amp_mag * amp_mag + 10.0 * amp_mag + 20.0));
}

int fock_dim_for_tail(double amp_mag, double eps) {
  if (!(amp_mag >= 0.0)) throw std::invalid_argument("amplitude magnitude must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("tail bound must be positive");
  const double mu = amp_mag * amp_mag;
  if (mu == 0.0) return 1;
  const double log_eps = std::log(eps);
  // Geometric bound: tail(n) <= pmf(n+1) / (1 - mu/(n+2)) once n+2 > mu.
  for (int n = static_cast<int>(std::ceil(mu)); n < 2000; ++n) {
    const double r = mu / (n + 2.0);
    if (r >= 1.0) continue;
    const double log_bound =
        -mu + (n + 1.0) * std::log(mu) - std::lgamma(n + 2.0) - std::log1p(-r);
    if (log_bound < log_eps) return n + 1;
  }
  return 2000;
}

double coherent_tail_prob(double amp_mag, int n_trunc) {
  const double mu = amp_mag * amp_mag;
  if (mu == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = n_trunc + 1; n < n_trunc + 4000; ++n) {
    const double term = std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
    tail += term;
    if (term < tail * 1e-18 || term < 1e-300) break;
  }
  return tail;
}

FockVector coherent_fock_vector(cplx alpha, int n_trunc, bool strict,
                                double eps_trunc) {
  if (n_trunc < 0) throw std::invalid_argument("n_trunc must be >= 0");
  const double mag = std::abs(alpha);
  FockVector out;
  out.amps = Eigen::VectorXcd::Zero(n_trunc + 1);
  if (mag == 0.0) {
    out.amps[0] = 1.0;
    out.tail_prob = 0.0;
    return out;
  }
  const double phase = std::arg(alpha);
  const double log_mag = std::log(mag);
  for (int n = 0; n <= n_trunc; ++n) {
    const double log_c = -0.5 * mag * mag + n * log_mag - 0.5 * std::lgamma(n + 1.0);
    out.amps[n] = std::polar(std::exp(log_c), phase * n);
  }
  out.tail_prob = coherent_tail_prob(mag, n_trunc);
  if (strict && out.tail_prob > eps_trunc)
    throw std::runtime_error("insufficient truncation: coherent tail " +
                             std::to_string(out.tail_prob) + " exceeds bound");
  return out;
}

std::pair<cplx, cplx> beam_splitter_coherent(cplx alpha, cplx beta, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("transmission must lie in [0,1]");
  const double rt = std::sqrt(t);
  const double rr = std::sqrt(1.0 - t);
  return {alpha * rt - beta * rr, alpha * rr + beta * rt};
}

BeamSplitterUnitary beam_splitter_unitary(double t, int dim_a, int dim_b) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("transmission must lie in [0,1]");
  if (dim_a < 1 || dim_b < 1)
    throw std::invalid_argument("mode dimensions must be >= 1");
  BeamSplitterUnitary u;
  u.t = t;
  u.dim_a = dim_a;
  u.dim_b = dim_b;
  const double theta = std::atan2(std::sqrt(1.0 - t), std::sqrt(t));
  const int n_max = dim_a + dim_b - 2;
  u.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) {
      if (k >= 1) h(k - 1, k) += cplx(0.0, std::sqrt(double(k) * (n - k + 1)));
      if (k < n) h(k + 1, k) -= cplx(0.0, std::sqrt(double(k + 1) * (n - k)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd w = es.eigenvalues();
    const Eigen::MatrixXcd& v = es.eigenvectors();
    Eigen::VectorXcd ph(n + 1);
    for (int k = 0; k <= n; ++k) ph[k] = std::polar(1.0, -theta * w[k]);
    u.blocks.push_back(v * ph.asDiagonal() * v.adjoint());
  }
  return u;
}

Eigen::MatrixXcd BeamSplitterUnitary::dense() const {
  const Eigen::Index d = Eigen::Index(dim_a) * dim_b;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int a = 0; a < dim_a; ++a)
    for (int b = 0; b < dim_b; ++b) {
      const int n = a + b;
      for (int a2 = 0; a2 < dim_a; ++a2) {
        const int b2 = n - a2;
        if (b2 < 0 || b2 >= dim_b) continue;
        m(Eigen::Index(a2) * dim_b + b2, Eigen::Index(a) * dim_b + b) =
            blocks[n](a2, a);
      }
    }
  return m;
}

cplx homodyne_amplitude(double x, double theta, cplx alpha) {
  const cplx w = alpha * std::polar(1.0, -theta);
  const cplx expo = -0.5 * x * x + std::sqrt(2.0) * w * x - 0.5 * w * w -
                    0.5 * std::norm(alpha);
  return std::pow(kPi, -0.25) * std::exp(expo);
}

Eigen::VectorXd quadrature_wavefunctions(double x, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Eigen::VectorXd psi(dim);
  psi[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (dim > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 2; n < dim; ++n)
    psi[n] = x * std::sqrt(2.0 / n) * psi[n - 1] -
             std::sqrt((n - 1.0) / n) * psi[n - 2];
  return psi;
}

Eigen::VectorXcd homodyne_fock_bra(double x, double theta, int dim) {
  const Eigen::VectorXd psi = quadrature_wavefunctions(x, dim);
  Eigen::VectorXcd bra(dim);
  for (int n = 0; n < dim; ++n) bra[n] = psi[n] * std::polar(1.0, -theta * n);
  return bra;
}

MultiModeState single_mode(const FockVector& v) {
  MultiModeState s;
  s.mode_dims = {static_cast<int>(v.amps.size())};
  s.amps = v.amps;
  return s;
}

MultiModeState qubit_mode(cplx c0, cplx c1) {
  MultiModeState s;
  s.mode_dims = {2};
  s.amps.resize(2);
  s.amps << c0, c1;
  return s;
}

MultiModeState tensor(const MultiModeState& a, const MultiModeState& b) {
  MultiModeState out;
  out.mode_dims = a.mode_dims;
  out.mode_dims.insert(out.mode_dims.end(), b.mode_dims.begin(),
                       b.mode_dims.end());
  out.amps.resize(a.amps.size() * b.amps.size());
  for (Eigen::Index i = 0; i < a.amps.size(); ++i)
    out.amps.segment(i * b.amps.size(), b.amps.size()) = a.amps[i] * b.amps;
  return out;
}

MultiModeState append_vacuum(const MultiModeState& s, int dim) {
  if (dim < 1) throw std::invalid_argument("mode dimension must be >= 1");
  MultiModeState out;
  out.mode_dims = s.mode_dims;
  out.mode_dims.push_back(dim);
  out.amps = Eigen::VectorXcd::Zero(s.amps.size() * dim);
  for (Eigen::Index i = 0; i < s.amps.size(); ++i) out.amps[i * dim] = s.amps[i];
  return out;
}

void apply_beam_splitter(MultiModeState& s, int mode_a, int mode_b,
                         const BeamSplitterUnitary& u) {
  const int nm = s.num_modes();
  if (mode_a < 0 || mode_a >= nm || mode_b < 0 || mode_b >= nm ||
      mode_a == mode_b)
    throw std::invalid_argument("invalid mode pair");
  const int da = s.mode_dims[mode_a];
  const int db = s.mode_dims[mode_b];
  if (u.dim_a != da || u.dim_b != db)
    throw std::invalid_argument("splitter dimensions do not match modes");
  const auto strides = row_major_strides(s.mode_dims);
  const Eigen::Index sa = strides[mode_a];
  const Eigen::Index sb = strides[mode_b];
  const Eigen::Index total = s.amps.size();

  std::vector<Eigen::Index> offsets;
  offsets.reserve(total / (Eigen::Index(da) * db));
  for (Eigen::Index i = 0; i < total; ++i) {
    if ((i / sa) % da == 0 && (i / sb) % db == 0) offsets.push_back(i);
  }

  Eigen::MatrixXcd psi(da, db), out(da, db);
  for (Eigen::Index off : offsets) {
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < db; ++b) psi(a, b) = s.amps[off + a * sa + b * sb];
    out.setZero();
    for (int n = 0; n <= da + db - 2; ++n) {
      const int klo = std::max(0, n - db + 1);
      const int khi = std::min(n, da - 1);
      const int m = khi - klo + 1;
      if (m <= 0) continue;
      Eigen::VectorXcd vin(m);
      for (int j = 0; j < m; ++j) vin[j] = psi(klo + j, n - klo - j);
      Eigen::VectorXcd vout = u.blocks[n].block(klo, klo, m, m) * vin;
      for (int j = 0; j < m; ++j) out(klo + j, n - klo - j) += vout[j];
    }
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < db; ++b) s.amps[off + a * sa + b * sb] = out(a, b);
  }
}

MultiModeState project_mode(const MultiModeState& s, int mode,
                            const Eigen::VectorXcd& bra) {
  const int nm = s.num_modes();
  if (mode < 0 || mode >= nm) throw std::invalid_argument("invalid mode index");
  if (nm == 1) throw std::invalid_argument("cannot project away the last mode");
  const int dm = s.mode_dims[mode];
  if (bra.size() != dm)
    throw std::invalid_argument("bra length does not match mode dimension");
  const auto strides = row_major_strides(s.mode_dims);
  const Eigen::Index sm = strides[mode];

  MultiModeState out;
  out.mode_dims = s.mode_dims;
  out.mode_dims.erase(out.mode_dims.begin() + mode);
  out.amps = Eigen::VectorXcd::Zero(s.amps.size() / dm);
  const Eigen::Index block = sm * dm;
  for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
    const int k = static_cast<int>((i / sm) % dm);
    const Eigen::Index pre = i / block;
    const Eigen::Index post = i % sm;
    out.amps[pre * sm + post] += bra[k] * s.amps[i];
  }
  return out;
}

Eigen::MatrixXcd partial_trace(const MultiModeState& s,
                               const std::vector<int>& modes_to_trace) {
  const int nm = s.num_modes();
  std::vector<bool> traced(nm, false);
  for (int m : modes_to_trace) {
    if (m < 0 || m >= nm) throw std::invalid_argument("invalid mode index");
    traced[m] = true;
  }
  std::vector<int> kept_dims, traced_dims;
  for (int m = 0; m < nm; ++m)
    (traced[m] ? traced_dims : kept_dims).push_back(s.mode_dims[m]);
  if (kept_dims.empty())
    throw std::invalid_argument("at least one mode must remain");

  const Eigen::Index nk = total_size(kept_dims);
  const Eigen::Index nt = total_size(traced_dims);
  Eigen::MatrixXcd psi(nk, nt);
  const auto strides = row_major_strides(s.mode_dims);
  for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
    Eigen::Index ik = 0, it = 0;
    for (int m = 0; m < nm; ++m) {
      const int digit = static_cast<int>((i / strides[m]) % s.mode_dims[m]);
      if (traced[m])
        it = it * s.mode_dims[m] + digit;
      else
        ik = ik * s.mode_dims[m] + digit;
    }
    psi(ik, it) = s.amps[i];
  }
  return psi * psi.adjoint();
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho,
                               const std::vector<int>& dims,
                               const std::vector<int>& modes_to_trace) {
  const int nm = static_cast<int>(dims.size());
  if (rho.rows() != rho.cols() || rho.rows() != total_size(dims))
    throw std::invalid_argument("density dimension does not match mode list");
  std::vector<bool> traced(nm, false);
  for (int m : modes_to_trace) {
    if (m < 0 || m >= nm) throw std::invalid_argument("invalid mode index");
    traced[m] = true;
  }
  std::vector<int> kept_dims;
  for (int m = 0; m < nm; ++m)
    if (!traced[m]) kept_dims.push_back(dims[m]);
  if (kept_dims.empty())
    throw std::invalid_argument("at least one mode must remain");

  const Eigen::Index n = rho.rows();
  const auto strides = row_major_strides(dims);
  std::vector<Eigen::Index> kept_idx(n), traced_idx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index ik = 0, it = 0;
    for (int m = 0; m < nm; ++m) {
      const int digit = static_cast<int>((i / strides[m]) % dims[m]);
      if (traced[m])
        it = it * dims[m] + digit;
      else
        ik = ik * dims[m] + digit;
    }
    kept_idx[i] = ik;
    traced_idx[i] = it;
  }
  Eigen::MatrixXcd out =
      Eigen::MatrixXcd::Zero(total_size(kept_dims), total_size(kept_dims));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (traced_idx[i] == traced_idx[j])
        out(kept_idx[i], kept_idx[j]) += rho(i, j);
  return out;
}

Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, int subsystem,
                                   std::pair<int, int> dims) {
  const auto [d1, d2] = dims;
  if (subsystem != 0 && subsystem != 1)
    throw std::invalid_argument("subsystem must be 0 or 1");
  if (d1 < 1 || d2 < 1 || rho.rows() != rho.cols() ||
      rho.rows() != Eigen::Index(d1) * d2)
    throw std::invalid_argument("bipartition does not match density dimension");
  Eigen::MatrixXcd out(rho.rows(), rho.cols());
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b)
      for (int a2 = 0; a2 < d1; ++a2)
        for (int b2 = 0; b2 < d2; ++b2) {
          const Eigen::Index r = Eigen::Index(a) * d2 + b;
          const Eigen::Index c = Eigen::Index(a2) * d2 + b2;
          out(r, c) = (subsystem == 0) ? rho(Eigen::Index(a2) * d2 + b,
                                             Eigen::Index(a) * d2 + b2)
                                       : rho(Eigen::Index(a) * d2 + b2,
                                             Eigen::Index(a2) * d2 + b);
        }
  return out;
}

void check_density(const Eigen::MatrixXcd& rho, double herm_tol,
                   double trace_tol, double eig_floor) {
  if (rho.rows() != rho.cols())
    throw std::runtime_error("density matrix is not square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm >= herm_tol)
    throw std::runtime_error("density matrix is not Hermitian (deviation " +
                             std::to_string(herm) + ")");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > trace_tol)
    throw std::runtime_error("density matrix trace " + std::to_string(tr) +
                             " is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                     Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eig_floor)
    throw std::runtime_error("density matrix has eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) +
                             " below floor");
}

}  // namespace hyswap

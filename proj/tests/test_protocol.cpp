#include <cmath>
#include <numbers>

#include <doctest.h>

#include "hyswap/measures.hpp"
#include "hyswap/protocol.hpp"

using namespace hyswap;

namespace {
constexpr double kPi = std::numbers::pi;

ProtocolParams make(double alpha, double T, double delta = 0.0, double x = 0.0) {
  ProtocolParams p;
  p.alpha = alpha;
  p.T = T;
  p.delta = delta;
  p.x = x;
  return p;
}
}  // namespace

TEST_CASE("hybrid source state") {
  const MultiModeState flat = build_hybrid_state(0.0);
  CHECK(flat.squared_norm() == doctest::Approx(1.0).epsilon(1e-14));
  const int db = flat.mode_dims[1];
  CHECK(std::abs(flat.amps[0] - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);
  CHECK(std::abs(flat.amps[db] - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);

  const double alpha = 1.2;
  const MultiModeState s = build_hybrid_state(alpha);
  CHECK(s.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
  const int nb = s.mode_dims[1];
  const Eigen::VectorXcd plus = coherent_fock_vector(alpha, nb - 1).amps;
  const Eigen::VectorXcd minus = coherent_fock_vector(-alpha, nb - 1).amps;
  CHECK((s.amps.head(nb) - plus / std::sqrt(2.0)).norm() < 1e-14);
  CHECK((s.amps.tail(nb) - minus / std::sqrt(2.0)).norm() < 1e-14);

  // The branch overlap <alpha|-alpha> shows up in the A-register coherence.
  const Eigen::MatrixXcd ra = partial_trace(s, {1});
  CHECK(std::abs(ra(0, 1)) ==
        doctest::Approx(0.5 * std::exp(-2.0 * alpha * alpha)).epsilon(1e-10));
  CHECK_THROWS_AS(build_hybrid_state(-1.0), std::invalid_argument);
}

TEST_CASE("loss channel on one register mode") {
  const int dim = 25;
  const MultiModeState in = single_mode(coherent_fock_vector(0.9, dim - 1));
  const MultiModeState kept = apply_loss(in, 0, 1.0);
  CHECK(kept.num_modes() == 2);
  CHECK((kept.amps - append_vacuum(in, dim).amps).norm() < 1e-13);

  const MultiModeState split = apply_loss(in, 0, 0.99);
  const MultiModeState expect =
      tensor(single_mode(coherent_fock_vector(0.9 * std::sqrt(0.99), dim - 1)),
             single_mode(coherent_fock_vector(0.9 * std::sqrt(0.01), dim - 1)));
  CHECK(std::norm(split.amps.dot(expect.amps)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(apply_loss(in, 0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_loss(in, 2, 0.5), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate(make(1.0, 1.0)));
  CHECK_THROWS_AS(validate(make(-0.1, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make(1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make(1.0, 1.2)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make(1.0, 0.9, -0.01)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make(1.0, 0.9, 0.9)), std::invalid_argument);
  ProtocolParams bad_eps = make(1.0, 1.0);
  bad_eps.epsilon_branch = 0.0;
  CHECK_THROWS_AS(validate(bad_eps), std::invalid_argument);
  ProtocolParams bad_x = make(1.0, 1.0);
  bad_x.x = std::nan("");
  CHECK_THROWS_AS(validate(bad_x), std::invalid_argument);
}

TEST_CASE("flat-source limit gives an unentangled pure product") {
  const Eigen::MatrixXcd rho = branches_to_density(analytic_branches(make(0.0, 0.9)));
  CHECK(negativity(rho) < 1e-12);
  CHECK(linear_entropy(rho) < 1e-12);
  CHECK(fidelity(rho, bell_phi_plus()) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("identical-channel closed form agrees branch by branch") {
  for (double alpha : {0.6, 1.5, 2.8})
    for (double T : {1.0, 0.97, 0.8})
      for (double x : {0.0, -1.1}) {
        ProtocolParams p = make(alpha, T, 0.0, x);
        const BranchDecomposition a = analytic_branches(p);
        const BranchDecomposition b =
            equal_loss_branches(alpha, T, x, p.phase_corrected, p.epsilon_branch);
        REQUIRE(a.branches.size() == b.branches.size());
        CHECK(a.norm_constant == doctest::Approx(b.norm_constant).epsilon(1e-12));
        double worst = 0.0;
        for (size_t i = 0; i < a.branches.size(); ++i) {
          CHECK(a.branches[i].n == b.branches[i].n);
          CHECK(a.branches[i].m == b.branches[i].m);
          worst = std::max(worst,
                           (a.branches[i].v - b.branches[i].v).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-12);
      }
}

TEST_CASE("branch amplitudes match a hand-built construction") {
  // Independent assembly of the same state: for sign branch (s1, s2) the
  // retained pair picks up exp(-alpha^2 (s1 rb - s2 rd)^2 / 4) damping and,
  // at theta = pi/2 with the outcome phase removed, a real Gaussian factor
  // in x; environment pairs (n, m) contribute s1^n s2^m parities weighted by
  // the coherent expansion of the lost amplitudes.
  const double alpha = 1.1, tb = 0.99, td = 0.97, x = 0.8;
  const double rb = std::sqrt(tb), rd = std::sqrt(td);
  const BranchDecomposition got =
      analytic_branches_channels(alpha, tb, td, x, kPi / 2, true, 1e-14);

  Eigen::Vector4d entry;
  int idx = 0;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      const double vac = alpha * (s1 * rb - s2 * rd) / std::sqrt(2.0);
      entry[idx++] = 0.5 * std::pow(kPi, -0.25) * std::exp(-0.5 * x * x) *
                     std::exp(-0.5 * vac * vac);
    }
  const int nb = fock_dim_for_tail(alpha * std::sqrt(1.0 - tb), 0.5e-14);
  const int nd = fock_dim_for_tail(alpha * std::sqrt(1.0 - td), 0.5e-14);
  REQUIRE(got.branches.size() == size_t(nb) * nd);
  const Eigen::VectorXcd wb =
      coherent_fock_vector(alpha * std::sqrt(1.0 - tb), nb - 1).amps;
  const Eigen::VectorXcd wd =
      coherent_fock_vector(alpha * std::sqrt(1.0 - td), nd - 1).amps;

  double total = 0.0;
  std::vector<Eigen::Vector4cd> expect;
  for (Eigen::Index n = 0; n < wb.size(); ++n)
    for (Eigen::Index m = 0; m < wd.size(); ++m) {
      const double w = wb[n].real() * wd[m].real();
      const double sn = (n % 2 == 0) ? 1.0 : -1.0;
      const double sm = (m % 2 == 0) ? 1.0 : -1.0;
      Eigen::Vector4cd v;
      v << w * entry[0], w * sm * entry[1], w * sn * entry[2],
          w * sn * sm * entry[3];
      total += v.squaredNorm();
      expect.push_back(v);
    }
  REQUIRE(expect.size() == got.branches.size());
  double worst = 0.0;
  for (size_t i = 0; i < expect.size(); ++i)
    worst = std::max(
        worst, (expect[i] / std::sqrt(total) - got.branches[i].v).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-12);
}

TEST_CASE("closed form vs numeric circuit at reference points") {
  {
    ProtocolParams p = make(1.5, 0.99, 0.01);
    const double td = trace_distance(branches_to_density(analytic_branches(p)),
                                     oracle_density(p));
    CHECK(td < 1e-8);
  }
  {
    ProtocolParams p = make(1.5, 1.0, 0.0);
    const double td = trace_distance(branches_to_density(analytic_branches(p)),
                                     oracle_density(p, 1e-16));
    CHECK(td < 1e-10);
  }
  {
    ProtocolParams p = make(2.2, 0.95, 0.01, 0.6);
    const double td = trace_distance(branches_to_density(analytic_branches(p)),
                                     oracle_density(p));
    CHECK(td < 1e-8);
  }
}

TEST_CASE("contracted and materialized circuits agree") {
  ProtocolParams p = make(0.9, 0.96, 0.02, 0.3);
  const Eigen::MatrixXcd fused = oracle_density(p);
  const Eigen::MatrixXcd full = oracle_density_circuit(p, 1e-15);
  CHECK(trace_distance(fused, full) < 1e-8);
  CHECK(trace_distance(full, branches_to_density(analytic_branches(p))) < 1e-8);
}

TEST_CASE("frozen reference values") {
  const Eigen::MatrixXcd rho =
      branches_to_density(analytic_branches(make(1.3, 0.95, 0.01)));
  CHECK(negativity(rho) == doctest::Approx(0.622962105476).epsilon(1e-9));
  CHECK(fidelity(rho, bell_phi_plus()) ==
        doctest::Approx(0.811471476767).epsilon(1e-9));
  CHECK(linear_entropy(rho) == doctest::Approx(0.265918696391).epsilon(1e-9));
  CHECK(success_probability(make(1.0, 1.0)) ==
        doctest::Approx(0.567667641618).epsilon(1e-9));
}

TEST_CASE("lossless channels leave a pure near-Bell pair") {
  const BranchDecomposition b = analytic_branches(make(2.0, 1.0));
  CHECK(b.branches.size() == 1);
  const Eigen::MatrixXcd rho = branches_to_density(b);
  CHECK(linear_entropy(rho) < 1e-12);
  CHECK(fidelity(rho, bell_phi_plus()) > 0.999);
  const double d = std::exp(-4.0);
  CHECK(negativity(rho) ==
        doctest::Approx((1.0 - d * d) / (1.0 + d * d)).epsilon(1e-10));
}

TEST_CASE("branch truncation controls") {
  ProtocolParams p = make(1.5, 0.9);
  p.n_trunc_branches = 5;
  CHECK(analytic_branches(p).branches.size() == 36);
  p.n_trunc_branches = -1;
  p.epsilon_branch = 1e-6;
  const size_t loose = analytic_branches(p).branches.size();
  p.epsilon_branch = 1e-14;
  CHECK(analytic_branches(p).branches.size() > loose);
}

TEST_CASE("rank-2 limit") {
  ProtocolParams p = make(2.0, 1.0);
  std::string warn;
  const Eigen::MatrixXcd ideal = ideal_limit_density(p, &warn);
  CHECK(warn.empty());
  CHECK((ideal - bell_phi_plus() * bell_phi_plus().adjoint()).cwiseAbs().maxCoeff() <
        1e-14);

  ProtocolParams q = make(2.0, 0.99);
  const Eigen::MatrixXcd approx = ideal_limit_density(q);
  CHECK(approx(0, 0).real() == doctest::Approx(0.5));
  CHECK(approx(3, 3).real() == doctest::Approx(0.5));
  CHECK(std::abs(approx(0, 3)) ==
        doctest::Approx(0.5 * std::exp(-4.0 * 0.01 * 4.0)).epsilon(1e-12));
  CHECK(trace_distance(approx, branches_to_density(analytic_branches(q))) < 0.02);

  ProtocolParams weak = make(1.0, 0.5);
  ideal_limit_density(weak, &warn);
  CHECK(!warn.empty());
}

TEST_CASE("vacuum-outcome probability") {
  CHECK(success_probability(make(0.0, 0.9)) == doctest::Approx(1.0).epsilon(1e-12));
  for (double T : {1.0, 0.99, 0.95})
    CHECK(success_probability(make(3.0, T)) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(success_probability(make(1.0, 1.0)) -
                 oracle_success_probability(make(1.0, 1.0))) < 1e-8);
  CHECK(std::abs(success_probability(make(1.2, 0.93, 0.04)) -
                 oracle_success_probability(make(1.2, 0.93, 0.04))) < 1e-8);
  double prev = 1.0 + 1e-12;
  for (double a = 0.0; a <= 3.01; a += 0.25) {
    const double s = success_probability(make(a, 0.99));
    CHECK(s <= prev + 1e-12);
    CHECK(s >= 0.5 - 1e-12);
    prev = s;
  }
}

TEST_CASE("corrected state does not depend on the recorded outcome") {
  const Eigen::MatrixXcd base =
      branches_to_density(analytic_branches(make(1.4, 0.98, 0.015, 0.0)));
  for (double x : {-2.0, 0.7, 2.0}) {
    const Eigen::MatrixXcd rho =
        branches_to_density(analytic_branches(make(1.4, 0.98, 0.015, x)));
    CHECK(std::abs(negativity(rho) - negativity(base)) < 1e-10);
    CHECK(std::abs(linear_entropy(rho) - linear_entropy(base)) < 1e-10);
    CHECK(std::abs(fidelity(rho, bell_phi_plus()) - fidelity(base, bell_phi_plus())) <
          1e-10);
  }
  // Without the correction the coherences rotate with x.
  ProtocolParams raw = make(1.4, 0.98, 0.015, 1.0);
  raw.phase_corrected = false;
  const Eigen::MatrixXcd rho_raw = branches_to_density(analytic_branches(raw));
  CHECK(std::abs(std::arg(rho_raw(0, 3))) > 0.1);
  CHECK(std::abs(negativity(rho_raw) - negativity(base)) < 1e-10);
}

TEST_CASE("swapping the two channels leaves the measures unchanged") {
  const Eigen::MatrixXcd ra = branches_to_density(
      analytic_branches_channels(1.2, 0.99, 0.94, 0.4, kPi / 2, true, 1e-14));
  const Eigen::MatrixXcd rb = branches_to_density(
      analytic_branches_channels(1.2, 0.94, 0.99, 0.4, kPi / 2, true, 1e-14));
  CHECK(std::abs(negativity(ra) - negativity(rb)) < 1e-10);
  CHECK(std::abs(linear_entropy(ra) - linear_entropy(rb)) < 1e-10);
  CHECK(std::abs(fidelity(ra, bell_phi_plus()) - fidelity(rb, bell_phi_plus())) <
        1e-10);
}

TEST_CASE("loss damps the retained coherence monotonically") {
  double prev = 1.0;
  for (double T : {1.0, 0.99, 0.95, 0.9, 0.8}) {
    const Eigen::MatrixXcd rho =
        branches_to_density(analytic_branches(make(1.5, T)));
    const double coh = std::abs(rho(0, 3));
    CHECK(coh < prev + 1e-12);
    prev = coh;
  }
}

TEST_CASE("impossible measurement records are rejected") {
  CHECK_THROWS_AS(analytic_branches(make(1.0, 0.9, 0.0, 400.0)),
                  std::runtime_error);
  CHECK_THROWS_AS(equal_loss_branches(1.0, 0.9, 400.0, true, 1e-14),
                  std::runtime_error);
  BranchDecomposition empty;
  CHECK_THROWS_AS(branches_to_density(empty), std::invalid_argument);
}

TEST_CASE("heralded source preparation") {
  HeraldParams h;
  h.p_c = 0.01;
  h.eta = 0.01;
  h.alpha = 1.0;

  double total = 0.0;
  for (int outcome : {0, 1, 2}) {
    HeraldParams hh = h;
    hh.herald_outcome = outcome;
    const HeraldResult r = herald_hybrid_state(hh);
    CHECK(r.state.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.probability >= 0.0);
    CHECK(r.target_overlap >= 0.0);
    CHECK(r.target_overlap <= 1.0 + 1e-12);
    total += r.probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  HeraldParams h2 = h;
  h2.herald_outcome = 2;
  const HeraldResult two = herald_hybrid_state(h2);
  const Eigen::Index db = two.state.amps.size() / 2;
  CHECK(two.state.amps.head(db).norm() < 1e-12);
  CHECK(two.state.amps.tail(db).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));

  HeraldParams h1 = h;
  h1.herald_outcome = 1;
  CHECK(herald_hybrid_state(h1).target_overlap > 0.2);

  HeraldParams bad = h;
  bad.herald_outcome = 3;
  CHECK_THROWS_AS(herald_hybrid_state(bad), std::invalid_argument);
  bad = h;
  bad.p_c = 1.2;
  CHECK_THROWS_AS(herald_hybrid_state(bad), std::invalid_argument);
  bad = h;
  bad.p_c = 0.0;
  bad.eta = 0.0;
  bad.herald_outcome = 2;
  CHECK_THROWS_AS(herald_hybrid_state(bad), std::runtime_error);
}

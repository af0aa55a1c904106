#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyswap/measures.hpp"
#include "hyswap/mismatch.hpp"
#include "hyswap/protocol.hpp"
#include "hyswap/sweep.hpp"

namespace {

using namespace hyswap;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& v) {
  std::string cleaned = v;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> out;
  double d = 0.0;
  while (in >> d) out.push_back(d);
  if (out.empty()) throw std::invalid_argument("empty list in config value");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

// Flat key=value file mirroring the sweep flags; values given on the command
// line take precedence over the file.
void apply_config_file(const std::string& path, const CLI::App& cmd,
                       SweepSpec& spec, std::vector<std::string>& formats,
                       bool& no_correction, double& fixed_delta_in,
                       bool& fixed_delta_set) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  auto given = [&](const std::string& flag) {
    return cmd.get_option(flag)->count() > 0;
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    auto to_double = [&] {
      try {
        size_t used = 0;
        const double d = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return d;
      } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": cannot parse number '" + value +
                                    "' for key '" + key + "'");
      }
    };
    auto to_int = [&] {
      try {
        size_t used = 0;
        const int i = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return i;
      } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": cannot parse integer '" + value +
                                    "' for key '" + key + "'");
      }
    };
    if (key == "alpha-start") {
      if (!given("--alpha-start")) spec.alpha_start = to_double();
    } else if (key == "alpha-stop") {
      if (!given("--alpha-stop")) spec.alpha_stop = to_double();
    } else if (key == "alpha-step") {
      if (!given("--alpha-step")) spec.alpha_step = to_double();
    } else if (key == "transmission") {
      if (!given("--transmission")) spec.T_values = parse_list(value);
    } else if (key == "mismatch-width") {
      if (!given("--mismatch-width")) spec.Delta_values = parse_list(value);
    } else if (key == "fixed-delta") {
      if (!given("--fixed-delta")) {
        fixed_delta_in = to_double();
        fixed_delta_set = true;
      }
    } else if (key == "out") {
      if (!given("--out")) spec.output_path = value;
    } else if (key == "format") {
      if (!given("--format")) {
        formats.clear();
        std::string cleaned = value;
        for (char& c : cleaned)
          if (c == ',') c = ' ';
        std::istringstream fs(cleaned);
        std::string f;
        while (fs >> f) formats.push_back(f);
      }
    } else if (key == "oracle-check") {
      if (!given("--oracle-check")) spec.oracle_check = parse_bool(value);
    } else if (key == "quad-points") {
      if (!given("--quad-points")) spec.quad_points = to_int();
    } else if (key == "x") {
      if (!given("--x")) spec.x = to_double();
    } else if (key == "theta") {
      if (!given("--theta")) spec.theta = to_double();
    } else if (key == "no-phase-correction") {
      if (!given("--no-phase-correction")) no_correction = parse_bool(value);
    } else if (key == "threads") {
      if (!given("--threads")) spec.threads = to_int();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

int run_point(double alpha, double T, double Delta,
              std::optional<double> fixed_delta, double x, double theta,
              bool corrected, bool oracle) {
  ProtocolParams p;
  p.alpha = alpha;
  p.T = T;
  p.x = x;
  p.theta = theta;
  p.phase_corrected = corrected;

  Eigen::MatrixXcd rho;
  double success = 0.0;
  if (fixed_delta) {
    p.delta = *fixed_delta;
    rho = branches_to_density(analytic_branches(p));
    success = success_probability(p);
    std::cout << "alpha=" << fmt(alpha) << " T=" << fmt(T)
              << " delta=" << fmt(*fixed_delta) << "\n";
  } else {
    MismatchSpec ms;
    ms.Delta = Delta;
    rho = averaged_density(p, ms);
    success = averaged_success_probability(p, ms);
    std::cout << "alpha=" << fmt(alpha) << " T=" << fmt(T)
              << " Delta=" << fmt(Delta) << "\n";
  }
  std::cout << "negativity     = " << fmt(negativity(rho)) << "\n"
            << "fidelity       = " << fmt(fidelity(rho, bell_phi_plus())) << "\n"
            << "linear_entropy = " << fmt(linear_entropy(rho)) << "\n"
            << "success_prob   = " << fmt(success) << "\n";
  if (oracle) {
    ProtocolParams q = p;
    if (!fixed_delta) q.delta = std::min(Delta, 0.9 * T);
    const double td = trace_distance(branches_to_density(analytic_branches(q)),
                                     oracle_density(q));
    std::cout << "oracle_trace_distance(delta=" << fmt(q.delta)
              << ") = " << fmt(td) << "\n";
    if (!(td < 1e-8)) {
      std::cerr << "oracle mismatch: trace distance " << fmt(td) << "\n";
      return 2;
    }
  }
  return 0;
}

int run_verify() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& info) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << ": " << info << "\n";
    if (!ok) ++failures;
  };

  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_at;
  for (int ia = 1; ia <= 12; ++ia)
    for (double T : {1.0, 0.99, 0.95})
      for (double d : {0.0, 0.01}) {
        ProtocolParams p;
        p.alpha = 0.25 * ia;
        p.T = T;
        p.delta = d;
        const double td = trace_distance(
            branches_to_density(analytic_branches(p)), oracle_density(p));
        if (td > worst) {
          worst = td;
          worst_at = "alpha=" + fmt(p.alpha) + " T=" + fmt(T) + " delta=" + fmt(d);
        }
      }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report("closed form vs numeric circuit (72 points)", worst < 1e-8,
         "worst trace distance " + fmt(worst) + " at " + worst_at + ", " +
             fmt(secs) + " s");

  {
    double worst_branch = 0.0;
    for (double alpha : {0.5, 1.5, 3.0})
      for (double T : {1.0, 0.95}) {
        ProtocolParams p;
        p.alpha = alpha;
        p.T = T;
        p.x = 0.4;
        const BranchDecomposition a = analytic_branches(p);
        const BranchDecomposition b =
            equal_loss_branches(alpha, T, p.x, p.phase_corrected, p.epsilon_branch);
        for (size_t i = 0; i < a.branches.size(); ++i)
          worst_branch = std::max(
              worst_branch,
              (a.branches[i].v - b.branches[i].v).cwiseAbs().maxCoeff());
      }
    report("identical-channel specialization", worst_branch < 1e-12,
           "max branch amplitude deviation " + fmt(worst_branch));
  }

  {
    ProtocolParams p;
    p.alpha = 1.3;
    p.T = 0.97;
    MismatchSpec ms;
    ms.Delta = 0.0;
    const double diff = (averaged_density(p, ms) -
                         branches_to_density(analytic_branches(p)))
                            .cwiseAbs()
                            .maxCoeff();
    report("zero-width averaging is the point state", diff == 0.0,
           "max entry deviation " + fmt(diff));
  }

  {
    double spread = 0.0;
    ProtocolParams ref;
    ref.alpha = 1.4;
    ref.T = 0.98;
    ref.delta = 0.015;
    const Eigen::MatrixXcd rho0 = branches_to_density(analytic_branches(ref));
    const double e0 = negativity(rho0), f0 = fidelity(rho0, bell_phi_plus()),
                 s0 = linear_entropy(rho0), p0 = success_probability(ref);
    for (double x : {-2.0, 2.0}) {
      ProtocolParams p = ref;
      p.x = x;
      const Eigen::MatrixXcd rho = branches_to_density(analytic_branches(p));
      spread = std::max(spread, std::abs(negativity(rho) - e0));
      spread = std::max(spread, std::abs(fidelity(rho, bell_phi_plus()) - f0));
      spread = std::max(spread, std::abs(linear_entropy(rho) - s0));
      spread = std::max(spread, std::abs(success_probability(p) - p0));
    }
    report("outcome independence after phase correction", spread < 1e-10,
           "max spread over x in {-2,0,2}: " + fmt(spread));
  }

  {
    const BranchDecomposition a =
        analytic_branches_channels(1.2, 0.99, 0.94, 0.0, std::numbers::pi / 2,
                                   true, 1e-14);
    const BranchDecomposition b =
        analytic_branches_channels(1.2, 0.94, 0.99, 0.0, std::numbers::pi / 2,
                                   true, 1e-14);
    const Eigen::MatrixXcd ra = branches_to_density(a);
    const Eigen::MatrixXcd rb = branches_to_density(b);
    const double diff =
        std::max(std::abs(negativity(ra) - negativity(rb)),
                 std::abs(linear_entropy(ra) - linear_entropy(rb)));
    report("channel-swap symmetry", diff < 1e-10,
           "negativity/entropy deviation " + fmt(diff));
  }

  {
    ProtocolParams p;
    p.alpha = 2.0;
    p.T = 0.95;
    MismatchSpec a, b;
    a.Delta = b.Delta = 0.1;
    a.quad_points = 64;
    b.quad_points = 128;
    const double diff =
        (averaged_density(p, a) - averaged_density(p, b)).cwiseAbs().maxCoeff();
    report("quadrature self-convergence", diff < 1e-9,
           "64 vs 128 node difference " + fmt(diff));
  }

  {
    ProtocolParams p;
    p.alpha = 1.0;
    const double diff =
        std::abs(success_probability(p) - oracle_success_probability(p));
    report("vacuum-outcome probability vs circuit marginal", diff < 1e-8,
           "deviation " + fmt(diff));
  }

  {
    ProtocolParams p;
    p.alpha = 2.0;
    p.T = 0.99;
    const double td = trace_distance(ideal_limit_density(p),
                                     branches_to_density(analytic_branches(p)));
    report("rank-2 limit proximity", td < 0.02, "trace distance " + fmt(td));
  }

  std::cout << (failures == 0 ? "verification passed\n"
                              : "verification FAILED\n");
  return failures == 0 ? 0 : 2;
}

int run_herald(double p_c, double eta, double alpha, int outcome) {
  HeraldParams h;
  h.p_c = p_c;
  h.eta = eta;
  h.alpha = alpha;
  h.herald_outcome = outcome;
  const HeraldResult res = herald_hybrid_state(h);
  std::cout << "herald_outcome     = " << outcome << "\n"
            << "probability        = " << fmt(res.probability) << "\n"
            << "target_overlap     = " << fmt(res.target_overlap) << "\n";
  const Eigen::Index db = res.state.amps.size() / 2;
  std::cout << "branch_weight(|0>) = "
            << fmt(res.state.amps.head(db).squaredNorm()) << "\n"
            << "branch_weight(|1>) = "
            << fmt(res.state.amps.tail(db).squaredNorm()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator for lossy hybrid entanglement swapping"};
  app.require_subcommand(1);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "sweep (alpha, T, Delta) grids and emit tables/plots");
  SweepSpec spec;
  std::vector<std::string> formats = {"csv"};
  bool no_correction = false;
  sweep_cmd->add_option("--alpha-start", spec.alpha_start, "first alpha");
  sweep_cmd->add_option("--alpha-stop", spec.alpha_stop, "last alpha");
  sweep_cmd->add_option("--alpha-step", spec.alpha_step, "alpha increment");
  sweep_cmd->add_option("--transmission", spec.T_values,
                        "channel transmissions to sweep");
  sweep_cmd->add_option("--mismatch-width", spec.Delta_values,
                        "mismatch distribution widths to sweep");
  double fixed_delta_in = -1.0;
  auto* fixed_opt = sweep_cmd->add_option(
      "--fixed-delta", fixed_delta_in,
      "known channel mismatch; bypasses distribution averaging");
  sweep_cmd->add_option("--out", spec.output_path, "output base path");
  sweep_cmd->add_option("--format", formats, "csv, json and/or svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  sweep_cmd->add_flag("--oracle-check", spec.oracle_check,
                      "cross-check every 10th grid point against the circuit");
  sweep_cmd->add_option("--quad-points", spec.quad_points,
                        "averaging quadrature order");
  sweep_cmd->add_option("--x", spec.x, "recorded quadrature outcome");
  sweep_cmd->add_option("--theta", spec.theta, "quadrature angle");
  sweep_cmd->add_flag("--no-phase-correction", no_correction,
                      "keep the outcome-dependent phases");
  sweep_cmd->add_option("--threads", spec.threads,
                        "worker threads (0 = hardware)");
  std::string config_path;
  sweep_cmd
      ->add_option("--config", config_path,
                   "flat key=value file mirroring these flags; explicit flags "
                   "take precedence")
      ->check(CLI::ExistingFile);

  // point
  auto* point_cmd =
      app.add_subcommand("point", "evaluate one parameter set and print measures");
  double pt_alpha = 1.0, pt_T = 1.0, pt_Delta = 0.0, pt_x = 0.0,
         pt_theta = std::numbers::pi / 2, pt_fixed = -1.0;
  bool pt_no_corr = false, pt_oracle = false;
  point_cmd->add_option("--alpha", pt_alpha, "coherent amplitude");
  point_cmd->add_option("--transmission", pt_T, "channel transmission");
  point_cmd->add_option("--mismatch-width", pt_Delta, "distribution width");
  auto* pt_fixed_opt =
      point_cmd->add_option("--fixed-delta", pt_fixed, "known channel mismatch");
  point_cmd->add_option("--x", pt_x, "recorded quadrature outcome");
  point_cmd->add_option("--theta", pt_theta, "quadrature angle");
  point_cmd->add_flag("--no-phase-correction", pt_no_corr,
                      "keep the outcome-dependent phases");
  point_cmd->add_flag("--oracle-check", pt_oracle,
                      "compare against the numeric circuit");

  // verify
  auto* verify_cmd = app.add_subcommand(
      "verify", "run the numeric cross-check and invariant suite");

  // herald
  auto* herald_cmd = app.add_subcommand(
      "herald", "heralded hybrid-pair preparation diagnostics");
  double he_pc = 0.01, he_eta = 0.01, he_alpha = 1.0;
  int he_outcome = 1;
  herald_cmd->add_option("--pc", he_pc, "single-photon success probability");
  herald_cmd->add_option("--eta", he_eta, "down-conversion efficiency");
  herald_cmd->add_option("--alpha", he_alpha, "injected coherent amplitude");
  herald_cmd->add_option("--outcome", he_outcome, "heralded photon count (0-2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(sweep_cmd)) {
      bool fixed_delta_set = fixed_opt->count() > 0;
      if (!config_path.empty())
        apply_config_file(config_path, *sweep_cmd, spec, formats, no_correction,
                          fixed_delta_in, fixed_delta_set);
      if (fixed_delta_set) spec.fixed_delta = fixed_delta_in;
      spec.phase_corrected = !no_correction;
      spec.outputs = std::set<std::string>(formats.begin(), formats.end());
      const std::vector<SweepRecord> records = run_sweep(spec);
      emit_outputs(records, spec);
      for (const std::string& f : output_files(spec, records))
        std::cout << "wrote " << f << " (" << records.size() << " records)\n";
      return 0;
    }
    if (app.got_subcommand(point_cmd)) {
      return run_point(pt_alpha, pt_T, pt_Delta,
                       *pt_fixed_opt ? std::optional<double>(pt_fixed)
                                     : std::nullopt,
                       pt_x, pt_theta, !pt_no_corr, pt_oracle);
    }
    if (app.got_subcommand(verify_cmd)) return run_verify();
    if (app.got_subcommand(herald_cmd))
      return run_herald(he_pc, he_eta, he_alpha, he_outcome);
  } catch (const OracleMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyswap/mismatch.hpp"
#include "hyswap/protocol.hpp"

namespace hyswap {

struct SweepSpec {
  double alpha_start = 0.0;
  double alpha_stop = 4.0;
  double alpha_step = 0.05;
  std::vector<double> T_values = {1.0, 0.99, 0.95};
  std::vector<double> Delta_values = {0.0, 0.001, 0.01, 0.1};
  std::optional<double> fixed_delta;  // bypasses averaging when set
  std::set<std::string> outputs = {"csv"};
  std::string output_path = "sweep";
  bool oracle_check = false;
  int quad_points = 64;
  double x = 0.0;
  double theta = std::numbers::pi / 2;
  bool phase_corrected = true;
  int threads = 0;  // 0: hardware concurrency
};

struct SweepRecord {
  double alpha = 0.0;
  double T = 1.0;
  double Delta = 0.0;  // distribution width, or the fixed mismatch
  double negativity = 0.0;
  double fidelity = 0.0;
  double linear_entropy = 0.0;
  double success_prob = 0.0;
};

struct OracleMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void validate(const SweepSpec& spec);
std::vector<double> alpha_grid(const SweepSpec& spec);

// One record per grid point, alpha-major, then T, then Delta. Grid points
// are evaluated in parallel and gathered in grid order. With oracle_check,
// every 10th point is recomputed through the numeric circuit and compared.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec);

std::string to_csv(const std::vector<SweepRecord>& records);
std::string to_json(const std::vector<SweepRecord>& records);
// Two stacked panels (negativity, linear entropy) vs alpha; one polyline
// per Delta value present among the records with this T.
std::string to_svg(const std::vector<SweepRecord>& records, double T);

// Paths that emit_outputs would write, derived from output_path.
std::vector<std::string> output_files(const SweepSpec& spec,
                                      const std::vector<SweepRecord>& records);
void emit_outputs(const std::vector<SweepRecord>& records,
                  const SweepSpec& spec);

}  // namespace hyswap

#include "hyswap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "hyswap/measures.hpp"

namespace hyswap {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct GridPoint {
  double alpha, T, Delta;
};

std::vector<GridPoint> grid_points(const SweepSpec& spec) {
  std::vector<GridPoint> pts;
  for (double a : alpha_grid(spec))
    for (double T : spec.T_values) {
      if (spec.fixed_delta) {
        pts.push_back({a, T, *spec.fixed_delta});
      } else {
        for (double d : spec.Delta_values) pts.push_back({a, T, d});
      }
    }
  return pts;
}

SweepRecord evaluate_point(const SweepSpec& spec, const GridPoint& g) {
  ProtocolParams p;
  p.alpha = g.alpha;
  p.T = g.T;
  p.x = spec.x;
  p.theta = spec.theta;
  p.phase_corrected = spec.phase_corrected;

  Eigen::MatrixXcd rho;
  double success = 0.0;
  if (spec.fixed_delta) {
    p.delta = g.Delta;
    rho = branches_to_density(analytic_branches(p));
    success = success_probability(p);
  } else {
    MismatchSpec ms;
    ms.Delta = g.Delta;
    ms.quad_points = spec.quad_points;
    rho = averaged_density(p, ms);
    success = averaged_success_probability(p, ms);
  }
  SweepRecord r;
  r.alpha = g.alpha;
  r.T = g.T;
  r.Delta = g.Delta;
  r.negativity = negativity(rho);
  r.fidelity = fidelity(rho, bell_phi_plus());
  r.linear_entropy = linear_entropy(rho);
  r.success_prob = success;
  return r;
}

}  // namespace

void validate(const SweepSpec& spec) {
  if (!(spec.alpha_step > 0.0))
    throw std::invalid_argument("alpha step must be positive");
  if (!(spec.alpha_start >= 0.0) || !std::isfinite(spec.alpha_stop))
    throw std::invalid_argument("alpha range must be finite and >= 0");
  if (spec.alpha_stop - spec.alpha_start < -1e-12 ||
      (spec.alpha_stop - spec.alpha_start) + 1e-12 < spec.alpha_step)
    throw std::invalid_argument("alpha grid is empty: step exceeds range");
  if (spec.T_values.empty() || (!spec.fixed_delta && spec.Delta_values.empty()))
    throw std::invalid_argument("parameter grids must be non-empty");
  for (double T : spec.T_values)
    if (!(T > 0.0 && T <= 1.0))
      throw std::invalid_argument("transmission values must lie in (0,1]");
  for (double d : spec.Delta_values)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("mismatch widths must be finite and >= 0");
  if (spec.fixed_delta) {
    for (double T : spec.T_values)
      if (!(*spec.fixed_delta >= 0.0 && *spec.fixed_delta < T))
        throw std::invalid_argument("fixed mismatch must lie in [0, T)");
  }
  for (const std::string& f : spec.outputs)
    if (f != "csv" && f != "json" && f != "svg")
      throw std::invalid_argument("unknown output format: " + f);
  if (!spec.outputs.empty() && spec.output_path.empty())
    throw std::invalid_argument("output path is empty");
  if (spec.quad_points < 2)
    throw std::invalid_argument("quadrature needs at least 2 points");
  if (spec.threads < 0)
    throw std::invalid_argument("thread count must be >= 0");
}

std::vector<double> alpha_grid(const SweepSpec& spec) {
  const int count = static_cast<int>(std::floor(
                        (spec.alpha_stop - spec.alpha_start) / spec.alpha_step +
                        1e-9)) +
                    1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = spec.alpha_start + i * spec.alpha_step;
  return grid;
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
  validate(spec);
  const std::vector<GridPoint> pts = grid_points(spec);
  std::vector<SweepRecord> records(pts.size());

  unsigned n_threads = spec.threads > 0
                           ? static_cast<unsigned>(spec.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, pts.size());
  if (n_threads <= 1 || pts.size() < 8) {
    for (size_t i = 0; i < pts.size(); ++i)
      records[i] = evaluate_point(spec, pts[i]);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= pts.size()) return;
        try {
          records[i] = evaluate_point(spec, pts[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  if (spec.oracle_check) {
    for (size_t i = 0; i < pts.size(); i += 10) {
      const GridPoint& g = pts[i];
      const double delta_check =
          spec.fixed_delta ? *spec.fixed_delta : std::min(g.Delta, 0.9 * g.T);
      ProtocolParams p;
      p.alpha = g.alpha;
      p.T = g.T;
      p.delta = delta_check;
      p.x = spec.x;
      p.theta = spec.theta;
      p.phase_corrected = spec.phase_corrected;
      const double td = trace_distance(branches_to_density(analytic_branches(p)),
                                       oracle_density(p));
      if (!(td < 1e-8))
        throw OracleMismatchError(
            "oracle mismatch at alpha=" + fmt(g.alpha) + " T=" + fmt(g.T) +
            " delta=" + fmt(delta_check) + ": trace distance " + fmt(td));
    }
  }
  return records;
}

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out = "alpha,T,Delta,negativity,fidelity,linear_entropy,success_prob\n";
  for (const SweepRecord& r : records) {
    out += fmt(r.alpha) + ',' + fmt(r.T) + ',' + fmt(r.Delta) + ',' +
           fmt(r.negativity) + ',' + fmt(r.fidelity) + ',' +
           fmt(r.linear_entropy) + ',' + fmt(r.success_prob) + '\n';
  }
  return out;
}

std::string to_json(const std::vector<SweepRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SweepRecord& r : records) {
    arr.push_back({{"alpha", r.alpha},
                   {"T", r.T},
                   {"Delta", r.Delta},
                   {"negativity", r.negativity},
                   {"fidelity", r.fidelity},
                   {"linear_entropy", r.linear_entropy},
                   {"success_prob", r.success_prob}});
  }
  return arr.dump(2) + "\n";
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Panel {
  const char* title;
  double SweepRecord::*field;
};

void draw_panel(std::string& svg, const std::vector<SweepRecord>& recs,
                const std::vector<double>& deltas, const Panel& panel,
                double y_off, double T) {
  const double left = 70, width = 620, height = 240;
  double a_min = recs.front().alpha, a_max = recs.back().alpha;
  for (const SweepRecord& r : recs) {
    a_min = std::min(a_min, r.alpha);
    a_max = std::max(a_max, r.alpha);
  }
  if (a_max <= a_min) a_max = a_min + 1.0;
  double y_max = 1e-6;
  for (const SweepRecord& r : recs) y_max = std::max(y_max, r.*(panel.field));
  y_max *= 1.08;

  auto sx = [&](double a) { return left + (a - a_min) / (a_max - a_min) * width; };
  auto sy = [&](double v) { return y_off + height - v / y_max * height; };

  svg += "<text x=\"" + fmt6(left) + "\" y=\"" + fmt6(y_off - 10) +
         "\" font-size=\"15\" font-family=\"sans-serif\">" +
         std::string(panel.title) + ", T=" + fmt(T) + "</text>\n";
  svg += "<rect x=\"" + fmt6(left) + "\" y=\"" + fmt6(y_off) + "\" width=\"" +
         fmt6(width) + "\" height=\"" + fmt6(height) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double a = a_min + (a_max - a_min) * i / 5.0;
    const double v = y_max * i / 5.0;
    svg += "<line x1=\"" + fmt6(sx(a)) + "\" y1=\"" + fmt6(y_off + height) +
           "\" x2=\"" + fmt6(sx(a)) + "\" y2=\"" + fmt6(y_off + height + 5) +
           "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + fmt6(sx(a)) + "\" y=\"" + fmt6(y_off + height + 20) +
           "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
           fmt6(a) + "</text>\n";
    svg += "<text x=\"" + fmt6(left - 8) + "\" y=\"" + fmt6(sy(v) + 4) +
           "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"end\">" +
           fmt6(v) + "</text>\n";
  }
  svg += "<text x=\"" + fmt6(left + width / 2) + "\" y=\"" +
         fmt6(y_off + height + 38) +
         "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\">"
         "alpha</text>\n";

  for (size_t di = 0; di < deltas.size(); ++di) {
    std::string pts_attr;
    for (const SweepRecord& r : recs) {
      if (r.Delta != deltas[di]) continue;
      pts_attr += fmt6(sx(r.alpha)) + ',' + fmt6(sy(r.*(panel.field))) + ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += kPalette[di % 8];
    svg += "\" stroke-width=\"1.6\" points=\"" + pts_attr + "\"/>\n";
    const double ly = y_off + 16 + 18 * di;
    svg += "<line x1=\"" + fmt6(left + width + 14) + "\" y1=\"" + fmt6(ly) +
           "\" x2=\"" + fmt6(left + width + 38) + "\" y2=\"" + fmt6(ly) +
           "\" stroke=\"" + kPalette[di % 8] + "\" stroke-width=\"1.6\"/>\n";
    svg += "<text x=\"" + fmt6(left + width + 44) + "\" y=\"" + fmt6(ly + 4) +
           "\" font-size=\"12\" font-family=\"sans-serif\">Delta=" +
           fmt(deltas[di]) + "</text>\n";
  }
}

}  // namespace

std::string to_svg(const std::vector<SweepRecord>& records, double T) {
  std::vector<SweepRecord> recs;
  for (const SweepRecord& r : records)
    if (r.T == T) recs.push_back(r);
  if (recs.empty())
    throw std::invalid_argument("no records for the requested transmission");
  std::vector<double> deltas;
  for (const SweepRecord& r : recs)
    if (std::find(deltas.begin(), deltas.end(), r.Delta) == deltas.end())
      deltas.push_back(r.Delta);

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"660\" "
      "viewBox=\"0 0 880 660\">\n<rect width=\"880\" height=\"660\" "
      "fill=\"white\"/>\n";
  const Panel panels[2] = {{"negativity vs alpha", &SweepRecord::negativity},
                           {"linear entropy vs alpha",
                            &SweepRecord::linear_entropy}};
  draw_panel(svg, recs, deltas, panels[0], 40, T);
  draw_panel(svg, recs, deltas, panels[1], 375, T);
  svg += "</svg>\n";
  return svg;
}

namespace {

std::string base_path(const SweepSpec& spec) {
  std::filesystem::path p(spec.output_path);
  const std::string ext = p.extension().string();
  if (ext == ".csv" || ext == ".json" || ext == ".svg")
    p.replace_extension();
  return p.string();
}

}  // namespace

std::vector<std::string> output_files(const SweepSpec& spec,
                                      const std::vector<SweepRecord>& records) {
  const std::string base = base_path(spec);
  std::vector<std::string> files;
  if (spec.outputs.count("csv")) files.push_back(base + ".csv");
  if (spec.outputs.count("json")) files.push_back(base + ".json");
  if (spec.outputs.count("svg")) {
    std::vector<double> ts;
    for (const SweepRecord& r : records)
      if (std::find(ts.begin(), ts.end(), r.T) == ts.end()) ts.push_back(r.T);
    for (double T : ts) files.push_back(base + "_T" + fmt(T) + ".svg");
  }
  return files;
}

void emit_outputs(const std::vector<SweepRecord>& records,
                  const SweepSpec& spec) {
  if (records.empty()) throw std::invalid_argument("no records to emit");
  const std::string base = base_path(spec);
  auto write = [](const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
  };
  if (spec.outputs.count("csv")) write(base + ".csv", to_csv(records));
  if (spec.outputs.count("json")) write(base + ".json", to_json(records));
  if (spec.outputs.count("svg")) {
    std::vector<double> ts;
    for (const SweepRecord& r : records)
      if (std::find(ts.begin(), ts.end(), r.T) == ts.end()) ts.push_back(r.T);
    for (double T : ts) write(base + "_T" + fmt(T) + ".svg", to_svg(records, T));
  }
}

}  // namespace hyswap

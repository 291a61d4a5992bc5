#include "fraclab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "fraclab/experiments.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab::runner {

namespace {

using json = nlohmann::ordered_json;
using config::ConfigError;
using config::RunConfig;
using spectral::Atom;
using spectral::SpaceTimePoint;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json config_json(const RunConfig& cfg) {
  json arr = json::array();
  for (const auto& [k, v] : cfg.entries()) arr.push_back({{"key", k}, {"value", v}});
  return arr;
}

void write_file(const std::string& out_dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvBuilder {
  std::string text = "R,theta,quantity,value\n";
  void row(const std::string& r, const std::string& theta, const std::string& quantity,
           double value) {
    text += r + "," + theta + "," + quantity + "," + fmt(value) + "\n";
  }
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool lower_is_pass = false;  // when true, pass means value >= tolerance
  bool pass() const { return lower_is_pass ? value >= tolerance : value <= tolerance; }
};

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"kind", c.lower_is_pass ? "at_least" : "at_most"},
                   {"pass", c.pass()}});
  return arr;
}

RunResult finish_checks(const std::vector<Check>& checks, json& doc, const RunConfig& cfg,
                        const std::string& out_dir, const std::string& json_name) {
  doc["checks"] = checks_json(checks);
  bool all = true;
  std::string failures;
  for (const auto& c : checks) {
    if (!c.pass()) {
      all = false;
      failures += (failures.empty() ? "" : ", ") + c.name;
    }
  }
  doc["pass"] = all;
  doc["parameters"] = config_json(cfg);
  write_file(out_dir, json_name, doc.dump(2) + "\n");
  if (all) return {0, "ok"};
  return {1, "tolerance failures: " + failures};
}

std::vector<SpaceTimePoint> random_points(int n, int count, double x_radius, double t_max,
                                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<SpaceTimePoint> pts;
  pts.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = x_radius * unif(rng);
    pts.push_back({x, 0.5 * t_max * (unif(rng) + 1.0)});
  }
  return pts;
}

}  // namespace

spectral::FrequencyAtomFunction random_band_limited(int n, int atom_count, double band,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < atom_count; ++i) {
    Vec node(n);
    double r2;
    do {
      r2 = 0.0;
      for (int k = 0; k < n; ++k) {
        node[k] = band * unif(rng);
        r2 += node[k] * node[k];
      }
    } while (r2 > band * band * 0.96);
    atoms.push_back({node, 0.1 + std::abs(unif(rng)), {unif(rng), unif(rng)}});
  }
  return spectral::FrequencyAtomFunction(n, std::move(atoms), band);
}

spectral::ConeAtomFunction random_cone_atoms(int n, int atom_count, double r_min,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed ^ 0xc0eULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < atom_count; ++i) {
    const double r = r_min * (1.0 + unif(rng));  // in [r_min, 2 r_min]
    Vec node(n);
    if (n == 1) {
      node[0] = r;
    } else {
      const double phi = (unif(rng) - 0.5) * std::numbers::pi;  // xi_1 >= 0
      node[0] = r * std::cos(phi);
      node[1] = r * std::sin(phi);
    }
    atoms.push_back({node, 0.1 + unif(rng), {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0}});
  }
  return spectral::ConeAtomFunction(n, std::move(atoms), r_min, 2.0 * r_min);
}

measures::BoxMeasure builtin_measure(const std::string& name, int dim) {
  using measures::BoxMeasure;
  using measures::Cell;
  if (name == "tiny_box") {
    const double s = 1e-4;
    Vec lo(dim), hi(dim);
    for (int k = 0; k < dim; ++k) {
      lo[k] = -s;
      hi[k] = s;
    }
    const double vol = std::pow(2.0 * s, dim);
    return BoxMeasure(dim, {{{lo, hi}, 1.0 / vol}}, {}, 1.0);
  }
  if (name == "ball_cluster") {
    // a blocky ball-like cluster of unit density
    std::vector<Cell> cells;
    const int g = 6;
    const double h = 1.2 / g;
    const int total = dim == 2 ? g * g : g * g * g;
    for (int i = 0; i < total; ++i) {
      int rem = i;
      Vec lo(dim), hi(dim), mid(dim);
      for (int k = 0; k < dim; ++k) {
        const int id = rem % g;
        rem /= g;
        lo[k] = -0.6 + id * h;
        hi[k] = lo[k] + h;
        mid[k] = 0.5 * (lo[k] + hi[k]);
      }
      if (norm(mid) <= 0.5) cells.push_back({{lo, hi}, 1.0});
    }
    return BoxMeasure(dim, cells, {}, 1.0);
  }
  for (const auto& nm : experiments::projection_suite(dim, 1))
    if (nm.name == name) return nm.measure;
  // otherwise treat as a file path
  return measures::load_text(name);
}

// ---------------------------------------------------------------------------

RunResult cmd_identities(const RunConfig& cfg, const std::string& out_dir) {
  const std::uint64_t seed = cfg.require_seed();
  const int galilean_trials = static_cast<int>(cfg.get_long("galilean_trials", 40));
  const int galilean_points = static_cast<int>(cfg.get_long("galilean_points", 400));
  const int wave_trials = static_cast<int>(cfg.get_long("wave_trials", 25));
  const int wave_points = static_cast<int>(cfg.get_long("wave_points", 200));
  const int frame_trials = static_cast<int>(cfg.get_long("frame_trials", 1000));

  std::vector<Check> checks;
  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Galilean identity sweep across dimensions and band scales
  {
    double worst = 0.0;
    for (int trial = 0; trial < galilean_trials; ++trial) {
      const int n = 1 + trial % 2;
      const double lambda = std::pow(10.0, 3.0 * unif(rng));
      auto f = random_band_limited(n, 6 + static_cast<int>(10 * unif(rng)), lambda,
                                   mix(seed ^ (trial + 1)));
      Vec theta(n);
      for (int k = 0; k < n; ++k) theta[k] = lambda * (2.0 * unif(rng) - 1.0) / std::sqrt(double(n));
      auto pts = random_points(n, galilean_points, 2.0, 1.0, rng);
      worst = std::max(worst, experiments::galilean_identity_check(f, theta, pts, lambda));
    }
    checks.push_back({"galilean_identity_max_rel_error", worst, 1e-9});
  }

  // Wave transport identity over K = (2,3) x B(0,1), plus the node identity
  {
    double worst = 0.0, worst_adjoint = 0.0;
    for (int trial = 0; trial < wave_trials; ++trial) {
      const double r_min = std::pow(2.0, 3.0 * unif(rng));
      auto f = random_cone_atoms(2, 4 + static_cast<int>(6 * unif(rng)), r_min,
                                 mix(seed ^ (0xbeefULL + trial)));
      const double lambda = 2.0 + unif(rng);
      Vec theta{2.0 * unif(rng) - 1.0};
      auto pts = random_points(2, wave_points, 0.01, 0.01, rng);
      worst = std::max(worst, experiments::wave_identity_check(f, lambda, theta, pts));

      const auto g = geometry::cone_reparam(f, lambda, theta);
      const auto t_map = geometry::cone_transport(2, lambda, theta);
      for (size_t i = 0; i < f.atoms().size(); ++i) {
        const Vec& xi = f.atoms()[i].node;
        const Vec& xin = g.atoms()[i].node;
        Vec lift{xin[0], xin[1], norm(xin)};
        Vec pulled = apply_transpose(t_map, lift);
        Vec target{xi[0], xi[1], norm(xi)};
        for (int k = 0; k < 3; ++k)
          worst_adjoint =
              std::max(worst_adjoint, std::abs(pulled[k] - target[k]) / std::max(1.0, norm(target)));
      }
    }
    checks.push_back({"wave_identity_max_rel_error", worst, 1e-9});
    checks.push_back({"cone_adjoint_node_identity", worst_adjoint, 1e-10});
  }

  // Frame invariants
  {
    double worst_par = 0.0, worst_cone = 0.0;
    for (int trial = 0; trial < frame_trials; ++trial) {
      const int n = 1 + trial % 3;
      Vec theta(n);
      for (int k = 0; k < n; ++k) theta[k] = 40.0 * (unif(rng) - 0.5);
      const auto fr = geometry::parabolic_frame(theta);
      const auto r = geometry::frame_residuals(fr);
      worst_par = std::max({worst_par, r.factorization, r.orthonormality, r.kernel, r.kernel_norm});

      const int nc = 1 + trial % 2;
      const double lambda = 1.2 + 4.8 * unif(rng);
      Vec th(nc - 1);
      if (nc == 2)
        th[0] = (2.0 * unif(rng) - 1.0) * 0.9 * std::min(1.0, std::sqrt(2.0) * (lambda - 1.0));
      const auto cf = geometry::cone_frame(nc, lambda, th);
      const auto rc = geometry::frame_residuals(cf);
      worst_cone =
          std::max({worst_cone, rc.factorization, rc.orthonormality, rc.kernel, rc.kernel_norm});
    }
    checks.push_back({"parabolic_frame_residuals", worst_par, 1e-12});
    checks.push_back({"cone_frame_residuals", worst_cone, 1e-12});
  }

  // X-ray identity calibration on Gaussian densities
  {
    auto gaussian = [](const Vec& x) { return std::exp(-norm2(x)); };
    const auto d2 = geometry::solmon_check(gaussian, 2, geometry::sphere_quadrature(1, 24), {48, 8.0});
    const auto d3 = geometry::solmon_check(gaussian, 3, geometry::sphere_quadrature(2, 24), {48, 8.0});
    checks.push_back({"solmon_d2_constant_error", std::abs(d2.constant - 2.0) / 2.0, 1e-3});
    checks.push_back(
        {"solmon_d3_constant_error", std::abs(d3.constant - kTwoPi) / kTwoPi, 1e-3});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double w : {0.6, 0.8, 1.0, 1.3, 1.7}) {
      auto g = [w](const Vec& x) { return std::exp(-norm2(x) / (w * w)); };
      const auto r = geometry::solmon_check(g, 2, geometry::sphere_quadrature(1, 24), {64, 8.0 * w});
      lo = std::min(lo, r.constant);
      hi = std::max(hi, r.constant);
    }
    checks.push_back({"solmon_width_stability", (hi - lo) / lo, 1e-3});
  }

  // chart round trips and the cone rotation
  {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 2;
      Vec theta(n);
      for (int k = 0; k < n; ++k) theta[k] = 1000.0 * (2.0 * unif(rng) - 1.0);
      Vec back = geometry::paraboloid_chart_inverse(geometry::paraboloid_chart(theta));
      for (int k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(back[k] - theta[k]) / std::max(1.0, std::abs(theta[k])));
    }
    checks.push_back({"paraboloid_chart_round_trip", worst, 1e-12});

    double worst_rot = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Vec v{4.0 * unif(rng) - 2.0, 4.0 * unif(rng) - 2.0, 4.0 * unif(rng) - 2.0};
      Vec w = geometry::cone_rotation(v);
      worst_rot = std::max(worst_rot, std::abs(norm(w) - norm(v)));
      Vec b = geometry::cone_rotation_inverse(w);
      for (int k = 0; k < 3; ++k) worst_rot = std::max(worst_rot, std::abs(b[k] - v[k]));
    }
    checks.push_back({"cone_rotation_orthogonality", worst_rot, 1e-13});

    double min_sing = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
      const double lambda = 2.0 + unif(rng);
      Vec th{2.0 * unif(rng) - 1.0};
      min_sing = std::min(min_sing, geometry::cone_chart_min_singular(2, lambda, th));
    }
    checks.push_back({"cone_chart_min_singular", min_sing, 1e-6, true});
  }

  json doc;
  doc["experiment"] = "identities";
  doc["version"] = kVersion;
  doc["seed"] = seed;
  return finish_checks(checks, doc, cfg, out_dir, "identities.json");
}

// ---------------------------------------------------------------------------

RunResult cmd_bourgain(const RunConfig& cfg, const std::string& out_dir) {
  const std::uint64_t seed = cfg.require_seed();
  const int n = static_cast<int>(cfg.get_long("n", 1));
  const double epsilon = cfg.get_double("epsilon", 0.01);
  const int apc = static_cast<int>(cfg.get_long("atoms_per_cell", 16));
  const double cutoff_mult = cfg.get_double("cutoff_multiplier", 25.0);
  const long budget = cfg.get_long("sample_budget", 2000);

  json doc;
  doc["experiment"] = "bourgain";
  doc["version"] = kVersion;
  doc["seed"] = seed;
  doc["n"] = n;
  CsvBuilder csv;

  if (n == 1) {
    const auto r_values = cfg.get_double_list("R", {256.0, 1024.0, 4096.0, 16384.0});
    experiments::NecessaryExponentReport rep;
    try {
      rep = experiments::necessary_exponent_fit(r_values, epsilon, apc, seed, cutoff_mult);
    } catch (const std::invalid_argument& e) {
      return {2, std::string("infeasible: ") + e.what()};
    }
    json rows = json::array();
    std::vector<Check> checks;
    double worst_lower = std::numeric_limits<double>::infinity();
    for (const auto& row : rep.rows) {
      auto ex = experiments::build_bourgain(1, row.R, epsilon, apc, seed);
      const auto lb = experiments::verify_lower_bound(ex, budget, seed);
      worst_lower = std::min(worst_lower, lb.min_ratio);
      rows.push_back({{"R", row.R},
                      {"weak_level", row.weak_level},
                      {"level_m", row.level_m},
                      {"i_n", row.i_n},
                      {"i_n_tail", row.i_n_tail},
                      {"f_l2", row.f_l2},
                      {"q", row.q_value},
                      {"lower_bound", lb.min_ratio}});
      const std::string r_str = fmt(row.R);
      csv.row(r_str, "", "weak_level", row.weak_level);
      csv.row(r_str, "", "i_n", row.i_n);
      csv.row(r_str, "", "f_l2", row.f_l2);
      csv.row(r_str, "", "q", row.q_value);
      csv.row(r_str, "", "lower_bound", lb.min_ratio);
    }
    doc["rows"] = rows;
    doc["fit"] = {{"slope", rep.fit.slope},
                  {"intercept", rep.fit.intercept},
                  {"stderr", rep.fit.slope_std_error}};
    doc["s_lower_estimate"] = rep.s_lower_estimate;
    doc["norm_band"] = rep.norm_band;
    doc["energy_band"] = rep.energy_band;

    checks.push_back({"s_lower_estimate", rep.s_lower_estimate, 0.20, true});
    checks.push_back({"f_l2_r_quarter_band", rep.norm_band, 2.0});
    checks.push_back({"energy_log_band", rep.energy_band, 2.0});
    checks.push_back(
        {"lower_bound_constant", worst_lower, 0.9 / std::sqrt(kTwoPi), true});
    write_file(out_dir, "bourgain_1.csv", csv.text);
    return finish_checks(checks, doc, cfg, out_dir, "bourgain_1.json");
  }

  if (n != 2) return {64, "usage: bourgain requires n in {1,2}"};
  const double R = cfg.get_double_list("R", {4e9}).front();
  experiments::BourgainExample ex = [&] {
    try {
      return experiments::build_bourgain(2, R, epsilon, apc, seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const auto lb = experiments::verify_lower_bound(ex, std::max(budget, 1000L), seed);
  const auto profile = experiments::measure_profile(
      ex, static_cast<int>(cfg.get_long("profile_samples", 48)), seed);

  json ranges = json::array();
  for (const auto& pr : profile.ranges) {
    ranges.push_back({{"r_lo", pr.r_lo},
                      {"r_hi", pr.r_hi},
                      {"sampled_r", pr.sampled_r},
                      {"sup_ratio", pr.sup_ratio},
                      {"much_smaller", pr.much_smaller}});
    csv.row(fmt(R), "", "profile_ratio_r_" + fmt(pr.sampled_r), pr.sup_ratio);
  }
  csv.row(fmt(R), "", "lower_bound", lb.min_ratio);
  doc["R"] = R;
  doc["h_omega"] = ex.h_omega;
  doc["omega_points"] = ex.omega_centers.size();
  doc["lower_bound"] = lb.min_ratio;
  doc["profile"] = ranges;
  doc["reference_ratio"] = profile.reference_ratio;

  std::vector<Check> checks;
  checks.push_back({"lower_bound_constant", lb.min_ratio, 0.5 / kTwoPi, true});
  const bool flags_ok = !profile.ranges[0].much_smaller && profile.ranges[1].much_smaller &&
                        profile.ranges[2].much_smaller && profile.ranges[3].much_smaller &&
                        !profile.ranges[4].much_smaller;
  checks.push_back({"profile_flags_match", flags_ok ? 1.0 : 0.0, 1.0, true});
  write_file(out_dir, "bourgain_2.csv", csv.text);
  return finish_checks(checks, doc, cfg, out_dir, "bourgain_2.json");
}

// ---------------------------------------------------------------------------

RunResult cmd_decay(const RunConfig& cfg, const std::string& out_dir) {
  const std::string measure_name = cfg.get_string("measure", "tiny_box");
  const int dim = static_cast<int>(cfg.get_long("dim", 2));
  const auto r_values = cfg.get_double_list("R", {1.0, 2.0, 4.0, 8.0});
  const int order = static_cast<int>(cfg.get_long("order", 128));
  const std::string surface = cfg.get_string("surface", "both");

  measures::BoxMeasure nu = builtin_measure(measure_name, dim);
  json doc;
  doc["experiment"] = "decay";
  doc["version"] = kVersion;
  doc["measure"] = measure_name;
  CsvBuilder csv;
  std::vector<Check> checks;

  auto run_surface = [&](measures::Surface s, const std::string& name) {
    experiments::ExponentFit fit;
    try {
      fit = experiments::decay_exponent(nu, s, r_values, order,
                                        static_cast<int>(cfg.get_long("workers", 1)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const double beta = -fit.slope;
    doc[name] = {{"beta", beta}, {"slope", fit.slope}, {"stderr", fit.slope_std_error}};
    for (size_t i = 0; i < fit.log_r.size(); ++i)
      csv.row(fmt(std::exp(fit.log_r[i])), "", "log_decay_" + name, fit.log_q[i]);
    if (measure_name == "tiny_box")
      checks.push_back({"tiny_box_beta_" + name, std::abs(beta), 0.02});
  };
  if (surface == "both" || surface == "paraboloid")
    run_surface(measures::Surface::kParaboloid, "paraboloid");
  if (surface == "both" || surface == "cone") run_surface(measures::Surface::kCone, "cone");

  // conversion round trips are exact
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double beta = unif(rng);
      const int n = 1 + i % 2;
      worst = std::max(worst,
                       std::abs(experiments::s_to_beta(experiments::beta_to_s(beta, n), n) - beta));
      const double s = unif(rng);
      worst =
          std::max(worst, std::abs(experiments::beta_to_s(experiments::s_to_beta(s, n), n) - s));
    }
    checks.push_back({"exponent_conversion_round_trip", worst, 0.0});
  }
  write_file(out_dir, "decay.csv", csv.text);
  return finish_checks(checks, doc, cfg, out_dir, "decay.json");
}

// ---------------------------------------------------------------------------

RunResult cmd_project(const RunConfig& cfg, const std::string& out_dir) {
  const std::uint64_t seed = cfg.require_seed();
  std::vector<double> dims_d = cfg.get_double_list("dim", {2.0, 3.0});
  const double cutoff_mult = cfg.get_double("cutoff_multiplier", 12.0);
  const int per_axis = static_cast<int>(cfg.get_long("theta_per_axis", 5));
  const int ppd = static_cast<int>(cfg.get_long("points_per_decade", 40));

  json doc;
  doc["experiment"] = "project";
  doc["version"] = kVersion;
  doc["seed"] = seed;
  CsvBuilder csv;
  std::vector<Check> checks;
  json results = json::array();

  for (double dd : dims_d) {
    const int d = static_cast<int>(dd);
    const int n = d - 1;
    const auto suite = experiments::projection_suite(d, seed);
    const auto grid = experiments::theta_grid(n, per_axis);
    for (double alpha : cfg.get_double_list("alpha", {0.5, 1.0, static_cast<double>(n)})) {
      if (alpha > n) continue;
      double c_max = 0.0;
      for (const auto& nm : suite) {
        const double cutoff = cutoff_mult / nm.measure.min_cell_side();
        const auto rep = experiments::averaged_projection_check(nm.measure, alpha, grid, cutoff, ppd);
        c_max = std::max(c_max, rep.ratio);
        results.push_back({{"dim", d},
                           {"alpha", alpha},
                           {"measure", nm.name},
                           {"i_alpha", rep.i_alpha},
                           {"lhs_average", rep.lhs_average},
                           {"ratio", rep.ratio},
                           {"theta_spread", rep.theta_spread},
                           {"solmon_constant", rep.solmon_constant}});
        csv.row(std::to_string(d), fmt(alpha), "ratio_" + nm.name, rep.ratio);
        csv.row(std::to_string(d), fmt(alpha), "spread_" + nm.name, rep.theta_spread);
        if (nm.spherically_symmetric)
          checks.push_back({"symmetric_spread_d" + std::to_string(d) + "_alpha" + fmt(alpha),
                            rep.theta_spread, 0.05});
      }
      results.push_back(
          {{"dim", d}, {"alpha", alpha}, {"measure", "*"}, {"recorded_c", c_max}});
    }
  }
  doc["results"] = results;
  write_file(out_dir, "project.csv", csv.text);
  return finish_checks(checks, doc, cfg, out_dir, "project.json");
}

// ---------------------------------------------------------------------------

RunResult cmd_pipeline(const RunConfig& cfg, const std::string& out_dir) {
  const std::uint64_t seed = cfg.require_seed();
  const double lambda = cfg.get_double("lambda", 16.0);
  const double alpha = cfg.get_double("alpha", 1.0);
  const int atoms = static_cast<int>(cfg.get_long("atoms", 8));
  const int per_axis = static_cast<int>(cfg.get_long("theta_per_axis", 9));
  const std::string measure_name = cfg.get_string("measure", "gauss_symmetric");
  const int workers = static_cast<int>(cfg.get_long("workers", 1));

  measures::BoxMeasure nu = builtin_measure(measure_name, 2);
  auto f = random_band_limited(1, atoms, 0.9 * lambda, seed);
  const double cutoff = cfg.get_double("cutoff_multiplier", 25.0) / nu.min_cell_side();
  experiments::PipelineReport rep;
  try {
    rep = experiments::equivalence_pipeline(nu, f, lambda, alpha,
                                            experiments::theta_grid(1, per_axis), cutoff, workers);
  } catch (const std::invalid_argument& e) {
    return {2, std::string("infeasible: ") + e.what()};
  }

  json doc;
  doc["experiment"] = "pipeline";
  doc["version"] = kVersion;
  doc["seed"] = seed;
  doc["lambda"] = lambda;
  doc["alpha"] = alpha;
  json steps = json::array();
  CsvBuilder csv;
  for (const auto& s : rep.steps) {
    steps.push_back({{"name", s.name}, {"value", s.value}});
    csv.row(fmt(lambda), "", s.name, s.value);
  }
  for (size_t i = 0; i < rep.per_theta_maximal.size(); ++i) {
    csv.row(fmt(lambda), std::to_string(i), "maximal", rep.per_theta_maximal[i]);
    csv.row(fmt(lambda), std::to_string(i), "projected_energy", rep.per_theta_energy[i]);
  }
  doc["steps"] = steps;
  doc["kappa"] = rep.kappa;
  doc["c_geometry"] = rep.c_geometry;
  doc["k_observed"] = rep.k_observed;

  std::vector<Check> checks;
  checks.push_back({"chain_monotone", rep.monotone ? 1.0 : 0.0, 1.0, true});
  write_file(out_dir, "pipeline.csv", csv.text);
  return finish_checks(checks, doc, cfg, out_dir, "pipeline.json");
}

RunResult run_command(const RunConfig& cfg, const std::string& command,
                      const std::string& out_dir) {
  try {
    if (command == "identities") return cmd_identities(cfg, out_dir);
    if (command == "bourgain") return cmd_bourgain(cfg, out_dir);
    if (command == "decay") return cmd_decay(cfg, out_dir);
    if (command == "project") return cmd_project(cfg, out_dir);
    if (command == "pipeline") return cmd_pipeline(cfg, out_dir);
    return {64, "unknown command: " + command};
  } catch (const ConfigError& e) {
    // infeasible-parameter diagnostics surface as exit 2, usage errors as 64
    const std::string what = e.what();
    if (what.find("need R >=") != std::string::npos ||
        what.find("does not resolve") != std::string::npos)
      return {2, what};
    return {64, what};
  } catch (const std::exception& e) {
    return {1, std::string("error: ") + e.what()};
  }
}

}  // namespace fraclab::runner

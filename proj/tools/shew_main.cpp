// shew - experiment CLI for the reflected stochastic heat equation toolkit.
//
// Subcommands: kernel-check, simulate, sweep-penalization, obstacle-check,
// couple, ergodic, strong-feller. Each emits CSV data files plus a
// manifest.json echoing the full configuration and seeds, so that any run can
// be reproduced byte-for-byte from its manifest (wall_clock_seconds aside).
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure,
// 3 acceptance-threshold violation (for the *-check subcommands).

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "shew/config.hpp"
#include "shew/coupling.hpp"
#include "shew/ergodics.hpp"
#include "shew/heat_kernel.hpp"
#include "shew/obstacle_map.hpp"
#include "shew/parallel.hpp"
#include "shew/reflected_solver.hpp"
#include "shew/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shew;

namespace {

constexpr const char* kFormatVersion = "shew-v1";

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RunContext {
  ExperimentConfig config;
  fs::path out_dir;
  std::string subcommand;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::vector<std::string> files;
  std::vector<int> aborted_replicas;
  json results = json::object();

  std::ofstream open_csv(const std::string& name, const std::string& header) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + (out_dir / name).string());
    out << header << "\n";
    files.push_back(name);
    return out;
  }

  void write_manifest() {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json m;
    m["format_version"] = kFormatVersion;
    m["subcommand"] = subcommand;
    m["config"] = json::parse(config.to_json());
    m["seeds"] = json::parse(config.seed_manifest().to_json());
    m["files"] = files;
    m["aborted_replicas"] = aborted_replicas;
    m["results"] = results;
    m["wall_clock_seconds"] = secs;
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }
};

Field initial_from_config(const ExperimentConfig& c, const CircleGrid& grid,
                          const std::string& key, double fallback) {
  if (c.raw.has("initial", key + "_expr"))
    return make_field(grid, parse_wall_expression(c.raw.text("initial", key + "_expr", "")));
  return constant_field(grid, c.raw.number("initial", key, fallback));
}

// ---------------------------------------------------------------- kernel-check

int cmd_kernel_check(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  std::vector<double> ts = c.raw.numbers("probe", "t_values", {0.01, 0.1, 1.0});
  auto csv = ctx.open_csv("kernel_checks.csv", "check,t,value,threshold,pass");
  bool ok = true;
  double worst = 0.0;
  auto emit = [&](const std::string& name, double t, double value, double threshold) {
    bool pass = value <= threshold;
    ok = ok && pass;
    worst = std::max(worst, value);
    csv << name << "," << fmt(t) << "," << fmt(value) << "," << fmt(threshold) << ","
        << (pass ? "1" : "0") << "\n";
  };

  for (double t : ts) {
    double mass_err = 0.0, rep_err = 0.0, sym_err = 0.0;
    for (int i = 0; i < grid.n_x; ++i) {
      double x = grid.node(i);
      double mass = 0.0;
      for (int j = 0; j < grid.n_x; ++j)
        mass += kernel_value(t, x, grid.node(j)) * grid.dx;
      mass_err = std::max(mass_err, std::abs(mass - 1.0));
      double s = kernel_value(t, x, 0.0, KernelRep::Spectral);
      double im = kernel_value(t, x, 0.0, KernelRep::Image);
      rep_err = std::max(rep_err, std::abs(s - im));
      sym_err = std::max(sym_err,
                         std::abs(kernel_value(t, x, 1.0) - kernel_value(t, 1.0, x)));
    }
    emit("mass_conservation", t, mass_err, 1e-10);
    emit("spectral_vs_image", t, rep_err, 1e-10);
    emit("symmetry", t, sym_err, 1e-13);
  }

  // semigroup identities on a reproducible random field
  NoiseIncrement rnd = sample_increment(grid, 1.0, SeedSpec{c.master_seed, 0, StreamTag::Aux}, 0);
  Field g{grid, rnd.values, 0.0};
  Field ab = apply_semigroup(apply_semigroup(g, 0.07), 0.13);
  Field once = apply_semigroup(g, 0.20);
  emit("semigroup_composition", 0.2, sup_norm(Field{grid, ab.values - once.values, 0.0}), 1e-12);
  Field cosx = make_field(grid, [](double x) { return std::cos(x); });
  Field flowed = apply_semigroup(cosx, 1.0);
  emit("eigenfunction_decay", 1.0,
       sup_norm(Field{grid, flowed.values - std::exp(-1.0) * cosx.values, 0.0}), 1e-12);
  Field same = apply_semigroup(g, 0.0);
  emit("identity_at_t0", 0.0, sup_norm(Field{grid, same.values - g.values, 0.0}), 0.0);

  ctx.results["max_error"] = worst;
  ctx.results["pass"] = ok;
  return ok ? 0 : 3;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  PenalizedParams p = c.penalized_params();
  Field u0 = initial_from_config(c, grid, "u0", 0.0);

  std::vector<std::optional<TrajectoryRecord>> records(static_cast<size_t>(c.replicas));
  std::vector<int> aborted(static_cast<size_t>(c.replicas), 0);
  parallel_replicas(c.replicas, [&](int r) {
    try {
      RunOptions opts;
      opts.record_stride = c.record_stride;
      records[static_cast<size_t>(r)] =
          run_reflected(u0, walls, c.horizon, p, SeedSpec{c.master_seed, r, StreamTag::W1}, opts);
    } catch (const BlowupError&) {
      aborted[static_cast<size_t>(r)] = 1;
    }
  }, c.threads);

  double eta_total = 0, xi_total = 0;
  for (int r = 0; r < c.replicas; ++r) {
    if (aborted[static_cast<size_t>(r)]) {
      ctx.aborted_replicas.push_back(r);
      continue;
    }
    const TrajectoryRecord& rec = *records[static_cast<size_t>(r)];
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_r%03d.csv", r);
    auto csv = ctx.open_csv(name, "t,node,u,eta_mass,xi_mass");
    for (int k = 0; k < rec.path.steps(); ++k) {
      for (int i = 0; i < grid.n_x; ++i) {
        double eta = k > 0 ? rec.measures.eta(k - 1, i) : 0.0;
        double xi = k > 0 ? rec.measures.xi(k - 1, i) : 0.0;
        csv << fmt(rec.path.times[static_cast<size_t>(k)]) << "," << i << ","
            << fmt(rec.path.values(k, i)) << "," << fmt(eta) << "," << fmt(xi) << "\n";
      }
    }
    eta_total += rec.measures.eta_total();
    xi_total += rec.measures.xi_total();
  }
  ctx.results["eta_total"] = eta_total;
  ctx.results["xi_total"] = xi_total;
  return ctx.aborted_replicas.empty() ? 0 : 2;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  PenalizedParams base = c.penalized_params();
  base.scheme = Scheme::Penalized;
  Field u0 = initial_from_config(c, grid, "u0", 0.0);
  int levels = static_cast<int>(c.raw.integer("probe", "levels", 5));

  SweepReport sweep =
      convergence_sweep(u0, walls, c.horizon, base, levels, SeedSpec{c.master_seed, 0});
  auto csv = ctx.open_csv("sweep.csv", "level,epsilon,delta,sup_distance");
  for (size_t j = 0; j < sweep.sup_distance.size(); ++j)
    csv << j << "," << fmt(sweep.epsilons[j]) << "," << fmt(sweep.deltas[j]) << ","
        << fmt(sweep.sup_distance[j]) << "\n";

  PenalizedParams pen = base;
  pen.epsilon = c.raw.number("probe", "sandwich_epsilon", 1e-3);
  pen.delta = c.raw.number("probe", "sandwich_delta", 1e-3);
  TrajectoryRecord rec =
      run_reflected(u0, walls, c.horizon, pen, SeedSpec{c.master_seed, 0});
  SandwichReport sandwich = sandwich_check(rec, SeedSpec{c.master_seed, 0});

  ctx.results["sup_distance"] = sweep.sup_distance;
  ctx.results["delta_family_min_gap"] = sweep.delta_family_min_gap;
  ctx.results["delta_family_orientation_up"] = sweep.orientation_up;
  ctx.results["sandwich_lower_violation"] = sandwich.lower_violation;
  ctx.results["sandwich_upper_violation"] = sandwich.upper_violation;
  ctx.results["sandwich_tolerance"] = 5.0 * std::sqrt(base.dt);
  return 0;
}

// ---------------------------------------------------------------- obstacle

int cmd_obstacle_check(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  PenalizedParams p = c.penalized_params();
  Field g = initial_from_config(c, grid, "u0", 0.0);
  const int pairs = static_cast<int>(c.raw.integer("probe", "pairs", 100));
  const int K = static_cast<int>(std::llround(c.horizon / c.dt));

  auto forcing_path = [&](int id, double amp) {
    FieldPath drift{grid, {}, Mat::Zero(K, grid.n_x)};
    FieldPath amp_path{grid, {}, Mat::Constant(K, grid.n_x, amp)};
    for (int k = 0; k < K; ++k) {
      drift.times.push_back(k * c.dt);
      amp_path.times[0] = 0;  // times unused by stochastic_convolution
    }
    amp_path.times = drift.times;
    std::vector<NoiseIncrement> noise;
    for (int k = 0; k < K; ++k)
      noise.push_back(sample_increment(grid, c.dt, SeedSpec{c.master_seed, id, StreamTag::Aux}, k));
    return stochastic_convolution(drift, amp_path, noise);
  };

  auto csv = ctx.open_csv("lipschitz.csv", "pair,kind,ratio");
  double max_ratio = 0.0;
  for (int q = 0; q < pairs; ++q) {
    FieldPath v1 = forcing_path(2 * q, 1.0);
    FieldPath v2 = forcing_path(2 * q + 1, 1.0);
    double r = lipschitz_probe(v1, v2, g, walls);
    max_ratio = std::max(max_ratio, r);
    csv << q << ",random," << fmt(r) << "\n";
  }
  // adversarial two-sided pairs: large forcing against its negation
  for (int q = 0; q < 8; ++q) {
    FieldPath v1 = forcing_path(10000 + q, 3.0);
    FieldPath v2 = v1;
    v2.values = -v1.values;
    double r = lipschitz_probe(v1, v2, g, walls);
    max_ratio = std::max(max_ratio, r);
    csv << q << ",adversarial," << fmt(r) << "\n";
  }

  CompositionReport comp =
      continuity_composition_check(g, walls, c.horizon, p, SeedSpec{c.master_seed, 0});
  ctx.results["max_lipschitz_ratio"] = max_ratio;
  ctx.results["lipschitz_bound"] = 2.0 + 1e-6;
  ctx.results["composition_sup_distance"] = comp.composition_sup_distance;
  ctx.results["composition_tolerance"] = comp.tolerance;
  ctx.results["refinement_ratio"] = comp.refinement_ratio;
  bool ok = max_ratio <= 2.0 + 1e-6 && comp.composition_sup_distance <= comp.tolerance;
  ctx.results["pass"] = ok;
  return ok ? 0 : 3;
}

// ---------------------------------------------------------------- couple

int cmd_couple(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  CouplingParams cp;
  cp.base = c.penalized_params();
  cp.base.scheme = Scheme::Projected;
  cp.mixing_n = c.mixing_n;
  cp.zeta = c.zeta;
  int diag_every = std::max(1, static_cast<int>(std::llround(c.horizon / c.dt)) / 200);
  cp.diagnostics_stride = static_cast<int>(c.raw.integer("probe", "diag_stride", diag_every));
  Field upper = initial_from_config(c, grid, "upper", 0.5);
  Field lower = initial_from_config(c, grid, "lower", -0.5);
  std::vector<double> horizons =
      c.raw.numbers("probe", "horizons", {c.horizon / 4, c.horizon / 2, c.horizon});

  const bool ordered = ((upper.values - lower.values).minCoeff() >= -1e-12);
  std::vector<double> taus(static_cast<size_t>(c.replicas));
  std::vector<std::optional<CoupledRun>> runs(static_cast<size_t>(c.replicas));
  std::vector<std::optional<GeneralCouplingReport>> general(static_cast<size_t>(c.replicas));
  parallel_replicas(c.replicas, [&](int r) {
    SeedSpec rs{c.master_seed, r, StreamTag::W1};
    if (ordered) {
      runs[static_cast<size_t>(r)] = run_coupled_ordered(upper, lower, walls, c.horizon, cp, rs);
      taus[static_cast<size_t>(r)] = runs[static_cast<size_t>(r)]->diag.tau;
    } else {
      general[static_cast<size_t>(r)] =
          run_coupled_general(upper, lower, walls, c.horizon, cp, rs);
      taus[static_cast<size_t>(r)] = general[static_cast<size_t>(r)]->tau_combined;
    }
  }, c.threads);

  if (ordered) {
    auto csv = ctx.open_csv("diagnostics.csv", "replica,t,U,M,QV,sup_gap");
    for (int r = 0; r < c.replicas; ++r) {
      const CouplingDiagnostics& d = runs[static_cast<size_t>(r)]->diag;
      for (size_t k = 0; k < d.times.size(); ++k)
        csv << r << "," << fmt(d.times[k]) << "," << fmt(d.U[k]) << "," << fmt(d.M[k]) << ","
            << fmt(d.QV[k]) << "," << fmt(d.sup_gap[k]) << "\n";
    }
    QvReport qv = qv_lower_bound_check(runs[0]->diag,
                                       c.raw.number("probe", "c0_est", 5e-5));
    ctx.results["qv_percentile01"] = qv.percentile01;
    ctx.results["qv_median"] = qv.median;
    ctx.results["qv_sufficient"] = qv.sufficient;
    double min_gap = 0.0;
    for (int r = 0; r < c.replicas; ++r)
      min_gap = std::min(min_gap, runs[static_cast<size_t>(r)]->diag.min_state_gap);
    ctx.results["min_state_gap"] = min_gap;
  } else {
    auto csv = ctx.open_csv("general_coupling.csv",
                            "replica,tau_pair1,tau_pair2,tau_combined,triangle_violation");
    for (int r = 0; r < c.replicas; ++r) {
      const GeneralCouplingReport& g = *general[static_cast<size_t>(r)];
      csv << r << "," << fmt(g.tau_pair1) << "," << fmt(g.tau_pair2) << ","
          << fmt(g.tau_combined) << "," << fmt(g.triangle_violation) << "\n";
    }
  }

  CouplingSummary sum = summarize_coupling(taus, horizons);
  json probs = json::array();
  for (size_t h = 0; h < horizons.size(); ++h)
    probs.push_back({{"T", horizons[h]},
                     {"probability", sum.probability[h]},
                     {"ci_low", sum.ci_low[h]},
                     {"ci_high", sum.ci_high[h]}});
  ctx.results["coupling_probability"] = probs;
  ctx.results["tau_quantiles"] = sum.tau_quantiles;
  return 0;
}

// ---------------------------------------------------------------- ergodic

int cmd_ergodic(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  PenalizedParams p = c.penalized_params();
  p.scheme = Scheme::Projected;
  std::vector<Observable> obs = default_observables(grid);
  SeedSpec seeds{c.master_seed, 0, StreamTag::W1};

  OccupationSummary occ = occupation_measure(
      initial_from_config(c, grid, "u0", 0.0), walls, c.horizon, c.burn_in, c.stride, obs, p,
      seeds, c.replicas, c.threads);
  if (c.raw.boolean("probe", "dump_samples", false)) {
    auto csv = ctx.open_csv("occupation_samples.csv", "observable,value");
    for (size_t o = 0; o < occ.samples.size(); ++o)
      for (double v : occ.samples[o]) csv << occ.observable_names[o] << "," << fmt(v) << "\n";
  }
  json occq = json::object();
  for (size_t o = 0; o < occ.samples.size(); ++o)
    occq[occ.observable_names[o]] = {stats::quantile(occ.samples[o], 0.05),
                                     stats::quantile(occ.samples[o], 0.5),
                                     stats::quantile(occ.samples[o], 0.95)};
  ctx.results["occupation_quantiles"] = occq;

  Field a = initial_from_config(c, grid, "chain_a", 0.9);
  Field b = initial_from_config(c, grid, "chain_b", -0.9);
  std::vector<double> t_list = c.raw.numbers("probe", "t_list", {2.0, c.horizon});
  int kreps = static_cast<int>(c.raw.integer("probe", "ks_replicas", c.replicas));
  TwoChainReport two =
      two_chain_tv_proxy(a, b, walls, t_list, kreps, p, seeds, c.mixing_n, c.threads);
  auto csv = ctx.open_csv("ks_distances.csv", "t,observable,ks,null_band,gap_probability");
  for (size_t ti = 0; ti < t_list.size(); ++ti)
    for (size_t o = 0; o < two.observable_names.size(); ++o)
      csv << fmt(t_list[ti]) << "," << two.observable_names[o] << "," << fmt(two.ks[ti][o]) << ","
          << fmt(two.ks_null_band) << "," << fmt(two.gap_probability[ti]) << "\n";
  double ks_max_final = 0.0;
  for (double k : two.ks.back()) ks_max_final = std::max(ks_max_final, k);
  ctx.results["ks_max_at_final_t"] = ks_max_final;
  ctx.results["ks_null_band"] = two.ks_null_band;
  ctx.results["gap_probability"] = two.gap_probability;

  double alpha = c.raw.number("probe", "alpha", 0.24);
  double kappa = c.raw.number("probe", "kappa", 0.04);
  int treps = static_cast<int>(c.raw.integer("probe", "tightness_replicas", 200));
  Field mid{grid, 0.5 * (walls.lower.values + walls.upper.values), 0.0};
  TightnessReport tight = tightness_stats({walls.lower, walls.upper, mid}, alpha, kappa, treps,
                                          walls, p, 1.0, seeds, c.threads);
  ctx.results["tightness_moments"] = tight.moments;
  ctx.results["tightness_moment_ratio"] = tight.moment_ratio;
  return 0;
}

// ---------------------------------------------------------------- strong-feller

int cmd_strong_feller(RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  CircleGrid grid = c.grid();
  WallPair walls = c.walls();
  PenalizedParams p = c.penalized_params();
  p.scheme = Scheme::Projected;
  SeedSpec seeds{c.master_seed, 0, StreamTag::W1};

  Field g1 = initial_from_config(c, grid, "g1", 0.2);
  Field g2 = initial_from_config(c, grid, "g2", -0.2);
  std::vector<double> t_list = c.raw.numbers("probe", "t_list", {0.05, 0.2, 1.0, 5.0});
  Observable phi{"sin_mean", [](const Field& f) { return std::sin(f.values.mean()); }};
  StrongFellerReport sf =
      strong_feller_probe(phi, 1.0, g1, g2, walls, t_list, c.replicas, p, seeds, c.threads);
  auto csv = ctx.open_csv("strong_feller.csv", "t,diff,diff_se,ratio,ratio_se");
  for (size_t ti = 0; ti < t_list.size(); ++ti)
    csv << fmt(t_list[ti]) << "," << fmt(sf.diff[ti]) << "," << fmt(sf.diff_se[ti]) << ","
        << fmt(sf.ratio[ti]) << "," << fmt(sf.ratio_se[ti]) << "\n";
  ctx.results["slope"] = sf.slope;
  ctx.results["slope_se"] = sf.slope_se;
  ctx.results["max_ratio"] = *std::max_element(sf.ratio.begin(), sf.ratio.end());

  int bandwidth = static_cast<int>(c.raw.integer("probe", "moll_bandwidth", 16));
  MollifiedCoefficients moll(p.f, p.sigma, walls, bandwidth);
  double flow_eps = c.raw.number("probe", "flow_epsilon", 0.05);
  double flow_delta = c.raw.number("probe", "flow_delta", 0.05);
  double flow_T = c.raw.number("probe", "flow_T", 0.25);
  double flow_dt = c.raw.number("probe", "flow_dt", 1e-3);
  int flow_reps = static_cast<int>(c.raw.integer("probe", "flow_replicas", 100));
  Field ubar0 = make_field(grid, [](double x) { return std::cos(x); });
  DerivativeFlowReport flow =
      derivative_flow(initial_from_config(c, grid, "u0", 0.0), ubar0, moll, flow_eps, flow_delta,
                      flow_T, flow_dt, seeds, flow_reps, c.raw.number("probe", "fd_h", 1e-4),
                      c.threads);
  ctx.results["flow_sup_ratio"] = flow.sup_ratio;
  ctx.results["flow_fd_rel_error"] = flow.fd_rel_error;

  double max_dk = -1e300, min_dl = 1e300;
  for (int i = 0; i < grid.n_x; ++i)
    for (int s = 0; s <= 200; ++s) {
      double z = -2.0 + 4.0 * s / 200.0;
      max_dk = std::max(max_dk, moll.lower_penalty_deriv(z, i));
      min_dl = std::min(min_dl, moll.upper_penalty_deriv(z, i));
    }
  ctx.results["mollified_dk_max"] = max_dk;  // must be <= 0
  ctx.results["mollified_dl_min"] = min_dl;  // must be >= 0
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflected stochastic heat equation experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::int64_t seed_override = -1;
  int replicas_override = 0, threads_override = -1;
  app.add_option("--config", config_path, "TOML experiment configuration");
  app.add_option("--out", out_dir, "output directory (default $SHEW_OUT or ./shew-out)");
  app.add_option("--seed", seed_override, "override [seeds].master_seed");
  app.add_option("--replicas", replicas_override, "override [seeds].replicas");
  app.add_option("--threads", threads_override, "override [seeds].threads");

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(RunContext&);
  };
  const Sub subs[] = {
      {"kernel-check", "heat kernel identity checks", cmd_kernel_check},
      {"simulate", "reflected trajectory simulation", cmd_simulate},
      {"sweep-penalization", "penalization convergence sweep + sandwich bounds", cmd_sweep},
      {"obstacle-check", "obstacle map Lipschitz and composition checks", cmd_obstacle_check},
      {"couple", "two-noise coupling runs and diagnostics", cmd_couple},
      {"ergodic", "occupation measures, two-chain distances, tightness", cmd_ergodic},
      {"strong-feller", "strong Feller ratio probe + derivative flow", cmd_strong_feller},
  };
  for (const Sub& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    RunContext ctx;
    ctx.config = config_path.empty() ? config_from_table(TomlTable::parse(""))
                                     : load_config(config_path);
    if (seed_override >= 0) ctx.config.master_seed = static_cast<std::uint64_t>(seed_override);
    if (replicas_override > 0) ctx.config.replicas = replicas_override;
    if (threads_override >= 0) ctx.config.threads = threads_override;
    if (out_dir.empty()) {
      const char* env = std::getenv("SHEW_OUT");
      out_dir = env && *env ? env : "shew-out";
    }
    ctx.out_dir = out_dir;

    int code = 0;
    for (const Sub& s : subs) {
      if (app.got_subcommand(s.name)) {
        ctx.subcommand = s.name;
        code = s.run(ctx);
        break;
      }
    }
    ctx.write_manifest();
    if (code != 0) std::cerr << ctx.subcommand << ": finished with exit code " << code << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const BlowupError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

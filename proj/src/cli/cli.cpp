#include "nncis/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "nncis/io.hpp"
#include "nncis/lane_keeping.hpp"
#include "nncis/mpc.hpp"
#include "nncis/synth.hpp"

namespace nncis::cli {

namespace {

namespace fs = std::filesystem;

/// Prefixes library errors with the file being processed.
template <typename F>
auto with_file(const std::string& file, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), file + ": " + e.what());
  }
}

Eigen::VectorXd weights(const std::string& text, Eigen::Index n, const std::string& flag) {
  Eigen::VectorXd v = parse_vector(text);
  if (v.size() == 1) return Eigen::VectorXd::Constant(n, v(0));
  if (v.size() != n) {
    throw Error(ErrorCode::DimMismatch, flag + ": expected 1 or " + std::to_string(n) + " entries");
  }
  if ((v.array() < 0).any()) throw Error(ErrorCode::SchemaError, flag + ": weights must be nonnegative");
  return v;
}

struct SynthArgs {
  std::string model, scenario, out;
  int jobs = 0;
  bool history = false;
  bool quiet = false;
  std::string objective = "feasibility";
};

int run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const Mlp m = with_file(a.model, [&] { return load_mlp(a.model); });
  const Scenario s = with_file(a.scenario, [&] { return load_scenario(a.scenario); });
  if (s.state_lower.size() != m.n_x() || s.control.dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, a.scenario + ": state/control dimensions differ from " + a.model);
  }
  const BoxSet safe = with_file(a.scenario, [&] { return s.safe_set(); });
  SynthOptions opts;
  opts.jobs = a.jobs;
  opts.keep_history = a.history;
  opts.objective = a.objective == "l1-center" ? ReturnObjective::L1Center : ReturnObjective::Feasibility;
  if (!a.quiet) {
    opts.progress = [&err](const SynthProgress& p) {
      err << "iter=" << p.iteration << " |Δ|=" << p.cells << " verified=" << p.verified
          << " partitioned=" << p.partitioned << " discarded=" << p.discarded << std::endl;
    };
  }
  const ControlAtlas atlas = synthesize_cis(m, safe, s.control, opts);
  save_atlas(atlas, a.out);
  out << "status=" << (atlas.empty() ? "empty" : "nonempty") << " iterations=" << atlas.iterations
      << " bound=" << termination_bound(safe) << " cells=" << atlas.cis().cell_count()
      << " boxes=" << atlas.entries().size() << "\n";
  return atlas.empty() ? kEmptyCis : kOk;
}

struct SimArgs {
  std::string model, cis, x0, ref, out, variant = "first-step";
  std::string q = "2", r = "1", qn;
  int steps = 200;
  int horizon = 5;
  bool no_warm_start = false;
  double time_limit = 0.0;
};

int run_simulate(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const Mlp m = with_file(a.model, [&] { return load_mlp(a.model); });
  const ControlAtlas atlas = with_file(a.cis, [&] { return load_atlas(a.cis); });
  if (static_cast<int>(atlas.grid().dim()) != m.n_x() || atlas.u_domain().dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, a.cis + ": dimensions differ from " + a.model);
  }
  const Eigen::VectorXd x0 = with_file("--x0", [&] { return parse_vector(a.x0); });
  if (x0.size() != m.n_x()) throw Error(ErrorCode::DimMismatch, "--x0: expected " + std::to_string(m.n_x()) + " entries");
  if (atlas.empty()) {
    err << a.cis << ": invariant set is empty\n";
    return kEmptyCis;
  }
  MpcConfig cfg;
  cfg.N = a.horizon;
  if (cfg.N < 1) throw Error(ErrorCode::SchemaError, "--horizon must be at least 1");
  cfg.variant = a.variant == "full" ? MpcVariant::Full : MpcVariant::FirstStep;
  cfg.Q = weights(a.q, m.n_x(), "--q");
  cfg.QN = a.qn.empty() ? cfg.Q : weights(a.qn, m.n_x(), "--qn");
  cfg.R = weights(a.r, m.n_u(), "--r");
  cfg.use_warm_start = !a.no_warm_start;
  if (a.time_limit > 0) cfg.solver.time_limit_s = a.time_limit;
  if (!a.ref.empty()) {
    cfg.reference = with_file(a.ref, [&] { return load_reference_csv(a.ref, m.n_x()); });
  }
  Trajectory t;
  try {
    t = simulate(m, atlas, cfg, x0, a.steps);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OutsideCis) throw;
    err << e.what() << "\n";
    return kCertificateFailure;
  }
  save_trajectory_csv(t, a.out);
  std::size_t infeasible = 0, fallbacks = 0, outside = 0;
  double ms = 0.0;
  for (const auto& d : t.steps) {
    infeasible += !d.feasible;
    fallbacks += d.fallback;
    ms += d.solve_ms;
  }
  for (bool in : t.in_cis) outside += !in;
  out << "steps=" << t.controls.size() << " infeasible=" << infeasible << " fallbacks=" << fallbacks
      << " outside=" << outside << " mean_solve_ms="
      << (t.steps.empty() ? 0.0 : ms / static_cast<double>(t.steps.size())) << "\n";
  return outside == 0 ? kOk : kCertificateFailure;
}

struct VerifyArgs {
  std::string model, cis;
  long samples = 100000;
  int rollout = 500;
  std::uint64_t seed = 1;
};

int run_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const Mlp m = with_file(a.model, [&] { return load_mlp(a.model); });
  const ControlAtlas atlas = with_file(a.cis, [&] { return load_atlas(a.cis); });
  if (static_cast<int>(atlas.grid().dim()) != m.n_x() || atlas.u_domain().dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, a.cis + ": dimensions differ from " + a.model);
  }
  bool ok = true;

  const CertificateReport cert = certify_atlas(m, atlas);
  out << "certificate: " << cert.checked - cert.failed.size() << "/" << cert.checked << " boxes\n";
  for (std::size_t i : cert.failed) {
    const auto& b = atlas.entries()[i].box;
    err << "box " << i << " fails containment (lo=";
    for (auto v : b.lo) err << v << ' ';
    err << "hi=";
    for (auto v : b.hi) err << v << ' ';
    err << ")\n";
  }
  ok = ok && cert.ok();

  std::size_t sample_fail = 0;
  if (a.samples > 0 && !atlas.empty()) {
    std::mt19937_64 rng(a.seed);
    std::uniform_int_distribution<std::size_t> pick(0, atlas.entries().size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long s = 0; s < a.samples; ++s) {
      const auto& e = atlas.entries()[pick(rng)];
      const RealBox r = e.box.to_real(atlas.grid());
      Eigen::VectorXd x(r.dim());
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = r.lo(j) + unit(rng) * (r.hi(j) - r.lo(j));
      if (!atlas.cis().contains_point(forward(m, x, e.u), 1e-9)) ++sample_fail;
    }
    out << "samples: " << a.samples - sample_fail << "/" << a.samples << " successors inside\n";
  }
  ok = ok && sample_fail == 0;

  if (a.rollout > 0) {
    const RolloutReport r = closed_loop_rollouts(m, atlas, a.rollout);
    out << "rollouts: " << r.starts - r.exits << "/" << r.starts << " stayed inside for " << a.rollout
        << " steps\n";
    ok = ok && r.exits == 0;
  }
  out << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kOk : kCertificateFailure;
}

struct LaneArgs {
  std::string emit = "scenario+model";
  std::string dir = ".";
  std::string scenario_name = "lane_keeping_scenario.json";
  std::string model_name = "lane_keeping_model.json";
  LaneKeepingParams p;
};

int run_lane_keeping(const LaneArgs& a, std::ostream& out) {
  const bool scen = a.emit.find("scenario") != std::string::npos;
  const bool model = a.emit.find("model") != std::string::npos;
  if (!scen && !model) throw Error(ErrorCode::SchemaError, "--emit: expected scenario, model or scenario+model");
  const fs::path dir(a.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());
  if (scen) {
    const Scenario s = lane_keeping_scenario(a.p);
    save_scenario(s, dir / a.scenario_name);
    out << "wrote " << (dir / a.scenario_name).string() << " (cells=" << s.grid().basis_count()
        << " safe=" << s.safe_set().cell_count() << ")\n";
  }
  if (model) {
    save_mlp(lane_keeping_model(a.p), dir / a.model_name);
    out << "wrote " << (dir / a.model_name).string() << "\n";
  }
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Control invariant set synthesis and safe MPC for ReLU network dynamics", "nncis"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Synthesize an invariant set and control atlas");
  synth->add_option("--model", sa.model, "Network JSON")->required();
  synth->add_option("--scenario", sa.scenario, "Scenario JSON")->required();
  synth->add_option("--out", sa.out, "Output cis.json")->required();
  synth->add_option("--jobs", sa.jobs, "Worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
  synth->add_flag("--history", sa.history, "Store every iterate in cis.json");
  synth->add_flag("--quiet", sa.quiet, "Suppress progress lines");
  synth->add_option("--objective", sa.objective, "Verification objective")
      ->check(CLI::IsMember({"feasibility", "l1-center"}));

  SimArgs ma;
  auto* sim = app.add_subcommand("simulate", "Closed-loop MPC constrained to the invariant set");
  sim->add_option("--model", ma.model, "Network JSON")->required();
  sim->add_option("--cis", ma.cis, "cis.json from synth")->required();
  sim->add_option("--x0", ma.x0, "Initial state, comma separated")->required();
  sim->add_option("--steps", ma.steps, "Closed-loop steps")->check(CLI::NonNegativeNumber);
  sim->add_option("--ref", ma.ref, "Reference CSV (step,xr0..)");
  sim->add_option("--variant", ma.variant, "MPC variant")->check(CLI::IsMember({"first-step", "full"}));
  sim->add_option("--horizon", ma.horizon, "Prediction horizon N");
  sim->add_option("--q", ma.q, "State weights (scalar or vector)");
  sim->add_option("--r", ma.r, "Control weights (scalar or vector)");
  sim->add_option("--qn", ma.qn, "Terminal state weights (default: --q)");
  sim->add_option("--time-limit", ma.time_limit, "Per-step solver time limit in seconds");
  sim->add_option("--out", ma.out, "Output trajectory CSV")->required();
  sim->add_flag("--no-warm-start", ma.no_warm_start, "Do not seed the solver with the atlas plan");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Re-check an atlas: containment, sampling and rollouts");
  ver->add_option("--model", va.model, "Network JSON")->required();
  ver->add_option("--cis", va.cis, "cis.json from synth")->required();
  ver->add_option("--samples", va.samples, "Random one-step samples")->check(CLI::NonNegativeNumber);
  ver->add_option("--rollout", va.rollout, "Closed-loop rollout length per cell center")
      ->check(CLI::NonNegativeNumber);
  ver->add_option("--seed", va.seed, "Sampling seed");

  LaneArgs la;
  auto* lane = app.add_subcommand("lane-keeping", "Write the lane-keeping scenario and model");
  lane->add_option("--emit", la.emit, "scenario, model or scenario+model");
  lane->add_option("--dir", la.dir, "Output directory");
  lane->add_option("--scenario-name", la.scenario_name, "Scenario file name");
  lane->add_option("--model-name", la.model_name, "Model file name");
  lane->add_option("--l1", la.p.l1, "Vehicle length l1 [m]");
  lane->add_option("--l2", la.p.l2, "Vehicle width l2 [m]");
  lane->add_option("--w", la.p.w, "Lane width w [m]");
  lane->add_option("--v", la.p.v, "Speed v [m/s]");
  lane->add_option("--dt", la.p.dt, "Sampling time dt [s]");
  lane->add_option("--u-max-deg", la.p.u_max_deg, "Steering bound [deg]");
  lane->add_option("--divisor", la.p.divisor, "d_min = (w - l2) / divisor");

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kIoError;
  }

  try {
    if (*synth) return run_synth(sa, out, err);
    if (*sim) return run_simulate(ma, out, err);
    if (*ver) return run_verify(va, out, err);
    if (*lane) return run_lane_keeping(la, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::OutsideCis ? kCertificateFailure : kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}

int dispatch(int argc, const char* const* argv) {
  return dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace nncis::cli

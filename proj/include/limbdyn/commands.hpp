#pragma once

// Command pipelines behind the `limbdyn` tool. Each pipeline builds its
// tables in memory; run_command writes them and a manifest.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "limbdyn/config.hpp"
#include "limbdyn/csv.hpp"
#include "limbdyn/version.hpp"

namespace limbdyn {

struct Artifact {
  std::string file;
  Table table;
};

// ---------------------------------------------------------------------------
// gen-targets

inline TargetSet default_targets(const AnkleConfig& a) {
  return generate_ie_sweep(make_two_hinge_model(a.params), a.gamma_lo, a.gamma_hi, a.coupling);
}

inline Table targets_table(const TargetSet& t) {
  Table out{{"index", "Px", "Py", "Pz", "Mx", "My", "Mz", "Nx", "Ny", "Nz"}, {}};
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    const FootTriple& f = t.samples[i];
    out.rows.push_back({static_cast<double>(i), f.p.x(), f.p.y(), f.p.z(), f.m.x(), f.m.y(), f.m.z(), f.n.x(),
                        f.n.y(), f.n.z()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// optimize-axis

inline OptimizationResult run_axis_optimization(const ToolConfig& cfg) {
  const TwoHingeModel hinge = make_two_hinge_model(cfg.ankle.params);
  const TargetSet targets = generate_ie_sweep(hinge, cfg.ankle.gamma_lo, cfg.ankle.gamma_hi, cfg.ankle.coupling);
  return optimize_axis(targets, hinge.neutral,
                       default_axis_bounds(cfg.optimizer.offset_limit, cfg.optimizer.angle_limit), cfg.optimizer.de);
}

inline std::vector<Artifact> axis_artifacts(const OptimizationResult& r) {
  Table history{{"generation", "best_cost_m"}, {}};
  for (std::size_t g = 0; g < r.cost_history.size(); ++g) {
    history.rows.push_back({static_cast<double>(g), r.cost_history[g]});
  }
  Table summary{{"offset_m", "best_cost_m", "generations"},
                {{r.best.offset, r.best_cost, static_cast<double>(r.cost_history.size()) - 1.0}}};
  Table design{{"sample", "phi", "alpha", "psi"}, {}};
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    design.rows.push_back({static_cast<double>(i), r.best.phi[i], r.best.alpha[i], r.best.psi[i]});
  }
  return {{"axis_history.csv", std::move(history)},
          {"axis_summary.csv", std::move(summary)},
          {"axis_design.csv", std::move(design)}};
}

// ---------------------------------------------------------------------------
// inverse-dynamics

struct TorqueProfile {
  std::vector<double> time;
  std::vector<TrajectorySample> samples;
  std::vector<TorqueSet> torques;

  Vec4 peaks() const {
    Vec4 p = Vec4::Zero();
    for (const auto& t : torques) p = p.cwiseMax(t.vector().cwiseAbs());
    return p;
  }
};

/// Torques along one period of the sinusoidal test motion.
inline TorqueProfile torque_profile(const SystemModel& model, double period, double dt) {
  const auto n = static_cast<std::size_t>(std::llround(period / dt));
  TorqueProfile out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = std::min(static_cast<double>(i) * dt, period);
    const TrajectorySample s = gen_sinusoid(t, period);
    out.time.push_back(t);
    out.samples.push_back(s);
    out.torques.push_back(inverse_dynamics(model, {s.q, s.qd}, s.qdd));
  }
  return out;
}

inline std::vector<Artifact> torque_artifacts(const TorqueProfile& p) {
  Table series{{"t"}, {}};
  for (const char* prefix : {"", "qd_", "qdd_", "torque_"}) {
    for (auto name : kCoordNames) series.header.push_back(prefix + std::string(name));
  }
  for (std::size_t i = 0; i < p.time.size(); ++i) {
    const TrajectorySample& s = p.samples[i];
    const Vec4 T = p.torques[i].vector();
    std::vector<double> row{p.time[i]};
    for (const Vec4* v : {&s.q, &s.qd, &s.qdd, &T}) row.insert(row.end(), v->data(), v->data() + 4);
    series.rows.push_back(std::move(row));
  }
  const Vec4 pk = p.peaks();
  Table peaks{{"peak_theta", "peak_phi", "peak_alpha", "peak_psi"}, {{pk[0], pk[1], pk[2], pk[3]}}};
  return {{"inverse_dynamics.csv", std::move(series)}, {"inverse_dynamics_peaks.csv", std::move(peaks)}};
}

// ---------------------------------------------------------------------------
// simulate-control

struct SubjectRun {
  SubjectProfile profile;
  std::vector<std::string> warnings;
  SimResult result;
};

/// Simulates every configured subject, one thread each.
inline std::vector<SubjectRun> run_subjects(const ToolConfig& cfg) {
  const SystemModel reference = cfg.model.model();
  const AxisGains gains = cfg.control.resolved_gains();
  const SimOptions opt = cfg.control.sim_options();
  const std::size_t n = cfg.control.subjects.size();
  std::vector<SubjectRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < n; ++i) {
      workers.emplace_back([&, i] {
        try {
          const ScaledModel scaled = scale_subject(cfg.control.subjects[i], reference, cfg.control.reference_subject);
          runs[i].profile = cfg.control.subjects[i];
          runs[i].warnings = scaled.warnings;
          runs[i].result = simulate(scaled.model, cfg.trajectory, gains, cfg.control.motors, opt);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

inline Table sim_table(const SimResult& r) {
  Table t{{"t", "ref_theta", "ref_phi", "ref_alpha", "ref_psi", "theta", "phi", "alpha", "psi", "torque_theta",
           "torque_phi", "torque_alpha", "torque_psi"},
          {}};
  t.rows.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Vec4& a = r.reference[i];
    const Vec4& b = r.actual[i];
    const Vec4& u = r.torque[i];
    t.rows.push_back({r.time[i], a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3], u[0], u[1], u[2], u[3]});
  }
  return t;
}

inline std::vector<Artifact> sim_artifacts(const std::vector<SubjectRun>& runs) {
  std::vector<Artifact> out;
  Table rms{{"subject", "height_m", "mass_kg", "rms_theta_deg", "rms_phi_deg", "rms_alpha_deg"}, {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SimResult& r = runs[i].result;
    out.push_back({"sim_subject" + std::to_string(i + 1) + ".csv", sim_table(r)});
    rms.rows.push_back({static_cast<double>(i + 1), runs[i].profile.height, runs[i].profile.mass,
                        rad_to_deg(rms_error(r, kTheta, r.rms_start)), rad_to_deg(rms_error(r, kPhi, r.rms_start)),
                        rad_to_deg(rms_error(r, kAlpha, r.rms_start))});
  }
  out.push_back({"rms_summary.csv", std::move(rms)});
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch

inline constexpr std::array<std::string_view, 4> kCommands = {"gen-targets", "optimize-axis", "inverse-dynamics",
                                                              "simulate-control"};

struct RunManifest {
  std::string command;
  Json config;
  std::uint64_t seed = 0;
  std::string version{kVersion};
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  double wall_time = 0.0;  // s

  Json to_json() const {
    return {{"command", command}, {"version", version},   {"seed", seed},         {"outputs", outputs},
            {"warnings", warnings}, {"wall_time_s", wall_time}, {"config", config}};
  }
};

inline std::vector<Artifact> build_artifacts(std::string_view cmd, const ToolConfig& cfg,
                                             std::vector<std::string>& warnings) {
  if (cmd == "gen-targets") return {{"targets.csv", targets_table(default_targets(cfg.ankle))}};
  if (cmd == "optimize-axis") {
    std::vector<Artifact> out = {{"targets.csv", targets_table(default_targets(cfg.ankle))}};
    for (auto& a : axis_artifacts(run_axis_optimization(cfg))) out.push_back(std::move(a));
    return out;
  }
  if (cmd == "inverse-dynamics") {
    return torque_artifacts(
        torque_profile(cfg.model.model(), cfg.inverse_dynamics.period, cfg.inverse_dynamics.dt));
  }
  if (cmd == "simulate-control") {
    const auto runs = run_subjects(cfg);
    for (const auto& r : runs) warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    return sim_artifacts(runs);
  }
  throw ConfigError("unknown command '" + std::string(cmd) + "'");
}

/// Writes `text` to a temporary sibling, then renames it into place.
inline void write_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_text(tmp, text);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move manifest into '" + path.string() + "'");
  }
}

/// Runs `cmd` and writes its artifacts plus manifest.json into `out_dir`.
/// On failure every file this run created is removed before rethrowing.
inline RunManifest run_command(std::string_view cmd, const ToolConfig& cfg, const std::filesystem::path& out_dir) {
  if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end()) {
    throw ConfigError("unknown command '" + std::string(cmd) + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = std::string(cmd);
  manifest.config = config_to_json(cfg);
  manifest.seed = cfg.optimizer.de.rng_seed;

  manifest.warnings = cfg.model.model().warnings();

  std::vector<std::filesystem::path> written;
  try {
    std::vector<Artifact> artifacts = build_artifacts(cmd, cfg, manifest.warnings);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");
    for (const auto& a : artifacts) {
      const auto path = out_dir / a.file;
      written.push_back(path);
      write_series(a.table, path);
      manifest.outputs.push_back(a.file);
    }
    manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto path = out_dir / "manifest.json";
    written.push_back(path);
    write_atomic(path, manifest.to_json().dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return manifest;
}

}  // namespace limbdyn

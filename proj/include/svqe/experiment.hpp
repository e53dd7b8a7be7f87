#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "svqe/ansatz.hpp"
#include "svqe/config.hpp"
#include "svqe/diagnostics.hpp"
#include "svqe/estimator.hpp"
#include "svqe/optimizers.hpp"
#include "svqe/parallel.hpp"
#include "svqe/scar_models.hpp"
#include "svqe/stats.hpp"
#include "svqe/version.hpp"

namespace svqe {

inline constexpr double kInverseCostRegularizer = 1e-9;

// ---------------------------------------------------------------------------
// Model and evaluator factories bound to a resolved config.

inline ScarModel build_model_from_config(const ExperimentConfig& cfg) {
  const std::uint64_t model_seed = derive_seed(cfg.seed, "model", 0);
  if (cfg.model_kind == "sm" || cfg.model_kind == "sm_control") {
    SMModelSpec spec;
    spec.n_qubits = cfg.n_qubits;
    spec.J = cfg.sm_j;
    spec.delta = cfg.sm_delta;
    spec.b = cfg.sm_b;
    spec.seed = model_seed;
    return cfg.model_kind == "sm" ? build_sm_model(spec) : build_control_model(spec);
  }
  if (cfg.model_kind == "ph" || cfg.model_kind == "ph_control") {
    PHModelSpec spec;
    spec.n_qubits = cfg.n_qubits;
    spec.D = cfg.ph_block;
    spec.chi = cfg.ph_chi;
    spec.pert_strength = cfg.ph_pert;
    spec.uniform_signs = cfg.ph_uniform_signs;
    spec.seed = model_seed;
    return cfg.model_kind == "ph" ? build_ph_model(spec) : build_control_model(spec);
  }
  throw ConfigError("unknown model kind: " + cfg.model_kind);
}

inline std::unique_ptr<Evaluator> make_evaluator(const ScarModel& model,
                                                 const ExperimentConfig& cfg) {
  const AnsatzSpec ansatz = build_ansatz(model.hamiltonian.n_qubits(), cfg.depth);
  if (cfg.mode == "exact")
    return std::make_unique<ExactEvaluator>(ansatz, model.hamiltonian, cfg.cost_spec());
  if (cfg.mode == "shots")
    return std::make_unique<ShotEvaluator>(ansatz, model.hamiltonian, cfg.cost_spec(),
                                           cfg.shots);
  if (cfg.mode == "noisy")
    return std::make_unique<NoisyShotEvaluator>(ansatz, model.hamiltonian, cfg.cost_spec(),
                                                cfg.shots, cfg.noise_model());
  throw ConfigError("unknown evaluator mode: " + cfg.mode);
}

// ---------------------------------------------------------------------------
// Output plumbing: shortest-round-trip floats and atomic file writes keep
// traces byte-stable across reruns and platforms with the same toolchain.

inline std::string format_double(double v) { return fmt::format("{}", v); }

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::ordered_json module_versions() {
  nlohmann::ordered_json j;
  for (const char* module : {"pauli", "circuit", "ansatz", "scar_models", "diagnostics",
                             "estimator", "optimizers", "experiment"})
    j[module] = version_string;
  return j;
}

// ---------------------------------------------------------------------------
// Single optimization run.

struct TraceRow {
  int iteration = 0;
  double cost_estimate = 0.0;
  double cost_exact = 0.0;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  std::string grad_or_schedule;  // ADAM: gradient norm; SPSA: "a=..;c=.."
  std::uint64_t shots_used = 0;  // cumulative over the run
};

struct RunResult {
  std::vector<TraceRow> rows;
  std::vector<double> theta;
  double initial_cost_exact = 0.0;
  double final_cost_exact = 0.0;
  double initial_fidelity = std::numeric_limits<double>::quiet_NaN();
  double final_fidelity = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t total_shots = 0;
  std::uint64_t calibration_shots = 0;
  double wall_ms = 0.0;
};

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iteration,cost_estimate,cost_exact,fidelity,grad_norm_or_schedule,shots_used\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{}\n", r.iteration, format_double(r.cost_estimate),
                       format_double(r.cost_exact), format_double(r.fidelity),
                       r.grad_or_schedule, r.shots_used);
  return out;
}

// Run one sigma-VQE optimization.  Row 0 logs the freshly initialized circuit;
// row t >= 1 logs the state after update t.  ADAM rows carry the gradient
// norm; SPSA rows carry the shot-free proxy C^App and the (a_t, c_t) schedule.
inline RunResult run_vqe(const ScarModel& model, const ExperimentConfig& cfg,
                         std::uint64_t run_master) {
  const auto t_start = std::chrono::steady_clock::now();
  const AnsatzSpec ansatz = build_ansatz(model.hamiltonian.n_qubits(), cfg.depth);
  RunResult result;
  result.theta =
      init_params(ansatz.parameter_count(), cfg.init_scale, derive_seed(run_master, "init", 0));
  auto eval = make_evaluator(model, cfg);
  const bool has_target = model.scar_state.has_value();

  auto push_row = [&](int t, double cost_estimate, std::string sched) {
    const Moments replay = eval->exact_replay(result.theta);
    TraceRow row;
    row.iteration = t;
    row.cost_estimate = cost_estimate;
    row.cost_exact = replay.c;
    row.fidelity = has_target ? eval->replay_fidelity(result.theta, *model.scar_state)
                              : std::numeric_limits<double>::quiet_NaN();
    row.grad_or_schedule = std::move(sched);
    row.shots_used = result.total_shots;
    result.rows.push_back(std::move(row));
  };

  {
    const Moments m0 = eval->evaluate(result.theta, derive_seed(run_master, "trace", 0));
    result.total_shots += m0.shots;
    push_row(0, m0.c, "init");
  }

  if (cfg.optimizer == "adam") {
    AdamState adam;
    adam.alpha = cfg.adam_alpha;
    for (int t = 1; t <= cfg.iterations; ++t) {
      auto grad =
          cost_gradient(*eval, result.theta, derive_seed(run_master, "iter", static_cast<std::uint64_t>(t)));
      adam_step(adam, result.theta, grad.grad);
      result.total_shots += grad.shots;
      const Moments est =
          eval->evaluate(result.theta, derive_seed(run_master, "trace", static_cast<std::uint64_t>(t)));
      result.total_shots += est.shots;
      push_row(t, est.c, format_double(grad.grad_norm()));
    }
  } else if (cfg.optimizer == "spsa") {
    SeededCost cost_fn = [&](const std::vector<double>& th, std::uint64_t seed) {
      return eval->evaluate(th, seed).c;
    };
    SpsaState spsa;
    if (cfg.spsa_calibrate) {
      spsa = spsa_calibrate(cost_fn, result.theta, std::max(1, cfg.iterations),
                            derive_seed(run_master, "spsa-cal", 0));
      // 10 noise probes + 5 gradient probe pairs
      result.calibration_shots = 20 * eval->shots_per_evaluation();
    } else {
      spsa.a0 = cfg.spsa_a0;
      spsa.c0 = cfg.spsa_c0;
      spsa.big_a = 0.1 * static_cast<double>(std::max(1, cfg.iterations));
    }
    for (int t = 1; t <= cfg.iterations; ++t) {
      auto info = spsa_step(spsa, result.theta, cost_fn,
                            derive_seed(run_master, "spsa-iter", static_cast<std::uint64_t>(t)));
      result.total_shots += 2 * eval->shots_per_evaluation();
      push_row(t, info.c_app, fmt::format("a={};c={}", format_double(info.a_t),
                                          format_double(info.c_t)));
    }
  } else {
    throw ConfigError("unknown optimizer: " + cfg.optimizer);
  }

  result.initial_cost_exact = result.rows.front().cost_exact;
  result.final_cost_exact = result.rows.back().cost_exact;
  result.initial_fidelity = result.rows.front().fidelity;
  result.final_fidelity = result.rows.back().fidelity;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             t_start)
                       .count();
  return result;
}

inline nlohmann::ordered_json run_summary_json(const ExperimentConfig& cfg,
                                               const RunResult& result) {
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["final"] = {{"cost_estimate", result.rows.back().cost_estimate},
                {"cost_exact", result.final_cost_exact},
                {"fidelity", result.final_fidelity},
                {"infidelity", 1.0 - result.final_fidelity},
                {"iterations", static_cast<int>(result.rows.size()) - 1}};
  j["initial"] = {{"cost_exact", result.initial_cost_exact},
                  {"fidelity", result.initial_fidelity}};
  j["shots"] = {{"optimization", result.total_shots},
                {"calibration", result.calibration_shots}};
  j["wall_ms"] = result.wall_ms;
  j["versions"] = module_versions();
  return j;
}

inline void write_run_outputs(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                              const RunResult& result) {
  write_file_atomic(out_dir / "trace.csv", trace_csv(result.rows));
  write_file_atomic(out_dir / "summary.json", run_summary_json(cfg, result).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Spectrum diagnosis (Fig. 2-style data).

struct DiagnoseResult {
  SpectrumResult spectrum;
  double gap_ratio_value = 0.0;
  int degenerate_gaps_skipped = 0;
  long min_entropy_index = 0;
  double min_entropy = 0.0;
  double min_entropy_energy = 0.0;
  // states with entropy < 1e-8 inside |E| < 1e-6
  int low_entropy_states_near_zero = 0;
  // lowest entropy over the middle 80% of the spectrum by index
  double mid_spectrum_min_entropy = 0.0;
  std::optional<double> scar_overlap;  // |<scar|identified state>|^2 when scar known
};

inline DiagnoseResult diagnose_model(const ScarModel& model) {
  DiagnoseResult d;
  d.spectrum = eigendecompose(model.hamiltonian);
  d.gap_ratio_value = gap_ratio(d.spectrum.eigenvalues, &d.degenerate_gaps_skipped);

  const long m = d.spectrum.eigenvalues.size();
  d.min_entropy = std::numeric_limits<double>::infinity();
  for (long k = 0; k < m; ++k) {
    const double s = d.spectrum.entropies[static_cast<std::size_t>(k)];
    if (s < d.min_entropy) {
      d.min_entropy = s;
      d.min_entropy_index = k;
    }
    if (s < 1e-8 && std::abs(d.spectrum.eigenvalues(k)) < 1e-6)
      ++d.low_entropy_states_near_zero;
  }
  d.min_entropy_energy = d.spectrum.eigenvalues(d.min_entropy_index);

  const long lo = m / 10, hi = m - m / 10;
  d.mid_spectrum_min_entropy = std::numeric_limits<double>::infinity();
  for (long k = lo; k < hi; ++k)
    d.mid_spectrum_min_entropy =
        std::min(d.mid_spectrum_min_entropy, d.spectrum.entropies[static_cast<std::size_t>(k)]);

  if (model.scar_state)
    d.scar_overlap = fidelity(d.spectrum.eigenstate(d.min_entropy_index), *model.scar_state);
  return d;
}

inline nlohmann::ordered_json diagnose_summary_json(const ExperimentConfig& cfg,
                                                    const DiagnoseResult& d) {
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["spectrum"] = {{"states", d.spectrum.eigenvalues.size()},
                   {"gap_ratio", d.gap_ratio_value},
                   {"degenerate_gaps_skipped", d.degenerate_gaps_skipped},
                   {"goe_reference", 0.5307},
                   {"poisson_reference", 0.3863}};
  j["scar_candidate"] = {{"index", d.min_entropy_index},
                         {"energy", d.min_entropy_energy},
                         {"entropy", d.min_entropy},
                         {"low_entropy_states_near_zero", d.low_entropy_states_near_zero},
                         {"mid_spectrum_min_entropy", d.mid_spectrum_min_entropy}};
  if (d.scar_overlap) j["scar_candidate"]["overlap_with_embedded_scar"] = *d.scar_overlap;
  j["versions"] = module_versions();
  return j;
}

inline void write_diagnose_outputs(const std::filesystem::path& out_dir,
                                   const ExperimentConfig& cfg, const ScarModel& model,
                                   const DiagnoseResult& d) {
  write_file_atomic(out_dir / "spectrum.csv", spectrum_csv(d.spectrum));
  write_file_atomic(out_dir / "summary.json", diagnose_summary_json(cfg, d).dump(2) + "\n");
  write_file_atomic(out_dir / "model.json",
                    model_to_json(model, cfg.echo()["model"]).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Target-energy sweep (Figs. 4/6 axes).

struct SweepRow {
  double e_tar = 0.0;
  double final_cost = std::numeric_limits<double>::quiet_NaN();
  double inverse_cost = std::numeric_limits<double>::quiet_NaN();
  double final_fidelity = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

inline std::vector<double> sweep_grid(const ExperimentConfig& cfg) {
  std::vector<double> grid;
  if (cfg.sweep_points == 1) {
    grid.push_back(cfg.sweep_min);
    return grid;
  }
  const double step = (cfg.sweep_max - cfg.sweep_min) / (cfg.sweep_points - 1);
  for (int p = 0; p < cfg.sweep_points; ++p) grid.push_back(cfg.sweep_min + step * p);
  return grid;
}

// Independent run per grid point: fresh parameter init per point, shared model
// instance; single-point failures become status rows, never aborts.
inline std::vector<SweepRow> sweep_targets(const ScarModel& model, const ExperimentConfig& cfg,
                                           const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep_targets: empty grid");
  auto rows = parallel_map(grid.size(), [&](std::size_t p) {
    SweepRow row;
    row.e_tar = grid[p];
    row.iterations = cfg.iterations;
    row.seed = derive_seed(cfg.seed, "sweep", p);
    try {
      ExperimentConfig point_cfg = cfg;
      point_cfg.e_tar = grid[p];
      auto result = run_vqe(model, point_cfg, row.seed);
      row.final_cost = result.final_cost_exact;
      row.inverse_cost = 1.0 / (result.final_cost_exact + kInverseCostRegularizer);
      row.final_fidelity = result.final_fidelity;
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    return row;
  });
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "e_tar,final_cost,inverse_cost,final_fidelity,iterations,seed,status\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{}\n", format_double(r.e_tar),
                       format_double(r.final_cost), format_double(r.inverse_cost),
                       format_double(r.final_fidelity), r.iterations, r.seed, r.status);
  return out;
}

inline void write_sweep_outputs(const std::filesystem::path& out_dir,
                                const ExperimentConfig& cfg,
                                const std::vector<SweepRow>& rows) {
  write_file_atomic(out_dir / "sweep.csv", sweep_csv(rows));
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["points"] = rows.size();
  int failures = 0;
  for (const auto& r : rows)
    if (r.status != "ok") ++failures;
  j["failures"] = failures;
  j["versions"] = module_versions();
  write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shot-budget study (Fig. 5 axes): matched seeds across budgets so each
// repetition starts every budget from the same parameters.

struct BudgetRow {
  std::string budget;  // shot count or "exact"
  std::uint64_t shots = 0;
  int seed_index = 0;
  std::uint64_t run_seed = 0;
  double final_cost_exact = std::numeric_limits<double>::quiet_NaN();
  double final_fidelity = std::numeric_limits<double>::quiet_NaN();
  double final_infidelity = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t total_shots = 0;
  std::string status = "ok";
  std::string note;
};

struct BudgetStudyResult {
  std::vector<BudgetRow> rows;
  // traces keyed like the rows (same order) for per-budget inspection
  std::vector<std::pair<std::string, std::vector<TraceRow>>> traces;
};

inline BudgetStudyResult shot_budget_study(const ScarModel& model, const ExperimentConfig& cfg) {
  if (cfg.mode != "shots")
    throw ConfigError("shot_budget_study requires evaluator mode = shots");
  struct Task {
    std::string label;
    std::uint64_t shots = 0;  // 0 = exact baseline
    int seed_index = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < cfg.study_shots.size(); ++si)
    for (int r = 0; r < cfg.study_seeds; ++r)
      tasks.push_back({fmt::format("S{}", cfg.study_shots[si]), cfg.study_shots[si], r});
  if (cfg.study_include_exact)
    for (int r = 0; r < cfg.study_seeds; ++r) tasks.push_back({"exact", 0, r});

  auto outcomes = parallel_map(tasks.size(), [&](std::size_t i) {
    const Task& task = tasks[i];
    BudgetRow row;
    row.budget = task.shots == 0 ? "exact" : fmt::format("{}", task.shots);
    row.shots = task.shots;
    row.seed_index = task.seed_index;
    // matched across budgets: the same repetition index gives the same
    // parameter initialization for every budget and the exact baseline
    row.run_seed = derive_seed(cfg.seed, "rep", static_cast<std::uint64_t>(task.seed_index));
    std::vector<TraceRow> trace;
    try {
      ExperimentConfig run_cfg = cfg;
      if (task.shots == 0) {
        run_cfg.mode = "exact";
      } else {
        run_cfg.shots = task.shots;
        if (task.shots < 100) row.note = "high estimator variance: S below 100";
      }
      auto result = run_vqe(model, run_cfg, row.run_seed);
      row.final_cost_exact = result.final_cost_exact;
      row.final_fidelity = result.final_fidelity;
      row.final_infidelity = 1.0 - result.final_fidelity;
      row.total_shots = result.total_shots;
      trace = std::move(result.rows);
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    return std::make_pair(row, trace);
  });

  BudgetStudyResult out;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    out.rows.push_back(outcomes[i].first);
    out.traces.emplace_back(fmt::format("{}_seed{}", tasks[i].label, tasks[i].seed_index),
                            std::move(outcomes[i].second));
  }
  return out;
}

inline std::string budget_csv(const std::vector<BudgetRow>& rows) {
  std::string out =
      "budget,seed_index,run_seed,final_cost_exact,final_fidelity,final_infidelity,"
      "total_shots,status,note\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.budget, r.seed_index, r.run_seed,
                       format_double(r.final_cost_exact), format_double(r.final_fidelity),
                       format_double(r.final_infidelity), r.total_shots, r.status, r.note);
  return out;
}

inline void write_budget_outputs(const std::filesystem::path& out_dir,
                                 const ExperimentConfig& cfg, const BudgetStudyResult& study) {
  write_file_atomic(out_dir / "budget.csv", budget_csv(study.rows));
  for (const auto& [label, rows] : study.traces)
    if (!rows.empty())
      write_file_atomic(out_dir / fmt::format("trace_{}.csv", label), trace_csv(rows));
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["runs"] = study.rows.size();
  j["versions"] = module_versions();
  write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Estimator audit (§II.D-style unbiasedness demonstration).

struct AuditQuantity {
  double exact = 0.0;
  double mc_mean = 0.0;
  double mc_se = std::numeric_limits<double>::quiet_NaN();
};

struct AuditReport {
  AuditQuantity h, h2, hsq, c;
  double naive_mean = 0.0;
  double naive_bias = 0.0;
  double naive_se = std::numeric_limits<double>::quiet_NaN();
  int repetitions = 0;
  std::uint64_t shots = 0;
  bool se_defined = false;
  std::vector<std::pair<std::uint64_t, double>> variance_vs_shots;
};

// Monte-Carlo audit of the four estimators at a fixed post-init parameter
// point; "exact" is the evaluator's own replay, so the audit also covers the
// noisy path (whose estimators are unbiased for the noisy moments).
inline AuditReport estimator_audit(const ScarModel& model, const ExperimentConfig& cfg) {
  if (cfg.mode == "exact")
    throw ConfigError("estimator_audit requires a shots or noisy evaluator mode");
  const AnsatzSpec ansatz = build_ansatz(model.hamiltonian.n_qubits(), cfg.depth);
  const auto theta =
      init_params(ansatz.parameter_count(), cfg.init_scale, derive_seed(cfg.seed, "init", 0));

  AuditReport report;
  report.repetitions = cfg.audit_repetitions;
  report.shots = cfg.shots;

  auto eval = make_evaluator(model, cfg);
  const Moments truth = eval->exact_replay(theta);
  report.h.exact = truth.h;
  report.h2.exact = truth.h2;
  report.hsq.exact = truth.hsq;
  report.c.exact = truth.c;

  std::vector<double> hs, h2s, hsqs, cs, naive;
  hs.reserve(static_cast<std::size_t>(cfg.audit_repetitions));
  for (int r = 0; r < cfg.audit_repetitions; ++r) {
    const Moments m =
        eval->evaluate(theta, derive_seed(cfg.seed, "audit-rep", static_cast<std::uint64_t>(r)));
    hs.push_back(m.h);
    h2s.push_back(m.h2);
    hsqs.push_back(m.hsq);
    cs.push_back(m.c);
    naive.push_back(m.h * m.h);
  }
  report.h.mc_mean = mean(hs);
  report.h2.mc_mean = mean(h2s);
  report.hsq.mc_mean = mean(hsqs);
  report.c.mc_mean = mean(cs);
  report.naive_mean = mean(naive);
  report.naive_bias = report.naive_mean - report.hsq.exact;
  report.se_defined = cfg.audit_repetitions >= 2;
  if (report.se_defined) {
    report.h.mc_se = standard_error(hs);
    report.h2.mc_se = standard_error(h2s);
    report.hsq.mc_se = standard_error(hsqs);
    report.c.mc_se = standard_error(cs);
    report.naive_se = standard_error(naive);
    report.variance_vs_shots.emplace_back(cfg.shots, sample_variance(cs));

    // a second rep loop at 10x the shots exposes the 1/S variance scaling
    ExperimentConfig big = cfg;
    big.shots = cfg.shots * 10;
    auto eval_big = make_evaluator(model, big);
    std::vector<double> cs_big;
    cs_big.reserve(static_cast<std::size_t>(cfg.audit_repetitions));
    for (int r = 0; r < cfg.audit_repetitions; ++r)
      cs_big.push_back(
          eval_big
              ->evaluate(theta, derive_seed(cfg.seed, "audit-rep-10x", static_cast<std::uint64_t>(r)))
              .c);
    report.variance_vs_shots.emplace_back(big.shots, sample_variance(cs_big));
  }
  return report;
}

inline nlohmann::ordered_json audit_json(const ExperimentConfig& cfg, const AuditReport& r) {
  auto quantity = [&](const AuditQuantity& q) {
    nlohmann::ordered_json j{{"exact", q.exact},
                             {"mc_mean", q.mc_mean},
                             {"mc_se", r.se_defined ? nlohmann::ordered_json(q.mc_se)
                                                    : nlohmann::ordered_json(nullptr)},
                             {"repetitions", r.repetitions},
                             {"S", r.shots}};
    return j;
  };
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["theta_source"] = "post-init";
  j["se_defined"] = r.se_defined;
  j["h_hat"] = quantity(r.h);
  j["h2_hat"] = quantity(r.h2);
  j["hsq_hat"] = quantity(r.hsq);
  j["c_hat"] = quantity(r.c);
  j["naive_square"] = {{"mean", r.naive_mean},
                       {"bias", r.naive_bias},
                       {"se", r.se_defined ? nlohmann::ordered_json(r.naive_se)
                                           : nlohmann::ordered_json(nullptr)}};
  auto table = nlohmann::ordered_json::array();
  for (const auto& [s, v] : r.variance_vs_shots)
    table.push_back({{"shots", s}, {"variance", v}});
  j["variance_vs_shots"] = table;
  j["versions"] = module_versions();
  return j;
}

inline void write_audit_outputs(const std::filesystem::path& out_dir,
                                const ExperimentConfig& cfg, const AuditReport& report) {
  write_file_atomic(out_dir / "audit.json", audit_json(cfg, report).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Noisy SPSA budget study (Appendix-A-style): a fixed total measurement budget
// split as iterations = floor(total / (2 S)) across candidate S settings.

struct NoisySettingResult {
  std::uint64_t shots_per_eval = 0;
  int iterations = 0;
  double spearman_rho = 0.0;
  double spearman_p_negative = 1.0;
  double fidelity_first = std::numeric_limits<double>::quiet_NaN();
  double fidelity_last = std::numeric_limits<double>::quiet_NaN();
  double final_cost_exact = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  std::vector<TraceRow> trace;
};

inline std::vector<NoisySettingResult> noisy_budget_study(const ScarModel& model,
                                                          const ExperimentConfig& cfg) {
  if (cfg.mode != "noisy") throw ConfigError("noisy_budget_study requires mode = noisy");
  if (cfg.optimizer != "spsa") throw ConfigError("noisy_budget_study requires optimizer = spsa");

  auto results = parallel_map(cfg.noisy_shots.size(), [&](std::size_t si) {
    NoisySettingResult res;
    res.shots_per_eval = cfg.noisy_shots[si];
    res.iterations =
        static_cast<int>(cfg.noisy_total_budget / (2 * cfg.noisy_shots[si]));
    try {
      ExperimentConfig run_cfg = cfg;
      run_cfg.shots = cfg.noisy_shots[si];
      run_cfg.iterations = res.iterations;
      auto run = run_vqe(model, run_cfg, derive_seed(cfg.seed, "noisy", si));
      res.trace = std::move(run.rows);
      res.fidelity_first = res.trace.front().fidelity;
      res.fidelity_last = res.trace.back().fidelity;
      res.final_cost_exact = run.final_cost_exact;
      if (res.trace.size() >= 4) {
        std::vector<double> iter_idx, capp;
        for (std::size_t k = 1; k < res.trace.size(); ++k) {
          iter_idx.push_back(static_cast<double>(res.trace[k].iteration));
          capp.push_back(res.trace[k].cost_estimate);
        }
        auto sp = spearman(iter_idx, capp);
        res.spearman_rho = sp.rho;
        res.spearman_p_negative = sp.p_negative;
      }
    } catch (const std::exception& e) {
      res.status = std::string("failed: ") + e.what();
    }
    return res;
  });
  return results;
}

inline std::string noisy_csv(const std::vector<NoisySettingResult>& results) {
  std::string out =
      "shots_per_eval,iterations,spearman_rho,spearman_p_negative,fidelity_first,"
      "fidelity_last,final_cost_exact,status\n";
  for (const auto& r : results)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.shots_per_eval, r.iterations,
                       format_double(r.spearman_rho), format_double(r.spearman_p_negative),
                       format_double(r.fidelity_first), format_double(r.fidelity_last),
                       format_double(r.final_cost_exact), r.status);
  return out;
}

inline void write_noisy_outputs(const std::filesystem::path& out_dir,
                                const ExperimentConfig& cfg,
                                const std::vector<NoisySettingResult>& results) {
  write_file_atomic(out_dir / "noisy.csv", noisy_csv(results));
  for (const auto& r : results)
    if (!r.trace.empty())
      write_file_atomic(out_dir / fmt::format("trace_S{}.csv", r.shots_per_eval),
                        trace_csv(r.trace));
  nlohmann::ordered_json j;
  j["config"] = cfg.echo();
  j["total_budget"] = cfg.noisy_total_budget;
  j["note"] = "shot accounting: optimization consumes 2*S per iteration; calibration and "
              "trace evaluations are logged separately in each run's shot totals";
  j["versions"] = module_versions();
  write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
}

}  // namespace svqe

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precopt/optimizers.hpp"
#include "precopt/types.hpp"

namespace precopt {

enum class InitKind { Gaussian, Rzf };

std::string to_string(InitKind kind);
InitKind init_from_string(const std::string& name);

/**
 * One batch of precoder designs over a (seed x SNR) grid, parsed from a
 * key=value spec file. '#' starts a comment, blank lines are skipped, and a
 * key that is not listed below is an error. List values are comma separated;
 * user_antennas / user_streams / weights / per_user_power accept a single
 * value that is broadcast to every user. seeds entries may be ranges a..b.
 *
 *   name, mt, users, user_antennas, user_streams, total_power, weights,
 *   per_user_power, constraint {tpc|pupc|papc}, solver {rsd|rcg|rtr},
 *   init {gaussian|rzf}, snr_db, seeds, channel_source {synthetic|<path>},
 *   out, alpha0, ls_r, ls_c, max_backtracks, max_outer, grad_tol,
 *   rel_obj_tol, delta0, delta_max, rho_threshold, n_sub
 *
 * SNR is referenced to the total budget: noise_variance =
 * total_power * 10^(-snr_db/10), so the default total_power = 1 makes
 * SNR_dB = -10 log10(noise_variance).
 */
struct ExperimentSpec {
  std::string name = "experiment";
  int mt = 16;
  int users = 4;
  std::vector<int> user_antennas;    // empty -> 2 per user
  std::vector<int> user_streams;     // empty -> 2 per user
  double total_power = 1.0;
  std::vector<double> weights;       // empty -> 1 per user
  std::vector<double> per_user_power;  // empty -> equal split
  ConstraintKind constraint = ConstraintKind::TPC;
  SolverKind solver = SolverKind::RCG;
  InitKind init = InitKind::Gaussian;
  std::vector<double> snr_db = {20.0};
  std::vector<std::uint64_t> seeds = {1};
  std::string channel_source = "synthetic";
  std::string out_dir = "runs";
  LineSearchParams line_search;
  TrustRegionParams trust_region;
  StopCriteria stop;

  // Broadcasts single-entry lists and fills empty ones with the defaults
  // above. parse_experiment_spec calls this; hand-built specs should too.
  void resolve_defaults();
  void validate() const;
};

ExperimentSpec parse_experiment_spec(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

// Resolved sorted key=value form; its FNV-1a digest identifies the batch in
// every output file.
std::string canonical_spec_text(const ExperimentSpec& spec);
std::string spec_hash(const ExperimentSpec& spec);

SystemConfig system_config_for(const ExperimentSpec& spec, double snr_db);

// Starting point of a run: normalized Gaussian blocks drawn from the init
// substreams of seed, or the regularized zero-forcing precoder renormalized
// onto the active constraint set.
ManifoldPoint initial_point(const ExperimentSpec& spec, const SystemConfig& cfg,
                            const ChannelSet& ch, std::uint64_t seed);

struct RunRecord {
  std::string hash;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  SolverKind solver = SolverKind::RCG;
  ConstraintKind constraint = ConstraintKind::TPC;
  double wsr_nats = 0.0;
  double wsr_bits = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  StopReason reason = StopReason::MaxIterations;
  double flops_per_iter = 0.0;
  IterationTrace trace;        // not persisted to records.jsonl
  PrecoderStack final_point;
  std::string error;           // nonempty when the run threw
};

/**
 * Runs the full grid. A run that throws is recorded with its message instead
 * of aborting the batch. When spec.out_dir is nonempty the outputs are
 * written there: one trace_<seed>_<snr>.csv per successful run, records.jsonl,
 * summary.csv, summary.json, and resolved_spec.txt. Every output byte is a
 * function of (spec, seeds) except the wall-time fields.
 */
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

struct SummaryRow {
  SolverKind solver = SolverKind::RCG;
  ConstraintKind constraint = ConstraintKind::TPC;
  double snr_db = 0.0;
  int runs = 0;    // successful runs in the group
  int errors = 0;
  double mean_wsr_bits = 0.0;
  double median_wsr_bits = 0.0;
  double mean_iterations = 0.0;
  double mean_wall_time_s = 0.0;
  double mean_flops_per_iter = 0.0;
};

// Aggregates per (solver, constraint, snr_db); throws on empty input.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

std::string trace_csv(const RunRecord& record);
std::string trace_file_name(const RunRecord& record);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_json(const std::vector<SummaryRow>& rows,
                         const std::string& hash);

void write_outputs(const ExperimentSpec& spec,
                   const std::vector<RunRecord>& records);

// Reads records.jsonl back from an output directory (traces are not
// reloaded). Missing or empty files are errors.
std::vector<RunRecord> load_run_records(const std::string& dir);

}  // namespace precopt

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "precopt/baselines.hpp"
#include "precopt/channel_io.hpp"
#include "precopt/experiment.hpp"
#include "precopt/objective.hpp"

namespace {

using namespace precopt;

struct Overrides {
  std::int64_t seed = -1;
  std::string out;
  std::string init;
  std::string constraint;
  std::string solver;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "run a single seed instead of the spec list");
  cmd->add_option("--out", ov.out, "output directory (overrides the spec)");
  cmd->add_option("--init", ov.init, "starting point: gaussian or rzf")
      ->check(CLI::IsMember({"gaussian", "rzf"}));
  cmd->add_option("--constraint", ov.constraint, "power constraint: tpc, pupc or papc")
      ->check(CLI::IsMember({"tpc", "pupc", "papc"}));
  cmd->add_option("--solver", ov.solver, "solver: rsd, rcg or rtr")
      ->check(CLI::IsMember({"rsd", "rcg", "rtr"}));
}

ExperimentSpec spec_with_overrides(const std::string& path, const Overrides& ov) {
  ExperimentSpec spec = load_experiment_spec(path);
  if (ov.seed >= 0) spec.seeds = {static_cast<std::uint64_t>(ov.seed)};
  if (!ov.out.empty()) spec.out_dir = ov.out;
  if (!ov.init.empty()) spec.init = init_from_string(ov.init);
  if (!ov.constraint.empty()) spec.constraint = constraint_from_string(ov.constraint);
  if (!ov.solver.empty()) spec.solver = solver_from_string(ov.solver);
  return spec;
}

int cmd_run(const std::string& spec_path, const Overrides& ov) {
  const ExperimentSpec spec = spec_with_overrides(spec_path, ov);
  const std::vector<RunRecord> records = run_experiment(spec);
  std::cout << summary_csv(summarize(records));
  int failed = 0;
  for (const RunRecord& rec : records) {
    if (!rec.error.empty()) {
      ++failed;
      std::cerr << "run seed=" << rec.seed << " snr=" << rec.snr_db
                << " failed: " << rec.error << "\n";
    }
  }
  if (!spec.out_dir.empty()) {
    std::cerr << "wrote " << records.size() - failed << " traces to "
              << spec.out_dir << "\n";
  }
  return failed == 0 ? 0 : 1;
}

int cmd_summarize(const std::string& dir) {
  const std::vector<RunRecord> records = load_run_records(dir);
  const std::vector<SummaryRow> rows = summarize(records);
  std::cout << summary_csv(rows);
  return 0;
}

int cmd_check_gradients(const std::string& spec_path, const Overrides& ov,
                        double step, double tol) {
  ExperimentSpec spec = spec_with_overrides(spec_path, ov);
  bool ok = true;
  for (double snr : spec.snr_db) {
    const SystemConfig cfg = system_config_for(spec, snr);
    for (std::uint64_t seed : spec.seeds) {
      const ChannelSet ch = spec.channel_source == "synthetic"
                                ? generate_channels(cfg, seed)
                                : load_channels(spec.channel_source, cfg);
      const ManifoldPoint pt = initial_point(spec, cfg, ch, seed);
      const OracleReport report = gradient_check(cfg, ch, pt, step);
      const bool pass = report.max_rel_error < tol;
      ok = ok && pass;
      std::printf("seed=%llu snr=%g constraint=%s max_rel_error=%.3e worst=%d %s\n",
                  static_cast<unsigned long long>(seed), snr,
                  to_string(spec.constraint).c_str(), report.max_rel_error,
                  report.worst_coordinate, pass ? "PASS" : "FAIL");
    }
  }
  return ok ? 0 : 1;
}

int cmd_bench_flops(const std::string& spec_path, const Overrides& ov) {
  ExperimentSpec spec = spec_with_overrides(spec_path, ov);
  spec.out_dir.clear();
  const std::vector<RunRecord> records = run_experiment(spec);
  std::printf("solver,constraint,snr_db,seed,iterations,measured_per_iter,"
              "model_per_iter,ratio,mean_inner\n");
  for (const RunRecord& rec : records) {
    if (!rec.error.empty()) {
      std::fprintf(stderr, "run seed=%llu snr=%g failed: %s\n",
                   static_cast<unsigned long long>(rec.seed), rec.snr_db,
                   rec.error.c_str());
      continue;
    }
    const SystemConfig cfg = system_config_for(spec, rec.snr_db);
    const ComplexitySummary rep =
        flop_counter_report(rec.trace, cfg, rec.constraint, rec.solver,
                            spec.trust_region.n_sub);
    std::printf("%s,%s,%g,%llu,%d,%.1f,%.1f,%.4f,%.2f\n",
                to_string(rec.solver).c_str(), to_string(rec.constraint).c_str(),
                rec.snr_db, static_cast<unsigned long long>(rec.seed),
                rec.iterations, rep.per_iteration, rep.model_per_iteration,
                rep.ratio, rep.mean_inner);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted sum-rate precoder design on power constraint manifolds"};
  app.require_subcommand(1);

  std::string run_spec, check_spec, bench_spec, summarize_dir;
  Overrides run_ov, check_ov, bench_ov;
  double fd_step = 1e-5;
  double fd_tol = 1e-5;

  CLI::App* run = app.add_subcommand("run", "execute a spec over its seed/SNR grid");
  run->add_option("spec", run_spec, "spec file")->required();
  add_override_flags(run, run_ov);

  CLI::App* summ = app.add_subcommand("summarize", "aggregate records.jsonl from a run directory");
  summ->add_option("dir", summarize_dir, "output directory of a previous run")->required();

  CLI::App* check = app.add_subcommand("check-gradients",
                                       "compare analytic gradients against finite differences");
  check->add_option("spec", check_spec, "spec file")->required();
  check->add_option("--step", fd_step, "finite difference step");
  check->add_option("--tol", fd_tol, "max relative error accepted");
  add_override_flags(check, check_ov);

  CLI::App* bench = app.add_subcommand("bench-flops",
                                       "report measured vs modeled multiplies per iteration");
  bench->add_option("spec", bench_spec, "spec file")->required();
  add_override_flags(bench, bench_ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_spec, run_ov);
    if (summ->parsed()) return cmd_summarize(summarize_dir);
    if (check->parsed()) return cmd_check_gradients(check_spec, check_ov, fd_step, fd_tol);
    if (bench->parsed()) return cmd_bench_flops(bench_spec, bench_ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

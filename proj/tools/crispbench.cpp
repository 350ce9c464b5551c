// crispbench: boundary benchmark, edge-map pipeline and refinement demo.
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "crispbench/cli.hpp"

namespace cb = crispbench;
namespace cli = crispbench::cli;

int main(int argc, char** argv) {
  CLI::App app{"crispbench: crisp boundary evaluation and pipeline tools"};
  app.require_subcommand(1);

  cli::EvalOptions eval;
  int eval_jobs = 0;
  std::string eval_csv;
  auto add_eval_flags = [](CLI::App* cmd, cli::EvalOptions& o, int& jobs, std::string& csv) {
    cmd->add_option("manifest", o.manifest, "JSONL dataset manifest")->required();
    cmd->add_option("--max-dist", o.config.d_fraction,
                    "matching tolerance as a fraction of the image diagonal")
        ->capture_default_str();
    cmd->add_option("--thresholds", o.config.n_thresholds, "number of thresholds k/(n+1)")
        ->capture_default_str();
    cmd->add_flag("--no-thin{false}", o.config.thin_predictions,
                  "match binarized predictions without thinning");
    cmd->add_option("--out", o.out, "JSON report path")->required();
    cmd->add_option("--csv", csv, "CSV path (default: report path with .csv)");
    cmd->add_option("--jobs", jobs, "worker threads (default: CRISPBENCH_JOBS or all cores)");
  };

  auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions against annotations");
  add_eval_flags(eval_cmd, eval, eval_jobs, eval_csv);

  cli::SweepOptions sweep;
  int sweep_jobs = 0;
  std::string sweep_csv;
  std::string compare;
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate at shrinking matching tolerances");
  add_eval_flags(sweep_cmd, sweep.eval, sweep_jobs, sweep_csv);
  sweep_cmd->add_option("--factors", sweep.factors, "tolerance multipliers in (0, 1]")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--compare", compare, "second manifest; report per-factor gaps");

  cli::ConsensusOptions consensus;
  auto* cons_cmd = app.add_subcommand("consensus", "tri-state labels from several annotators");
  cons_cmd->add_option("gt_dir", consensus.gt_dir, "directory with one sub-directory per id")
      ->required();
  cons_cmd->add_option("--min-positive", consensus.min_positive, "votes needed for positive")
      ->capture_default_str();
  cons_cmd->add_option("--out", consensus.out_dir, "output directory")->required();

  cli::FuseOptions fuse;
  std::string reference;
  auto* fuse_cmd = app.add_subcommand("fuse", "average per-scale outputs at original size");
  fuse_cmd->add_option("scale_dirs", fuse.scale_dirs, "one directory per scale, in --scales order")
      ->required();
  fuse_cmd->add_option("--scales", fuse.scales, "scale factors")
      ->delimiter(',')
      ->capture_default_str();
  fuse_cmd->add_option("--reference", reference, "original-size images when 1.0 is not a scale");
  fuse_cmd->add_option("--out", fuse.out_dir, "output directory")->required();

  cli::NetDemoOptions demo;
  std::string dump;
  auto* demo_cmd = app.add_subcommand("net-demo", "run a seeded refinement pathway");
  demo_cmd->add_option("--levels", demo.levels, "number of refinement modules")
      ->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed, "RNG seed")->capture_default_str();
  demo_cmd->add_option("--base-size", demo.base_size, "spatial size of the coarsest feature")
      ->capture_default_str();
  demo_cmd->add_option("--dump", dump, "directory for tensor dumps");
  demo_cmd->add_flag("--dump-params", demo.dump_params, "also dump parameters");

  CLI11_PARSE(app, argc, argv);

  auto opt_jobs = [](int j) { return j > 0 ? std::optional<int>(j) : std::nullopt; };
  try {
    if (*eval_cmd) {
      eval.jobs = opt_jobs(eval_jobs);
      if (!eval_csv.empty()) eval.csv = eval_csv;
      return cli::cmd_eval(eval, std::cerr);
    }
    if (*sweep_cmd) {
      sweep.eval.jobs = opt_jobs(sweep_jobs);
      if (!sweep_csv.empty()) sweep.eval.csv = sweep_csv;
      if (!compare.empty()) sweep.compare_manifest = compare;
      return cli::cmd_sweep(sweep, std::cerr);
    }
    if (*cons_cmd) return cli::cmd_consensus(consensus, std::cerr);
    if (*fuse_cmd) {
      if (!reference.empty()) fuse.reference_dir = reference;
      return cli::cmd_fuse(fuse, std::cerr);
    }
    if (*demo_cmd) {
      if (!dump.empty()) demo.dump_dir = dump;
      return cli::cmd_net_demo(demo, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}

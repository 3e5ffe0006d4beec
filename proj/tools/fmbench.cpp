#include "fmsolve/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

struct OutputTarget {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = &std::cout;
};

OutputTarget open_output(const std::string& path) {
  OutputTarget target;
  if (path.empty()) return target;
  target.file = std::make_unique<std::ofstream>(path);
  if (!*target.file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  target.stream = target.file.get();
  return target;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmbench - functional-map solver verification and benchmark harness"};
  app.require_subcommand(1);

  fmsolve::BenchConfig config;
  std::string mask_name = "comm";
  std::string precision_name = "f64";
  std::string out_path;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--k-start", config.k_start, "first spectral resolution");
    cmd->add_option("--k-stop", config.k_stop, "last spectral resolution (inclusive)");
    cmd->add_option("--k-step", config.k_step, "spectral resolution step");
    cmd->add_option("--d", config.d, "descriptor channel count (0 = 2k)");
    cmd->add_option("--batch", config.batch, "number of shape pairs solved together");
    cmd->add_option("--lambda", config.lambda, "regularization weight");
    cmd->add_option("--mask", mask_name, "penalty mask family")
        ->check(CLI::IsMember({"comm", "resolvent"}));
    cmd->add_option("--sigma", config.sigma, "resolvent mask parameter");
    cmd->add_option("--reps", config.repetitions, "timed repetitions per solver");
    cmd->add_option("--warmup", config.warmup, "discarded warmup runs per solver");
    cmd->add_option("--seed", config.seed, "RNG seed for synthetic instances");
    cmd->add_option("--precision", precision_name, "element precision")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("--mem-cap-bytes", config.mem_cap_bytes,
                    "skip batched solves whose lhs tensor exceeds this");
    cmd->add_option("--threads", config.threads, "batched dispatch width (0 = hardware)");
    cmd->add_option("--out", out_path, "write the report to this path instead of stdout");
  };

  auto* verify = app.add_subcommand("verify", "cross-check rowwise/batched/oracle agreement");
  add_common(verify);
  verify->add_flag("--inject-fault", config.inject_fault,
                   "flip one sign in the batched assembly so the check must fail");

  auto* bench = app.add_subcommand("bench", "time both solvers across resolutions (CSV)");
  add_common(bench);

  auto* memory = app.add_subcommand("memory", "transient-allocation model across resolutions (CSV)");
  add_common(memory);

  double total_n = 10000.0;
  int steps = 101;
  auto* metrics = app.add_subcommand(
      "metrics-sweep", "degenerate-predictor overlap metrics vs ratio (CSV)");
  metrics->add_option("--total-n", total_n, "region size N");
  metrics->add_option("--steps", steps, "number of ratio grid points");
  metrics->add_option("--out", out_path, "write the CSV to this path instead of stdout");

  int channels = 8;
  int vertices = 64;
  auto* gradfeat =
      app.add_subcommand("gradfeat-check", "tangent gradient-feature property checks");
  gradfeat->add_option("--d", channels, "channel count");
  gradfeat->add_option("--vertices", vertices, "vertex count");
  gradfeat->add_option("--seed", config.seed, "RNG seed");
  gradfeat->add_option("--out", out_path, "write the report to this path instead of stdout");

  CLI11_PARSE(app, argc, argv);

  config.mask =
      mask_name == "comm" ? fmsolve::MaskKind::Commutativity : fmsolve::MaskKind::Resolvent;
  config.precision = precision_name == "f64" ? fmsolve::Precision::F64 : fmsolve::Precision::F32;

  try {
    OutputTarget target = open_output(out_path);
    std::ostream& out = *target.stream;
    if (verify->parsed()) return fmsolve::run_verify(config, out);
    if (bench->parsed()) return fmsolve::run_bench(config, out);
    if (memory->parsed()) return fmsolve::run_memory(config, out);
    if (metrics->parsed()) return fmsolve::run_metrics_sweep(total_n, steps, out);
    if (gradfeat->parsed()) return fmsolve::run_gradfeat_check(channels, vertices, config.seed, out);
  } catch (const std::exception& e) {
    std::cerr << "fmbench: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end for the reduced-order-modelling pipeline:
//   generate -> train-reduction -> train-map -> eval / pod / export-latents
// Every command is a pure function of (config file, input artifacts).

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlrom/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App *cmd, CommonArgs &args) {
  cmd->add_option("--config", args.config_path, "run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "artifact directory")->required();
  cmd->add_option("--seed", args.seed, "override every seed in the config");
}

nlrom::cli::RunConfig load_config(const CommonArgs &args) {
  auto cfg = nlrom::cli::RunConfig::load_file(args.config_path);
  if (args.seed) cfg.override_seed(*args.seed);
  return cfg;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"nonlinear reduced order modelling pipeline"};
  app.require_subcommand(1);

  CommonArgs generate_args, reduction_args, map_args, eval_args, pod_args, latents_args;
  int threads = 1;

  CLI::App *generate = app.add_subcommand("generate", "sample parameters and run the FOM");
  add_common(generate, generate_args);
  generate->add_option("--threads", threads, "FOM worker count")->check(CLI::PositiveNumber);

  add_common(app.add_subcommand("train-reduction", "fit the nonlinear reduction (stage 1)"),
             reduction_args);
  add_common(app.add_subcommand("train-map", "fit the reduced map (stage 2)"), map_args);
  add_common(app.add_subcommand("eval", "error report for the composed model"), eval_args);
  add_common(app.add_subcommand("pod", "POD projection-error baseline"), pod_args);
  add_common(app.add_subcommand("export-latents", "latent coordinates over a parameter grid"),
             latents_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("generate")) {
      nlrom::cli::cmd_generate(load_config(generate_args), generate_args.out_dir, threads);
    } else if (app.got_subcommand("train-reduction")) {
      nlrom::cli::cmd_train_reduction(load_config(reduction_args), reduction_args.out_dir);
    } else if (app.got_subcommand("train-map")) {
      nlrom::cli::cmd_train_map(load_config(map_args), map_args.out_dir);
    } else if (app.got_subcommand("eval")) {
      const auto [train_report, test_report] =
          nlrom::cli::cmd_eval(load_config(eval_args), eval_args.out_dir);
      std::printf("train mre %.6g  test mre %.6g\n", train_report.mre, test_report.mre);
    } else if (app.got_subcommand("pod")) {
      nlrom::cli::cmd_pod(load_config(pod_args), pod_args.out_dir);
    } else if (app.got_subcommand("export-latents")) {
      nlrom::cli::cmd_export_latents(load_config(latents_args), latents_args.out_dir);
    }
  } catch (const nlrom::ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return nlrom::cli::kExitConfigError;
  } catch (const nlrom::StageError &e) {
    std::fprintf(stderr, "stage error: %s\n", e.what());
    return nlrom::cli::kExitStageError;
  } catch (const nlrom::NumericalError &e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return nlrom::cli::kExitNumericalError;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nlrom::cli::kExitFailure;
  }
  return nlrom::cli::kExitOk;
}

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "osmcaa/commands.hpp"
#include "osmcaa/errors.hpp"

namespace {

void add_common_flags(CLI::App* cmd, osmcaa::cli::CommandArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--seed", args.seed, "master seed (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted contrastive loss trainer with online soft mining "
               "and class-aware attention"};
  app.require_subcommand(1);

  osmcaa::cli::CommandArgs args;

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  add_common_flags(generate, args);
  generate->add_option("--out", args.out, "output dataset path")->required();

  CLI::App* train = app.add_subcommand("train", "train an embedding model");
  add_common_flags(train, args);
  train->add_option("--dataset", args.dataset, "dataset file")->required();
  train->add_option("--eval-dataset", args.eval_dataset,
                    "separate evaluation dataset (skips the class split)");
  train->add_option("--checkpoint", args.checkpoint, "checkpoint to resume from");
  train->add_option("--mode", args.mode, "baseline|osm|osm-caa");
  train->add_option("--out", args.out, "output checkpoint path")->required();
  train->add_option("--log", args.log, "JSON-lines metrics log path");

  CLI::App* evaluate = app.add_subcommand("evaluate", "retrieval metrics for a checkpoint");
  add_common_flags(evaluate, args);
  evaluate->add_option("--checkpoint", args.checkpoint, "checkpoint file")->required();
  evaluate->add_option("--dataset", args.dataset, "dataset file")->required();
  evaluate->add_option("--ks", args.ks, "comma-separated K list");
  evaluate->add_option("--out", args.out, "write metrics JSON here");

  CLI::App* inspect = app.add_subcommand("inspect", "dump pair weights for one batch");
  add_common_flags(inspect, args);
  inspect->add_option("--checkpoint", args.checkpoint, "checkpoint file")->required();
  inspect->add_option("--dataset", args.dataset, "dataset file")->required();
  inspect->add_option("--mode", args.mode, "baseline|osm|osm-caa");
  inspect->add_option("--out", args.out, "write the weight dump here");

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "verify analytic gradients against finite differences");
  add_common_flags(gradcheck, args);
  gradcheck->add_flag("--corrupt-gradients", args.corrupt_gradients,
                      "negative control: corrupt one gradient entry")
      ->group("");  // test hook, hidden from help

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return osmcaa::cli::cmd_generate(args);
    if (train->parsed()) return osmcaa::cli::cmd_train(args);
    if (evaluate->parsed()) return osmcaa::cli::cmd_evaluate(args);
    if (inspect->parsed()) return osmcaa::cli::cmd_inspect(args);
    if (gradcheck->parsed()) return osmcaa::cli::cmd_gradcheck(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const osmcaa::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

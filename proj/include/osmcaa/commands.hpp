#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace osmcaa::cli {

// Flag-level overrides collected by the argument parser; every other
// setting comes from the config file. Flags win over file values.
struct CommandArgs {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> dataset;
  std::optional<std::string> eval_dataset;
  std::optional<std::string> checkpoint;
  std::optional<std::string> out;
  std::optional<std::string> log;
  std::optional<std::string> ks;
  bool corrupt_gradients = false;
};

// Subcommand bodies. Each throws ValidationError for bad configuration
// (before any side effect) and other Error subclasses for runtime trouble;
// the return value is the process exit code for the non-throwing paths.
int cmd_generate(const CommandArgs& args);
int cmd_train(const CommandArgs& args);
int cmd_evaluate(const CommandArgs& args);
int cmd_inspect(const CommandArgs& args);
int cmd_gradcheck(const CommandArgs& args);

}  // namespace osmcaa::cli

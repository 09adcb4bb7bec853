#pragma once

#include <filesystem>
#include <string>

#include "osmcaa/data.hpp"
#include "osmcaa/trainer.hpp"

namespace osmcaa {

// Flat key=value configuration shared by every subcommand. '#' starts a
// comment; command-line flags override file values. Unknown keys are
// rejected so typos fail loudly instead of silently using a default.
struct RunConfig {
  SynthConfig synth;
  TrainConfig train;

  double train_class_fraction = 0.5;
  bool ordered_split = false;
  // Label noise injected into the training side after the class split, so
  // the evaluation side stays clean.
  double train_outlier_rate = 0.0;

  // Which side of the class split a dataset-consuming command operates on:
  // none (whole file), train, or test.
  std::string eval_split = "none";

  int gradcheck_instances = 50;
  double gradcheck_step = 1e-5;
  double gradcheck_tolerance = 1e-6;

  // Applies one key; throws ValidationError on an unknown key or a value
  // that does not parse or is out of range.
  void set(const std::string& key, const std::string& value);

  void set_seed(std::uint64_t seed) {
    synth.seed = seed;
    train.seed = seed;
  }

  static RunConfig from_file(const std::filesystem::path& path);

  // Canonical serialization of every key, used as the checkpoint's config
  // echo. Stable ordering, round-trips through set().
  std::string echo() const;
};

std::vector<int> parse_k_list(const std::string& csv);

}  // namespace osmcaa

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "osmcaa/data.hpp"
#include "osmcaa/eval.hpp"
#include "osmcaa/loss.hpp"
#include "osmcaa/model.hpp"
#include "osmcaa/sampler.hpp"

namespace osmcaa {

struct TrainConfig {
  int epochs = 50;
  BatchSpec batch;
  WeightMode mode = WeightMode::kOsmCaa;
  LossConfig loss;
  MiningConfig mining;
  double lr = 0.001;
  double momentum = 0.9;
  int hidden_dim = 64;
  int embed_dim = 16;
  int eval_every = 10;  // epochs between retrieval evaluations
  std::vector<int> eval_ks = {1, 2, 4, 8, 16, 32};
  std::uint64_t seed = 1;
  // Where to dump the offending batch when the loss turns non-finite.
  std::filesystem::path nonfinite_dump_path = "nonfinite_batch.json";

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // absolute index, continues across resumes
  double mean_loss_pos = 0.0;
  double mean_loss_neg = 0.0;
  double mean_loss_total = 0.0;
  double mean_loss_aux = 0.0;
  double mean_objective = 0.0;
  double outlier_caa_gap = 0.0;  // mean clean attention minus mean outlier
                                 // attention; 0 when not applicable
  bool evaluated = false;
  RetrievalResult eval;
};

struct TrainState {
  ModelParams params;
  OptimizerState opt;
  int next_epoch = 0;
};

struct TrainResult {
  ModelParams params;
  OptimizerState opt;
  int next_epoch = 0;
  std::vector<EpochRecord> records;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs the full loop: sample batch -> forward -> mine -> weight -> loss ->
// backward -> SGD step, one record per epoch, evaluating on the disjoint
// eval set every eval_every epochs and at the end. Deterministic given the
// seed; the batch stream never depends on the weighting mode, so ablation
// arms see identical batches. Pass `resume` to continue a checkpointed run
// with its epoch numbering.
TrainResult train(const Dataset& ds_train, const Dataset& ds_eval,
                  const TrainConfig& cfg,
                  std::optional<TrainState> resume = std::nullopt,
                  const EpochCallback& on_epoch = nullptr);

// Mean attention of clean samples minus mean attention of flagged outliers
// over the dataset, scored against its own labels with the current context
// vectors. Defined as 0 when the dataset has no flagged outliers.
double audit_caa(const ModelParams& params, const Dataset& ds,
                 const MiningConfig& mining);

}  // namespace osmcaa

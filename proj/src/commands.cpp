#include "osmcaa/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "osmcaa/checkpoint.hpp"
#include "osmcaa/config.hpp"
#include "osmcaa/errors.hpp"
#include "osmcaa/eval.hpp"
#include "osmcaa/gradcheck.hpp"
#include "osmcaa/io_util.hpp"
#include "osmcaa/trainer.hpp"

namespace osmcaa::cli {
namespace {

using nlohmann::json;

RunConfig load_config(const CommandArgs& args) {
  RunConfig cfg =
      args.config_path ? RunConfig::from_file(*args.config_path) : RunConfig{};
  if (args.seed) cfg.set_seed(*args.seed);
  if (args.mode) cfg.train.mode = weight_mode_from_string(*args.mode);
  if (args.ks) cfg.train.eval_ks = parse_k_list(*args.ks);
  return cfg;
}

std::string require(const std::optional<std::string>& value, const char* flag) {
  if (!value || value->empty())
    throw ValidationError(std::string("missing required flag ") + flag);
  return *value;
}

void require_exists(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path))
    throw ValidationError(std::string(what) + " not found: " + path);
}

// Applies the configured class split and returns the side a command wants.
Dataset select_split(const Dataset& ds, const RunConfig& cfg) {
  if (cfg.eval_split == "none") return ds;
  Rng rng = Rng(cfg.train.seed).split("split");
  SplitResult split = split_by_class(ds, cfg.train_class_fraction, rng, cfg.ordered_split);
  return cfg.eval_split == "train" ? std::move(split.train) : std::move(split.test);
}

json retrieval_to_json(const RetrievalResult& result) {
  json recall = json::object();
  for (const auto& [k, v] : result.recall_at) recall[std::to_string(k)] = v;
  // CMC@K is the same number as Recall@K; both names are emitted for
  // consumers using re-identification vocabulary.
  return json{{"recall_at", recall}, {"cmc_at", recall}, {"map", result.map_score}};
}

json epoch_to_json(const EpochRecord& record) {
  json line{{"epoch", record.epoch},
            {"loss_pos", record.mean_loss_pos},
            {"loss_neg", record.mean_loss_neg},
            {"loss_total", record.mean_loss_total},
            {"loss_aux", record.mean_loss_aux},
            {"objective", record.mean_objective},
            {"outlier_caa_gap", record.outlier_caa_gap}};
  if (record.evaluated) line["eval"] = retrieval_to_json(record.eval);
  return line;
}

Checkpoint to_checkpoint(const TrainResult& result, const RunConfig& cfg) {
  Checkpoint ckpt;
  ckpt.dims = result.params.dims();
  ckpt.next_epoch = static_cast<std::uint64_t>(result.next_epoch);
  ckpt.lr = result.opt.lr;
  ckpt.momentum = result.opt.momentum;
  ckpt.params = result.params;
  ckpt.velocity = result.opt.velocity;
  ckpt.config_echo = cfg.echo();
  return ckpt;
}

struct SummaryStats {
  double min = 0.0, mean = 0.0, max = 0.0;
};

SummaryStats summarize(const std::vector<double>& v) {
  SummaryStats s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (const double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

}  // namespace

int cmd_generate(const CommandArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::string out_path = require(args.out, "--out");
  const Dataset ds = generate(cfg.synth);
  save_dataset(ds, out_path);
  std::printf("wrote %s: N=%zu dim=%zu classes=%d outliers=%zu\n", out_path.c_str(),
              ds.size(), ds.dim(), ds.n_classes, ds.num_outliers());
  return 0;
}

int cmd_train(const CommandArgs& args) {
  RunConfig cfg = load_config(args);
  const std::string dataset_path = require(args.dataset, "--dataset");
  const std::string out_path = require(args.out, "--out");
  require_exists(dataset_path, "dataset");
  if (args.eval_dataset) require_exists(*args.eval_dataset, "eval dataset");
  if (args.checkpoint) require_exists(*args.checkpoint, "checkpoint");
  cfg.train.validate();
  if (args.log) cfg.train.nonfinite_dump_path = *args.log + ".nonfinite.json";

  Dataset ds_train, ds_eval;
  if (args.eval_dataset) {
    ds_train = load_dataset(dataset_path);
    ds_eval = load_dataset(*args.eval_dataset);
  } else {
    const Dataset full = load_dataset(dataset_path);
    Rng split_rng = Rng(cfg.train.seed).split("split");
    SplitResult split =
        split_by_class(full, cfg.train_class_fraction, split_rng, cfg.ordered_split);
    ds_train = std::move(split.train);
    ds_eval = std::move(split.test);
  }
  if (cfg.train_outlier_rate > 0.0) {
    Rng noise_rng = Rng(cfg.train.seed).split("train-outliers");
    inject_label_noise(ds_train, cfg.train_outlier_rate, noise_rng);
  }

  std::optional<TrainState> resume;
  if (args.checkpoint) {
    Checkpoint ckpt = load_checkpoint(*args.checkpoint);
    TrainState state;
    state.params = std::move(ckpt.params);
    state.opt = OptimizerState::init(state.params, cfg.train.lr, cfg.train.momentum);
    state.opt.velocity = std::move(ckpt.velocity);
    state.next_epoch = static_cast<int>(ckpt.next_epoch);
    resume = std::move(state);
  }

  // The log is streamed line by line into a temp file and renamed once the
  // run completes.
  std::optional<std::ofstream> log_stream;
  std::filesystem::path log_tmp;
  if (args.log) {
    log_tmp = *args.log + ".tmp";
    const auto parent = std::filesystem::path(*args.log).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    log_stream.emplace(log_tmp, std::ios::trunc);
    if (!*log_stream) throw IoError("cannot open log file " + log_tmp.string());
  }
  const EpochCallback on_epoch = [&](const EpochRecord& record) {
    if (log_stream) *log_stream << epoch_to_json(record).dump() << '\n' << std::flush;
    if (record.evaluated)
      std::printf("epoch %d  loss=%.6f  aux=%.6f  R@1=%.4f  mAP=%.4f  caa_gap=%.4f\n",
                  record.epoch, record.mean_loss_total, record.mean_loss_aux,
                  record.eval.recall_at.begin()->second, record.eval.map_score,
                  record.outlier_caa_gap);
    else
      std::printf("epoch %d  loss=%.6f  aux=%.6f\n", record.epoch,
                  record.mean_loss_total, record.mean_loss_aux);
  };

  const TrainResult result = train(ds_train, ds_eval, cfg.train, std::move(resume),
                                   on_epoch);

  if (log_stream) {
    log_stream->close();
    std::error_code ec;
    std::filesystem::rename(log_tmp, *args.log, ec);
    if (ec) throw IoError("failed renaming log: " + ec.message());
  }
  save_checkpoint(to_checkpoint(result, cfg), out_path);
  std::printf("wrote checkpoint %s (next_epoch=%d)\n", out_path.c_str(),
              result.next_epoch);
  return 0;
}

int cmd_evaluate(const CommandArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::string ckpt_path = require(args.checkpoint, "--checkpoint");
  const std::string dataset_path = require(args.dataset, "--dataset");
  require_exists(ckpt_path, "checkpoint");
  require_exists(dataset_path, "dataset");

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset ds = select_split(load_dataset(dataset_path), cfg);
  if (static_cast<int>(ds.dim()) != ckpt.dims.input_dim)
    throw DimensionMismatchError(
        "dataset dim " + std::to_string(ds.dim()) + " vs checkpoint input dim " +
        std::to_string(ckpt.dims.input_dim) + " (model: hidden " +
        std::to_string(ckpt.dims.hidden_dim) + ", embed " +
        std::to_string(ckpt.dims.embed_dim) + ")");

  const Matrix embeddings = embed_dataset(ckpt.params, ds);
  const RetrievalResult result = evaluate(embeddings, ds.labels, cfg.train.eval_ks);

  for (const auto& [k, v] : result.recall_at)
    std::printf("Recall@%-3d %.4f\n", k, v);
  std::printf("mAP        %.4f\n", result.map_score);

  if (args.out) {
    write_file_atomic(*args.out, retrieval_to_json(result).dump(2) + "\n");
    std::printf("wrote %s\n", args.out->c_str());
  }
  return 0;
}

int cmd_inspect(const CommandArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::string ckpt_path = require(args.checkpoint, "--checkpoint");
  const std::string dataset_path = require(args.dataset, "--dataset");
  require_exists(ckpt_path, "checkpoint");
  require_exists(dataset_path, "dataset");

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset ds = select_split(load_dataset(dataset_path), cfg);
  if (static_cast<int>(ds.dim()) != ckpt.dims.input_dim)
    throw DimensionMismatchError("dataset dim " + std::to_string(ds.dim()) +
                                 " vs checkpoint input dim " +
                                 std::to_string(ckpt.dims.input_dim));
  if (ds.n_classes > ckpt.dims.num_classes)
    throw DimensionMismatchError("dataset has " + std::to_string(ds.n_classes) +
                                 " classes, checkpoint context covers " +
                                 std::to_string(ckpt.dims.num_classes));

  Rng rng = Rng(cfg.train.seed).split("inspect");
  const DatasetIndex index = DatasetIndex::build(ds.labels);
  const Batch batch = sample_batch(index, cfg.train.batch, rng);

  Matrix inputs(batch.indices.size(), ds.dim());
  for (std::size_t r = 0; r < batch.indices.size(); ++r) {
    const auto i = static_cast<std::size_t>(batch.indices[r]);
    std::copy(ds.features.row(i).begin(), ds.features.row(i).end(),
              inputs.row(r).begin());
  }
  const ForwardCache cache = forward(ckpt.params, inputs);
  const Matrix& attention_input =
      cfg.train.mining.caa_on_normalized ? cache.embeddings : cache.raw;
  const DistanceMatrix d = pairwise_distances(cache.embeddings);
  const PairSets pairs = construct_pairs(batch.labels);
  const PairWeights weights =
      compute_pair_weights(attention_input, batch.labels, d, pairs, ckpt.params.ctx,
                           cfg.train.mining, cfg.train.mode);

  json pos_pairs = json::array(), neg_pairs = json::array();
  for (const auto& [i, j] : pairs.positives) pos_pairs.push_back({i, j});
  for (const auto& [i, j] : pairs.negatives) neg_pairs.push_back({i, j});
  const json doc{{"mode", to_string(cfg.train.mode)},
                 {"m", batch.indices.size()},
                 {"batch_indices", batch.indices},
                 {"batch_labels", batch.labels},
                 {"pairs_pos", pos_pairs},
                 {"pairs_neg", neg_pairs},
                 {"s_pos", weights.s_pos},
                 {"s_neg", weights.s_neg},
                 {"a_img", weights.a_img},
                 {"a_pair_pos", weights.a_pair_pos},
                 {"a_pair_neg", weights.a_pair_neg},
                 {"w_pos", weights.w_pos},
                 {"w_neg", weights.w_neg}};

  const SummaryStats s_pos = summarize(weights.s_pos);
  const SummaryStats s_neg = summarize(weights.s_neg);
  const SummaryStats a_img = summarize(weights.a_img);
  std::printf("pairs: %zu positive, %zu negative\n", pairs.positives.size(),
              pairs.negatives.size());
  std::printf("s_pos  min=%.6f mean=%.6f max=%.6f\n", s_pos.min, s_pos.mean, s_pos.max);
  std::printf("s_neg  min=%.6f mean=%.6f max=%.6f\n", s_neg.min, s_neg.mean, s_neg.max);
  std::printf("a_img  min=%.6f mean=%.6f max=%.6f\n", a_img.min, a_img.mean, a_img.max);

  if (args.out) {
    write_file_atomic(*args.out, doc.dump(2) + "\n");
    std::printf("wrote %s\n", args.out->c_str());
  } else {
    std::printf("%s\n", doc.dump(2).c_str());
  }
  return 0;
}

int cmd_gradcheck(const CommandArgs& args) {
  const RunConfig cfg = load_config(args);
  GradCheckConfig gc;
  gc.instances = cfg.gradcheck_instances;
  gc.step = cfg.gradcheck_step;
  gc.tolerance = cfg.gradcheck_tolerance;
  gc.seed = cfg.train.seed;
  gc.corrupt = args.corrupt_gradients;

  bool all_pass = true;
  for (const WeightMode mode :
       {WeightMode::kBaseline, WeightMode::kOsm, WeightMode::kOsmCaa}) {
    const GradCheckReport report = run_gradcheck(mode, gc);
    all_pass = all_pass && report.pass;
    std::printf("mode=%-8s instances=%d h=%g tol=%g max_rel_err=%.3e %s\n",
                to_string(mode).c_str(), report.instances, report.step,
                report.tolerance, report.max_rel_err,
                report.pass ? "PASS" : "FAIL");
  }
  return all_pass ? 0 : 2;
}

}  // namespace osmcaa::cli

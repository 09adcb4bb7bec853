#include "osmcaa/trainer.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "osmcaa/errors.hpp"
#include "osmcaa/io_util.hpp"

namespace osmcaa {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch.classes_per_batch < 2 || batch.samples_per_class < 2)
    throw ValidationError("batch spec requires c >= 2 and k >= 2");
  if (!(lr > 0.0)) throw ValidationError("lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must lie in [0, 1)");
  if (hidden_dim < 1 || embed_dim < 1) throw ValidationError("model dims must be positive");
  if (eval_every < 1) throw ValidationError("eval_every must be >= 1");
  if (eval_ks.empty()) throw ValidationError("eval_ks must not be empty");
  if (loss.lambda < 0.0 || loss.lambda > 1.0) throw ValidationError("lambda must lie in [0, 1]");
  if (!(loss.alpha > 0.0)) throw ValidationError("alpha must be > 0");
  if (loss.aux_weight < 0.0) throw ValidationError("aux_weight must be >= 0");
  if (!(loss.eps_denom > 0.0)) throw ValidationError("eps_denom must be > 0");
  if (!(mining.sigma_osm > 0.0)) throw ValidationError("sigma_osm must be > 0");
  if (!(mining.sigma_caa > 0.0)) throw ValidationError("sigma_caa must be > 0");
  if (!(mining.alpha > 0.0)) throw ValidationError("alpha must be > 0");
}

namespace {

Matrix gather_rows(const Matrix& features, const std::vector<int>& indices) {
  Matrix out(indices.size(), features.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = static_cast<std::size_t>(indices[r]);
    std::copy(features.row(i).begin(), features.row(i).end(), out.row(r).begin());
  }
  return out;
}

// Post-mortem dump for a batch whose loss went non-finite.
void dump_batch(const std::filesystem::path& path, int epoch, const Batch& batch,
                const DistanceMatrix& d, const PairSets& pairs,
                const PairWeights& weights) {
  nlohmann::json doc;
  doc["epoch"] = epoch;
  doc["indices"] = batch.indices;
  doc["labels"] = batch.labels;
  nlohmann::json dist_pos = nlohmann::json::array();
  for (const auto& [i, j] : pairs.positives)
    dist_pos.push_back(d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  nlohmann::json dist_neg = nlohmann::json::array();
  for (const auto& [i, j] : pairs.negatives)
    dist_neg.push_back(d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  doc["dist_pos"] = std::move(dist_pos);
  doc["dist_neg"] = std::move(dist_neg);
  doc["w_pos"] = weights.w_pos;
  doc["w_neg"] = weights.w_neg;
  doc["a_img"] = weights.a_img;
  write_file_atomic(path, doc.dump(2) + "\n");
}

bool report_finite(const LossReport& report) {
  return std::isfinite(report.objective) && std::isfinite(report.loss_pos) &&
         std::isfinite(report.loss_neg) && std::isfinite(report.loss_aux) &&
         all_finite(report.grad_embeddings) && all_finite(report.grad_context);
}

}  // namespace

double audit_caa(const ModelParams& params, const Dataset& ds,
                 const MiningConfig& mining) {
  if (ds.num_outliers() == 0) return 0.0;
  double clean_sum = 0.0, outlier_sum = 0.0;
  std::size_t clean_n = 0, outlier_n = 0;
  const std::size_t chunk_size = 512;
  for (std::size_t start = 0; start < ds.size(); start += chunk_size) {
    const std::size_t stop = std::min(ds.size(), start + chunk_size);
    std::vector<int> rows(stop - start);
    for (std::size_t i = start; i < stop; ++i) rows[i - start] = static_cast<int>(i);
    const ForwardCache cache = forward(params, gather_rows(ds.features, rows));
    const Matrix& attention_input =
        mining.caa_on_normalized ? cache.embeddings : cache.raw;
    std::vector<int> labels(ds.labels.begin() + static_cast<std::ptrdiff_t>(start),
                            ds.labels.begin() + static_cast<std::ptrdiff_t>(stop));
    const std::vector<double> a = caa_scores(attention_input, labels, params.ctx, mining);
    for (std::size_t i = start; i < stop; ++i) {
      if (ds.outlier_mask[i]) {
        outlier_sum += a[i - start];
        ++outlier_n;
      } else {
        clean_sum += a[i - start];
        ++clean_n;
      }
    }
  }
  if (clean_n == 0 || outlier_n == 0) return 0.0;
  return clean_sum / static_cast<double>(clean_n) -
         outlier_sum / static_cast<double>(outlier_n);
}

TrainResult train(const Dataset& ds_train, const Dataset& ds_eval,
                  const TrainConfig& cfg, std::optional<TrainState> resume,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (ds_train.n_classes < cfg.batch.classes_per_batch)
    throw InsufficientClassesError(
        "training set has " + std::to_string(ds_train.n_classes) +
        " classes, batches need " + std::to_string(cfg.batch.classes_per_batch));

  const Rng master(cfg.seed);
  TrainResult result;
  if (resume) {
    result.params = std::move(resume->params);
    result.opt = std::move(resume->opt);
    result.next_epoch = resume->next_epoch;
    result.opt.lr = cfg.lr;
    result.opt.momentum = cfg.momentum;
    if (result.params.dims().input_dim != static_cast<int>(ds_train.dim()))
      throw DimensionMismatchError("checkpoint input dim " +
                                   std::to_string(result.params.dims().input_dim) +
                                   " vs dataset dim " + std::to_string(ds_train.dim()));
  } else {
    ModelDims dims{static_cast<int>(ds_train.dim()), cfg.hidden_dim, cfg.embed_dim,
                   ds_train.n_classes};
    Rng init_rng = master.split("model-init");
    result.params = init_params(dims, init_rng);
    result.opt = OptimizerState::init(result.params, cfg.lr, cfg.momentum);
  }

  const DatasetIndex index = DatasetIndex::build(ds_train.labels);
  const int last_epoch = result.next_epoch + cfg.epochs - 1;

  for (int epoch = result.next_epoch; epoch <= last_epoch; ++epoch) {
    // The batch stream is keyed only by (seed, epoch), never by mode, so
    // every ablation arm consumes the same batch sequence.
    EpochIterator batches(index, cfg.batch,
                          master.split("epoch." + std::to_string(epoch)));
    EpochRecord record;
    record.epoch = epoch;
    std::size_t n_batches = 0;

    Batch batch;
    while (batches.next(batch)) {
      const Matrix inputs = gather_rows(ds_train.features, batch.indices);
      const ForwardCache cache = forward(result.params, inputs);
      const bool shared = cfg.mining.caa_on_normalized;
      const LossReport report =
          shared ? total_loss(cache.embeddings, batch.labels, result.params.ctx,
                              cfg.mode, cfg.loss, cfg.mining)
                 : total_loss(cache.embeddings, batch.labels, result.params.ctx,
                              cfg.mode, cfg.loss, cfg.mining, &cache.raw);
      if (!report_finite(report)) {
        const PairSets pairs = construct_pairs(batch.labels);
        dump_batch(cfg.nonfinite_dump_path, epoch, batch,
                   pairwise_distances(cache.embeddings), pairs, report.weights);
        throw NonFiniteLossError("non-finite loss in epoch " + std::to_string(epoch) +
                                 "; batch dumped to " +
                                 cfg.nonfinite_dump_path.string());
      }
      const ParamTensors grads =
          backward(result.params, cache, report.grad_embeddings, report.grad_context,
                   report.grad_raw_aux.empty() ? nullptr : &report.grad_raw_aux);
      sgd_step(result.params, grads, result.opt);

      record.mean_loss_pos += report.loss_pos;
      record.mean_loss_neg += report.loss_neg;
      record.mean_loss_total += report.loss_total;
      record.mean_loss_aux += report.loss_aux;
      record.mean_objective += report.objective;
      ++n_batches;
    }
    const double inv = 1.0 / static_cast<double>(n_batches);
    record.mean_loss_pos *= inv;
    record.mean_loss_neg *= inv;
    record.mean_loss_total *= inv;
    record.mean_loss_aux *= inv;
    record.mean_objective *= inv;

    if (cfg.mode == WeightMode::kOsmCaa || cfg.loss.force_aux)
      record.outlier_caa_gap = audit_caa(result.params, ds_train, cfg.mining);

    const bool at_end = epoch == last_epoch;
    if (at_end || (epoch - result.next_epoch + 1) % cfg.eval_every == 0) {
      record.evaluated = true;
      record.eval = evaluate(embed_dataset(result.params, ds_eval), ds_eval.labels,
                             cfg.eval_ks);
    }
    result.records.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.next_epoch = last_epoch + 1;
  return result;
}

}  // namespace osmcaa

#include "osmcaa/loss.hpp"

#include <algorithm>
#include <cmath>

#include "osmcaa/errors.hpp"

namespace osmcaa {

double contrastive_loss(double d, bool same_class, double alpha) {
  if (same_class) return d * d;
  const double hinge = std::max(0.0, alpha - d);
  return hinge * hinge;
}

WclComponents wcl_forward(const DistanceMatrix& d, const PairWeights& weights,
                          const PairSets& pairs, const LossConfig& cfg) {
  WclComponents out;
  double num_pos = 0.0;
  for (std::size_t p = 0; p < pairs.positives.size(); ++p) {
    const auto& [i, j] = pairs.positives[p];
    const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    num_pos += weights.w_pos[p] * dij * dij;
    out.denom_pos += weights.w_pos[p];
  }
  double num_neg = 0.0;
  for (std::size_t p = 0; p < pairs.negatives.size(); ++p) {
    const auto& [i, j] = pairs.negatives[p];
    const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    const double hinge = std::max(0.0, cfg.alpha - dij);
    num_neg += weights.w_neg[p] * hinge * hinge;
    out.denom_neg += weights.w_neg[p];
  }
  out.loss_pos = out.denom_pos < cfg.eps_denom ? 0.0 : 0.5 * num_pos / out.denom_pos;
  out.loss_neg = out.denom_neg < cfg.eps_denom ? 0.0 : 0.5 * num_neg / out.denom_neg;
  out.loss_total = (1.0 - cfg.lambda) * out.loss_pos + cfg.lambda * out.loss_neg;
  return out;
}

Matrix wcl_backward(const Matrix& f, const DistanceMatrix& d,
                    const PairWeights& weights, const PairSets& pairs,
                    const LossConfig& cfg) {
  const std::size_t dim = f.cols();
  Matrix grad(f.rows(), dim);

  // d/df_i of (1/(2 S_P)) sum w+ d_ij^2  =  (w+/S_P) (f_i - f_j)
  double denom_pos = 0.0;
  for (const double w : weights.w_pos) denom_pos += w;
  if (denom_pos >= cfg.eps_denom) {
    const double scale = (1.0 - cfg.lambda) / denom_pos;
    for (std::size_t p = 0; p < pairs.positives.size(); ++p) {
      const auto [i, j] = pairs.positives[p];
      const double c = scale * weights.w_pos[p];
      for (std::size_t t = 0; t < dim; ++t) {
        const double diff = f(static_cast<std::size_t>(i), t) -
                            f(static_cast<std::size_t>(j), t);
        grad(static_cast<std::size_t>(i), t) += c * diff;
        grad(static_cast<std::size_t>(j), t) -= c * diff;
      }
    }
  }

  // d/df_i of (1/(2 S_N)) sum w- max(0, a - d)^2
  //   = -(w-/S_N) (a - d) (f_i - f_j) / d   inside the margin.
  // At d = 0 the direction is undefined; the zero subgradient is used.
  double denom_neg = 0.0;
  for (const double w : weights.w_neg) denom_neg += w;
  if (denom_neg >= cfg.eps_denom) {
    const double scale = cfg.lambda / denom_neg;
    for (std::size_t p = 0; p < pairs.negatives.size(); ++p) {
      const auto [i, j] = pairs.negatives[p];
      const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (dij >= cfg.alpha || dij <= 0.0) continue;
      const double c = -scale * weights.w_neg[p] * (cfg.alpha - dij) / dij;
      for (std::size_t t = 0; t < dim; ++t) {
        const double diff = f(static_cast<std::size_t>(i), t) -
                            f(static_cast<std::size_t>(j), t);
        grad(static_cast<std::size_t>(i), t) += c * diff;
        grad(static_cast<std::size_t>(j), t) -= c * diff;
      }
    }
  }
  return grad;
}

AuxClassificationLoss aux_classification_loss(const Matrix& caa_input,
                                              const std::vector<int>& labels,
                                              const ClassContext& ctx,
                                              double sigma_caa) {
  const std::size_t m = caa_input.rows();
  const std::size_t num_classes = ctx.num_classes();
  const Matrix probs = caa_softmax(caa_input, ctx, sigma_caa);

  AuxClassificationLoss out;
  out.grad_input = Matrix(m, caa_input.cols());
  out.grad_context = Matrix(num_classes, ctx.dim());

  double loss_sum = 0.0;
  const double grad_scale = 1.0 / (static_cast<double>(m) * sigma_caa);
  for (std::size_t i = 0; i < m; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
      throw LabelOutOfRangeError(y, num_classes);
    loss_sum += -std::log(probs(i, static_cast<std::size_t>(y)));
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double g =
          (probs(i, k) - (k == static_cast<std::size_t>(y) ? 1.0 : 0.0)) * grad_scale;
      for (std::size_t t = 0; t < ctx.dim(); ++t) {
        out.grad_input(i, t) += g * ctx.vectors(k, t);
        out.grad_context(k, t) += g * caa_input(i, t);
      }
    }
  }
  out.loss = loss_sum / static_cast<double>(m);
  return out;
}

LossReport total_loss_with_weights(const Matrix& f, const std::vector<int>& labels,
                                   const ClassContext& ctx, WeightMode mode,
                                   const LossConfig& loss_cfg,
                                   const MiningConfig& mining_cfg,
                                   const PairSets& pairs, const PairWeights& weights,
                                   const Matrix* caa_input) {
  const DistanceMatrix d = pairwise_distances(f);
  LossReport report;
  report.weights = weights;
  report.components = wcl_forward(d, weights, pairs, loss_cfg);
  report.loss_pos = report.components.loss_pos;
  report.loss_neg = report.components.loss_neg;
  report.loss_total = report.components.loss_total;
  report.grad_embeddings = wcl_backward(f, d, weights, pairs, loss_cfg);
  report.grad_context = Matrix(ctx.num_classes(), ctx.dim());
  report.objective = report.loss_total;

  if (loss_cfg.aux_active(mode)) {
    // A null caa_input means attention shares the normalized embeddings and
    // its gradient folds into grad_embeddings; a separate input (the raw
    // outputs) keeps its gradient in grad_raw_aux for the caller to route.
    const bool shared_input = caa_input == nullptr;
    const Matrix& input = caa_input ? *caa_input : f;
    AuxClassificationLoss aux =
        aux_classification_loss(input, labels, ctx, mining_cfg.sigma_caa);
    report.loss_aux = aux.loss;
    report.objective += loss_cfg.aux_weight * aux.loss;
    report.grad_context = std::move(aux.grad_context);
    for (double& g : report.grad_context.values()) g *= loss_cfg.aux_weight;
    if (!loss_cfg.aux_detach) {
      for (double& g : aux.grad_input.values()) g *= loss_cfg.aux_weight;
      if (shared_input) {
        for (std::size_t i = 0; i < report.grad_embeddings.size(); ++i)
          report.grad_embeddings.values()[i] += aux.grad_input.values()[i];
      } else {
        report.grad_raw_aux = std::move(aux.grad_input);
      }
    }
  }
  return report;
}

double objective_with_weights(const Matrix& f, const std::vector<int>& labels,
                              const ClassContext& ctx, WeightMode mode,
                              const LossConfig& loss_cfg,
                              const MiningConfig& mining_cfg, const PairSets& pairs,
                              const PairWeights& weights, const Matrix* caa_input) {
  const DistanceMatrix d = pairwise_distances(f);
  double objective = wcl_forward(d, weights, pairs, loss_cfg).loss_total;
  if (loss_cfg.aux_active(mode)) {
    const Matrix& input = caa_input ? *caa_input : f;
    const Matrix probs = caa_softmax(input, ctx, mining_cfg.sigma_caa);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < input.rows(); ++i)
      loss_sum += -std::log(probs(i, static_cast<std::size_t>(labels[i])));
    objective += loss_cfg.aux_weight * loss_sum / static_cast<double>(input.rows());
  }
  return objective;
}

LossReport total_loss(const Matrix& f, const std::vector<int>& labels,
                      const ClassContext& ctx, WeightMode mode,
                      const LossConfig& loss_cfg, const MiningConfig& mining_cfg,
                      const Matrix* caa_input) {
  const PairSets pairs = construct_pairs(labels);
  const DistanceMatrix d = pairwise_distances(f);
  const Matrix& attention_input = caa_input ? *caa_input : f;
  const PairWeights weights = compute_pair_weights(
      attention_input, labels, d, pairs, ctx, mining_cfg, mode);
  return total_loss_with_weights(f, labels, ctx, mode, loss_cfg, mining_cfg,
                                 pairs, weights, caa_input);
}

}  // namespace osmcaa

#pragma once

#include <vector>

#include "osmcaa/matrix.hpp"
#include "osmcaa/mining.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

struct LossConfig {
  double alpha = 1.2;       // contrastive margin
  double lambda = 0.5;      // mix between positive-set and negative-set terms
  double aux_weight = 1.0;  // coefficient of the classification branch loss
  double eps_denom = 1e-8;  // weight sums below this zero out the term
  // The classification branch normally trains only when attention is in
  // play; force_aux turns it on for the other modes as well.
  bool force_aux = false;
  // Train the classification branch separately: context vectors still learn
  // from the cross-entropy, but its gradient stops before the embeddings.
  // Keeps corrupted labels from leaking into the trunk through the branch.
  bool aux_detach = false;

  bool aux_active(WeightMode mode) const {
    return (mode == WeightMode::kOsmCaa || force_aux) && aux_weight > 0.0;
  }
};

// Single-pair contrastive term: d^2 for a positive, max(0, alpha - d)^2 for
// a negative.
double contrastive_loss(double d, bool same_class, double alpha);

struct WclComponents {
  double loss_pos = 0.0;    // weighted mean of d^2 over P, halved
  double loss_neg = 0.0;    // weighted mean of the squared hinge over N, halved
  double loss_total = 0.0;  // (1 - lambda) * loss_pos + lambda * loss_neg
  double denom_pos = 0.0;   // sum of positive-pair weights
  double denom_neg = 0.0;   // sum of negative-pair weights
};

// Forward pass of the weighted contrastive loss. Each side is normalized by
// its own weight sum; a side whose weight sum falls below eps_denom
// contributes zero instead of dividing by a vanishing denominator.
WclComponents wcl_forward(const DistanceMatrix& d, const PairWeights& weights,
                          const PairSets& pairs, const LossConfig& cfg);

// Gradient of the total weighted contrastive loss with respect to the
// embeddings. Weights and their sums are treated as constants
// (stop-gradient): the mining scores reweight pairs, they are not part of
// the optimization path.
Matrix wcl_backward(const Matrix& f, const DistanceMatrix& d,
                    const PairWeights& weights, const PairSets& pairs,
                    const LossConfig& cfg);

struct AuxClassificationLoss {
  double loss = 0.0;    // mean over the batch of -log a_i
  Matrix grad_input;    // m x D gradient with respect to the attention input
  Matrix grad_context;  // C x D gradient with respect to the context vectors
};

// Softmax cross-entropy of the classification branch that trains the
// context vectors; gradients flow to both the context and the input
// embeddings.
AuxClassificationLoss aux_classification_loss(const Matrix& caa_input,
                                              const std::vector<int>& labels,
                                              const ClassContext& ctx,
                                              double sigma_caa);

struct LossReport {
  double loss_pos = 0.0;
  double loss_neg = 0.0;
  double loss_total = 0.0;  // excludes the auxiliary branch
  double loss_aux = 0.0;
  double objective = 0.0;   // loss_total + aux_weight * loss_aux when active
  Matrix grad_embeddings;   // m x D, with respect to the normalized embeddings
  Matrix grad_context;      // C x D
  // Non-empty only when attention reads the raw outputs instead of the
  // normalized embeddings; holds the auxiliary gradient for that input.
  Matrix grad_raw_aux;
  PairWeights weights;
  WclComponents components;
};

// Composes mining, the weighted contrastive loss and the auxiliary branch
// for one batch. `caa_input` defaults to the normalized embeddings; pass the
// raw outputs when MiningConfig::caa_on_normalized is false.
LossReport total_loss(const Matrix& f, const std::vector<int>& labels,
                      const ClassContext& ctx, WeightMode mode,
                      const LossConfig& loss_cfg, const MiningConfig& mining_cfg,
                      const Matrix* caa_input = nullptr);

// Same computation with the pair weights supplied by the caller instead of
// recomputed; this is the function the finite-difference oracle probes,
// since the weights must stay frozen while the parameters move.
LossReport total_loss_with_weights(const Matrix& f, const std::vector<int>& labels,
                                   const ClassContext& ctx, WeightMode mode,
                                   const LossConfig& loss_cfg,
                                   const MiningConfig& mining_cfg,
                                   const PairSets& pairs, const PairWeights& weights,
                                   const Matrix* caa_input = nullptr);

// Forward-only value of the optimized scalar under frozen pair weights;
// what a finite-difference probe evaluates at each perturbed point.
double objective_with_weights(const Matrix& f, const std::vector<int>& labels,
                              const ClassContext& ctx, WeightMode mode,
                              const LossConfig& loss_cfg,
                              const MiningConfig& mining_cfg, const PairSets& pairs,
                              const PairWeights& weights,
                              const Matrix* caa_input = nullptr);

}  // namespace osmcaa

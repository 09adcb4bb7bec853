#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "osmcaa/matrix.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

// Ablation arms: unit weights, soft-mining scores only, or soft-mining
// scores gated by class-aware attention.
enum class WeightMode { kBaseline, kOsm, kOsmCaa };

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& s);

// All m(m-1)/2 unordered index pairs of a batch, routed by label equality.
// Pairs are stored as (i, j) with i < j in lexicographic order.
struct PairSets {
  std::vector<std::pair<int, int>> positives;
  std::vector<std::pair<int, int>> negatives;

  std::size_t total() const { return positives.size() + negatives.size(); }
};

PairSets construct_pairs(const std::vector<int>& labels);

struct MiningConfig {
  double sigma_osm = 0.8;   // bandwidth of the positive-pair Gaussian score
  double alpha = 1.2;       // margin shared with the contrastive hinge
  double sigma_caa = 0.18;  // softmax temperature of the attention scores
  // Attention consumes the same L2-normalized embeddings the distances use;
  // set false to feed it the raw pre-normalization outputs instead.
  bool caa_on_normalized = true;
};

// One learned context vector per training class; row k plays the role of a
// prototype for class k in the attention softmax.
struct ClassContext {
  Matrix vectors;  // C x D

  std::size_t num_classes() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
};

// Per-pair mining scores and combined weights for one batch.
struct PairWeights {
  std::vector<double> s_pos;       // exp(-d^2 / sigma_osm^2) per positive pair
  std::vector<double> s_neg;       // max(0, alpha - d) per negative pair
  std::vector<double> a_img;       // attention score per batch image
  std::vector<double> a_pair_pos;  // min(a_i, a_j) per positive pair
  std::vector<double> a_pair_neg;  // min(a_i, a_j) per negative pair
  std::vector<double> w_pos;       // combined weight per positive pair
  std::vector<double> w_neg;       // combined weight per negative pair
};

// Positive-pair scores: s+ = exp(-d_ij^2 / sigma_osm^2). Closer pairs score
// higher, so distant same-class pairs fade instead of contracting the
// manifold.
std::vector<double> osm_positive_scores(const DistanceMatrix& d,
                                        const PairSets& pairs,
                                        const MiningConfig& cfg);

// Negative-pair scores: s- = max(0, alpha - d_ij). Pairs beyond the margin
// get zero and drop out of loss and gradient.
std::vector<double> osm_negative_scores(const DistanceMatrix& d,
                                        const PairSets& pairs,
                                        const MiningConfig& cfg);

// Full softmax rows over class logits f_i . c_k / sigma_caa, computed with
// max-logit subtraction. Row i sums to 1.
Matrix caa_softmax(const Matrix& f, const ClassContext& ctx, double sigma_caa);

// a_i: the softmax probability of image i's own label, i.e. how compatible
// the embedding is with its labeled class. Low values flag likely outliers.
std::vector<double> caa_scores(const Matrix& f, const std::vector<int>& labels,
                               const ClassContext& ctx, const MiningConfig& cfg);

// Pair-level attention: a_ij = min(a_i, a_j).
std::vector<double> pair_caa(const std::vector<double>& a_img,
                             const std::vector<std::pair<int, int>>& pairs);

// Combines scores into pair weights for the requested ablation arm:
// kBaseline -> 1, kOsm -> s, kOsmCaa -> s * a.
PairWeights combine_weights(std::vector<double> s_pos, std::vector<double> s_neg,
                            std::vector<double> a_img, const PairSets& pairs,
                            WeightMode mode);

// Convenience: scores plus combination for one batch. `caa_input` is the
// matrix attention reads (normalized embeddings by default).
PairWeights compute_pair_weights(const Matrix& caa_input,
                                 const std::vector<int>& labels,
                                 const DistanceMatrix& d, const PairSets& pairs,
                                 const ClassContext& ctx, const MiningConfig& cfg,
                                 WeightMode mode);

}  // namespace osmcaa

#include "osmcaa/mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osmcaa/errors.hpp"

namespace osmcaa {

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::kBaseline: return "baseline";
    case WeightMode::kOsm: return "osm";
    case WeightMode::kOsmCaa: return "osm-caa";
  }
  return "?";
}

WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "baseline") return WeightMode::kBaseline;
  if (s == "osm") return WeightMode::kOsm;
  if (s == "osm-caa" || s == "osm_caa") return WeightMode::kOsmCaa;
  throw ValidationError("unknown mode '" + s + "' (expected baseline|osm|osm-caa)");
}

PairSets construct_pairs(const std::vector<int>& labels) {
  const int m = static_cast<int>(labels.size());
  if (m < 2) throw ValidationError("pair construction needs at least 2 samples");
  PairSets sets;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)])
        sets.positives.emplace_back(i, j);
      else
        sets.negatives.emplace_back(i, j);
    }
  }
  return sets;
}

std::vector<double> osm_positive_scores(const DistanceMatrix& d,
                                        const PairSets& pairs,
                                        const MiningConfig& cfg) {
  const double inv_sigma2 = 1.0 / (cfg.sigma_osm * cfg.sigma_osm);
  std::vector<double> s;
  s.reserve(pairs.positives.size());
  for (const auto& [i, j] : pairs.positives) {
    const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    s.push_back(std::exp(-dij * dij * inv_sigma2));
  }
  return s;
}

std::vector<double> osm_negative_scores(const DistanceMatrix& d,
                                        const PairSets& pairs,
                                        const MiningConfig& cfg) {
  std::vector<double> s;
  s.reserve(pairs.negatives.size());
  for (const auto& [i, j] : pairs.negatives) {
    const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    s.push_back(std::max(0.0, cfg.alpha - dij));
  }
  return s;
}

Matrix caa_softmax(const Matrix& f, const ClassContext& ctx, double sigma_caa) {
  const std::size_t m = f.rows();
  const std::size_t num_classes = ctx.num_classes();
  if (num_classes == 0) throw ValidationError("empty class context");
  if (ctx.dim() != f.cols())
    throw DimensionMismatchError("context dim " + std::to_string(ctx.dim()) +
                                 " vs embedding dim " + std::to_string(f.cols()));
  Matrix probs(m, num_classes);
  for (std::size_t i = 0; i < m; ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double z = dot(f.row(i), ctx.vectors.row(k)) / sigma_caa;
      probs(i, k) = z;
      max_logit = std::max(max_logit, z);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double e = std::exp(probs(i, k) - max_logit);
      probs(i, k) = e;
      sum += e;
    }
    for (std::size_t k = 0; k < num_classes; ++k) probs(i, k) /= sum;
  }
  return probs;
}

std::vector<double> caa_scores(const Matrix& f, const std::vector<int>& labels,
                               const ClassContext& ctx, const MiningConfig& cfg) {
  const Matrix probs = caa_softmax(f, ctx, cfg.sigma_caa);
  std::vector<double> a(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= ctx.num_classes())
      throw LabelOutOfRangeError(y, ctx.num_classes());
    a[i] = probs(i, static_cast<std::size_t>(y));
  }
  return a;
}

std::vector<double> pair_caa(const std::vector<double>& a_img,
                             const std::vector<std::pair<int, int>>& pairs) {
  std::vector<double> a;
  a.reserve(pairs.size());
  for (const auto& [i, j] : pairs)
    a.push_back(std::min(a_img[static_cast<std::size_t>(i)],
                         a_img[static_cast<std::size_t>(j)]));
  return a;
}

PairWeights combine_weights(std::vector<double> s_pos, std::vector<double> s_neg,
                            std::vector<double> a_img, const PairSets& pairs,
                            WeightMode mode) {
  PairWeights w;
  w.a_pair_pos = pair_caa(a_img, pairs.positives);
  w.a_pair_neg = pair_caa(a_img, pairs.negatives);
  w.s_pos = std::move(s_pos);
  w.s_neg = std::move(s_neg);
  w.a_img = std::move(a_img);
  w.w_pos.resize(pairs.positives.size());
  w.w_neg.resize(pairs.negatives.size());
  switch (mode) {
    case WeightMode::kBaseline:
      std::fill(w.w_pos.begin(), w.w_pos.end(), 1.0);
      std::fill(w.w_neg.begin(), w.w_neg.end(), 1.0);
      break;
    case WeightMode::kOsm:
      w.w_pos = w.s_pos;
      w.w_neg = w.s_neg;
      break;
    case WeightMode::kOsmCaa:
      for (std::size_t p = 0; p < w.w_pos.size(); ++p)
        w.w_pos[p] = w.s_pos[p] * w.a_pair_pos[p];
      for (std::size_t p = 0; p < w.w_neg.size(); ++p)
        w.w_neg[p] = w.s_neg[p] * w.a_pair_neg[p];
      break;
  }
  return w;
}

PairWeights compute_pair_weights(const Matrix& caa_input,
                                 const std::vector<int>& labels,
                                 const DistanceMatrix& d, const PairSets& pairs,
                                 const ClassContext& ctx, const MiningConfig& cfg,
                                 WeightMode mode) {
  std::vector<double> s_pos = osm_positive_scores(d, pairs, cfg);
  std::vector<double> s_neg = osm_negative_scores(d, pairs, cfg);
  // Attention is only needed when CAA participates, but the scores are cheap
  // and the inspect dump always reports them when a context is available.
  std::vector<double> a_img = caa_scores(caa_input, labels, ctx, cfg);
  return combine_weights(std::move(s_pos), std::move(s_neg), std::move(a_img),
                         pairs, mode);
}

}  // namespace osmcaa

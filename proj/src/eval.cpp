#include "osmcaa/eval.hpp"

#include <algorithm>
#include <unordered_map>

#include "osmcaa/errors.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

RetrievalResult evaluate(const Matrix& embeddings, const std::vector<int>& labels,
                         const std::vector<int>& ks) {
  const std::size_t n = embeddings.rows();
  if (ks.empty()) throw ValidationError("evaluate needs a non-empty K list");
  if (n < 2) throw ValidationError("evaluate needs at least 2 samples");

  std::unordered_map<int, std::size_t> label_counts;
  for (const int l : labels) ++label_counts[l];
  for (const auto& [label, count] : label_counts)
    if (count < 2) throw NoPositiveInGalleryError(label);

  RetrievalResult result;
  result.per_query_ranks.resize(n);
  double ap_sum = 0.0;

  // Squared distances rank identically to distances and skip the sqrt.
  std::vector<std::pair<double, int>> gallery;
  gallery.reserve(n - 1);
  for (std::size_t q = 0; q < n; ++q) {
    gallery.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      double d2 = 0.0;
      for (std::size_t t = 0; t < embeddings.cols(); ++t) {
        const double diff = embeddings(q, t) - embeddings(j, t);
        d2 += diff * diff;
      }
      gallery.emplace_back(d2, static_cast<int>(j));
    }
    std::sort(gallery.begin(), gallery.end());

    const std::size_t total_pos = label_counts[labels[q]] - 1;
    int first_rank = 0;
    std::size_t hits = 0;
    double ap = 0.0;
    for (std::size_t r = 0; r < gallery.size(); ++r) {
      if (labels[static_cast<std::size_t>(gallery[r].second)] != labels[q]) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(r + 1);
      if (first_rank == 0) first_rank = static_cast<int>(r + 1);
      if (hits == total_pos) break;
    }
    result.per_query_ranks[q] = first_rank;
    ap_sum += ap / static_cast<double>(total_pos);
  }
  result.map_score = ap_sum / static_cast<double>(n);

  for (const int k : ks) {
    if (k < 1) throw ValidationError("K values must be >= 1");
    std::size_t within = 0;
    for (const int rank : result.per_query_ranks)
      if (rank <= k) ++within;
    result.recall_at[k] = static_cast<double>(within) / static_cast<double>(n);
  }
  return result;
}

Matrix embed_dataset(const ModelParams& params, const Dataset& ds,
                     std::size_t batch_size) {
  const std::size_t n = ds.size();
  const std::size_t d_out = params.w2.rows();
  Matrix out(n, d_out);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    Matrix chunk(stop - start, ds.dim());
    for (std::size_t i = start; i < stop; ++i)
      std::copy(ds.features.row(i).begin(), ds.features.row(i).end(),
                chunk.row(i - start).begin());
    const ForwardCache cache = forward(params, chunk);
    for (std::size_t i = start; i < stop; ++i)
      std::copy(cache.embeddings.row(i - start).begin(),
                cache.embeddings.row(i - start).end(), out.row(i).begin());
  }
  return out;
}

}  // namespace osmcaa

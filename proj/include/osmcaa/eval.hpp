#pragma once

#include <map>
#include <vector>

#include "osmcaa/data.hpp"
#include "osmcaa/matrix.hpp"
#include "osmcaa/model.hpp"

namespace osmcaa {

struct RetrievalResult {
  std::map<int, double> recall_at;   // K -> fraction of queries with a
                                     // same-label hit in the top K
  double map_score = 0.0;            // mean average precision
  std::vector<int> per_query_ranks;  // 1-based rank of the first correct match
};

// Leave-one-out retrieval: every sample serves as the probe in turn and all
// other samples form its gallery, ranked by ascending Euclidean distance
// with ties broken by ascending gallery index. CMC@K is numerically the
// same quantity as Recall@K. Throws NoPositiveInGalleryError when a label
// occurs only once.
RetrievalResult evaluate(const Matrix& embeddings, const std::vector<int>& labels,
                         const std::vector<int>& ks);

// Deterministic batch-wise forward pass over a whole dataset; row order
// follows the dataset.
Matrix embed_dataset(const ModelParams& params, const Dataset& ds,
                     std::size_t batch_size = 512);

}  // namespace osmcaa

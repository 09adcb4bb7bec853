#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "osmcaa/data.hpp"
#include "osmcaa/errors.hpp"
#include "osmcaa/eval.hpp"
#include "osmcaa/numerics.hpp"
#include "osmcaa/rng.hpp"

using namespace osmcaa;

namespace {

// Independent brute-force retrieval oracle: literal definition, full sort
// of (squared distance, index) pairs, AP accumulated over positives in rank
// order. Kept free of any shared code with evaluate() beyond the matrix
// accessors.
struct OracleResult {
  std::vector<double> recall;  // aligned with ks
  double map = 0.0;
};

OracleResult oracle_retrieval(const Matrix& emb, const std::vector<int>& labels,
                              const std::vector<int>& ks) {
  const std::size_t n = emb.rows();
  OracleResult out;
  out.recall.assign(ks.size(), 0.0);
  double ap_total = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<std::pair<double, int>> order;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      double d2 = 0.0;
      for (std::size_t t = 0; t < emb.cols(); ++t) {
        const double diff = emb(q, t) - emb(j, t);
        d2 += diff * diff;
      }
      order.emplace_back(d2, static_cast<int>(j));
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) {
                       if (a.first != b.first) return a.first < b.first;
                       return a.second < b.second;
                     });
    std::size_t n_pos = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != q && labels[j] == labels[q]) ++n_pos;

    int first_hit = 0;
    std::size_t seen_pos = 0;
    double ap = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (labels[static_cast<std::size_t>(order[r].second)] == labels[q]) {
        ++seen_pos;
        ap += static_cast<double>(seen_pos) / static_cast<double>(r + 1);
        if (first_hit == 0) first_hit = static_cast<int>(r + 1);
      }
    }
    ap_total += ap / static_cast<double>(n_pos);
    for (std::size_t t = 0; t < ks.size(); ++t)
      if (first_hit > 0 && first_hit <= ks[t]) out.recall[t] += 1.0;
  }
  for (double& r : out.recall) r /= static_cast<double>(n);
  out.map = ap_total / static_cast<double>(n);
  return out;
}

}  // namespace

TEST_CASE("perfectly clustered pairs give Recall@1 = 1") {
  // two samples per class, each point's nearest neighbor is its classmate
  const Matrix emb = l2_normalize_rows(Matrix::from_rows({{1.0, 0.0, 0.01},
                                                          {1.0, 0.01, 0.0},
                                                          {0.0, 1.0, 0.01},
                                                          {0.01, 1.0, 0.0}}));
  const RetrievalResult r = evaluate(emb, {0, 0, 1, 1}, {1, 2});
  CHECK(r.recall_at.at(1) == 1.0);
  CHECK(r.recall_at.at(2) == 1.0);
  CHECK(r.map_score == 1.0);
}

TEST_CASE("AP and tie-breaks on a hand-enumerated line of points") {
  // five collinear points; query 0 sees the ranked gallery (pos, neg, pos,
  // neg), whose AP is (1/1 + 2/3) / 2 = 5/6. Queries 1 and 2 exercise the
  // ascending-index tie-break, and the mAP below is the hand-computed mean
  // of all five per-query APs.
  const Matrix emb = Matrix::from_rows({
      {0.0, 0.0},  // A
      {1.0, 0.0},  // A
      {2.0, 0.0},  // B
      {3.0, 0.0},  // A
      {4.0, 0.0},  // B
  });
  const RetrievalResult r = evaluate(emb, {0, 0, 1, 0, 1}, {1, 2, 4});
  CHECK(r.per_query_ranks[0] == 1);
  CHECK(r.per_query_ranks[1] == 1);
  CHECK(r.per_query_ranks[2] == 4);  // ties at d=1 and d=2 resolve by index
  CHECK(r.per_query_ranks[3] == 3);
  CHECK(r.per_query_ranks[4] == 2);
  const double map_by_hand =
      (5.0 / 6.0 + 5.0 / 6.0 + 1.0 / 4.0 + (1.0 / 3.0 + 2.0 / 4.0) / 2.0 + 1.0 / 2.0) /
      5.0;
  CHECK(r.map_score == doctest::Approx(map_by_hand).epsilon(1e-15));
  CHECK(r.recall_at.at(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r.recall_at.at(4) == 1.0);
}

TEST_CASE("shuffled labels land near chance-level Recall@1") {
  Rng rng(31);
  const std::size_t n = 1000;
  Matrix emb(n, 8);
  for (double& v : emb.values()) v = rng.next_normal();
  emb = l2_normalize_rows(emb);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  rng.shuffle(labels);
  const RetrievalResult r = evaluate(emb, labels, {1});
  CHECK(r.recall_at.at(1) == doctest::Approx(0.5).epsilon(0.1));  // 0.5 +- 0.05
}

TEST_CASE("evaluate matches the brute-force oracle exactly") {
  Rng rng(32);
  const std::vector<int> ks{1, 2, 4, 8, 16, 32};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.next_index(45);  // up to 50
    const std::size_t dim = 2 + rng.next_index(7);
    Matrix emb(n, dim);
    for (double& v : emb.values()) v = rng.next_normal();
    emb = l2_normalize_rows(emb);
    // every class needs at least 2 members, so cap the class count at n/2
    const int n_classes =
        2 + static_cast<int>(rng.next_index(std::min<std::uint64_t>(3, n / 2 - 1)));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<int>(i) % n_classes;
    rng.shuffle(labels);

    const RetrievalResult got = evaluate(emb, labels, ks);
    const OracleResult want = oracle_retrieval(emb, labels, ks);
    for (std::size_t t = 0; t < ks.size(); ++t)
      CHECK(got.recall_at.at(ks[t]) == want.recall[t]);  // exact, not approx
    CHECK(got.map_score == want.map);
  }
}

TEST_CASE("recall is nondecreasing in K and saturates at the gallery size") {
  Rng rng(33);
  const std::size_t n = 30;
  Matrix emb(n, 4);
  for (double& v : emb.values()) v = rng.next_normal();
  emb = l2_normalize_rows(emb);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 3);

  std::vector<int> ks;
  for (int k = 1; k <= static_cast<int>(n); ++k) ks.push_back(k);
  const RetrievalResult r = evaluate(emb, labels, ks);
  double prev = 0.0;
  for (const int k : ks) {
    CHECK(r.recall_at.at(k) >= prev);
    prev = r.recall_at.at(k);
  }
  CHECK(r.recall_at.at(static_cast<int>(n) - 1) == 1.0);  // K >= gallery size
}

TEST_CASE("a label occurring once is reported") {
  const Matrix emb = l2_normalize_rows(
      Matrix::from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}}));
  try {
    evaluate(emb, {0, 0, 7}, {1});
    FAIL("expected NoPositiveInGalleryError");
  } catch (const NoPositiveInGalleryError& e) {
    CHECK(e.label() == 7);
  }
}

TEST_CASE("embed_dataset preserves order, normalizes and is deterministic") {
  SynthConfig cfg;
  cfg.n_classes = 3;
  cfg.per_class = 40;
  cfg.dim = 6;
  const Dataset ds = generate(cfg);
  Rng rng(34);
  const ModelParams params = init_params({6, 8, 5, 3}, rng);

  const Matrix e1 = embed_dataset(params, ds, 32);  // forces several chunks
  const Matrix e2 = embed_dataset(params, ds, 7);   // ragged chunking
  CHECK(e1.rows() == ds.size());
  CHECK(e1 == e2);
  for (std::size_t i = 0; i < e1.rows(); ++i)
    CHECK(std::abs(std::sqrt(squared_norm(e1.row(i))) - 1.0) < 1e-12);

  // row order matches a direct single-batch forward
  const ForwardCache direct = forward(params, ds.features);
  CHECK(e1 == direct.embeddings);
}

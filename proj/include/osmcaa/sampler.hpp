#pragma once

#include <cstddef>
#include <vector>

#include "osmcaa/rng.hpp"

namespace osmcaa {

// Per-class sample index lists built from a label array.
struct DatasetIndex {
  std::vector<int> labels;
  std::vector<std::vector<int>> by_class;

  static DatasetIndex build(const std::vector<int>& labels);

  std::size_t num_samples() const { return labels.size(); }
  std::size_t num_classes() const { return by_class.size(); }
};

// A mini-batch holds c distinct classes with k samples each, the structure
// all pair-set counts assume.
struct BatchSpec {
  int classes_per_batch = 8;   // c
  int samples_per_class = 7;   // k
};

struct Batch {
  std::vector<int> indices;  // c*k dataset sample indices
  std::vector<int> labels;   // class id per batch slot
};

// One class-balanced batch over c classes picked uniformly at random.
// Within a class, samples are drawn without replacement when the class has
// at least k samples, with replacement otherwise.
Batch sample_batch(const DatasetIndex& index, const BatchSpec& spec, Rng& rng);

// Yields ceil(N / (c*k)) batches. Classes rotate through a shuffled
// round-robin so every class appears at least once per ceil(C/c) batches.
class EpochIterator {
 public:
  EpochIterator(const DatasetIndex& index, const BatchSpec& spec, Rng rng);

  // Fills `out` and returns true until the epoch's batch budget is spent.
  bool next(Batch& out);

  std::size_t batches_per_epoch() const { return batches_per_epoch_; }

 private:
  std::vector<int> next_classes();

  const DatasetIndex& index_;
  BatchSpec spec_;
  Rng rng_;
  std::vector<int> order_;
  std::size_t pos_ = 0;
  std::size_t emitted_ = 0;
  std::size_t batches_per_epoch_ = 0;
};

}  // namespace osmcaa

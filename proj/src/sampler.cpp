#include "osmcaa/sampler.hpp"

#include <algorithm>
#include <string>

#include "osmcaa/errors.hpp"

namespace osmcaa {
namespace {

void check_spec(const DatasetIndex& index, const BatchSpec& spec) {
  if (spec.classes_per_batch < 2 || spec.samples_per_class < 2)
    throw ValidationError("batch spec requires c >= 2 and k >= 2");
  if (index.num_classes() < static_cast<std::size_t>(spec.classes_per_batch))
    throw InsufficientClassesError(
        "dataset has " + std::to_string(index.num_classes()) +
        " classes, batch needs " + std::to_string(spec.classes_per_batch));
}

// Appends k samples of one class: a shuffled prefix when the class is large
// enough, independent draws with replacement otherwise.
void draw_class(const DatasetIndex& index, int class_id, int k, Rng& rng,
                Batch& out) {
  const auto& pool = index.by_class[static_cast<std::size_t>(class_id)];
  if (pool.size() >= static_cast<std::size_t>(k)) {
    std::vector<int> copy = pool;
    rng.shuffle(copy);
    for (int t = 0; t < k; ++t) {
      out.indices.push_back(copy[static_cast<std::size_t>(t)]);
      out.labels.push_back(class_id);
    }
  } else {
    for (int t = 0; t < k; ++t) {
      out.indices.push_back(pool[rng.next_index(pool.size())]);
      out.labels.push_back(class_id);
    }
  }
}

Batch draw_batch(const DatasetIndex& index, const BatchSpec& spec,
                 const std::vector<int>& class_ids, Rng& rng) {
  Batch batch;
  batch.indices.reserve(class_ids.size() * static_cast<std::size_t>(spec.samples_per_class));
  batch.labels.reserve(batch.indices.capacity());
  for (const int cls : class_ids)
    draw_class(index, cls, spec.samples_per_class, rng, batch);
  return batch;
}

}  // namespace

DatasetIndex DatasetIndex::build(const std::vector<int>& labels) {
  DatasetIndex index;
  index.labels = labels;
  int max_label = -1;
  for (const int l : labels) {
    if (l < 0) throw ValidationError("negative class label");
    max_label = std::max(max_label, l);
  }
  index.by_class.resize(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i)
    index.by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  for (const auto& pool : index.by_class)
    if (pool.empty()) throw ValidationError("class ids are not dense: empty class");
  return index;
}

Batch sample_batch(const DatasetIndex& index, const BatchSpec& spec, Rng& rng) {
  check_spec(index, spec);
  std::vector<int> classes(index.num_classes());
  for (std::size_t c = 0; c < classes.size(); ++c) classes[c] = static_cast<int>(c);
  rng.shuffle(classes);
  classes.resize(static_cast<std::size_t>(spec.classes_per_batch));
  return draw_batch(index, spec, classes, rng);
}

EpochIterator::EpochIterator(const DatasetIndex& index, const BatchSpec& spec,
                             Rng rng)
    : index_(index), spec_(spec), rng_(rng) {
  check_spec(index, spec);
  const std::size_t batch_size =
      static_cast<std::size_t>(spec.classes_per_batch) *
      static_cast<std::size_t>(spec.samples_per_class);
  batches_per_epoch_ = (index.num_samples() + batch_size - 1) / batch_size;
  order_.resize(index.num_classes());
  for (std::size_t c = 0; c < order_.size(); ++c) order_[c] = static_cast<int>(c);
  rng_.shuffle(order_);
}

std::vector<int> EpochIterator::next_classes() {
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(spec_.classes_per_batch));
  while (chosen.size() < static_cast<std::size_t>(spec_.classes_per_batch)) {
    if (pos_ == order_.size()) {
      rng_.shuffle(order_);
      pos_ = 0;
    }
    // A class already taken for this batch (possible right after a reshuffle)
    // is swapped deeper into the unconsumed region so it still gets its turn.
    std::size_t q = pos_;
    while (q < order_.size() &&
           std::find(chosen.begin(), chosen.end(), order_[q]) != chosen.end())
      ++q;
    if (q == order_.size()) {
      rng_.shuffle(order_);
      pos_ = 0;
      continue;
    }
    std::swap(order_[pos_], order_[q]);
    chosen.push_back(order_[pos_]);
    ++pos_;
  }
  return chosen;
}

bool EpochIterator::next(Batch& out) {
  if (emitted_ >= batches_per_epoch_) return false;
  out = draw_batch(index_, spec_, next_classes(), rng_);
  ++emitted_;
  return true;
}

}  // namespace osmcaa

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "osmcaa/matrix.hpp"
#include "osmcaa/rng.hpp"

namespace osmcaa {

struct SynthConfig {
  int n_classes = 40;
  int per_class = 60;
  int dim = 8;                       // ambient input dimension
  double cluster_spread = 0.3;       // isotropic noise sigma
  double manifold_elongation = 2.0;  // extra variance factor along one
                                     // random direction per class
  double outlier_rate = 0.0;         // fraction of samples given a wrong label
  std::uint64_t seed = 1;
  double min_mean_angle_deg = 15.0;  // minimum angular separation of means
  int max_mean_attempts = 100000;
};

struct Dataset {
  Matrix features;                 // N x dim
  std::vector<int> labels;         // observed (possibly corrupted) class ids
  std::vector<int> clean_labels;   // pre-corruption class ids
  std::vector<std::uint8_t> outlier_mask;  // 1 iff labels[i] != clean_labels[i]
  int n_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  std::size_t num_outliers() const;
};

// Class means sampled on the unit sphere with rejection until all pairwise
// angles exceed the configured minimum; samples are mean + isotropic noise
// + an elongated component along one random direction per class. Exactly
// round(outlier_rate * N) samples are then relabeled to a uniformly random
// different class. Throws MeanSeparationError when rejection exhausts the
// attempt budget.
Dataset generate(const SynthConfig& cfg);

// Relabels exactly round(rate * N) samples (chosen without replacement) to a
// uniformly random different class. Features are untouched: an outlier is a
// genuine sample wearing the wrong label.
void inject_label_noise(Dataset& ds, double rate, Rng& rng);

// Text format, one sample per line after the header:
//   osmcaa-dataset v1 <N> <dim>
//   label,clean_label,feature_0,...,feature_{dim-1}
// Features are written with shortest round-trip precision, so
// load(save(ds)) reproduces every value bit-exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Partitions classes into disjoint train/test sides (by clean label) and
// re-indexes each side's labels densely. `ordered` takes the first classes
// for training instead of a random subset. An observed label stranded on
// the other side (an outlier relabeled across the boundary) is redrawn
// uniformly among this side's other classes, keeping it a flagged outlier.
SplitResult split_by_class(const Dataset& ds, double train_class_fraction,
                           Rng& rng, bool ordered = false);

}  // namespace osmcaa

#include "osmcaa/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "osmcaa/errors.hpp"
#include "osmcaa/io_util.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

std::size_t Dataset::num_outliers() const {
  std::size_t n = 0;
  for (const auto flag : outlier_mask) n += flag;
  return n;
}

namespace {

void validate(const SynthConfig& cfg) {
  if (cfg.n_classes < 2) throw ValidationError("n_classes must be >= 2");
  if (cfg.per_class < 2) throw ValidationError("per_class must be >= 2");
  if (cfg.dim < 1) throw ValidationError("dim must be >= 1");
  if (cfg.cluster_spread <= 0.0) throw ValidationError("cluster_spread must be > 0");
  if (cfg.manifold_elongation < 0.0)
    throw ValidationError("manifold_elongation must be >= 0");
  if (cfg.outlier_rate < 0.0 || cfg.outlier_rate >= 1.0)
    throw ValidationError("outlier_rate must lie in [0, 1)");
}

std::vector<double> random_unit_vector(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.next_normal();
      norm2 += x * x;
    }
  } while (norm2 <= kEpsNorm);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

Matrix sample_separated_means(const SynthConfig& cfg, Rng& rng) {
  const double cos_limit = std::cos(cfg.min_mean_angle_deg * 3.141592653589793238462643383279502884 / 180.0);
  Matrix means(static_cast<std::size_t>(cfg.n_classes),
               static_cast<std::size_t>(cfg.dim));
  int attempts = 0;
  std::size_t accepted = 0;
  while (accepted < means.rows()) {
    if (++attempts > cfg.max_mean_attempts)
      throw MeanSeparationError(
          "could not place " + std::to_string(cfg.n_classes) +
          " class means at >= " + std::to_string(cfg.min_mean_angle_deg) +
          " degrees within " + std::to_string(cfg.max_mean_attempts) + " attempts");
    const std::vector<double> candidate = random_unit_vector(means.cols(), rng);
    bool ok = true;
    for (std::size_t k = 0; k < accepted && ok; ++k)
      ok = dot(candidate, means.row(k)) < cos_limit;
    if (!ok) continue;
    std::copy(candidate.begin(), candidate.end(), means.row(accepted).begin());
    ++accepted;
  }
  return means;
}

}  // namespace

void inject_label_noise(Dataset& ds, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ValidationError("outlier rate must lie in [0, 1)");
  if (ds.n_classes < 2) throw ValidationError("label noise needs >= 2 classes");
  const std::size_t n = ds.size();
  const std::size_t n_flip =
      static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  for (std::size_t t = 0; t < n_flip; ++t) {
    const std::size_t i = static_cast<std::size_t>(order[t]);
    const int truth = ds.clean_labels[i];
    // uniform over the other n_classes - 1 labels
    int wrong = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(ds.n_classes - 1)));
    if (wrong >= truth) ++wrong;
    ds.labels[i] = wrong;
    ds.outlier_mask[i] = 1;
  }
}

Dataset generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng master(cfg.seed);
  Rng mean_rng = master.split("means");
  Rng dir_rng = master.split("elongation-dirs");
  Rng noise_rng = master.split("noise");
  Rng outlier_rng = master.split("outliers");

  const Matrix means = sample_separated_means(cfg, mean_rng);
  const std::size_t n = static_cast<std::size_t>(cfg.n_classes) *
                        static_cast<std::size_t>(cfg.per_class);
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);

  Dataset ds;
  ds.n_classes = cfg.n_classes;
  ds.features = Matrix(n, dim);
  ds.labels.resize(n);
  ds.clean_labels.resize(n);
  ds.outlier_mask.assign(n, 0);

  std::size_t row = 0;
  for (int k = 0; k < cfg.n_classes; ++k) {
    const std::vector<double> direction = random_unit_vector(dim, dir_rng);
    for (int s = 0; s < cfg.per_class; ++s, ++row) {
      const double along = cfg.cluster_spread * cfg.manifold_elongation *
                           noise_rng.next_normal();
      for (std::size_t t = 0; t < dim; ++t)
        ds.features(row, t) = means(static_cast<std::size_t>(k), t) +
                              cfg.cluster_spread * noise_rng.next_normal() +
                              along * direction[t];
      ds.labels[row] = k;
      ds.clean_labels[row] = k;
    }
  }
  if (cfg.outlier_rate > 0.0) inject_label_noise(ds, cfg.outlier_rate, outlier_rng);
  return ds;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw FormatError(line_no, "bad numeric field '" + std::string(field) + "'");
  return v;
}

long parse_int(std::string_view field, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw FormatError(line_no, "bad integer field '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::string out;
  out.reserve(ds.size() * (ds.dim() * 20 + 8) + 64);
  out += "osmcaa-dataset v1 ";
  out += std::to_string(ds.size());
  out += ' ';
  out += std::to_string(ds.dim());
  out += '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += std::to_string(ds.labels[i]);
    out += ',';
    out += std::to_string(ds.clean_labels[i]);
    for (std::size_t t = 0; t < ds.dim(); ++t) {
      out += ',';
      append_double(out, ds.features(i, t));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw FormatError(1, "empty file");

  std::istringstream header(line);
  std::string magic, version;
  long n = 0, dim = 0;
  header >> magic >> version >> n >> dim;
  if (!header || magic != "osmcaa-dataset" || version != "v1")
    throw FormatError(1, "expected header 'osmcaa-dataset v1 <N> <dim>'");
  if (n < 1 || dim < 1) throw FormatError(1, "non-positive sample count or dimension");

  Dataset ds;
  ds.features = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(dim));
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.clean_labels.resize(static_cast<std::size_t>(n));
  ds.outlier_mask.assign(static_cast<std::size_t>(n), 0);

  int max_label = -1;
  for (long i = 0; i < n; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line))
      throw FormatError(line_no, "unexpected end of file: expected " +
                                     std::to_string(n) + " rows");
    const auto fields = split_fields(line, ',');
    if (fields.size() != static_cast<std::size_t>(dim) + 2)
      throw DimensionMismatchError(
          "row " + std::to_string(i) + " has " +
          std::to_string(static_cast<long>(fields.size()) - 2) +
          " features, expected " + std::to_string(dim));
    const std::size_t row = static_cast<std::size_t>(i);
    const long label = parse_int(fields[0], line_no);
    const long clean = parse_int(fields[1], line_no);
    if (label < 0 || clean < 0) throw FormatError(line_no, "negative class label");
    ds.labels[row] = static_cast<int>(label);
    ds.clean_labels[row] = static_cast<int>(clean);
    ds.outlier_mask[row] = ds.labels[row] != ds.clean_labels[row] ? 1 : 0;
    max_label = std::max({max_label, ds.labels[row], ds.clean_labels[row]});
    for (long t = 0; t < dim; ++t)
      ds.features(row, static_cast<std::size_t>(t)) =
          parse_double(fields[static_cast<std::size_t>(t) + 2], line_no);
  }
  ds.n_classes = max_label + 1;
  return ds;
}

SplitResult split_by_class(const Dataset& ds, double train_class_fraction,
                           Rng& rng, bool ordered) {
  if (train_class_fraction <= 0.0 || train_class_fraction >= 1.0)
    throw ValidationError("train_class_fraction must lie in (0, 1)");
  const int total = ds.n_classes;
  const int n_train =
      static_cast<int>(std::llround(train_class_fraction * static_cast<double>(total)));
  if (n_train < 2 || total - n_train < 2)
    throw InsufficientClassesError(
        "split needs >= 2 classes on each side; got " + std::to_string(n_train) +
        " train / " + std::to_string(total - n_train) + " test");

  std::vector<int> order(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) order[static_cast<std::size_t>(k)] = k;
  if (!ordered) rng.shuffle(order);

  // -1 marks "other side"; otherwise the dense new id within the side.
  std::vector<int> train_map(static_cast<std::size_t>(total), -1);
  std::vector<int> test_map(static_cast<std::size_t>(total), -1);
  std::vector<int> train_classes(order.begin(), order.begin() + n_train);
  std::vector<int> test_classes(order.begin() + n_train, order.end());
  std::sort(train_classes.begin(), train_classes.end());
  std::sort(test_classes.begin(), test_classes.end());
  for (std::size_t t = 0; t < train_classes.size(); ++t)
    train_map[static_cast<std::size_t>(train_classes[t])] = static_cast<int>(t);
  for (std::size_t t = 0; t < test_classes.size(); ++t)
    test_map[static_cast<std::size_t>(test_classes[t])] = static_cast<int>(t);

  const auto build_side = [&](const std::vector<int>& remap, int side_classes) {
    Dataset side;
    side.n_classes = side_classes;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (remap[static_cast<std::size_t>(ds.clean_labels[i])] >= 0) rows.push_back(i);
    side.features = Matrix(rows.size(), ds.dim());
    side.labels.resize(rows.size());
    side.clean_labels.resize(rows.size());
    side.outlier_mask.assign(rows.size(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t i = rows[r];
      std::copy(ds.features.row(i).begin(), ds.features.row(i).end(),
                side.features.row(r).begin());
      const int clean = remap[static_cast<std::size_t>(ds.clean_labels[i])];
      int observed = remap[static_cast<std::size_t>(ds.labels[i])];
      if (observed < 0) {
        // The corrupted label landed in the other side's class set; redraw
        // it among this side's other classes so it stays a flagged outlier.
        int wrong = static_cast<int>(
            rng.next_index(static_cast<std::uint64_t>(side_classes - 1)));
        if (wrong >= clean) ++wrong;
        observed = wrong;
      }
      side.clean_labels[r] = clean;
      side.labels[r] = observed;
      side.outlier_mask[r] = observed != clean ? 1 : 0;
    }
    return side;
  };

  SplitResult result;
  result.train = build_side(train_map, n_train);
  result.test = build_side(test_map, total - n_train);
  return result;
}

}  // namespace osmcaa

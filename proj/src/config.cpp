#include "osmcaa/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "osmcaa/errors.hpp"

namespace osmcaa {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError("key '" + key + "': bad number '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError("key '" + key + "': bad integer '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError("key '" + key + "': bad unsigned integer '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("key '" + key + "': bad boolean '" + v + "'");
}

void format_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

std::vector<int> parse_k_list(const std::string& csv) {
  std::vector<int> ks;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    ks.push_back(to_int("eval_ks", item));
    if (ks.back() < 1) throw ValidationError("eval_ks entries must be >= 1");
  }
  if (ks.empty()) throw ValidationError("eval_ks must contain at least one K");
  return ks;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") { set_seed(to_u64(key, value)); return; }

  if (key == "n_classes") { synth.n_classes = to_int(key, value); return; }
  if (key == "per_class") { synth.per_class = to_int(key, value); return; }
  if (key == "dim") { synth.dim = to_int(key, value); return; }
  if (key == "cluster_spread") { synth.cluster_spread = to_double(key, value); return; }
  if (key == "manifold_elongation") { synth.manifold_elongation = to_double(key, value); return; }
  if (key == "outlier_rate") { synth.outlier_rate = to_double(key, value); return; }
  if (key == "min_mean_angle_deg") { synth.min_mean_angle_deg = to_double(key, value); return; }

  if (key == "epochs") { train.epochs = to_int(key, value); return; }
  if (key == "classes_per_batch") { train.batch.classes_per_batch = to_int(key, value); return; }
  if (key == "samples_per_class") { train.batch.samples_per_class = to_int(key, value); return; }
  if (key == "mode") { train.mode = weight_mode_from_string(value); return; }
  if (key == "lr") { train.lr = to_double(key, value); return; }
  if (key == "momentum") { train.momentum = to_double(key, value); return; }
  if (key == "hidden_dim") { train.hidden_dim = to_int(key, value); return; }
  if (key == "embed_dim") { train.embed_dim = to_int(key, value); return; }
  if (key == "eval_every") { train.eval_every = to_int(key, value); return; }
  if (key == "eval_ks") { train.eval_ks = parse_k_list(value); return; }

  if (key == "sigma_osm") { train.mining.sigma_osm = to_double(key, value); return; }
  if (key == "sigma_caa") { train.mining.sigma_caa = to_double(key, value); return; }
  if (key == "alpha") {
    // one margin shared by the hinge score and the contrastive loss
    train.mining.alpha = to_double(key, value);
    train.loss.alpha = train.mining.alpha;
    return;
  }
  if (key == "lambda") { train.loss.lambda = to_double(key, value); return; }
  if (key == "aux_weight") { train.loss.aux_weight = to_double(key, value); return; }
  if (key == "eps_denom") { train.loss.eps_denom = to_double(key, value); return; }
  if (key == "caa_on_normalized") { train.mining.caa_on_normalized = to_bool(key, value); return; }
  if (key == "force_aux") { train.loss.force_aux = to_bool(key, value); return; }
  if (key == "aux_detach") { train.loss.aux_detach = to_bool(key, value); return; }

  if (key == "train_class_fraction") { train_class_fraction = to_double(key, value); return; }
  if (key == "ordered_split") { ordered_split = to_bool(key, value); return; }
  if (key == "train_outlier_rate") {
    train_outlier_rate = to_double(key, value);
    if (train_outlier_rate < 0.0 || train_outlier_rate >= 1.0)
      throw ValidationError("train_outlier_rate must lie in [0, 1)");
    return;
  }

  if (key == "eval_split") {
    if (value != "none" && value != "train" && value != "test")
      throw ValidationError("eval_split must be none|train|test");
    eval_split = value;
    return;
  }

  if (key == "gradcheck_instances") { gradcheck_instances = to_int(key, value); return; }
  if (key == "gradcheck_step") { gradcheck_step = to_double(key, value); return; }
  if (key == "gradcheck_tolerance") { gradcheck_tolerance = to_double(key, value); return; }

  throw ValidationError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

std::string RunConfig::echo() const {
  std::string out;
  const auto add = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  const auto add_d = [&](const std::string& key, double v) {
    std::string s;
    format_double(s, v);
    add(key, s);
  };
  add("seed", std::to_string(train.seed));
  add("n_classes", std::to_string(synth.n_classes));
  add("per_class", std::to_string(synth.per_class));
  add("dim", std::to_string(synth.dim));
  add_d("cluster_spread", synth.cluster_spread);
  add_d("manifold_elongation", synth.manifold_elongation);
  add_d("outlier_rate", synth.outlier_rate);
  add_d("min_mean_angle_deg", synth.min_mean_angle_deg);
  add("epochs", std::to_string(train.epochs));
  add("classes_per_batch", std::to_string(train.batch.classes_per_batch));
  add("samples_per_class", std::to_string(train.batch.samples_per_class));
  add("mode", to_string(train.mode));
  add_d("lr", train.lr);
  add_d("momentum", train.momentum);
  add("hidden_dim", std::to_string(train.hidden_dim));
  add("embed_dim", std::to_string(train.embed_dim));
  add("eval_every", std::to_string(train.eval_every));
  {
    std::string ks;
    for (std::size_t i = 0; i < train.eval_ks.size(); ++i) {
      if (i) ks += ',';
      ks += std::to_string(train.eval_ks[i]);
    }
    add("eval_ks", ks);
  }
  add_d("sigma_osm", train.mining.sigma_osm);
  add_d("sigma_caa", train.mining.sigma_caa);
  add_d("alpha", train.loss.alpha);
  add_d("lambda", train.loss.lambda);
  add_d("aux_weight", train.loss.aux_weight);
  add_d("eps_denom", train.loss.eps_denom);
  add("caa_on_normalized", train.mining.caa_on_normalized ? "true" : "false");
  add("force_aux", train.loss.force_aux ? "true" : "false");
  add("aux_detach", train.loss.aux_detach ? "true" : "false");
  add_d("train_class_fraction", train_class_fraction);
  add("ordered_split", ordered_split ? "true" : "false");
  add_d("train_outlier_rate", train_outlier_rate);
  add("eval_split", eval_split);
  add("gradcheck_instances", std::to_string(gradcheck_instances));
  add_d("gradcheck_step", gradcheck_step);
  add_d("gradcheck_tolerance", gradcheck_tolerance);
  return out;
}

}  // namespace osmcaa

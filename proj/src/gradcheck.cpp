#include "osmcaa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osmcaa/errors.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

Matrix params_to_flat(const ModelParams& p) {
  Matrix flat(1, p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size() +
                     p.ctx.vectors.size());
  std::size_t t = 0;
  for (const double v : p.w1.values()) flat(0, t++) = v;
  for (const double v : p.b1) flat(0, t++) = v;
  for (const double v : p.w2.values()) flat(0, t++) = v;
  for (const double v : p.b2) flat(0, t++) = v;
  for (const double v : p.ctx.vectors.values()) flat(0, t++) = v;
  return flat;
}

ModelParams flat_to_params(const Matrix& flat, const ModelDims& dims) {
  ModelParams p;
  p.w1 = Matrix(static_cast<std::size_t>(dims.hidden_dim),
                static_cast<std::size_t>(dims.input_dim));
  p.b1.resize(static_cast<std::size_t>(dims.hidden_dim));
  p.w2 = Matrix(static_cast<std::size_t>(dims.embed_dim),
                static_cast<std::size_t>(dims.hidden_dim));
  p.b2.resize(static_cast<std::size_t>(dims.embed_dim));
  p.ctx.vectors = Matrix(static_cast<std::size_t>(dims.num_classes),
                         static_cast<std::size_t>(dims.embed_dim));
  std::size_t t = 0;
  for (double& v : p.w1.values()) v = flat(0, t++);
  for (double& v : p.b1) v = flat(0, t++);
  for (double& v : p.w2.values()) v = flat(0, t++);
  for (double& v : p.b2) v = flat(0, t++);
  for (double& v : p.ctx.vectors.values()) v = flat(0, t++);
  return p;
}

Matrix grads_to_flat(const ParamTensors& g) {
  Matrix flat(1, g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size() + g.ctx.size());
  std::size_t t = 0;
  for (const double v : g.w1.values()) flat(0, t++) = v;
  for (const double v : g.b1) flat(0, t++) = v;
  for (const double v : g.w2.values()) flat(0, t++) = v;
  for (const double v : g.b2) flat(0, t++) = v;
  for (const double v : g.ctx.values()) flat(0, t++) = v;
  return flat;
}

namespace {

struct Instance {
  ModelDims dims;
  Matrix inputs;
  std::vector<int> labels;
  ModelParams params;
};

// An instance is usable for finite differences when no rectifier input,
// raw norm, pair distance or hinge boundary sits within reach of the
// perturbation, otherwise the probe would cross a kink.
bool fd_safe(const Instance& inst, double alpha) {
  ForwardCache cache;
  try {
    // a fully rectified-away sample leaves a zero raw row; reject and redraw
    cache = forward(inst.params, inst.inputs);
  } catch (const ZeroNormRowError&) {
    return false;
  }
  for (const double z : cache.pre_hidden.values())
    if (std::abs(z) < 5e-4) return false;
  for (const double n : cache.raw_norms)
    if (n < 0.2) return false;
  const DistanceMatrix d = pairwise_distances(cache.embeddings);
  const PairSets pairs = construct_pairs(inst.labels);
  for (const auto& [i, j] : pairs.positives) {
    if (d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) < 1e-3)
      return false;
  }
  for (const auto& [i, j] : pairs.negatives) {
    const double dij = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    // the hinge gradient carries a 1/d factor, so its finite-difference
    // truncation error blows up for close negatives
    if (dij < 5e-2 || std::abs(dij - alpha) < 2e-3) return false;
  }
  return true;
}

Instance make_instance(Rng rng, double alpha) {
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 200)
      throw Error("gradcheck could not find a finite-difference-safe instance");
    Rng r = rng.split("attempt." + std::to_string(attempt));
    Instance inst;
    const int m = 6 + static_cast<int>(r.next_index(11));       // 6..16
    const int max_classes = std::min(6, m / 2);
    const int num_classes = 2 + static_cast<int>(r.next_index(
                                    static_cast<std::uint64_t>(max_classes - 1)));
    inst.dims.input_dim = 4 + static_cast<int>(r.next_index(7));   // 4..10
    inst.dims.hidden_dim = 4 + static_cast<int>(r.next_index(9));  // 4..12
    inst.dims.embed_dim = 4 + static_cast<int>(r.next_index(13));  // 4..16
    inst.dims.num_classes = num_classes;

    inst.labels.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      inst.labels[static_cast<std::size_t>(i)] = i % num_classes;  // >= 2 per class
    r.shuffle(inst.labels);

    inst.inputs = Matrix(static_cast<std::size_t>(m),
                         static_cast<std::size_t>(inst.dims.input_dim));
    for (double& v : inst.inputs.values()) v = r.next_normal();
    inst.params = init_params(inst.dims, r);
    if (fd_safe(inst, alpha)) return inst;
  }
}

}  // namespace

GradCheckReport run_gradcheck(WeightMode mode, const GradCheckConfig& cfg) {
  if (cfg.instances < 1) throw ValidationError("gradcheck needs >= 1 instance");
  if (!(cfg.step > 0.0)) throw ValidationError("gradcheck step must be > 0");
  const LossConfig loss_cfg;
  const MiningConfig mining_cfg;

  GradCheckReport report;
  report.mode = mode;
  report.instances = cfg.instances;
  report.step = cfg.step;
  report.tolerance = cfg.tolerance;

  const Rng master(cfg.seed);
  for (int n = 0; n < cfg.instances; ++n) {
    const Instance inst = make_instance(
        master.split("gradcheck." + to_string(mode) + "." + std::to_string(n)),
        loss_cfg.alpha);

    const ForwardCache cache = forward(inst.params, inst.inputs);
    const LossReport base = total_loss(cache.embeddings, inst.labels,
                                       inst.params.ctx, mode, loss_cfg, mining_cfg);
    ParamTensors analytic =
        backward(inst.params, cache, base.grad_embeddings, base.grad_context);
    if (cfg.corrupt && n == 0) analytic.w1(0, 0) += 1e-3;

    const PairSets pairs = construct_pairs(inst.labels);
    const auto objective = [&](const Matrix& flat) {
      const ModelParams probe = flat_to_params(flat, inst.dims);
      const ForwardCache c = forward(probe, inst.inputs);
      return objective_with_weights(c.embeddings, inst.labels, probe.ctx, mode,
                                    loss_cfg, mining_cfg, pairs, base.weights);
    };
    const Matrix flat = params_to_flat(inst.params);
    const Matrix numeric = finite_diff_grad(objective, flat, cfg.step);
    report.max_rel_err = std::max(
        report.max_rel_err, max_relative_error(grads_to_flat(analytic), numeric));
  }
  report.pass = report.max_rel_err <= cfg.tolerance;
  return report;
}

}  // namespace osmcaa

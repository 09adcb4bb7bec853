#include "osmcaa/model.hpp"

#include <cmath>
#include <string>

#include "osmcaa/errors.hpp"
#include "osmcaa/numerics.hpp"

namespace osmcaa {

ParamTensors ParamTensors::zeros_like(const ModelParams& p) {
  ParamTensors t;
  t.w1 = Matrix(p.w1.rows(), p.w1.cols());
  t.b1.assign(p.b1.size(), 0.0);
  t.w2 = Matrix(p.w2.rows(), p.w2.cols());
  t.b2.assign(p.b2.size(), 0.0);
  t.ctx = Matrix(p.ctx.vectors.rows(), p.ctx.vectors.cols());
  return t;
}

ForwardCache forward(const ModelParams& params, const Matrix& x) {
  const std::size_t m = x.rows();
  const std::size_t d_in = params.w1.cols();
  const std::size_t hidden = params.w1.rows();
  const std::size_t d_out = params.w2.rows();
  if (x.cols() != d_in)
    throw DimensionMismatchError("input width " + std::to_string(x.cols()) +
                                 " does not match model input dim " +
                                 std::to_string(d_in));

  ForwardCache cache;
  cache.input = x;
  cache.pre_hidden = Matrix(m, hidden);
  cache.hidden = Matrix(m, hidden);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t h = 0; h < hidden; ++h) {
      const double z = dot(x.row(i), params.w1.row(h)) + params.b1[h];
      cache.pre_hidden(i, h) = z;
      cache.hidden(i, h) = z > 0.0 ? z : 0.0;
    }
  }
  cache.raw = Matrix(m, d_out);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < d_out; ++t)
      cache.raw(i, t) = dot(cache.hidden.row(i), params.w2.row(t)) + params.b2[t];

  cache.raw_norms.resize(m);
  cache.embeddings = Matrix(m, d_out);
  for (std::size_t i = 0; i < m; ++i) {
    const double norm = std::sqrt(squared_norm(cache.raw.row(i)));
    if (!(norm > kEpsNorm)) throw ZeroNormRowError(i);
    cache.raw_norms[i] = norm;
    for (std::size_t t = 0; t < d_out; ++t)
      cache.embeddings(i, t) = cache.raw(i, t) / norm;
  }
  return cache;
}

Matrix normalize_backward(const ForwardCache& cache, const Matrix& grad_embeddings) {
  const std::size_t m = cache.embeddings.rows();
  const std::size_t d = cache.embeddings.cols();
  Matrix grad_raw(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    const double radial = dot(grad_embeddings.row(i), cache.embeddings.row(i));
    const double inv_norm = 1.0 / cache.raw_norms[i];
    for (std::size_t t = 0; t < d; ++t)
      grad_raw(i, t) =
          (grad_embeddings(i, t) - radial * cache.embeddings(i, t)) * inv_norm;
  }
  return grad_raw;
}

ParamTensors backward(const ModelParams& params, const ForwardCache& cache,
                      const Matrix& grad_embeddings, const Matrix& grad_ctx,
                      const Matrix* grad_raw_extra) {
  const std::size_t m = cache.input.rows();
  const std::size_t hidden = params.w1.rows();
  const std::size_t d_out = params.w2.rows();

  Matrix grad_raw = normalize_backward(cache, grad_embeddings);
  if (grad_raw_extra) {
    for (std::size_t i = 0; i < grad_raw.size(); ++i)
      grad_raw.values()[i] += grad_raw_extra->values()[i];
  }

  ParamTensors grads = ParamTensors::zeros_like(params);
  grads.ctx = grad_ctx;

  Matrix grad_hidden(m, hidden);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < d_out; ++t) {
      const double g = grad_raw(i, t);
      grads.b2[t] += g;
      for (std::size_t h = 0; h < hidden; ++h) {
        grads.w2(t, h) += g * cache.hidden(i, h);
        grad_hidden(i, h) += g * params.w2(t, h);
      }
    }
  }

  // Rectifier derivative is 0 at exactly 0.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t h = 0; h < hidden; ++h) {
      if (cache.pre_hidden(i, h) <= 0.0) continue;
      const double g = grad_hidden(i, h);
      grads.b1[h] += g;
      for (std::size_t t = 0; t < cache.input.cols(); ++t)
        grads.w1(h, t) += g * cache.input(i, t);
    }
  }
  return grads;
}

OptimizerState OptimizerState::init(const ModelParams& p, double lr, double momentum) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ValidationError("momentum must lie in [0, 1)");
  OptimizerState s;
  s.lr = lr;
  s.momentum = momentum;
  s.velocity = ParamTensors::zeros_like(p);
  return s;
}

namespace {

void momentum_update(std::vector<double>& p, const std::vector<double>& g,
                     std::vector<double>& v, double lr, double mu) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = mu * v[i] - lr * g[i];
    p[i] += v[i];
  }
}

}  // namespace

void sgd_step(ModelParams& params, const ParamTensors& grads, OptimizerState& state) {
  momentum_update(params.w1.values(), grads.w1.values(), state.velocity.w1.values(),
                  state.lr, state.momentum);
  momentum_update(params.b1, grads.b1, state.velocity.b1, state.lr, state.momentum);
  momentum_update(params.w2.values(), grads.w2.values(), state.velocity.w2.values(),
                  state.lr, state.momentum);
  momentum_update(params.b2, grads.b2, state.velocity.b2, state.lr, state.momentum);
  momentum_update(params.ctx.vectors.values(), grads.ctx.values(),
                  state.velocity.ctx.values(), state.lr, state.momentum);
}

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = (2.0 * rng.next_double() - 1.0) * scale;
  return m;
}

}  // namespace

ModelParams init_params(const ModelDims& dims, Rng& rng) {
  if (dims.input_dim < 1 || dims.hidden_dim < 1 || dims.embed_dim < 1 ||
      dims.num_classes < 1)
    throw ValidationError("model dimensions must be positive");
  ModelParams p;
  p.w1 = uniform_matrix(static_cast<std::size_t>(dims.hidden_dim),
                        static_cast<std::size_t>(dims.input_dim),
                        1.0 / std::sqrt(static_cast<double>(dims.input_dim)), rng);
  p.b1.assign(static_cast<std::size_t>(dims.hidden_dim), 0.0);
  p.w2 = uniform_matrix(static_cast<std::size_t>(dims.embed_dim),
                        static_cast<std::size_t>(dims.hidden_dim),
                        1.0 / std::sqrt(static_cast<double>(dims.hidden_dim)), rng);
  p.b2.assign(static_cast<std::size_t>(dims.embed_dim), 0.0);
  p.ctx.vectors = uniform_matrix(
      static_cast<std::size_t>(dims.num_classes),
      static_cast<std::size_t>(dims.embed_dim),
      1.0 / std::sqrt(static_cast<double>(dims.embed_dim)), rng);
  return p;
}

}  // namespace osmcaa

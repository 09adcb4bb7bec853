#pragma once

#include <vector>

#include "osmcaa/matrix.hpp"
#include "osmcaa/mining.hpp"
#include "osmcaa/rng.hpp"

namespace osmcaa {

struct ModelDims {
  int input_dim = 32;
  int hidden_dim = 64;
  int embed_dim = 16;
  int num_classes = 2;

  bool operator==(const ModelDims&) const = default;
};

// Two-layer embedding network (input -> hidden ReLU -> output, then row-wise
// L2 normalization) plus the classification head that owns the context
// vectors. The head has no bias so attention stays a pure dot product.
struct ModelParams {
  Matrix w1;               // H x D_in
  std::vector<double> b1;  // H
  Matrix w2;               // D x H
  std::vector<double> b2;  // D
  ClassContext ctx;        // C x D

  ModelDims dims() const {
    return {static_cast<int>(w1.cols()), static_cast<int>(w1.rows()),
            static_cast<int>(w2.rows()), static_cast<int>(ctx.num_classes())};
  }
};

// Gradient (or velocity) buffers matching every parameter tensor.
struct ParamTensors {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
  Matrix ctx;

  static ParamTensors zeros_like(const ModelParams& p);
};

struct ForwardCache {
  Matrix input;                  // m x D_in
  Matrix pre_hidden;             // m x H, before the rectifier
  Matrix hidden;                 // m x H
  Matrix raw;                    // m x D, before normalization
  std::vector<double> raw_norms; // per-row norm of raw
  Matrix embeddings;             // m x D, unit rows
};

// Forward pass; the cache holds everything backward needs. Throws
// ZeroNormRowError if a pre-normalization row underflows the norm epsilon.
ForwardCache forward(const ModelParams& params, const Matrix& x);

// Exact parameter gradients for the upstream gradient with respect to the
// unit-norm embeddings, including the normalization Jacobian
// (I - f f^T) / |raw|. `grad_ctx` is the context gradient produced by the
// loss; `grad_raw_extra` (optional) is added directly to the raw-output
// gradient, used when attention reads the raw outputs.
ParamTensors backward(const ModelParams& params, const ForwardCache& cache,
                      const Matrix& grad_embeddings, const Matrix& grad_ctx,
                      const Matrix* grad_raw_extra = nullptr);

// Pulls an upstream embedding gradient back through the row normalization:
// (g - (g . f) f) / |raw| per row.
Matrix normalize_backward(const ForwardCache& cache, const Matrix& grad_embeddings);

struct OptimizerState {
  double lr = 0.001;
  double momentum = 0.9;
  ParamTensors velocity;

  static OptimizerState init(const ModelParams& p, double lr, double momentum);
};

// Classic momentum update, per tensor: v <- mu v - lr g; p <- p + v.
void sgd_step(ModelParams& params, const ParamTensors& grads, OptimizerState& state);

// Zero-mean uniform weights scaled by 1/sqrt(fan_in); zero biases; context
// rows drawn the same way with fan_in = embed_dim.
ModelParams init_params(const ModelDims& dims, Rng& rng);

}  // namespace osmcaa

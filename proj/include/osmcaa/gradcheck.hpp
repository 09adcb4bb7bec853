#pragma once

#include <cstdint>
#include <vector>

#include "osmcaa/loss.hpp"
#include "osmcaa/model.hpp"

namespace osmcaa {

struct GradCheckConfig {
  int instances = 50;
  double step = 1e-5;       // central-difference step h
  double tolerance = 1e-6;  // max allowed guarded relative error
  std::uint64_t seed = 97;
  // Negative-control hook: perturbs one analytic gradient entry so the
  // check must fail.
  bool corrupt = false;
};

struct GradCheckReport {
  WeightMode mode = WeightMode::kBaseline;
  int instances = 0;
  double step = 0.0;
  double tolerance = 0.0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Checks the analytic gradient of the full optimized scalar (weighted
// contrastive loss plus active auxiliary branch) with respect to every
// model parameter and context vector against central finite differences.
// Pair weights are computed once per instance and held frozen during the
// probes, matching their stop-gradient treatment in the backward pass.
// Instances are random but rejected when they sit too close to a rectifier,
// hinge or zero-distance kink for the step size to be trustworthy.
GradCheckReport run_gradcheck(WeightMode mode, const GradCheckConfig& cfg);

// Flattened parameter order: w1, b1, w2, b2, ctx.
Matrix params_to_flat(const ModelParams& p);
ModelParams flat_to_params(const Matrix& flat, const ModelDims& dims);
Matrix grads_to_flat(const ParamTensors& g);

}  // namespace osmcaa

#pragma once

#include <cstddef>
#include <vector>

#include "dsl/data.hpp"
#include "dsl/param_vector.hpp"
#include "dsl/rng.hpp"

namespace dsl {

enum class ModelKind { linear, mlp };

// Parameter layout, row-major:
//   linear: W (C x d_in), b (C)
//   mlp:    W1 (h x d_in), b1 (h), W2 (C x h), b2 (C); tanh hidden layer
struct ModelSpec {
  ModelKind kind = ModelKind::linear;
  std::size_t d_in = 1;
  std::size_t hidden = 0;
  int classes = 2;

  std::size_t param_dim() const;
  void validate() const;
};

// A view of selected rows of a dataset. The dataset must outlive the batch.
struct Batch {
  const Dataset* data = nullptr;
  std::vector<std::size_t> indices;
};

// Optional proximal term (mu / 2) * ||w - anchor||^2. A null anchor disables it.
struct Proximal {
  double mu = 0.0;
  const ParamVector* anchor = nullptr;
};

// Mean cross-entropy plus the proximal term. Throws NumericError on a
// non-finite result and DimensionError on mismatched shapes.
double loss(const ModelSpec& spec, const ParamVector& w, const Dataset& data,
            Proximal prox = {});
double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
            Proximal prox = {});

ParamVector grad(const ModelSpec& spec, const ParamVector& w, const Dataset& data,
                 Proximal prox = {});
ParamVector grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                 Proximal prox = {});

// Fraction of argmax-correct predictions; ties go to the lowest class index.
double accuracy(const ModelSpec& spec, const ParamVector& w, const Dataset& data);

// Uniform(-scale, scale) per coordinate.
ParamVector random_params(const ModelSpec& spec, double scale, RngStream& rng);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t probes = 0;
  bool passed = false;
};

// Compares the analytic gradient against central differences of loss() on
// `probes` random coordinates. Relative error per probe is
// |g - fd| / max(|g|, |fd|, 1e-8).
GradCheckReport finite_difference_check(const ModelSpec& spec, const ParamVector& w,
                                        const Batch& batch, Proximal prox, std::size_t probes,
                                        double step, double tolerance, RngStream& rng);

}  // namespace dsl

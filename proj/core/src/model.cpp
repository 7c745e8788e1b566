#include "dsl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dsl/error.hpp"

namespace dsl {

std::size_t ModelSpec::param_dim() const {
  const auto C = static_cast<std::size_t>(classes);
  if (kind == ModelKind::linear) return d_in * C + C;
  return d_in * hidden + hidden + hidden * C + C;
}

void ModelSpec::validate() const {
  if (d_in < 1) throw ConfigError("model.d_in: must be >= 1");
  if (classes < 1) throw ConfigError("model.classes: must be >= 1");
  if (kind == ModelKind::mlp && hidden < 1) throw ConfigError("model.hidden: must be >= 1");
}

namespace {

void check_shapes(const ModelSpec& spec, const ParamVector& w, const Dataset& data) {
  if (w.size() != spec.param_dim()) {
    throw DimensionError("model: parameter vector has " + std::to_string(w.size()) +
                         " entries, spec needs " + std::to_string(spec.param_dim()));
  }
  if (!data.empty() && data.dim() != spec.d_in) {
    throw DimensionError("model: data has " + std::to_string(data.dim()) +
                         " features, spec expects " + std::to_string(spec.d_in));
  }
}

// Forward pass for one sample. Leaves softmax probabilities in z (and tanh
// activations in h for the MLP) and returns the cross-entropy for label y.
double forward(const ModelSpec& spec, const double* w, std::span<const double> x, int y,
               std::vector<double>& h, std::vector<double>& z) {
  const std::size_t d = spec.d_in;
  const auto C = static_cast<std::size_t>(spec.classes);
  const double* in = x.data();
  std::size_t in_dim = d;
  const double* W_out = w;
  if (spec.kind == ModelKind::mlp) {
    const std::size_t H = spec.hidden;
    const double* W1 = w;
    const double* b1 = w + H * d;
    for (std::size_t k = 0; k < H; ++k) {
      double a = b1[k];
      const double* row = W1 + k * d;
      for (std::size_t j = 0; j < d; ++j) a += row[j] * in[j];
      h[k] = std::tanh(a);
    }
    in = h.data();
    in_dim = H;
    W_out = w + H * d + H;
  }
  const double* b_out = W_out + C * in_dim;
  double zmax = -INFINITY;
  for (std::size_t c = 0; c < C; ++c) {
    double a = b_out[c];
    const double* row = W_out + c * in_dim;
    for (std::size_t j = 0; j < in_dim; ++j) a += row[j] * in[j];
    z[c] = a;
    zmax = std::max(zmax, a);
  }
  const double logit_y = z[static_cast<std::size_t>(y)];
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    z[c] = std::exp(z[c] - zmax);
    sum += z[c];
  }
  for (std::size_t c = 0; c < C; ++c) z[c] /= sum;
  return zmax + std::log(sum) - logit_y;
}

template <class IndexAt>
double evaluate(const ModelSpec& spec, const ParamVector& w, const Dataset& data,
                std::size_t count, IndexAt index_at, ParamVector* g) {
  check_shapes(spec, w, data);
  if (count == 0) throw DimensionError("model: empty batch");
  const std::size_t d = spec.d_in;
  const auto C = static_cast<std::size_t>(spec.classes);
  const std::size_t H = spec.hidden;
  std::vector<double> h(spec.kind == ModelKind::mlp ? H : 0);
  std::vector<double> z(C);
  std::vector<double> dh(h.size());
  if (g) *g = ParamVector(w.size(), 0.0);
  const double* wp = w.values().data();

  double total = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t i = index_at(s);
    const auto x = data.row(i);
    const int y = data.label(i);
    total += forward(spec, wp, x, y, h, z);
    if (!g) continue;

    double* gp = g->values().data();
    z[static_cast<std::size_t>(y)] -= 1.0;  // dL/dlogits
    if (spec.kind == ModelKind::linear) {
      double* gW = gp;
      double* gb = gp + C * d;
      for (std::size_t c = 0; c < C; ++c) {
        const double dz = z[c];
        double* row = gW + c * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += dz * x[j];
        gb[c] += dz;
      }
    } else {
      const double* W2 = wp + H * d + H;
      double* gW1 = gp;
      double* gb1 = gp + H * d;
      double* gW2 = gp + H * d + H;
      double* gb2 = gW2 + C * H;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t c = 0; c < C; ++c) {
        const double dz = z[c];
        double* row = gW2 + c * H;
        const double* wrow = W2 + c * H;
        for (std::size_t k = 0; k < H; ++k) {
          row[k] += dz * h[k];
          dh[k] += dz * wrow[k];
        }
        gb2[c] += dz;
      }
      for (std::size_t k = 0; k < H; ++k) {
        const double da = dh[k] * (1.0 - h[k] * h[k]);
        double* row = gW1 + k * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += da * x[j];
        gb1[k] += da;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  if (g) *g *= inv;
  const double mean = total * inv;
  if (!std::isfinite(mean)) throw NumericError("model: non-finite cross-entropy");
  return mean;
}

double add_proximal(const ParamVector& w, Proximal prox, double value, ParamVector* g) {
  if (prox.anchor == nullptr || prox.mu == 0.0) return value;
  require_same_dim(w, *prox.anchor, "proximal anchor");
  double sq = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double diff = w[k] - (*prox.anchor)[k];
    sq += diff * diff;
    if (g) (*g)[k] += prox.mu * diff;
  }
  return value + 0.5 * prox.mu * sq;
}

void check_batch(const Batch& batch) {
  if (batch.data == nullptr) throw DimensionError("model: batch without dataset");
  for (std::size_t i : batch.indices) {
    if (i >= batch.data->size()) throw DimensionError("model: batch index out of range");
  }
}

}  // namespace

double loss(const ModelSpec& spec, const ParamVector& w, const Dataset& data, Proximal prox) {
  const double ce = evaluate(spec, w, data, data.size(), [](std::size_t s) { return s; }, nullptr);
  return add_proximal(w, prox, ce, nullptr);
}

double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch, Proximal prox) {
  check_batch(batch);
  const double ce = evaluate(spec, w, *batch.data, batch.indices.size(),
                             [&](std::size_t s) { return batch.indices[s]; }, nullptr);
  return add_proximal(w, prox, ce, nullptr);
}

ParamVector grad(const ModelSpec& spec, const ParamVector& w, const Dataset& data,
                 Proximal prox) {
  ParamVector g;
  evaluate(spec, w, data, data.size(), [](std::size_t s) { return s; }, &g);
  add_proximal(w, prox, 0.0, &g);
  g.require_finite("model gradient");
  return g;
}

ParamVector grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                 Proximal prox) {
  check_batch(batch);
  ParamVector g;
  evaluate(spec, w, *batch.data, batch.indices.size(),
           [&](std::size_t s) { return batch.indices[s]; }, &g);
  add_proximal(w, prox, 0.0, &g);
  g.require_finite("model gradient");
  return g;
}

double accuracy(const ModelSpec& spec, const ParamVector& w, const Dataset& data) {
  check_shapes(spec, w, data);
  if (data.empty()) return 0.0;
  const auto C = static_cast<std::size_t>(spec.classes);
  std::vector<double> h(spec.kind == ModelKind::mlp ? spec.hidden : 0);
  std::vector<double> z(C);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(spec, w.values().data(), data.row(i), data.label(i), h, z);
    // First maximum wins, so ties resolve to the lowest class index.
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == static_cast<std::size_t>(data.label(i))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ParamVector random_params(const ModelSpec& spec, double scale, RngStream& rng) {
  ParamVector w(spec.param_dim());
  for (double& x : w) x = rng.uniform(-scale, scale);
  return w;
}

GradCheckReport finite_difference_check(const ModelSpec& spec, const ParamVector& w,
                                        const Batch& batch, Proximal prox, std::size_t probes,
                                        double step, double tolerance, RngStream& rng) {
  const ParamVector g = grad(spec, w, batch, prox);
  GradCheckReport report;
  ParamVector probe = w;
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t k = rng.index(w.size());
    probe[k] = w[k] + step;
    const double up = loss(spec, probe, batch, prox);
    probe[k] = w[k] - step;
    const double down = loss(spec, probe, batch, prox);
    probe[k] = w[k];
    const double fd = (up - down) / (2.0 * step);
    const double rel = std::abs(g[k] - fd) / std::max({std::abs(g[k]), std::abs(fd), 1e-8});
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.probes;
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace dsl

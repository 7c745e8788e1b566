#include "dsl/channel.hpp"

#include <algorithm>
#include <cmath>

#include "dsl/error.hpp"

namespace dsl {

void ChannelModel::validate() const {
  if (!(noise_var >= 0.0)) throw ConfigError("channel.noise_var: must be >= 0");
  if (!(p_max > 0.0)) throw ConfigError("channel.p_max: must be > 0");
  if (!(h_min >= 0.0)) throw ConfigError("channel.h_min: must be >= 0");
}

PowerDecision power_control(PowerPolicy policy, double gain, double p_max, double h_min) {
  if (!(gain > 0.0)) return {0.0, false};
  if (gain < h_min) return {0.0, false};
  if (policy == PowerPolicy::bev_max) return {p_max, true};
  return {std::min(1.0 / gain, p_max), true};
}

int ChannelRealization::num_included() const {
  return static_cast<int>(std::count(included.begin(), included.end(), char{1}));
}

double sample_gain(const ChannelModel& model, RngStream& rng) {
  if (model.is_ideal()) return 1.0;
  const double x = rng.normal();
  const double y = rng.normal();
  return std::sqrt(x * x + y * y) / std::sqrt(2.0);
}

std::vector<double> sample_gains(const ChannelModel& model, std::span<const int> ids,
                                 std::uint64_t seed, int round) {
  std::vector<double> gains;
  gains.reserve(ids.size());
  for (int id : ids) {
    RngStream rng(seed, "gain", static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(round));
    gains.push_back(sample_gain(model, rng));
  }
  return gains;
}

ChannelRealization realize_channel(const ChannelModel& model, std::span<const int> ids,
                                   std::span<const double> gains) {
  ChannelRealization r;
  r.ids.assign(ids.begin(), ids.end());
  r.gains.assign(gains.begin(), gains.end());
  r.powers.assign(ids.size(), 0.0);
  r.included.assign(ids.size(), 0);

  if (model.is_ideal()) {
    std::fill(r.gains.begin(), r.gains.end(), 1.0);
    std::fill(r.powers.begin(), r.powers.end(), 1.0);
    std::fill(r.included.begin(), r.included.end(), char{1});
    return r;
  }

  double eta = 1.0;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const PowerDecision d = power_control(model.policy, gains[k], model.p_max, model.h_min);
    r.powers[k] = d.power;
    r.included[k] = d.included ? 1 : 0;
    if (d.included) eta = std::min(eta, model.p_max * gains[k]);
  }
  if (model.policy == PowerPolicy::inversion) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!r.included[k]) continue;
      // Common alignment: every included product p h equals eta.
      r.powers[k] = eta < 1.0 ? eta / gains[k] : 1.0 / gains[k];
    }
  }
  return r;
}

OtaResult ota_aggregate(std::span<const Contribution> contributions, double noise_var,
                        RngStream& rng) {
  OtaResult out;
  for (const auto& c : contributions) {
    if (!c.included) continue;
    if (c.w == nullptr) throw DimensionError("ota_aggregate: included contribution without model");
    if (out.w_global.empty()) {
      out.w_global = ParamVector(c.w->size(), 0.0);
    } else {
      require_same_dim(out.w_global, *c.w, "ota_aggregate");
    }
    out.w_global.axpy(c.power * c.gain, *c.w);
    out.receive_scale += c.power * c.gain;
    ++out.s_eff;
  }
  if (out.s_eff == 0) throw AggregationError("ota_aggregate: no included contributions");
  if (!(out.receive_scale > 0.0)) throw AggregationError("ota_aggregate: zero receive scale");

  if (noise_var > 0.0) {
    const double sd = std::sqrt(noise_var);
    for (double& x : out.w_global) x += rng.normal(0.0, sd);
  }
  out.w_global *= 1.0 / out.receive_scale;
  out.w_global.require_finite("ota_aggregate");
  return out;
}

}  // namespace dsl

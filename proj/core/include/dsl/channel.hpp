#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsl/param_vector.hpp"
#include "dsl/rng.hpp"

namespace dsl {

enum class ChannelKind { ideal, rayleigh };
enum class PowerPolicy { inversion, bev_max };

// Block-fading uplink: one real gain per worker per round, shared by every
// coordinate of the transmitted vector.
struct ChannelModel {
  ChannelKind kind = ChannelKind::ideal;
  double noise_var = 0.0;  // per-coordinate receiver noise variance
  double p_max = 1.0;      // per-worker transmit amplitude cap
  double h_min = 0.0;      // truncation threshold on the gain
  PowerPolicy policy = PowerPolicy::inversion;

  bool is_ideal() const { return kind == ChannelKind::ideal; }
  void validate() const;
};

struct PowerDecision {
  double power = 0.0;
  bool included = false;
};

// Per-worker decision before alignment.
//   inversion: excluded if h < h_min, else p = min(1/h, p_max)
//   bev_max:   p = p_max, included iff h >= h_min
PowerDecision power_control(PowerPolicy policy, double gain, double p_max, double h_min);

struct ChannelRealization {
  std::vector<int> ids;
  std::vector<double> gains;
  std::vector<double> powers;
  std::vector<char> included;

  std::size_t size() const { return ids.size(); }
  int num_included() const;
};

// Rayleigh: h = sqrt(x^2 + y^2) / sqrt(2), x, y ~ N(0, 1), so E[h^2] = 1.
// Ideal: h = 1.
double sample_gain(const ChannelModel& model, RngStream& rng);

// Gains for `ids` in round `round`, each from stream (seed, "gain", id, round).
std::vector<double> sample_gains(const ChannelModel& model, std::span<const int> ids,
                                 std::uint64_t seed, int round);

// Gains plus power control. Under inversion, if any included worker is capped
// every included power is rescaled by eta = min_i min(p_max h_i, 1) so all
// products p_i h_i equal eta. The ideal channel includes everyone at p = 1.
ChannelRealization realize_channel(const ChannelModel& model, std::span<const int> ids,
                                   std::span<const double> gains);

struct Contribution {
  const ParamVector* w = nullptr;
  double gain = 1.0;
  double power = 1.0;
  bool included = true;
};

struct OtaResult {
  ParamVector w_global;
  int s_eff = 0;
  double receive_scale = 0.0;  // sum of p_i h_i over included contributions
};

// Superposes p_i h_i w_i over the included contributions, adds N(0, noise_var)
// per coordinate, and divides by sum_i p_i h_i (S_eff under exact inversion).
// Throws AggregationError when nothing is included.
OtaResult ota_aggregate(std::span<const Contribution> contributions, double noise_var,
                        RngStream& rng);

}  // namespace dsl

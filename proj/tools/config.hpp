#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvcluster/chain.hpp"
#include "cvcluster/lattice.hpp"
#include "cvcluster/pumpsynth.hpp"

namespace cvc::cli {

/// Everything a run needs. Pump strengths are given as g / g_3dB; the tone
/// amplitude is ratio * r_3dB / tau so that g*tau = ratio * r_3dB.
struct RunConfig {
  LatticeSpec lattice{LatticeKind::square, 25, 5};
  std::optional<int> pi_tone;
  CombGrid comb;
  std::vector<double> pump_ratios{0.19};
  double tau = 1.0;
  double eta = 1.0;
  std::int64_t windows = 0;
  ChainConfig chain;
  int theta_points = 180;
  double threshold = 0.5;
  int jackknife_blocks = 10;
  bool project = true;
  int workers = 1;
  std::string output_dir = "out";

  /// Throws invalid_spec / invalid_argument before any work starts.
  void validate() const;

  double amplitude_for(double ratio) const;
  double g_tau_for(double ratio) const;
  PumpScheme scheme_for_ratio(double ratio) const;

  /// Result-relevant fields only (no output_dir, no workers), keys in fixed order.
  std::string canonical_json() const;
  std::string hash() const;
};

RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

}  // namespace cvc::cli

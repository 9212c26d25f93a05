#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvcluster/lattice.hpp"

namespace cvc {

/// One coherent pump component at 2*f0 + k*spacing.
struct PumpTone {
  int k = 0;
  double amplitude = 0.0;  // dimensionless, >= 0
  double phase = 0.0;      // radians, wrapped to [0, 2pi)

  bool operator==(const PumpTone&) const = default;
};

struct PumpScheme {
  std::vector<PumpTone> tones;
  ModeBasis basis;
  LatticeSpec target;

  /// Distinct offsets, non-negative amplitudes, basis kind matching the target.
  void validate() const;

  bool operator==(const PumpScheme&) const = default;
};

/// Center and spacing of the measurement comb.
struct CombGrid {
  double center_hz = 4.2e9;
  double spacing_hz = 1.0e6;
};

/// Four equal tones at k = +-1, +-N_x; the k = -N_x tone carries phase pi.
PumpScheme square_scheme(int n, int n_x, double g, const CombGrid& grid = {});

/// Three equal tones at k = +1, -1, N_x - 1 with phase pi on `pi_tone`
/// (defaults to N_x - 1). The comb center is moved half a spacing up when
/// 2*f0/spacing would otherwise be even.
PumpScheme honeycomb_scheme(int n, int n_x, double g, std::optional<int> pi_tone = std::nullopt,
                            const CombGrid& grid = {});

/// One tone at k = 0 pairing m with -m.
PumpScheme single_pump_scheme(int n, double g, const CombGrid& grid = {});

PumpScheme scheme_for(const LatticeSpec& spec, double g, std::optional<int> pi_tone = std::nullopt,
                      const CombGrid& grid = {});

/// g_p(t) = sum_k g_k cos(Omega_k t + phi_k), t in seconds, Omega_k in rad/s.
double pump_waveform(const PumpScheme& scheme, double t);

/// First-order pairing graph: i ~ j iff f_i + f_j equals some tone with g_k > 0.
AdjacencyMatrix expected_adjacency(const PumpScheme& scheme);

/// Same support as `expected_adjacency`, with the sign a weak pump imprints
/// on the extracted adjacency at theta = 0: sign(-Re G_ij).
AdjacencyMatrix signed_expected_adjacency(const PumpScheme& scheme);

std::string scheme_to_json(const PumpScheme& scheme);
PumpScheme scheme_from_json(const std::string& text);

double wrap_phase(double phase);

}  // namespace cvc

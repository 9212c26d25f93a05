#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cvcluster/gaussian.hpp"

namespace cvc {

inline constexpr double kHbar = 1.054571817e-34;  // J s

/// Synthetic amplification chain: input-referred added noise, power gain,
/// photon -> volt conversion and a linear-in-frequency phase delay.
struct ChainConfig {
  /// Added noise photons per mode (n_add/2 lands on each quadrature). A single
  /// value applies to every mode.
  std::vector<double> added_noise_photons{14.0};
  double gain_db = 0.0;
  double z_c = 50.0;               // ohm
  double tau_d_rad_per_mhz = 1.89;
  std::uint64_t seed = 1;

  void validate(int n_modes) const;
  double noise_for_row(int row) const;
  double gain_linear() const;
};

/// Windows are generated and consumed in blocks of this many rows.
inline constexpr std::int64_t kWindowBlock = 4096;

/// M demodulated windows, one row per window, mode-interleaved (x1, p1, ...) in volts.
struct WindowSamples {
  ModeBasis basis;
  Matrix data;

  std::int64_t n_windows() const { return data.rows(); }
  int n_modes() const { return static_cast<int>(data.cols() / 2); }
};

/// sqrt(Z_c hbar Delta omega_i) per mode row, with angular Delta and omega.
Vector photon_volt_scale(const ModeBasis& basis, double z_c);

/// V_ij * Z_c hbar Delta sqrt(omega_i omega_j).
CovarianceMatrix photon_to_volts(const CovarianceMatrix& cov_photons, const ModeBasis& basis,
                                 double z_c);
CovarianceMatrix volts_to_photons(const CovarianceMatrix& cov_volts, const ModeBasis& basis,
                                  double z_c);

/// theta_i = tau_d * (f_i - f0) with tau_d in rad/MHz.
std::vector<double> delay_phases(const ModeBasis& basis, double tau_d_rad_per_mhz);

/// Covariance (volts^2, mode-interleaved) that the chain imprints on the samples.
CovarianceMatrix chain_covariance(const GaussianState& state, const ChainConfig& cfg);

/// Deterministic block generator of chain output windows.
///
/// Each window is L z with z ~ N(0, I) drawn from mt19937_64(seed) in window
/// order and L the lower Cholesky factor of `chain_covariance`, so the stream
/// does not depend on the block size used to consume it.
class WindowGenerator {
 public:
  WindowGenerator(const GaussianState& state, std::int64_t n_windows, const ChainConfig& cfg);

  int dimension() const { return static_cast<int>(factor_.rows()); }
  std::int64_t total() const { return total_; }
  std::int64_t remaining() const { return total_ - produced_; }
  const ModeBasis& basis() const { return basis_; }
  const CovarianceMatrix& target() const { return target_; }

  /// Writes up to `max_rows` windows into `block` (resized); returns rows written.
  std::int64_t next_block(Matrix& block, std::int64_t max_rows = kWindowBlock);

 private:
  ModeBasis basis_;
  CovarianceMatrix target_;
  Matrix factor_;
  Vector mean_;
  std::int64_t total_ = 0;
  std::int64_t produced_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Matrix z_;
  Matrix chunk_;
  std::int64_t chunk_pos_ = 0;
  std::int64_t generated_ = 0;

  void refill();
};

WindowSamples sample_windows(const GaussianState& state, std::int64_t n_windows,
                             const ChainConfig& cfg);

}  // namespace cvc

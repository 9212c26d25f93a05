#pragma once

#include <cstdint>
#include <vector>

#include "cvcluster/chain.hpp"
#include "cvcluster/gaussian.hpp"

namespace cvc {

/// One-pass mean / co-moment accumulator (Welford update, Chan merge).
///
/// Blocks are reduced with a centered Gram product and merged, so feeding a
/// stream window-by-window, block-by-block or across merged workers gives the
/// same result up to floating-point reassociation.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dimension = 0);

  int dimension() const { return static_cast<int>(mean_.size()); }
  std::int64_t count() const { return count_; }
  const Vector& mean() const { return mean_; }

  void add(const Eigen::Ref<const Vector>& window);
  /// Rows are windows.
  void add_block(const Eigen::Ref<const Matrix>& windows);
  void merge(const CovarianceAccumulator& other);

  /// Full symmetric co-moment sum_w (q_w - mean)(q_w - mean)^T.
  Matrix comoment() const;
  /// Unbiased sample covariance comoment / (n - 1). Requires n >= 2.
  Matrix covariance() const;

 private:
  std::int64_t count_ = 0;
  Vector mean_;
  Matrix lower_;  // lower triangle of the co-moment
};

/// Per-mode calibration of the amplification chain.
struct CalibrationRecord {
  std::vector<double> gain_db;
  std::vector<double> added_noise_photons;
  double tau_d_rad_per_mhz = 0.0;

  void validate(int n_modes) const;
  double gain_linear(int row) const;
};

CalibrationRecord calibration_from_chain(const ChainConfig& cfg, int n_modes);

/// Raw chain covariance in photon units: sample covariance / (Z_c hbar Delta sqrt(w_i w_j)).
CovarianceMatrix estimate_covariance(const CovarianceAccumulator& acc, const ModeBasis& basis,
                                     double z_c);
CovarianceMatrix estimate_covariance(const WindowSamples& samples, double z_c);

/// Undo the chain delay: per-mode rotation by -tau_d (f_i - f0).
CovarianceMatrix apply_phase_correction(const CovarianceMatrix& cov, double tau_d_rad_per_mhz,
                                        const ModeBasis& basis);

/// Element-wise division by sqrt(G_i G_j) of the per-mode linear gains.
CovarianceMatrix divide_gain(const CovarianceMatrix& cov, const CalibrationRecord& calib);

/// Subtracts n_add/2 from both quadrature variances of every mode; nothing
/// else is touched. Expects a gain-divided covariance. Rows whose variance
/// went negative are appended to `over_subtracted` when given.
CovarianceMatrix subtract_added_noise(const CovarianceMatrix& cov, const CalibrationRecord& calib,
                                      std::vector<int>* over_subtracted = nullptr);

/// Phase correction, gain division and noise subtraction in that order.
CovarianceMatrix correct_chain(const CovarianceMatrix& raw, const CalibrationRecord& calib,
                               const ModeBasis& basis);

struct ProjectionOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

struct ProjectionResult {
  CovarianceMatrix cov;
  int iterations = 0;
  bool changed = false;
  double distance = 0.0;          // ||V* - V||_F
  double min_symplectic = 0.0;    // of the output
};

/// Nearest (Frobenius) covariance satisfying V + (i/2) Omega >= 0, via Dykstra's
/// alternating projections between the PSD cone of Hermitian matrices and the
/// affine set {Re symmetric, Im = Omega/2}. Physical inputs are returned as is.
ProjectionResult project_physical(const CovarianceMatrix& cov, const ProjectionOptions& opts = {});

}  // namespace cvc

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvcluster/gaussian.hpp"
#include "cvcluster/lattice.hpp"

namespace cvc {

/// (A, U) read off a covariance in graphical form:
///   U = (V_xx)^-1 / 2,   A = 2 U V_xp  (then symmetrized).
struct AUExtraction {
  Matrix a;
  Matrix u;
  double condition_number = 0.0;  // of V_xx
  double asymmetry = 0.0;         // max |A - A^T| before symmetrization
  bool regularized = false;
  double ridge = 0.0;
};

/// Condition numbers of V_xx above this switch to a ridge-regularized inverse.
inline constexpr double kMaxExtractionCondition = 1e10;

AUExtraction extract_AU(const CovarianceMatrix& cov);

/// Entries with |A_ij| >= threshold * max|A| become sign(A_ij); the rest and the
/// diagonal become 0.
AdjacencyMatrix normalize_adjacency(const Matrix& weighted, double threshold,
                                    OffsetKind labeling);

struct NullifierReport {
  std::vector<double> variances;   // Delta N_i^2
  std::vector<double> references;  // vacuum Delta N_{i,0}^2 = (1 + sum_j A_ij^2) / 2
  std::vector<double> normalized;
  double mean_normalized = 0.0;
  double db = 0.0;
  double theta = 0.0;              // global rotation the report was evaluated at
  /// Jackknife over window blocks; only set when samples were available.
  std::optional<double> standard_error;
  std::optional<double> sigmas_below_vacuum;
};

/// Nullifiers N_i = p_i - sum_j A_ij x_j. `a` may be weighted.
NullifierReport nullifier_variances(const CovarianceMatrix& cov, const Matrix& a);
NullifierReport nullifier_variances(const CovarianceMatrix& cov, const AdjacencyMatrix& a);

/// `points` equally spaced angles covering [0, pi).
std::vector<double> theta_grid(int points);

struct SweepResult {
  std::vector<double> thetas;
  std::vector<double> values;  // mean normalized nullifier variance per angle
  double grid_argmin = 0.0;
  /// The mean normalized variance is exactly P + Q cos 2theta + R sin 2theta;
  /// theta_opt in [0, pi) and min_value are its closed-form minimum.
  double theta_opt = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

SweepResult nullifier_sweep(const CovarianceMatrix& cov, const Matrix& a,
                            const std::vector<double>& thetas);
SweepResult nullifier_sweep(const CovarianceMatrix& cov, const AdjacencyMatrix& a,
                            const std::vector<double>& thetas);

/// 10 log10(value); throws invalid_argument for value <= 0.
double squeezing_db(double normalized_variance);

/// Off-diagonal offsets of U where hidden correlations are expected:
/// square {+-2, +-2 N_x}, honeycomb {+-2, +-(N_x - 2), +-N_x}. Duplicates and 0 dropped.
std::vector<int> her_offsets(LatticeKind kind, int n_x);

struct HERReport {
  double value = 0.0;
  std::vector<int> offsets;
  std::vector<double> contributions;  // per offset, same order
  LatticeKind kind = LatticeKind::square;
  int n_x = 0;
};

/// HER = sum_{k in K} sum_i (N / N_k) |U_{i,i+k}| / Tr U with N_k = N - |k|.
HERReport her(const Matrix& u, int n_x, LatticeKind kind);
HERReport her(const Matrix& u, const std::vector<int>& offsets);

/// Entry (row, col) of a quadrature-blocked 2N x 2N covariance.
struct CovPosition {
  int row = 0;
  int col = 0;
  bool operator==(const CovPosition&) const = default;
};

/// V_xp entries (i, N + j) for every target edge, both orientations.
std::vector<CovPosition> canonical_positions(const AdjacencyMatrix& target);

/// V_xx entries (i, i + k) for k in the HER offset set (k > 0) that are not
/// target edges.
std::vector<CovPosition> hidden_positions(const AdjacencyMatrix& target, LatticeKind kind, int n_x);

/// mean |V| over hidden positions divided by mean |V| over canonical positions.
double canonical_hidden_ratio(const CovarianceMatrix& cov,
                              const std::vector<CovPosition>& canonical,
                              const std::vector<CovPosition>& hidden);

struct JackknifeEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double sigmas_below_vacuum = 0.0;  // (1 - value) / standard_error
};

/// Delete-one jackknife of the mean normalized nullifier at angle `theta` over
/// equally sized window-block covariances.
JackknifeEstimate nullifier_jackknife(const std::vector<CovarianceMatrix>& block_covs,
                                      const Matrix& a, double theta);

}  // namespace cvc

#pragma once

#include <vector>

#include "cvcluster/lattice.hpp"
#include "cvcluster/pumpsynth.hpp"
#include "cvcluster/types.hpp"

namespace cvc {

/// Quadrature ordering of a 2N phase-space vector.
///   mode_interleaved:   (x1, p1, x2, p2, ..., xN, pN)
///   quadrature_blocked: (x1, ..., xN, p1, ..., pN)
enum class Ordering { mode_interleaved, quadrature_blocked };

std::string to_string(Ordering ordering);
Ordering ordering_from_string(const std::string& name);

/// Symmetric 2N x 2N covariance in photon-number units ([x, p] = i, vacuum = I/2).
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  /// Throws invalid_argument unless `entries` is square, even-sized, finite and
  /// symmetric to 1e-12 relative; the stored matrix is exactly symmetrized.
  CovarianceMatrix(Matrix entries, Ordering ordering);

  int n_modes() const { return static_cast<int>(entries_.rows() / 2); }
  Ordering ordering() const { return ordering_; }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// Index of x_mode / p_mode in this ordering.
  int x_index(int mode) const;
  int p_index(int mode) const;

  CovarianceMatrix reordered(Ordering target) const;

  Matrix xx() const;
  Matrix xp() const;
  Matrix pp() const;

 private:
  Matrix entries_;
  Ordering ordering_ = Ordering::quadrature_blocked;
};

struct GaussianState {
  CovarianceMatrix cov;
  Vector mean;
  ModeBasis basis;
};

/// Symplectic form Omega for N modes in the given ordering ([r_a, r_b] = i Omega_ab).
Matrix symplectic_form(int n_modes, Ordering ordering);

/// Permutation P with r_target = P r_source.
Matrix ordering_permutation(int n_modes, Ordering source, Ordering target);

GaussianState vacuum(const ModeBasis& basis, Ordering ordering = Ordering::quadrature_blocked);
GaussianState vacuum(int n_modes);

/// Thermal state with mean occupation `nbar` in every mode: V = (nbar + 1/2) I.
GaussianState thermal(const ModeBasis& basis, double nbar);

/// G_ij = sum_k g_k exp(i phi_k) [f_i + f_j = 2 f0 + k spacing], i != j.
CMatrix coupling_matrix(const PumpScheme& scheme);

/// Hamiltonian flow matrix K (quadrature-blocked) of
/// H = 1/2 sum_ij (G_ij a_i^+ a_j^+ + h.c.):  dr/dt = K r.
Matrix flow_matrix(const CMatrix& coupling);

/// S = exp(tau K) for the pump Hamiltonian, quadrature-blocked.
Matrix symplectic_evolution(const CMatrix& coupling, double tau);

/// ||S Omega S^T - Omega||_F in quadrature-blocked ordering.
double symplectic_residual(const Matrix& s);

/// V' = S V S^T, mean' = S mean. Throws numerical on non-finite output.
GaussianState evolve(const GaussianState& state, const PumpScheme& scheme, double tau);
GaussianState apply_symplectic(const GaussianState& state, const Matrix& s_blocked);

/// Pure-loss channel V' = eta V + (1 - eta) I/2.
GaussianState apply_loss(const GaussianState& state, double eta);

/// Rotates every mode's (x, p) by the same angle: q' = R(theta) q.
GaussianState rotate_global(const GaussianState& state, double theta);
CovarianceMatrix rotate_global(const CovarianceMatrix& cov, double theta);

/// Per-mode rotation by thetas[mode] (row order of the basis).
GaussianState rotate_per_mode(const GaussianState& state, const std::vector<double>& thetas);
CovarianceMatrix rotate_per_mode(const CovarianceMatrix& cov, const std::vector<double>& thetas);

CovarianceMatrix reorder(const CovarianceMatrix& cov, Ordering target);

/// Graphical form:
/// V_r = 1/2 [[U^-1, U^-1 A], [A U^-1, U + A U^-1 A]] (quadrature-blocked).
/// Throws numerical if U is not symmetric positive definite.
CovarianceMatrix build_covariance_from_AU(const Matrix& a, const Matrix& u);

/// N symplectic eigenvalues in descending order. Requires a positive-definite input.
std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cov);

double min_symplectic_eigenvalue(const CovarianceMatrix& cov);

/// prod_j 1 / (2 nu_j); 1 for pure states.
double purity(const CovarianceMatrix& cov);

/// Interaction strength r with nondegenerate single-tone gain cosh^2(r) = 2.
double calibrate_g3db();

/// Nondegenerate photon gain cosh^2(r) of a two-mode squeezer.
double nondegenerate_gain(double r);

}  // namespace cvc

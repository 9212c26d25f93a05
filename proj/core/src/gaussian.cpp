#include "cvcluster/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "cvcluster/error.hpp"

namespace cvc {

std::string to_string(Ordering ordering) {
  return ordering == Ordering::mode_interleaved ? "mode_interleaved" : "quadrature_blocked";
}

Ordering ordering_from_string(const std::string& name) {
  if (name == "mode_interleaved") return Ordering::mode_interleaved;
  if (name == "quadrature_blocked") return Ordering::quadrature_blocked;
  fail(ErrorKind::invalid_argument, "unknown ordering '" + name + "'");
}

CovarianceMatrix::CovarianceMatrix(Matrix entries, Ordering ordering)
    : entries_(std::move(entries)), ordering_(ordering) {
  require(entries_.rows() == entries_.cols() && entries_.rows() % 2 == 0 && entries_.rows() > 0,
          ErrorKind::invalid_argument, "covariance must be a non-empty even-sized square matrix");
  require(entries_.allFinite(), ErrorKind::numerical, "covariance has non-finite entries");
  const double scale = std::max(entries_.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, ErrorKind::invalid_argument,
          "covariance is not symmetric (residual " + std::to_string(asym / scale) + ")");
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
}

int CovarianceMatrix::x_index(int mode) const {
  return ordering_ == Ordering::mode_interleaved ? 2 * mode : mode;
}

int CovarianceMatrix::p_index(int mode) const {
  return ordering_ == Ordering::mode_interleaved ? 2 * mode + 1 : n_modes() + mode;
}

CovarianceMatrix CovarianceMatrix::reordered(Ordering target) const {
  if (target == ordering_) return *this;
  const int n = n_modes();
  CovarianceMatrix dst;
  dst.ordering_ = target;
  dst.entries_.resize(2 * n, 2 * n);
  // Map each (quadrature, mode) slot from source index to target index.
  std::vector<int> to(static_cast<std::size_t>(2 * n));
  for (int m = 0; m < n; ++m) {
    const int sx = x_index(m), sp = p_index(m);
    const int tx = target == Ordering::mode_interleaved ? 2 * m : m;
    const int tp = target == Ordering::mode_interleaved ? 2 * m + 1 : n + m;
    to[sx] = tx;
    to[sp] = tp;
  }
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) dst.entries_(to[i], to[j]) = entries_(i, j);
  }
  return dst;
}

Matrix CovarianceMatrix::xx() const {
  const auto b = reordered(Ordering::quadrature_blocked);
  const int n = n_modes();
  return b.entries_.topLeftCorner(n, n);
}

Matrix CovarianceMatrix::xp() const {
  const auto b = reordered(Ordering::quadrature_blocked);
  const int n = n_modes();
  return b.entries_.topRightCorner(n, n);
}

Matrix CovarianceMatrix::pp() const {
  const auto b = reordered(Ordering::quadrature_blocked);
  const int n = n_modes();
  return b.entries_.bottomRightCorner(n, n);
}

Matrix symplectic_form(int n_modes, Ordering ordering) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const int x = ordering == Ordering::mode_interleaved ? 2 * m : m;
    const int p = ordering == Ordering::mode_interleaved ? 2 * m + 1 : n_modes + m;
    omega(x, p) = 1.0;
    omega(p, x) = -1.0;
  }
  return omega;
}

Matrix ordering_permutation(int n_modes, Ordering source, Ordering target) {
  Matrix p = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const int sx = source == Ordering::mode_interleaved ? 2 * m : m;
    const int sp = source == Ordering::mode_interleaved ? 2 * m + 1 : n_modes + m;
    const int tx = target == Ordering::mode_interleaved ? 2 * m : m;
    const int tp = target == Ordering::mode_interleaved ? 2 * m + 1 : n_modes + m;
    p(tx, sx) = 1.0;
    p(tp, sp) = 1.0;
  }
  return p;
}

GaussianState vacuum(const ModeBasis& basis, Ordering ordering) {
  const int n = basis.count();
  return {CovarianceMatrix(0.5 * Matrix::Identity(2 * n, 2 * n), ordering),
          Vector::Zero(2 * n), basis};
}

GaussianState vacuum(int n_modes) {
  require(n_modes >= 1, ErrorKind::invalid_argument, "vacuum needs at least one mode");
  const OffsetKind kind = n_modes % 2 == 1 ? OffsetKind::integer : OffsetKind::half_integer;
  const double center = kind == OffsetKind::integer ? 4.2e9 : 4.2005e9;
  return vacuum(ModeBasis(n_modes, 1.0e6, center, kind));
}

GaussianState thermal(const ModeBasis& basis, double nbar) {
  require(nbar >= 0.0, ErrorKind::invalid_argument, "thermal occupation must be non-negative");
  GaussianState state = vacuum(basis);
  state.cov = CovarianceMatrix((nbar + 0.5) * Matrix::Identity(2 * basis.count(), 2 * basis.count()),
                               Ordering::quadrature_blocked);
  return state;
}

CMatrix coupling_matrix(const PumpScheme& scheme) {
  scheme.validate();
  const ModeBasis& basis = scheme.basis;
  const int n = basis.count();
  CMatrix g = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int di = basis.doubled_offset(basis.index_at(i));
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int dj = basis.doubled_offset(basis.index_at(j));
      for (const PumpTone& tone : scheme.tones) {
        if (di + dj == 2 * tone.k) g(i, j) += std::polar(tone.amplitude, tone.phase);
      }
    }
  }
  return g;
}

Matrix flow_matrix(const CMatrix& coupling) {
  const int n = static_cast<int>(coupling.rows());
  const Matrix gr = coupling.real();
  const Matrix gi = coupling.imag();
  Matrix k(2 * n, 2 * n);
  k << gi, -gr, -gr, -gi;
  return k;
}

Matrix symplectic_evolution(const CMatrix& coupling, double tau) {
  // Heisenberg picture: da/dt = -i G a^+, solved as a(tau) = C a + D a^+ with
  //   C = cosh(tau sqrt(G G^H)),  D = -i G f(G^H G),  f(l) = sinh(tau sqrt l) / sqrt l,
  // and G^H G = conj(G G^H) because G is symmetric.
  const int n = static_cast<int>(coupling.rows());
  require(coupling.cols() == n, ErrorKind::invalid_argument, "coupling matrix must be square");
  require(std::isfinite(tau), ErrorKind::invalid_argument, "interaction time must be finite");

  const CMatrix gram = coupling * coupling.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (gram + gram.adjoint()));
  require(eig.info() == Eigen::Success, ErrorKind::numerical,
          "eigendecomposition of G G^H did not converge");
  const CMatrix& w = eig.eigenvectors();
  Vector ch(n), sh(n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(eig.eigenvalues()(k), 0.0));
    const double x = tau * s;
    ch(k) = std::cosh(x);
    sh(k) = std::abs(x) < 1e-8 ? tau * (1.0 + x * x / 6.0) : std::sinh(x) / s;
  }
  const CMatrix c = w * ch.cast<std::complex<double>>().asDiagonal() * w.adjoint();
  const CMatrix d = std::complex<double>(0.0, -1.0) * coupling * w.conjugate() *
                    sh.cast<std::complex<double>>().asDiagonal() * w.transpose();

  // a = (x + i p)/sqrt2  =>  x' = Re(C+D) x - Im(C-D) p,  p' = Im(C+D) x + Re(C-D) p.
  const CMatrix plus = c + d;
  const CMatrix minus = c - d;
  Matrix s(2 * n, 2 * n);
  s << plus.real(), -minus.imag(), plus.imag(), minus.real();
  require(s.allFinite(), ErrorKind::numerical, "symplectic evolution overflowed");
  return s;
}

double symplectic_residual(const Matrix& s) {
  const int n = static_cast<int>(s.rows() / 2);
  const Matrix omega = symplectic_form(n, Ordering::quadrature_blocked);
  return (s * omega * s.transpose() - omega).norm();
}

GaussianState apply_symplectic(const GaussianState& state, const Matrix& s_blocked) {
  const int n = state.cov.n_modes();
  require(s_blocked.rows() == 2 * n && s_blocked.cols() == 2 * n, ErrorKind::invalid_argument,
          "symplectic matrix size does not match the state");
  Matrix s = s_blocked;
  if (state.cov.ordering() != Ordering::quadrature_blocked) {
    const Matrix p = ordering_permutation(n, Ordering::quadrature_blocked, state.cov.ordering());
    s = p * s_blocked * p.transpose();
  }
  Matrix v = s * state.cov.entries() * s.transpose();
  require(v.allFinite(), ErrorKind::numerical, "evolved covariance is not finite");
  GaussianState out{CovarianceMatrix(0.5 * (v + v.transpose()), state.cov.ordering()),
                    s * state.mean, state.basis};
  return out;
}

GaussianState evolve(const GaussianState& state, const PumpScheme& scheme, double tau) {
  require(scheme.basis.count() == state.cov.n_modes(), ErrorKind::invalid_argument,
          "scheme basis and state mode count differ");
  const Matrix s = symplectic_evolution(coupling_matrix(scheme), tau);
  GaussianState out = apply_symplectic(state, s);
  out.basis = scheme.basis;
  return out;
}

GaussianState apply_loss(const GaussianState& state, double eta) {
  require(eta >= 0.0 && eta <= 1.0, ErrorKind::invalid_argument,
          "transmissivity must lie in [0, 1]");
  const int dim = static_cast<int>(state.cov.entries().rows());
  Matrix v = eta * state.cov.entries() + (1.0 - eta) * 0.5 * Matrix::Identity(dim, dim);
  return {CovarianceMatrix(std::move(v), state.cov.ordering()), std::sqrt(eta) * state.mean,
          state.basis};
}

namespace {

// In-place q' = R(theta_m) q on every mode's (x, p) pair, applied as R V R^T.
void rotate_in_place(Matrix& v, Vector* mean, const CovarianceMatrix& layout,
                     const std::vector<double>& thetas) {
  const int n = layout.n_modes();
  for (int m = 0; m < n; ++m) {
    const double c = std::cos(thetas[m]);
    const double s = std::sin(thetas[m]);
    const int x = layout.x_index(m), p = layout.p_index(m);
    // Rows.
    for (int j = 0; j < v.cols(); ++j) {
      const double vx = v(x, j), vp = v(p, j);
      v(x, j) = c * vx - s * vp;
      v(p, j) = s * vx + c * vp;
    }
    // Columns.
    for (int i = 0; i < v.rows(); ++i) {
      const double vx = v(i, x), vp = v(i, p);
      v(i, x) = c * vx - s * vp;
      v(i, p) = s * vx + c * vp;
    }
    if (mean != nullptr) {
      const double mx = (*mean)(x), mp = (*mean)(p);
      (*mean)(x) = c * mx - s * mp;
      (*mean)(p) = s * mx + c * mp;
    }
  }
}

}  // namespace

CovarianceMatrix rotate_per_mode(const CovarianceMatrix& cov, const std::vector<double>& thetas) {
  require(static_cast<int>(thetas.size()) == cov.n_modes(), ErrorKind::invalid_argument,
          "per-mode rotation needs one angle per mode");
  Matrix v = cov.entries();
  rotate_in_place(v, nullptr, cov, thetas);
  return CovarianceMatrix(0.5 * (v + v.transpose()), cov.ordering());
}

GaussianState rotate_per_mode(const GaussianState& state, const std::vector<double>& thetas) {
  require(static_cast<int>(thetas.size()) == state.cov.n_modes(), ErrorKind::invalid_argument,
          "per-mode rotation needs one angle per mode");
  Matrix v = state.cov.entries();
  Vector mean = state.mean;
  rotate_in_place(v, &mean, state.cov, thetas);
  return {CovarianceMatrix(0.5 * (v + v.transpose()), state.cov.ordering()), std::move(mean),
          state.basis};
}

CovarianceMatrix rotate_global(const CovarianceMatrix& cov, double theta) {
  return rotate_per_mode(cov, std::vector<double>(static_cast<std::size_t>(cov.n_modes()), theta));
}

GaussianState rotate_global(const GaussianState& state, double theta) {
  return rotate_per_mode(state,
                         std::vector<double>(static_cast<std::size_t>(state.cov.n_modes()), theta));
}

CovarianceMatrix reorder(const CovarianceMatrix& cov, Ordering target) {
  return cov.reordered(target);
}

CovarianceMatrix build_covariance_from_AU(const Matrix& a, const Matrix& u) {
  const int n = static_cast<int>(u.rows());
  require(u.cols() == n && a.rows() == n && a.cols() == n, ErrorKind::invalid_argument,
          "A and U must be N x N");
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()),
          ErrorKind::invalid_argument, "A must be symmetric");
  const Matrix us = 0.5 * (u + u.transpose());
  Eigen::LLT<Matrix> llt(us);
  require(llt.info() == Eigen::Success, ErrorKind::numerical,
          "U is not symmetric positive definite");
  const Matrix u_inv = llt.solve(Matrix::Identity(n, n));
  const Matrix ua = u_inv * a;
  Matrix v(2 * n, 2 * n);
  v.topLeftCorner(n, n) = u_inv;
  v.topRightCorner(n, n) = ua;
  v.bottomLeftCorner(n, n) = ua.transpose();
  v.bottomRightCorner(n, n) = us + a * ua;
  v *= 0.5;
  return CovarianceMatrix(0.5 * (v + v.transpose()), Ordering::quadrature_blocked);
}

std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cov) {
  // nu_j are the singular values of M = V^1/2 Omega V^1/2 (real antisymmetric),
  // so nu_j^2 are the (doubled) eigenvalues of M^T M.
  const int n = cov.n_modes();
  Eigen::SelfAdjointEigenSolver<Matrix> eig_v(cov.entries());
  require(eig_v.info() == Eigen::Success, ErrorKind::numerical,
          "covariance eigendecomposition did not converge");
  require(eig_v.eigenvalues().minCoeff() > 0.0, ErrorKind::numerical,
          "symplectic eigenvalues need a positive-definite covariance");
  const Matrix root = eig_v.eigenvectors() * eig_v.eigenvalues().cwiseSqrt().asDiagonal() *
                      eig_v.eigenvectors().transpose();
  const Matrix m = root * symplectic_form(n, cov.ordering()) * root;
  const Matrix mtm = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig_m(0.5 * (mtm + mtm.transpose()),
                                              Eigen::EigenvaluesOnly);
  require(eig_m.info() == Eigen::Success, ErrorKind::numerical,
          "symplectic spectrum did not converge");
  std::vector<double> squared(eig_m.eigenvalues().data(),
                              eig_m.eigenvalues().data() + eig_m.eigenvalues().size());
  std::sort(squared.begin(), squared.end(), std::greater<>());
  std::vector<double> nu(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    nu[j] = std::sqrt(std::max(0.5 * (squared[2 * j] + squared[2 * j + 1]), 0.0));
  }
  return nu;
}

double min_symplectic_eigenvalue(const CovarianceMatrix& cov) {
  return symplectic_eigenvalues(cov).back();
}

double purity(const CovarianceMatrix& cov) {
  double log_purity = 0.0;
  for (double nu : symplectic_eigenvalues(cov)) log_purity -= std::log(2.0 * nu);
  return std::exp(log_purity);
}

double calibrate_g3db() { return std::acosh(std::sqrt(2.0)); }

double nondegenerate_gain(double r) {
  const double c = std::cosh(r);
  return c * c;
}

}  // namespace cvc

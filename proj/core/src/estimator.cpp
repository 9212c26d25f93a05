#include "cvcluster/estimator.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "cvcluster/error.hpp"

namespace cvc {

CovarianceAccumulator::CovarianceAccumulator(int dimension)
    : mean_(Vector::Zero(dimension)), lower_(Matrix::Zero(dimension, dimension)) {}

void CovarianceAccumulator::add(const Eigen::Ref<const Vector>& window) {
  require(window.size() == dimension(), ErrorKind::invalid_argument, "window size mismatch");
  require(window.allFinite(), ErrorKind::numerical, "non-finite sample");
  ++count_;
  const Vector delta = window - mean_;
  mean_ += delta / static_cast<double>(count_);
  const double w = static_cast<double>(count_ - 1) / static_cast<double>(count_);
  lower_.selfadjointView<Eigen::Lower>().rankUpdate(delta, w);
}

void CovarianceAccumulator::add_block(const Eigen::Ref<const Matrix>& windows) {
  require(windows.cols() == dimension(), ErrorKind::invalid_argument, "window size mismatch");
  if (windows.rows() == 0) return;
  require(windows.allFinite(), ErrorKind::numerical, "non-finite sample");
  CovarianceAccumulator block(dimension());
  block.count_ = windows.rows();
  block.mean_ = windows.colwise().mean().transpose();
  const Matrix centered = windows.rowwise() - block.mean_.transpose();
  block.lower_.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  merge(block);
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other) {
  require(other.dimension() == dimension(), ErrorKind::invalid_argument,
          "cannot merge accumulators of different dimension");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Vector delta = other.mean_ - mean_;
  lower_.triangularView<Eigen::Lower>() += other.lower_;
  lower_.selfadjointView<Eigen::Lower>().rankUpdate(delta, na * nb / n);
  mean_ += delta * (nb / n);
  count_ += other.count_;
}

Matrix CovarianceAccumulator::comoment() const {
  Matrix full = lower_.selfadjointView<Eigen::Lower>();
  return full;
}

Matrix CovarianceAccumulator::covariance() const {
  require(count_ >= 2, ErrorKind::invalid_argument, "covariance needs at least two windows");
  return comoment() / static_cast<double>(count_ - 1);
}

void CalibrationRecord::validate(int n_modes) const {
  require(static_cast<int>(gain_db.size()) == n_modes &&
              static_cast<int>(added_noise_photons.size()) == n_modes,
          ErrorKind::invalid_argument, "calibration needs one gain and one noise value per mode");
  for (double g : gain_db) {
    require(std::isfinite(g), ErrorKind::invalid_argument, "calibration gain must be finite");
  }
  for (double v : added_noise_photons) {
    require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_argument,
            "calibrated noise must be non-negative");
  }
  require(std::isfinite(tau_d_rad_per_mhz), ErrorKind::invalid_argument,
          "phase slope must be finite");
}

double CalibrationRecord::gain_linear(int row) const {
  return std::pow(10.0, gain_db.at(static_cast<std::size_t>(row)) / 10.0);
}

CalibrationRecord calibration_from_chain(const ChainConfig& cfg, int n_modes) {
  cfg.validate(n_modes);
  CalibrationRecord calib;
  calib.gain_db.assign(static_cast<std::size_t>(n_modes), cfg.gain_db);
  for (int m = 0; m < n_modes; ++m) calib.added_noise_photons.push_back(cfg.noise_for_row(m));
  calib.tau_d_rad_per_mhz = cfg.tau_d_rad_per_mhz;
  return calib;
}

CovarianceMatrix estimate_covariance(const CovarianceAccumulator& acc, const ModeBasis& basis,
                                     double z_c) {
  require(acc.count() >= 2, ErrorKind::invalid_argument, "estimation needs at least two windows");
  require(acc.dimension() == 2 * basis.count(), ErrorKind::invalid_argument,
          "stream width does not match the basis");
  return volts_to_photons(CovarianceMatrix(acc.covariance(), Ordering::mode_interleaved), basis,
                          z_c);
}

CovarianceMatrix estimate_covariance(const WindowSamples& samples, double z_c) {
  require(samples.n_windows() >= 2, ErrorKind::invalid_argument,
          "estimation needs at least two windows");
  CovarianceAccumulator acc(static_cast<int>(samples.data.cols()));
  for (std::int64_t start = 0; start < samples.n_windows(); start += kWindowBlock) {
    const std::int64_t rows = std::min(kWindowBlock, samples.n_windows() - start);
    acc.add_block(samples.data.middleRows(start, rows));
  }
  return estimate_covariance(acc, samples.basis, z_c);
}

CovarianceMatrix apply_phase_correction(const CovarianceMatrix& cov, double tau_d_rad_per_mhz,
                                        const ModeBasis& basis) {
  std::vector<double> theta = delay_phases(basis, tau_d_rad_per_mhz);
  for (double& t : theta) t = -t;
  return rotate_per_mode(cov, theta);
}

CovarianceMatrix divide_gain(const CovarianceMatrix& cov, const CalibrationRecord& calib) {
  const int n = cov.n_modes();
  calib.validate(n);
  Vector s(2 * n);
  for (int m = 0; m < n; ++m) {
    const double inv = 1.0 / std::sqrt(calib.gain_linear(m));
    s(cov.x_index(m)) = inv;
    s(cov.p_index(m)) = inv;
  }
  Matrix v = s.asDiagonal() * cov.entries() * s.asDiagonal();
  return CovarianceMatrix(std::move(v), cov.ordering());
}

CovarianceMatrix subtract_added_noise(const CovarianceMatrix& cov, const CalibrationRecord& calib,
                                      std::vector<int>* over_subtracted) {
  const int n = cov.n_modes();
  calib.validate(n);
  Matrix v = cov.entries();
  for (int m = 0; m < n; ++m) {
    const double half = 0.5 * calib.added_noise_photons[m];
    for (int idx : {cov.x_index(m), cov.p_index(m)}) {
      v(idx, idx) -= half;
      if (over_subtracted != nullptr && v(idx, idx) < 0.0) over_subtracted->push_back(idx);
    }
  }
  return CovarianceMatrix(std::move(v), cov.ordering());
}

CovarianceMatrix correct_chain(const CovarianceMatrix& raw, const CalibrationRecord& calib,
                               const ModeBasis& basis) {
  const CovarianceMatrix phased = apply_phase_correction(raw, calib.tau_d_rad_per_mhz, basis);
  return subtract_added_noise(divide_gain(phased, calib), calib);
}

namespace {

using Hermitian = Eigen::MatrixXcd;

double min_eigenvalue(const Hermitian& h) {
  Eigen::SelfAdjointEigenSolver<Hermitian> eig(h, Eigen::EigenvaluesOnly);
  require(eig.info() == Eigen::Success, ErrorKind::numerical,
          "Hermitian eigendecomposition did not converge");
  return eig.eigenvalues().minCoeff();
}

Hermitian project_psd(const Hermitian& h) {
  Eigen::SelfAdjointEigenSolver<Hermitian> eig(h);
  require(eig.info() == Eigen::Success, ErrorKind::numerical,
          "Hermitian eigendecomposition did not converge");
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.cast<std::complex<double>>().asDiagonal() *
         eig.eigenvectors().adjoint();
}

}  // namespace

ProjectionResult project_physical(const CovarianceMatrix& cov, const ProjectionOptions& opts) {
  const int dim = static_cast<int>(cov.entries().rows());
  const Matrix half_omega = 0.5 * symplectic_form(cov.n_modes(), cov.ordering());
  const std::complex<double> i(0.0, 1.0);
  const auto lift = [&](const Matrix& v) -> Hermitian {
    return v.cast<std::complex<double>>() + i * half_omega.cast<std::complex<double>>();
  };
  const double scale = std::max(1.0, cov.entries().norm());

  if (min_eigenvalue(lift(cov.entries())) >= -1e-11 * scale) {
    return {cov, 0, false, 0.0, min_symplectic_eigenvalue(cov)};
  }

  // Dykstra: x stays in the affine set, y in the cone, p is the cone correction.
  // The affine set needs no correction term.
  Matrix x = cov.entries();
  Hermitian p = Hermitian::Zero(dim, dim);
  int iter = 0;
  double step = 0.0;
  for (; iter < opts.max_iterations; ++iter) {
    const Hermitian y = project_psd(lift(x) + p);
    p = lift(x) + p - y;
    const Matrix re = y.real();
    const Matrix next = 0.5 * (re + re.transpose());
    step = (next - x).norm();
    x = next;
    if (step < opts.tolerance * scale) {
      const CovarianceMatrix candidate(x, cov.ordering());
      Eigen::SelfAdjointEigenSolver<Matrix> pd(x, Eigen::EigenvaluesOnly);
      if (pd.eigenvalues().minCoeff() > 0.0 && min_symplectic_eigenvalue(candidate) >= 0.5 - 1e-8) {
        return {candidate, iter + 1, true, (x - cov.entries()).norm(),
                min_symplectic_eigenvalue(candidate)};
      }
    }
  }
  fail(ErrorKind::numerical, "physicality projection did not converge after " +
                                 std::to_string(iter) + " iterations (last step " +
                                 std::to_string(step) + ")");
}

}  // namespace cvc

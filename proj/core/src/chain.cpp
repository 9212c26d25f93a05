#include "cvcluster/chain.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "cvcluster/error.hpp"

namespace cvc {

void ChainConfig::validate(int n_modes) const {
  require(!added_noise_photons.empty(), ErrorKind::invalid_argument,
          "added noise needs at least one value");
  require(added_noise_photons.size() == 1 ||
              static_cast<int>(added_noise_photons.size()) == n_modes,
          ErrorKind::invalid_argument, "added noise must be a scalar or one value per mode");
  for (double v : added_noise_photons) {
    require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_argument,
            "added noise photons must be non-negative");
  }
  require(std::isfinite(gain_db), ErrorKind::invalid_argument, "gain must be finite");
  require(std::isfinite(z_c) && z_c > 0.0, ErrorKind::invalid_argument,
          "impedance must be positive");
  require(std::isfinite(tau_d_rad_per_mhz), ErrorKind::invalid_argument,
          "phase delay slope must be finite");
}

double ChainConfig::noise_for_row(int row) const {
  return added_noise_photons.size() == 1 ? added_noise_photons.front()
                                         : added_noise_photons.at(static_cast<std::size_t>(row));
}

double ChainConfig::gain_linear() const { return std::pow(10.0, gain_db / 10.0); }

Vector photon_volt_scale(const ModeBasis& basis, double z_c) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double delta = two_pi * basis.spacing_hz();
  Vector scale(basis.count());
  for (int r = 0; r < basis.count(); ++r) {
    const double omega = two_pi * basis.frequency_hz(basis.index_at(r));
    scale(r) = std::sqrt(z_c * kHbar * delta * omega);
  }
  return scale;
}

namespace {

CovarianceMatrix scale_by_mode(const CovarianceMatrix& cov, const Vector& per_mode, bool divide) {
  require(per_mode.size() == cov.n_modes(), ErrorKind::invalid_argument,
          "basis size does not match covariance");
  const int dim = 2 * cov.n_modes();
  Vector s(dim);
  for (int m = 0; m < cov.n_modes(); ++m) {
    s(cov.x_index(m)) = per_mode(m);
    s(cov.p_index(m)) = per_mode(m);
  }
  if (divide) s = s.cwiseInverse();
  Matrix v = s.asDiagonal() * cov.entries() * s.asDiagonal();
  return CovarianceMatrix(std::move(v), cov.ordering());
}

}  // namespace

CovarianceMatrix photon_to_volts(const CovarianceMatrix& cov_photons, const ModeBasis& basis,
                                 double z_c) {
  return scale_by_mode(cov_photons, photon_volt_scale(basis, z_c), false);
}

CovarianceMatrix volts_to_photons(const CovarianceMatrix& cov_volts, const ModeBasis& basis,
                                  double z_c) {
  return scale_by_mode(cov_volts, photon_volt_scale(basis, z_c), true);
}

std::vector<double> delay_phases(const ModeBasis& basis, double tau_d_rad_per_mhz) {
  std::vector<double> theta(static_cast<std::size_t>(basis.count()));
  for (int r = 0; r < basis.count(); ++r) {
    const double detuning_mhz = (basis.frequency_hz(basis.index_at(r)) - basis.center_hz()) * 1e-6;
    theta[r] = tau_d_rad_per_mhz * detuning_mhz;
  }
  return theta;
}

CovarianceMatrix chain_covariance(const GaussianState& state, const ChainConfig& cfg) {
  const int n = state.cov.n_modes();
  cfg.validate(n);
  require(state.basis.count() == n, ErrorKind::invalid_argument,
          "state basis does not match its covariance");
  CovarianceMatrix v = state.cov.reordered(Ordering::mode_interleaved);
  Matrix with_noise = v.entries();
  for (int m = 0; m < n; ++m) {
    const double half = 0.5 * cfg.noise_for_row(m);
    with_noise(2 * m, 2 * m) += half;
    with_noise(2 * m + 1, 2 * m + 1) += half;
  }
  CovarianceMatrix delayed = rotate_per_mode(
      CovarianceMatrix(std::move(with_noise), Ordering::mode_interleaved),
      delay_phases(state.basis, cfg.tau_d_rad_per_mhz));
  CovarianceMatrix volts = photon_to_volts(delayed, state.basis, cfg.z_c);
  return CovarianceMatrix(cfg.gain_linear() * volts.entries(), Ordering::mode_interleaved);
}

WindowGenerator::WindowGenerator(const GaussianState& state, std::int64_t n_windows,
                                 const ChainConfig& cfg)
    : basis_(state.basis), total_(n_windows), rng_(cfg.seed) {
  require(n_windows >= 1, ErrorKind::invalid_argument, "need at least one window");
  require(min_symplectic_eigenvalue(state.cov) >= 0.5 - 1e-9, ErrorKind::invalid_argument,
          "input covariance is not physical");
  target_ = chain_covariance(state, cfg);

  Eigen::LLT<Matrix> llt(target_.entries());
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
  } else {
    // Semi-definite target (e.g. zero noise on a singular state): symmetric square root.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(target_.entries());
    require(eig.info() == Eigen::Success, ErrorKind::numerical, "chain covariance factorization failed");
    factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              eig.eigenvectors().transpose();
  }

  const CovarianceMatrix layout = state.cov;
  Vector mean_il(2 * basis_.count());
  for (int m = 0; m < basis_.count(); ++m) {
    mean_il(2 * m) = state.mean(layout.x_index(m));
    mean_il(2 * m + 1) = state.mean(layout.p_index(m));
  }
  const auto theta = delay_phases(basis_, cfg.tau_d_rad_per_mhz);
  const Vector scale = photon_volt_scale(basis_, cfg.z_c) * std::sqrt(cfg.gain_linear());
  mean_ = Vector(2 * basis_.count());
  for (int m = 0; m < basis_.count(); ++m) {
    const double c = std::cos(theta[m]), s = std::sin(theta[m]);
    mean_(2 * m) = scale(m) * (c * mean_il(2 * m) - s * mean_il(2 * m + 1));
    mean_(2 * m + 1) = scale(m) * (s * mean_il(2 * m) + c * mean_il(2 * m + 1));
  }
}

void WindowGenerator::refill() {
  // Always draw whole chunks so the floating-point path of every window is
  // fixed by its position in the stream, not by the caller's block size.
  const std::int64_t rows = std::min(kWindowBlock, total_ - generated_);
  const int dim = dimension();
  z_.resize(dim, rows);
  for (std::int64_t w = 0; w < rows; ++w) {
    for (int d = 0; d < dim; ++d) z_(d, w) = normal_(rng_);
  }
  chunk_.resize(rows, dim);
  chunk_.noalias() = (factor_ * z_).transpose();
  chunk_.rowwise() += mean_.transpose();
  chunk_pos_ = 0;
  generated_ += rows;
}

std::int64_t WindowGenerator::next_block(Matrix& block, std::int64_t max_rows) {
  const std::int64_t rows = std::min(max_rows, remaining());
  block.resize(rows, dimension());
  std::int64_t filled = 0;
  while (filled < rows) {
    if (chunk_pos_ == chunk_.rows()) refill();
    const std::int64_t take = std::min(rows - filled, chunk_.rows() - chunk_pos_);
    block.middleRows(filled, take) = chunk_.middleRows(chunk_pos_, take);
    chunk_pos_ += take;
    filled += take;
  }
  produced_ += rows;
  return rows;
}

WindowSamples sample_windows(const GaussianState& state, std::int64_t n_windows,
                             const ChainConfig& cfg) {
  WindowGenerator gen(state, n_windows, cfg);
  WindowSamples out{state.basis, Matrix(n_windows, gen.dimension())};
  Matrix block;
  std::int64_t row = 0;
  while (gen.remaining() > 0) {
    const std::int64_t got = gen.next_block(block);
    out.data.middleRows(row, got) = block;
    row += got;
  }
  return out;
}

}  // namespace cvc

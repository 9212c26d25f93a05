#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cvcluster/chain.hpp"
#include "cvcluster/error.hpp"
#include "cvcluster/pumpsynth.hpp"

using namespace cvc;

namespace {

ChainConfig plain_chain() {
  ChainConfig cfg;
  cfg.added_noise_photons = {0.0};
  cfg.gain_db = 0.0;
  cfg.tau_d_rad_per_mhz = 0.0;
  return cfg;
}

}  // namespace

TEST(Chain, PhotonVoltScale) {
  const ModeBasis b(3, 1e6, 4.2e9, OffsetKind::integer);
  const Vector s = photon_volt_scale(b, 50.0);
  const double two_pi = 2 * std::numbers::pi;
  EXPECT_NEAR(s(1), std::sqrt(50.0 * 1.054571817e-34 * two_pi * 1e6 * two_pi * 4.2e9), 1e-25);
  EXPECT_NEAR(s(2) / s(1), std::sqrt(4.201e9 / 4.2e9), 1e-15);
}

TEST(Chain, VoltConversionRoundTrip) {
  const PumpScheme s = square_scheme(25, 5, 0.2);
  const GaussianState st = evolve(vacuum(s.basis), s, 1.0);
  const CovarianceMatrix back = volts_to_photons(photon_to_volts(st.cov, s.basis, 50.0), s.basis, 50.0);
  EXPECT_LT((back.entries() - st.cov.entries()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Chain, DelayPhasesAreLinearInDetuning) {
  const ModeBasis b(5, 1e6, 4.2e9, OffsetKind::integer);
  const auto th = delay_phases(b, 1.89);
  EXPECT_NEAR(th[2], 0.0, 1e-12);
  EXPECT_NEAR(th[4], 2 * 1.89, 1e-9);
  EXPECT_NEAR(th[0], -2 * 1.89, 1e-9);
}

TEST(Chain, NoiseAddsHalfPerQuadrature) {
  ChainConfig cfg = plain_chain();
  cfg.added_noise_photons = {14.0};
  const GaussianState v = vacuum(ModeBasis(3, 1e6, 4.2e9, OffsetKind::integer));
  const CovarianceMatrix c = volts_to_photons(chain_covariance(v, cfg), v.basis, cfg.z_c);
  EXPECT_NEAR(c(0, 0), 0.5 + 7.0, 1e-12);
  EXPECT_NEAR(c(5, 5), 0.5 + 7.0, 1e-12);
  EXPECT_NEAR(c(0, 2), 0.0, 1e-15);
}

TEST(Chain, PerModeNoiseAndGain) {
  ChainConfig cfg = plain_chain();
  cfg.added_noise_photons = {1.0, 2.0, 3.0};
  cfg.gain_db = 20.0;
  const GaussianState v = vacuum(ModeBasis(3, 1e6, 4.2e9, OffsetKind::integer));
  const CovarianceMatrix c = volts_to_photons(chain_covariance(v, cfg), v.basis, cfg.z_c);
  EXPECT_NEAR(c(0, 0), 100.0 * (0.5 + 0.5), 1e-10);
  EXPECT_NEAR(c(3, 3), 100.0 * (0.5 + 1.0), 1e-10);
  EXPECT_NEAR(c(5, 5), 100.0 * (0.5 + 1.5), 1e-10);
  cfg.added_noise_photons = {1.0, 2.0};
  EXPECT_THROW(chain_covariance(v, cfg), Error);
}

TEST(Chain, DelayRotatesCorrelations) {
  ChainConfig cfg = plain_chain();
  cfg.tau_d_rad_per_mhz = 0.3;
  const PumpScheme s = single_pump_scheme(3, 0.5);
  const GaussianState st = evolve(vacuum(s.basis, Ordering::mode_interleaved), s, 1.0);
  const CovarianceMatrix raw = volts_to_photons(chain_covariance(st, cfg), s.basis, cfg.z_c);
  const CovarianceMatrix expect = rotate_per_mode(st.cov, delay_phases(s.basis, 0.3));
  EXPECT_LT((raw.entries() - expect.entries()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WindowGenerator, StreamIndependentOfBlockSize) {
  const PumpScheme s = square_scheme(9, 2, 0.2);
  const GaussianState st = evolve(vacuum(s.basis), s, 1.0);
  ChainConfig cfg;
  cfg.seed = 42;
  const WindowSamples all = sample_windows(st, 1000, cfg);
  WindowGenerator gen(st, 1000, cfg);
  Matrix block;
  Matrix pieced(1000, gen.dimension());
  std::int64_t row = 0;
  while (gen.remaining() > 0) {
    const std::int64_t got = gen.next_block(block, 37);
    pieced.middleRows(row, got) = block;
    row += got;
  }
  EXPECT_EQ(row, 1000);
  EXPECT_TRUE(pieced == all.data);
}

TEST(WindowGenerator, SeedsDiffer) {
  const GaussianState st = vacuum(ModeBasis(3, 1e6, 4.2e9, OffsetKind::integer));
  ChainConfig a, b;
  a.seed = 1;
  b.seed = 2;
  EXPECT_FALSE(sample_windows(st, 10, a).data == sample_windows(st, 10, b).data);
  EXPECT_TRUE(sample_windows(st, 10, a).data == sample_windows(st, 10, a).data);
}

TEST(WindowGenerator, SampleCovarianceApproachesTarget) {
  const PumpScheme s = single_pump_scheme(3, 0.5);
  const GaussianState st = evolve(vacuum(s.basis), s, 1.0);
  ChainConfig cfg;
  cfg.added_noise_photons = {2.0};
  const WindowSamples w = sample_windows(st, 40000, cfg);
  const Matrix centered = w.data.rowwise() - w.data.colwise().mean();
  const Matrix sample = centered.transpose() * centered / 39999.0;
  const Matrix target = chain_covariance(st, cfg).entries();
  const double scale = target.diagonal().maxCoeff();
  // Element-wise standard error is at most sqrt(2/M) * max diagonal.
  EXPECT_LT((sample - target).cwiseAbs().maxCoeff(), 5 * std::sqrt(2.0 / 40000) * scale);
}

TEST(WindowGenerator, RejectsUnphysicalInput) {
  GaussianState st = vacuum(ModeBasis(3, 1e6, 4.2e9, OffsetKind::integer));
  st.cov = CovarianceMatrix(0.3 * Matrix::Identity(6, 6), Ordering::quadrature_blocked);
  try {
    WindowGenerator gen(st, 10, ChainConfig{});
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
}

TEST(WindowGenerator, StronglySqueezedWithoutNoise) {
  const PumpScheme s = single_pump_scheme(3, 1.5);
  const GaussianState st = evolve(vacuum(s.basis), s, 1.0);
  const WindowSamples w = sample_windows(st, 5, plain_chain());
  EXPECT_TRUE(w.data.allFinite());
}

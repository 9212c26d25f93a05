#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "cvcluster/analysis.hpp"
#include "cvcluster/error.hpp"
#include "cvcluster/estimator.hpp"
#include "cvcluster/lattice.hpp"

namespace cvc::cli {

/// 0 ok, 1 config, 2 numerical, 3 I/O.
int exit_code_for(ErrorKind kind);

/// Diagnostics of one covariance against the configured lattice.
struct AnalysisOutcome {
  SweepResult sweep;
  NullifierReport nullifiers;  // at sweep.theta_opt
  AUExtraction extraction;     // of the covariance rotated by theta_opt
  AdjacencyMatrix adjacency;   // normalized extraction
  bool threshold_stable = false;
  bool matches_target = false;
  HERReport her;
  std::optional<double> hidden_ratio;
};

AnalysisOutcome analyze_covariance(const RunConfig& cfg, const PumpScheme& scheme,
                                   const CovarianceMatrix& cov);

struct EstimationOutcome {
  CovarianceMatrix corrected;
  ProjectionResult projection;
  std::vector<CovarianceMatrix> block_covariances;  // corrected, unprojected
};

/// Streams `windows` chain outputs of `state` through the accumulators
/// without keeping them in memory.
EstimationOutcome simulate_measurement(const RunConfig& cfg, const GaussianState& state,
                                       std::uint64_t seed);

struct PointResult {
  double ratio = 0.0;
  double g_tau = 0.0;
  AnalysisOutcome analysis;
  std::optional<JackknifeEstimate> jackknife;
  std::optional<ProjectionResult> projection;
};

/// Truth state for one pump ratio: lossy evolution of the vacuum.
GaussianState simulate_state(const RunConfig& cfg, double ratio);

/// Runs one ladder point and writes its per-point files under `dir`.
PointResult run_point(const RunConfig& cfg, std::size_t index, const std::string& dir);

void cmd_synth(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_sample(const RunConfig& cfg, const std::string& input);
void cmd_estimate(const RunConfig& cfg, const std::string& samples, const std::string& calibration);
void cmd_analyze(const RunConfig& cfg, const std::string& input);
std::vector<PointResult> cmd_pipeline(const RunConfig& cfg);
/// Predicted graph of the first pump ratio, or the extracted graph of `input` when given.
void cmd_export(const RunConfig& cfg, const std::string& input, GraphFormat format,
                const std::string& output);

}  // namespace cvc::cli

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "cvcluster/analysis.hpp"
#include "cvcluster/chain.hpp"
#include "cvcluster/estimator.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/lattice.hpp"
#include "cvcluster/pumpsynth.hpp"

namespace fs = std::filesystem;
using namespace cvc;

namespace {

// Tolerances and budgets.
constexpr double kRoundTripTol = 1e-10;
constexpr double kRoundTripSeconds = 5.0;
constexpr double kIdentityTol = 1e-9;
constexpr double kTmsvCovTol = 1e-9;
constexpr double kTmsvSweepTol = 1e-8;
constexpr double kSymplecticTol = 1e-10;
constexpr double kNuTol = 1e-9;
constexpr double kHerHandTol = 1e-12;
constexpr double kSigmaBand = 5.0;
constexpr double kDbTol = 0.1;
constexpr double kProjectionNuTol = 1e-8;
constexpr double kProjectionDbTol = 0.05;
constexpr double kEstimatorSeconds = 120.0;
constexpr double kPeriodicityTol = 1e-10;
constexpr double kVacuumFlatTol = 1e-12;
constexpr double kAnalysisSeconds = 10.0;
constexpr double kMinWindowsPerSecond = 1e4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Clause {
  std::string name;
  bool ok;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::vector<Clause>& clauses) {
  bool ok = true;
  for (const auto& c : clauses) ok = ok && c.ok;
  if (!ok) ++failures;
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", title.c_str());
  for (const auto& c : clauses) {
    std::printf("    [%s] %s: %s\n", c.ok ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  std::fflush(stdout);
}

void guarded(int id, const std::string& title, const std::function<std::vector<Clause>()>& body) {
  try {
    report(id, title, body());
  } catch (const std::exception& e) {
    report(id, title, {{"ran without error", false, e.what()}});
  }
}

struct Ensemble {
  Matrix a, u;
};

std::vector<Ensemble> random_ensembles(int count, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tri(-1, 1);
  std::uniform_real_distribution<double> diag(0.05, 1.0);
  std::vector<Ensemble> out;
  for (int k = 0; k < count; ++k) {
    Ensemble e{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (int i = 0; i < n; ++i) {
      e.u(i, i) = diag(rng);
      for (int j = i + 1; j < n; ++j) e.a(i, j) = e.a(j, i) = tri(rng);
    }
    out.push_back(std::move(e));
  }
  return out;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double sweep_min(const CovarianceMatrix& v, const PumpScheme& s) {
  return nullifier_sweep(v, signed_expected_adjacency(s), theta_grid(180)).min_value;
}

cli::RunConfig square25() {
  cli::RunConfig c;
  c.lattice = {LatticeKind::square, 25, 5};
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

}  // namespace

int main() {
  const std::vector<Ensemble> ensembles = random_ensembles(100, 50, 20240917);

  guarded(1, "graphical-form round trip, N = 50", [&] {
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (const auto& e : ensembles) {
      const AUExtraction x = extract_AU(build_covariance_from_AU(e.a, e.u));
      worst = std::max({worst, max_abs(x.a - e.a), max_abs(x.u - e.u)});
    }
    const double secs = seconds_since(t0);
    return std::vector<Clause>{
        {"max |error| <= 1e-10", worst <= kRoundTripTol, fmt("%.3e", worst)},
        {"100 ensembles < 5 s", secs < kRoundTripSeconds, fmt("%.3f s", secs)}};
  });

  guarded(2, "ideal nullifier identity", [&] {
    double worst = 0.0;
    for (const auto& e : ensembles) {
      const NullifierReport r = nullifier_variances(build_covariance_from_AU(e.a, e.u), e.a);
      for (int i = 0; i < 50; ++i) worst = std::max(worst, std::abs(r.variances[i] - 0.5 * e.u(i, i)));
    }
    return std::vector<Clause>{{"max |dN^2 - U_ii/2| <= 1e-9", worst <= kIdentityTol, fmt("%.3e", worst)}};
  });

  guarded(3, "two-mode squeezer oracle", [&] {
    std::vector<Clause> out;
    Matrix pair_a(2, 2);
    pair_a << 0, 1, 1, 0;
    for (double r : {0.2, 0.5, 1.0}) {
      const PumpScheme s = single_pump_scheme(3, r);
      const CovarianceMatrix v =
          evolve(vacuum(s.basis), s, 1.0).cov.reordered(Ordering::quadrature_blocked);
      // Blocked rows: x_{-1}, x_0, x_{+1}, p_{-1}, p_0, p_{+1}; the tone couples -1 and +1.
      Matrix expect = 0.5 * Matrix::Identity(6, 6);
      const double ch = 0.5 * std::cosh(2 * r), sh = 0.5 * std::sinh(2 * r);
      for (int m : {0, 2}) expect(m, m) = expect(3 + m, 3 + m) = ch;
      expect(0, 5) = expect(5, 0) = -sh;
      expect(2, 3) = expect(3, 2) = -sh;
      const double cov_err = max_abs(v.entries() - expect);

      const int idx[4] = {0, 2, 3, 5};
      Matrix sub(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sub(i, j) = v(idx[i], idx[j]);
      const SweepResult sw =
          nullifier_sweep(CovarianceMatrix(sub, Ordering::quadrature_blocked), pair_a, theta_grid(180));
      const double sweep_err = std::abs(sw.min_value - std::exp(-2 * r));
      out.push_back({"r = " + fmt("%.1f", r) + " covariance", cov_err <= kTmsvCovTol, fmt("%.3e", cov_err)});
      out.push_back({"r = " + fmt("%.1f", r) + " sweep min = e^-2r", sweep_err <= kTmsvSweepTol,
                     fmt("%.3e", sweep_err)});
    }
    return out;
  });

  guarded(4, "symplectic soundness", [&] {
    std::vector<Clause> out;
    const std::vector<std::pair<std::string, PumpScheme>> cases = {
        {"square(25,5) g=0.5", square_scheme(25, 5, 0.5)},
        {"honeycomb(50,10) g=0.4", honeycomb_scheme(50, 10, 0.4)},
        {"single_pump(9) g=1.0", single_pump_scheme(9, 1.0)},
        {"square(191,11) g=0.3", square_scheme(191, 11, 0.3)},
    };
    for (const auto& [name, s] : cases) {
      const double res = symplectic_residual(symplectic_evolution(coupling_matrix(s), 1.0));
      const auto nu = symplectic_eigenvalues(evolve(vacuum(s.basis), s, 1.0).cov);
      double dev = 0.0;
      for (double v : nu) dev = std::max(dev, std::abs(v - 0.5));
      out.push_back({name + " residual", res <= kSymplecticTol, fmt("%.3e", res)});
      out.push_back({name + " |nu - 1/2|", dev <= kNuTol, fmt("%.3e", dev)});
    }
    return out;
  });

  guarded(5, "weak-pump graph recovery", [&] {
    std::vector<Clause> out;
    const std::vector<std::pair<std::string, PumpScheme>> cases = {
        {"square(25,5)", square_scheme(25, 5, 0.05)},
        {"honeycomb(50,10)", honeycomb_scheme(50, 10, 0.05)},
    };
    for (const auto& [name, s] : cases) {
      const CovarianceMatrix v = evolve(vacuum(s.basis), s, 1.0).cov;
      const AUExtraction x = extract_AU(v);
      const AdjacencyMatrix target = signed_expected_adjacency(s);
      const AdjacencyMatrix got = normalize_adjacency(x.a, 0.5, target.labeling());
      const bool support = (got.entries().cwiseAbs() - target.entries().cwiseAbs()).cwiseAbs().maxCoeff() == 0.0;
      const bool exact = (got.entries() - target.entries()).cwiseAbs().maxCoeff() == 0.0;
      out.push_back({name + " support equals target", support, support ? "equal" : "differs"});
      out.push_back({name + " signed adjacency equals target", exact, exact ? "equal" : "differs"});
      if (s.target.kind == LatticeKind::honeycomb) {
        const GraphStats st = graph_stats(got);
        out.push_back({name + " 2 components", st.component_count == 2,
                       std::to_string(st.component_count) + " components"});
        out.push_back({name + " bipartite", st.bipartite,
                       st.bipartite ? "bipartite" : "odd cycle through the boundary cap edges"});
      }
    }
    return out;
  });

  guarded(6, "loss-induced optimum over a 15-point ladder", [&] {
    cli::RunConfig cfg = square25();
    std::vector<double> ratios(15);
    for (int k = 0; k < 15; ++k) ratios[k] = 0.02 + (0.5 - 0.02) * k / 14.0;
    std::vector<double> lossy, lossless;
    for (double ratio : ratios) {
      const PumpScheme s = cfg.scheme_for_ratio(ratio);
      cfg.eta = 0.9;
      lossy.push_back(sweep_min(cli::simulate_state(cfg, ratio).cov, s));
      cfg.eta = 1.0;
      lossless.push_back(sweep_min(cli::simulate_state(cfg, ratio).cov, s));
    }
    const auto arg = std::min_element(lossy.begin(), lossy.end()) - lossy.begin();
    const bool interior = arg > 0 && arg < 14;
    int first_rise = -1;
    for (int k = 1; k < 15 && first_rise < 0; ++k)
      if (lossless[k] >= lossless[k - 1]) first_rise = k;
    std::string curve;
    for (int k = 0; k < 15; ++k) curve += fmt(k ? " %.4f" : "%.4f", lossless[k]);
    return std::vector<Clause>{
        {"eta = 0.9 interior minimum", interior,
         "argmin at g_tau = " + fmt("%.4f", cfg.g_tau_for(ratios[arg])) + ", value " + fmt("%.4f", lossy[arg])},
        {"lossless monotone decreasing", first_rise < 0,
         first_rise < 0 ? "monotone"
                        : "rises after g_tau = " + fmt("%.4f", cfg.g_tau_for(ratios[first_rise - 1])) +
                              "; curve " + curve}};
  });

  guarded(7, "hidden entanglement ratio", [&] {
    Matrix diag = Matrix::Zero(25, 25);
    diag.diagonal().setLinSpaced(25, 0.1, 2.0);
    const double h0 = her(diag, 5, LatticeKind::square).value;
    // N = 10, offsets {+-2, +-6}; a single pair at (0, 2): each of k = +-2 adds (10/8) u / 10.
    const double u = 0.37;
    Matrix m = Matrix::Identity(10, 10);
    m(0, 2) = m(2, 0) = u;
    const double hand = her(m, 3, LatticeKind::square).value;
    const double expect = 2.0 * (10.0 / 8.0) * u / 10.0;
    const auto her_at = [](double g_tau) {
      const PumpScheme s = square_scheme(25, 5, g_tau);
      const CovarianceMatrix v = evolve(vacuum(s.basis), s, 1.0).cov;
      const SweepResult sw = nullifier_sweep(v, signed_expected_adjacency(s), theta_grid(180));
      return her(extract_AU(rotate_global(v, sw.theta_opt)).u, 5, LatticeKind::square).value;
    };
    const double lo = her_at(0.1), hi = her_at(0.8);
    return std::vector<Clause>{
        {"diagonal U gives 0", h0 == 0.0, fmt("%.3e", h0)},
        {"single-pair example", std::abs(hand - expect) <= kHerHandTol, fmt("|diff| = %.3e", std::abs(hand - expect))},
        {"HER(0.8) > HER(0.1)", hi > lo, fmt("%.4f", hi) + " vs " + fmt("%.4f", lo)}};
  });

  guarded(8, "estimator end to end (square 25, M = 1e5)", [&] {
    const auto t0 = Clock::now();
    cli::RunConfig cfg = square25();
    cfg.eta = 0.9;
    cfg.windows = 100000;
    cfg.jackknife_blocks = 0;
    cfg.chain.added_noise_photons = {14.0};
    cfg.chain.gain_db = 40.0;
    cfg.chain.tau_d_rad_per_mhz = 1.89;
    cfg.chain.seed = 1;
    const double ratio = 0.19;
    const PumpScheme s = cfg.scheme_for_ratio(ratio);
    const GaussianState truth = cli::simulate_state(cfg, ratio);
    const cli::EstimationOutcome est = cli::simulate_measurement(cfg, truth, cfg.chain.seed);
    const double secs = seconds_since(t0);

    // Sample-covariance spread of Gaussian windows whose covariance is V + n_add/2 per quadrature.
    const Matrix& v = truth.cov.entries();
    const Matrix t = v + 7.0 * Matrix::Identity(v.rows(), v.cols());
    const Matrix got = est.corrected.reordered(truth.cov.ordering()).entries();
    double worst_z = 0.0;
    for (int a = 0; a < v.rows(); ++a)
      for (int b = 0; b < v.cols(); ++b) {
        const double sigma = std::sqrt((t(a, a) * t(b, b) + t(a, b) * t(a, b)) / (cfg.windows - 1.0));
        worst_z = std::max(worst_z, std::abs(got(a, b) - v(a, b)) / sigma);
      }
    const double db_true = squeezing_db(sweep_min(truth.cov, s));
    const double db_raw = squeezing_db(sweep_min(est.corrected, s));
    const double db_proj = squeezing_db(sweep_min(est.projection.cov, s));
    return std::vector<Clause>{
        {"element-wise within 5 sigma", worst_z <= kSigmaBand, fmt("max |z| = %.2f", worst_z)},
        {"min nullifier within 0.1 dB", std::abs(db_raw - db_true) <= kDbTol,
         fmt("%.3f dB", db_raw) + " vs truth " + fmt("%.3f dB", db_true)},
        {"projected nu_min >= 1/2 - 1e-8", est.projection.min_symplectic >= 0.5 - kProjectionNuTol,
         fmt("%.10f", est.projection.min_symplectic)},
        {"with/without projection within 0.05 dB", std::abs(db_proj - db_raw) <= kProjectionDbTol,
         fmt("%.3f dB", db_proj) + " vs " + fmt("%.3f dB", db_raw) +
             fmt(" (projection moved V by %.3f in Frobenius norm)", est.projection.distance)},
        {"runtime < 120 s", secs < kEstimatorSeconds, fmt("%.2f s", secs)}};
  });

  guarded(9, "rotation properties", [&] {
    const PumpScheme s = square_scheme(25, 5, 0.3);
    const CovarianceMatrix v = apply_loss(evolve(vacuum(s.basis), s, 1.0), 0.8).cov;
    const AdjacencyMatrix a = signed_expected_adjacency(s);
    const std::vector<double> grid = theta_grid(180);
    std::vector<double> shifted(grid);
    for (double& th : shifted) th += M_PI;
    const SweepResult s0 = nullifier_sweep(v, a, grid), s1 = nullifier_sweep(v, a, shifted);
    double period = 0.0, flat = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) period = std::max(period, std::abs(s0.values[k] - s1.values[k]));
    const SweepResult vac = nullifier_sweep(vacuum(s.basis).cov, a, grid);
    for (double val : vac.values) flat = std::max(flat, std::abs(val - 1.0));
    return std::vector<Clause>{{"pi-periodicity residual", period <= kPeriodicityTol, fmt("%.3e", period)},
                               {"vacuum sweep flat at 1", flat <= kVacuumFlatTol, fmt("%.3e", flat)}};
  });

  guarded(10, "scale and throughput at N = 191", [&] {
    const PumpScheme s = square_scheme(191, 11, 0.3);
    const GaussianState st = apply_loss(evolve(vacuum(s.basis), s, 1.0), 0.9);
    const auto t0 = Clock::now();
    const SweepResult sw = nullifier_sweep(st.cov, signed_expected_adjacency(s), theta_grid(180));
    const AUExtraction x = extract_AU(rotate_global(st.cov, sw.theta_opt));
    const HERReport h = her(x.u, 11, LatticeKind::square);
    const double analysis_secs = seconds_since(t0);
    (void)h;

    constexpr std::int64_t kWindows = 50000;
    ChainConfig chain;
    WindowGenerator gen(st, kWindows, chain);
    std::vector<Matrix> blocks;
    const auto tg = Clock::now();
    Matrix block;
    while (gen.next_block(block) > 0) blocks.push_back(block);
    const double gen_rate = kWindows / seconds_since(tg);
    CovarianceAccumulator acc(gen.dimension());
    const auto ta = Clock::now();
    for (const Matrix& b : blocks) acc.add_block(b);
    const double acc_rate = kWindows / seconds_since(ta);
    return std::vector<Clause>{
        {"extract + 180-point sweep + HER < 10 s", analysis_secs < kAnalysisSeconds, fmt("%.3f s", analysis_secs)},
        {"streaming estimation >= 1e4 windows/s", acc_rate >= kMinWindowsPerSecond,
         fmt("%.3g windows/s", acc_rate) + fmt(" (generation %.3g windows/s)", gen_rate)}};
  });

  guarded(11, "byte-identical reports across runs", [&] {
    cli::RunConfig cfg = square25();
    cfg.pump_ratios = {0.1, 0.19, 0.3};
    cfg.eta = 0.9;
    cfg.windows = 20000;
    cfg.jackknife_blocks = 5;
    cfg.output_dir = (fs::temp_directory_path() / "cvcluster_acceptance_determinism").string();
    fs::remove_all(cfg.output_dir);
    cli::cmd_pipeline(cfg);
    const auto first = snapshot(cfg.output_dir);
    fs::remove_all(cfg.output_dir);
    cli::cmd_pipeline(cfg);
    const auto second = snapshot(cfg.output_dir);
    fs::remove_all(cfg.output_dir);
    return std::vector<Clause>{{"all files identical", !first.empty() && first == second,
                                std::to_string(first.size()) + " files compared"}};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

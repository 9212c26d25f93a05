#include "cvcluster/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "cvcluster/error.hpp"

namespace cvc {

AUExtraction extract_AU(const CovarianceMatrix& cov) {
  const CovarianceMatrix blocked = cov.reordered(Ordering::quadrature_blocked);
  const int n = blocked.n_modes();
  Matrix vxx = blocked.xx();
  const Matrix vxp = blocked.xp();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(vxx, Eigen::EigenvaluesOnly);
  require(eig.info() == Eigen::Success, ErrorKind::numerical, "V_xx eigendecomposition failed");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  require(hi > 0.0, ErrorKind::numerical, "V_xx has no positive eigenvalue");

  AUExtraction out;
  out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= kMaxExtractionCondition)) {
    out.regularized = true;
    out.ridge = 1e-12 * vxx.trace() / n;
    vxx += out.ridge * Matrix::Identity(n, n);
  }

  Eigen::LDLT<Matrix> ldlt(vxx);
  require(ldlt.info() == Eigen::Success, ErrorKind::numerical, "V_xx is not invertible");
  Matrix u = 0.5 * ldlt.solve(Matrix::Identity(n, n));
  u = 0.5 * (u + u.transpose()).eval();
  const Matrix a = 2.0 * u * vxp;
  out.asymmetry = n > 0 ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  out.a = 0.5 * (a + a.transpose());
  out.u = std::move(u);
  require(out.a.allFinite() && out.u.allFinite(), ErrorKind::numerical,
          "non-finite adjacency extraction");
  return out;
}

AdjacencyMatrix normalize_adjacency(const Matrix& weighted, double threshold, OffsetKind labeling) {
  require(threshold > 0.0 && threshold < 1.0, ErrorKind::invalid_argument,
          "normalization threshold must lie in (0, 1)");
  require(weighted.rows() == weighted.cols(), ErrorKind::invalid_argument,
          "adjacency must be square");
  const int n = static_cast<int>(weighted.rows());
  Matrix off = 0.5 * (weighted + weighted.transpose());
  off.diagonal().setZero();
  const double peak = n > 0 ? off.cwiseAbs().maxCoeff() : 0.0;
  Matrix out = Matrix::Zero(n, n);
  if (peak > 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && std::abs(off(i, j)) >= threshold * peak) out(i, j) = off(i, j) > 0 ? 1.0 : -1.0;
      }
    }
  }
  return AdjacencyMatrix(std::move(out), labeling);
}

namespace {

// Per-mode second moments of a_i = p_i - (A x)_i and b_i = x_i + (A p)_i.
struct QuadraticForms {
  Vector aa, ab, bb, ref;
};

Vector diag_of_product(const Matrix& left, const Matrix& right) {
  // diag(left * right^T)
  return left.cwiseProduct(right).rowwise().sum();
}

QuadraticForms quadratic_forms(const CovarianceMatrix& cov, const Matrix& a) {
  const int n = cov.n_modes();
  require(a.rows() == n && a.cols() == n, ErrorKind::invalid_argument,
          "adjacency size does not match covariance");
  const CovarianceMatrix blocked = cov.reordered(Ordering::quadrature_blocked);
  const Matrix vxx = blocked.xx();
  const Matrix vxp = blocked.xp();
  const Matrix vpp = blocked.pp();

  const Matrix a_vxx = a * vxx;
  const Matrix a_vpp = a * vpp;
  const Matrix a_vxp = a * vxp;          // (A Vxp)_ij
  const Matrix a_vpx = a * vxp.transpose();

  QuadraticForms q;
  // Var(p_i) - 2 Cov(p_i, (Ax)_i) + Var((Ax)_i)
  q.aa = vpp.diagonal() - 2.0 * a_vxp.diagonal() + diag_of_product(a_vxx, a);
  // Var(x_i) + 2 Cov(x_i, (Ap)_i) + Var((Ap)_i)
  q.bb = vxx.diagonal() + 2.0 * a_vpx.diagonal() + diag_of_product(a_vpp, a);
  // Cov(p_i, x_i) + Cov(p_i, (Ap)_i) - Cov((Ax)_i, x_i) - Cov((Ax)_i, (Ap)_i)
  q.ab = vxp.diagonal() + a_vpp.diagonal() - a_vxx.diagonal() - diag_of_product(a_vxp, a);
  q.ref = 0.5 * (Vector::Ones(n) + a.cwiseAbs2().rowwise().sum());
  return q;
}

NullifierReport report_at(const QuadraticForms& q, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Eigen::Index n = q.aa.size();
  require(n > 0, ErrorKind::invalid_argument, "nullifiers need at least one mode");
  NullifierReport r;
  r.theta = theta;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = c * c * q.aa(i) + 2.0 * c * s * q.ab(i) + s * s * q.bb(i);
    r.variances.push_back(var);
    r.references.push_back(q.ref(i));
    r.normalized.push_back(var / q.ref(i));
    sum += var / q.ref(i);
  }
  r.mean_normalized = sum / static_cast<double>(n);
  r.db = r.mean_normalized > 0.0 ? 10.0 * std::log10(r.mean_normalized)
                                 : -std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace

NullifierReport nullifier_variances(const CovarianceMatrix& cov, const Matrix& a) {
  return report_at(quadratic_forms(cov, a), 0.0);
}

NullifierReport nullifier_variances(const CovarianceMatrix& cov, const AdjacencyMatrix& a) {
  return nullifier_variances(cov, a.entries());
}

std::vector<double> theta_grid(int points) {
  require(points >= 1, ErrorKind::invalid_argument, "theta grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid[k] = std::numbers::pi * k / points;
  return grid;
}

SweepResult nullifier_sweep(const CovarianceMatrix& cov, const Matrix& a,
                            const std::vector<double>& thetas) {
  require(!thetas.empty(), ErrorKind::invalid_argument, "theta grid is empty");
  const QuadraticForms q = quadratic_forms(cov, a);
  const double n = static_cast<double>(q.aa.size());
  const double ma = q.aa.cwiseQuotient(q.ref).sum() / n;
  const double mb = q.bb.cwiseQuotient(q.ref).sum() / n;
  const double mab = q.ab.cwiseQuotient(q.ref).sum() / n;

  SweepResult out;
  out.thetas = thetas;
  out.values.reserve(thetas.size());
  double best = std::numeric_limits<double>::infinity();
  for (double t : thetas) {
    require(std::isfinite(t), ErrorKind::invalid_argument, "theta must be finite");
    const double c = std::cos(t), s = std::sin(t);
    const double v = c * c * ma + 2.0 * c * s * mab + s * s * mb;
    out.values.push_back(v);
    if (v < best) {
      best = v;
      out.grid_argmin = t;
    }
  }

  // f = P + Q cos 2t + R sin 2t
  const double p = 0.5 * (ma + mb);
  const double qc = 0.5 * (ma - mb);
  const double rs = mab;
  const double amp = std::hypot(qc, rs);
  double t_opt = amp > 0.0 ? 0.5 * std::atan2(-rs, -qc) : 0.0;
  if (t_opt < 0.0) t_opt += std::numbers::pi;
  if (t_opt >= std::numbers::pi) t_opt -= std::numbers::pi;
  out.theta_opt = t_opt;
  out.min_value = p - amp;
  out.max_value = p + amp;
  return out;
}

SweepResult nullifier_sweep(const CovarianceMatrix& cov, const AdjacencyMatrix& a,
                            const std::vector<double>& thetas) {
  return nullifier_sweep(cov, a.entries(), thetas);
}

double squeezing_db(double normalized_variance) {
  require(std::isfinite(normalized_variance) && normalized_variance > 0.0,
          ErrorKind::invalid_argument, "squeezing needs a positive variance ratio");
  return 10.0 * std::log10(normalized_variance);
}

std::vector<int> her_offsets(LatticeKind kind, int n_x) {
  std::vector<int> base;
  switch (kind) {
    case LatticeKind::square:
      base = {2, 2 * n_x};
      break;
    case LatticeKind::honeycomb:
      base = {2, n_x - 2, n_x};
      break;
    case LatticeKind::single_pump:
      base = {2};
      break;
  }
  std::set<int> uniq;
  for (int k : base) {
    if (k == 0) continue;
    uniq.insert(k);
    uniq.insert(-k);
  }
  return {uniq.begin(), uniq.end()};
}

HERReport her(const Matrix& u, const std::vector<int>& offsets) {
  require(u.rows() == u.cols() && u.rows() > 0, ErrorKind::invalid_argument,
          "U must be a non-empty square matrix");
  const int n = static_cast<int>(u.rows());
  const double trace = u.trace();
  require(std::isfinite(trace) && trace > 0.0, ErrorKind::numerical, "Tr U must be positive");
  HERReport out;
  std::set<int> seen;
  for (int k : offsets) {
    require(k != 0, ErrorKind::invalid_argument, "offset 0 is the diagonal");
    require(std::abs(k) < n, ErrorKind::invalid_argument,
            "offset " + std::to_string(k) + " does not fit a " + std::to_string(n) + "-mode U");
    if (!seen.insert(k).second) continue;
    double sum = 0.0;
    for (int i = std::max(0, -k); i < std::min(n, n - k); ++i) sum += std::abs(u(i, i + k));
    const double c = static_cast<double>(n) / static_cast<double>(n - std::abs(k)) * sum / trace;
    out.offsets.push_back(k);
    out.contributions.push_back(c);
    out.value += c;
  }
  return out;
}

HERReport her(const Matrix& u, int n_x, LatticeKind kind) {
  HERReport out = her(u, her_offsets(kind, n_x));
  out.kind = kind;
  out.n_x = n_x;
  return out;
}

std::vector<CovPosition> canonical_positions(const AdjacencyMatrix& target) {
  const int n = target.n();
  std::vector<CovPosition> out;
  for (const Edge& e : target.edges()) {
    out.push_back({e.row_i, n + e.row_j});
    out.push_back({e.row_j, n + e.row_i});
  }
  return out;
}

std::vector<CovPosition> hidden_positions(const AdjacencyMatrix& target, LatticeKind kind, int n_x) {
  const int n = target.n();
  std::vector<CovPosition> out;
  for (int k : her_offsets(kind, n_x)) {
    if (k <= 0 || k >= n) continue;
    for (int i = 0; i + k < n; ++i) {
      if (target(i, i + k) != 0.0) continue;
      out.push_back({i, i + k});
    }
  }
  return out;
}

double canonical_hidden_ratio(const CovarianceMatrix& cov, const std::vector<CovPosition>& canonical,
                              const std::vector<CovPosition>& hidden) {
  require(!canonical.empty(), ErrorKind::invalid_argument, "no canonical positions");
  require(!hidden.empty(), ErrorKind::invalid_argument, "no hidden positions");
  const CovarianceMatrix blocked = cov.reordered(Ordering::quadrature_blocked);
  const int dim = 2 * blocked.n_modes();
  const auto mean_abs = [&](const std::vector<CovPosition>& pos) {
    double s = 0.0;
    for (const CovPosition& p : pos) {
      require(p.row >= 0 && p.row < dim && p.col >= 0 && p.col < dim,
              ErrorKind::invalid_argument, "covariance position out of range");
      s += std::abs(blocked(p.row, p.col));
    }
    return s / static_cast<double>(pos.size());
  };
  for (const CovPosition& h : hidden) {
    for (const CovPosition& c : canonical) {
      require(!(h == c), ErrorKind::invalid_argument, "hidden and canonical positions overlap");
    }
  }
  const double can = mean_abs(canonical);
  require(can > 0.0, ErrorKind::numerical, "canonical correlations vanish");
  return mean_abs(hidden) / can;
}

JackknifeEstimate nullifier_jackknife(const std::vector<CovarianceMatrix>& block_covs,
                                      const Matrix& a, double theta) {
  const std::size_t b = block_covs.size();
  require(b >= 2, ErrorKind::invalid_argument, "jackknife needs at least two blocks");
  const Ordering ord = block_covs.front().ordering();
  Matrix total = Matrix::Zero(block_covs.front().entries().rows(), block_covs.front().entries().cols());
  for (const CovarianceMatrix& c : block_covs) {
    require(c.n_modes() == block_covs.front().n_modes(), ErrorKind::invalid_argument,
            "block covariances differ in size");
    total += c.reordered(ord).entries();
  }
  const auto value_of = [&](const Matrix& v) {
    return report_at(quadratic_forms(CovarianceMatrix(v, ord), a), theta).mean_normalized;
  };

  JackknifeEstimate out;
  out.value = value_of(total / static_cast<double>(b));
  std::vector<double> loo(b);
  double mean = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    loo[k] = value_of((total - block_covs[k].reordered(ord).entries()) / static_cast<double>(b - 1));
    mean += loo[k];
  }
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.standard_error = std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
  out.sigmas_below_vacuum = out.standard_error > 0.0 ? (1.0 - out.value) / out.standard_error
                                                     : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace cvc

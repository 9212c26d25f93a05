#include "cvcluster/lattice.hpp"

#include <cmath>
#include <queue>
#include <sstream>

#include "cvcluster/error.hpp"

namespace cvc {

ModeBasis::ModeBasis(int count, double spacing_hz, double center_hz, OffsetKind offset_kind)
    : count_(count), spacing_hz_(spacing_hz), center_hz_(center_hz), offset_kind_(offset_kind) {
  require(count >= 1, ErrorKind::invalid_spec, "mode count must be positive");
  require(std::isfinite(spacing_hz) && spacing_hz > 0.0, ErrorKind::invalid_spec,
          "comb spacing must be positive");
  require(std::isfinite(center_hz), ErrorKind::invalid_spec, "center frequency must be finite");
  if (offset_kind == OffsetKind::integer) {
    require(count % 2 == 1, ErrorKind::invalid_spec, "integer comb needs an odd mode count");
  } else {
    require(count % 2 == 0, ErrorKind::invalid_spec, "half-integer comb needs an even mode count");
  }
  require(frequency_hz(min_index()) > 0.0, ErrorKind::invalid_spec,
          "lowest comb frequency must be positive");
}

int ModeBasis::min_index() const {
  return offset_kind_ == OffsetKind::integer ? -(count_ - 1) / 2 : -count_ / 2;
}

int ModeBasis::max_index() const {
  return offset_kind_ == OffsetKind::integer ? (count_ - 1) / 2 : count_ / 2;
}

bool ModeBasis::contains(int index) const {
  if (index < min_index() || index > max_index()) return false;
  return offset_kind_ == OffsetKind::integer || index != 0;
}

int ModeBasis::row(int index) const {
  require(contains(index), ErrorKind::invalid_argument,
          "mode index " + std::to_string(index) + " outside the comb");
  return index_to_row(count_, offset_kind_, index);
}

int ModeBasis::index_at(int row) const { return row_to_index(count_, offset_kind_, row); }

std::vector<int> ModeBasis::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count_));
  for (int r = 0; r < count_; ++r) out.push_back(index_at(r));
  return out;
}

int ModeBasis::doubled_offset(int index) const {
  require(contains(index), ErrorKind::invalid_argument,
          "mode index " + std::to_string(index) + " outside the comb");
  if (offset_kind_ == OffsetKind::integer) return 2 * index;
  return index > 0 ? 2 * index - 1 : 2 * index + 1;
}

double ModeBasis::frequency_hz(int index) const {
  return center_hz_ + 0.5 * static_cast<double>(doubled_offset(index)) * spacing_hz_;
}

bool ModeBasis::commensurate() const {
  const double ratio = 2.0 * center_hz_ / spacing_hz_;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, std::abs(ratio))) return false;
  const bool odd = std::fmod(std::abs(nearest), 2.0) == 1.0;
  return offset_kind_ == OffsetKind::half_integer ? odd : !odd;
}

double mode_frequency(const ModeBasis& basis, int index) { return basis.frequency_hz(index); }

int index_to_row(int n, OffsetKind kind, int index) {
  if (kind == OffsetKind::integer) return index + (n - 1) / 2;
  return index < 0 ? index + n / 2 : index + n / 2 - 1;
}

int row_to_index(int n, OffsetKind kind, int row) {
  require(row >= 0 && row < n, ErrorKind::invalid_argument, "row out of range");
  if (kind == OffsetKind::integer) return row - (n - 1) / 2;
  return row < n / 2 ? row - n / 2 : row - n / 2 + 1;
}

void LatticeSpec::validate() const {
  require(n >= 2, ErrorKind::invalid_spec, "lattice needs at least two modes");
  if (kind == LatticeKind::single_pump) {
    require(n % 2 == 1, ErrorKind::invalid_spec, "single-pump comb needs an odd mode count");
    return;
  }
  require(n_x >= 2, ErrorKind::invalid_spec, "lattice width n_x must be at least 2");
  require(n >= 2 * n_x, ErrorKind::invalid_spec, "lattice needs at least two rows (n >= 2 n_x)");
  if (kind == LatticeKind::square) {
    require(n % 2 == 1, ErrorKind::invalid_spec, "square lattice needs an odd mode count");
  } else {
    require(n % 2 == 0, ErrorKind::invalid_spec, "honeycomb lattice needs an even mode count");
  }
}

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::square: return "square";
    case LatticeKind::honeycomb: return "honeycomb";
    case LatticeKind::single_pump: return "single_pump";
  }
  return "unknown";
}

LatticeKind lattice_kind_from_string(const std::string& name) {
  if (name == "square") return LatticeKind::square;
  if (name == "honeycomb") return LatticeKind::honeycomb;
  if (name == "single_pump") return LatticeKind::single_pump;
  fail(ErrorKind::invalid_spec, "unknown lattice kind '" + name + "'");
}

std::string to_string(OffsetKind kind) {
  return kind == OffsetKind::integer ? "integer" : "half_integer";
}

OffsetKind offset_kind_from_string(const std::string& name) {
  if (name == "integer") return OffsetKind::integer;
  if (name == "half_integer") return OffsetKind::half_integer;
  fail(ErrorKind::invalid_spec, "unknown offset kind '" + name + "'");
}

AdjacencyMatrix::AdjacencyMatrix(Matrix entries, OffsetKind labeling)
    : entries_(std::move(entries)), labeling_(labeling) {
  require(entries_.rows() == entries_.cols(), ErrorKind::invalid_argument,
          "adjacency matrix must be square");
  const int n = static_cast<int>(entries_.rows());
  if (labeling_ == OffsetKind::integer) {
    require(n % 2 == 1, ErrorKind::invalid_argument, "integer labeling needs odd N");
  } else {
    require(n % 2 == 0, ErrorKind::invalid_argument, "half-integer labeling needs even N");
  }
  for (int i = 0; i < n; ++i) {
    require(entries_(i, i) == 0.0, ErrorKind::invalid_argument, "adjacency diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      require(entries_(i, j) == entries_(j, i), ErrorKind::invalid_argument,
              "adjacency matrix must be symmetric");
    }
  }
}

AdjacencyMatrix AdjacencyMatrix::zeros(int n, OffsetKind labeling) {
  return AdjacencyMatrix(Matrix::Zero(n, n), labeling);
}

bool AdjacencyMatrix::is_normalized() const {
  return (entries_.array() == 0.0 || entries_.array() == 1.0 || entries_.array() == -1.0).all();
}

std::vector<Edge> AdjacencyMatrix::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < n(); ++i) {
    for (int j = i + 1; j < n(); ++j) {
      if (entries_(i, j) != 0.0) out.push_back({i, j, entries_(i, j)});
    }
  }
  return out;
}

AdjacencyMatrix AdjacencyMatrix::support() const {
  return AdjacencyMatrix((entries_.array() != 0.0).cast<double>().matrix(), labeling_);
}

bool AdjacencyMatrix::operator==(const AdjacencyMatrix& other) const {
  return labeling_ == other.labeling_ && entries_.rows() == other.entries_.rows() &&
         entries_ == other.entries_;
}

namespace {

void link(Matrix& a, int i, int j) {
  if (i == j) return;
  a(i, j) = 1.0;
  a(j, i) = 1.0;
}

// Links every pair whose doubled offsets sum to 2k for some k in `offsets`.
AdjacencyMatrix pair_by_frequency_sum(int n, OffsetKind kind, const std::vector<int>& offsets) {
  const ModeBasis basis(n, 1.0, static_cast<double>(n + 1), kind);
  Matrix a = Matrix::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const int m = basis.index_at(r);
    for (int k : offsets) {
      // Partner doubled offset d' = 2k - d(m).
      const int partner_doubled = 2 * k - basis.doubled_offset(m);
      int partner = 0;
      if (kind == OffsetKind::integer) {
        partner = partner_doubled / 2;
      } else {
        // d = 2m-1 (m>0) or 2m+1 (m<0); d is always odd here.
        partner = partner_doubled > 0 ? (partner_doubled + 1) / 2 : (partner_doubled - 1) / 2;
      }
      if (basis.contains(partner)) link(a, r, basis.row(partner));
    }
  }
  return AdjacencyMatrix(std::move(a), kind);
}

}  // namespace

AdjacencyMatrix build_square_adjacency(const LatticeSpec& spec) {
  require(spec.kind == LatticeKind::square, ErrorKind::invalid_spec, "expected a square spec");
  spec.validate();
  const int half = (spec.n - 1) / 2;
  Matrix a = Matrix::Zero(spec.n, spec.n);
  for (int m = -half; m <= half; ++m) {
    for (int partner : {-m + 1, -m - 1, -m + spec.n_x, -m - spec.n_x}) {
      if (partner < -half || partner > half) continue;
      link(a, m + half, partner + half);
    }
  }
  return AdjacencyMatrix(std::move(a), OffsetKind::integer);
}

AdjacencyMatrix build_honeycomb_adjacency(const LatticeSpec& spec) {
  require(spec.kind == LatticeKind::honeycomb, ErrorKind::invalid_spec,
          "expected a honeycomb spec");
  spec.validate();
  return pair_by_frequency_sum(spec.n, OffsetKind::half_integer, {1, -1, spec.n_x - 1});
}

AdjacencyMatrix build_single_pump_adjacency(const LatticeSpec& spec) {
  require(spec.kind == LatticeKind::single_pump, ErrorKind::invalid_spec,
          "expected a single-pump spec");
  spec.validate();
  return pair_by_frequency_sum(spec.n, OffsetKind::integer, {0});
}

AdjacencyMatrix build_adjacency(const LatticeSpec& spec) {
  switch (spec.kind) {
    case LatticeKind::square: return build_square_adjacency(spec);
    case LatticeKind::honeycomb: return build_honeycomb_adjacency(spec);
    case LatticeKind::single_pump: return build_single_pump_adjacency(spec);
  }
  fail(ErrorKind::invalid_spec, "unknown lattice kind");
}

GraphStats graph_stats(const AdjacencyMatrix& adjacency) {
  const int n = adjacency.n();
  GraphStats stats;
  stats.degrees.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(n));
  for (const Edge& e : adjacency.edges()) {
    neighbours[e.row_i].push_back(e.row_j);
    neighbours[e.row_j].push_back(e.row_i);
    ++stats.degrees[e.row_i];
    ++stats.degrees[e.row_j];
  }

  std::vector<int> colour(static_cast<std::size_t>(n), -1);
  for (int start = 0; start < n; ++start) {
    if (colour[start] != -1) continue;
    ++stats.component_count;
    colour[start] = 0;
    std::queue<int> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : neighbours[v]) {
        if (colour[w] == -1) {
          colour[w] = 1 - colour[v];
          frontier.push(w);
        } else if (colour[w] == colour[v]) {
          stats.bipartite = false;
        }
      }
    }
  }
  return stats;
}

GraphFormat graph_format_from_string(const std::string& name) {
  if (name == "dot") return GraphFormat::dot;
  if (name == "edge_csv" || name == "csv") return GraphFormat::edge_csv;
  fail(ErrorKind::invalid_argument, "unsupported graph format '" + name + "'");
}

namespace {

std::string weight_label(double w) {
  std::ostringstream out;
  out.precision(17);
  out << w;
  return out.str();
}

}  // namespace

std::string export_graph(const AdjacencyMatrix& adjacency, GraphFormat format) {
  std::ostringstream out;
  const auto edges = adjacency.edges();
  if (format == GraphFormat::edge_csv) {
    out << "i,j,weight\n";
    for (const Edge& e : edges) {
      out << adjacency.index_of_row(e.row_i) << ',' << adjacency.index_of_row(e.row_j) << ','
          << weight_label(e.weight) << '\n';
    }
    return out.str();
  }

  out << "graph cvcluster {\n";
  for (int r = 0; r < adjacency.n(); ++r) out << "  \"" << adjacency.index_of_row(r) << "\";\n";
  for (const Edge& e : edges) {
    out << "  \"" << adjacency.index_of_row(e.row_i) << "\" -- \""
        << adjacency.index_of_row(e.row_j) << "\" [weight=" << weight_label(e.weight)
        << (e.weight < 0.0 ? ", style=dashed" : "") << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace cvc

#pragma once

#include <string>
#include <vector>

#include "cvcluster/types.hpp"

namespace cvc {

/// How signed mode indices sit on the frequency comb.
///
/// `integer`: mode m at f0 + m*spacing, m in [-(N-1)/2, (N-1)/2], N odd.
/// `half_integer`: mode m at f0 + sign(m)(|m| - 1/2)*spacing, m in {+-1 .. +-N/2},
/// N even and no mode 0 (f0 sits between two comb lines).
enum class OffsetKind { integer, half_integer };

/// Equally spaced comb of qumodes around a center frequency.
///
/// Storage rows are assigned in ascending frequency order, so row 0 is the
/// most negative index and row N-1 the most positive one.
class ModeBasis {
 public:
  ModeBasis() = default;
  ModeBasis(int count, double spacing_hz, double center_hz, OffsetKind offset_kind);

  int count() const { return count_; }
  double spacing_hz() const { return spacing_hz_; }
  double center_hz() const { return center_hz_; }
  OffsetKind offset_kind() const { return offset_kind_; }

  int min_index() const;
  int max_index() const;
  bool contains(int index) const;

  int row(int index) const;
  int index_at(int row) const;
  std::vector<int> indices() const;

  /// Offset from the center in units of spacing, doubled so it is always an integer.
  int doubled_offset(int index) const;

  double frequency_hz(int index) const;

  /// True when 2*f0 is an integer multiple of the spacing (odd for half-integer
  /// combs, even for integer ones); pump tones are then commensurate with the window.
  bool commensurate() const;

  bool operator==(const ModeBasis&) const = default;

 private:
  int count_ = 1;
  double spacing_hz_ = 1.0;
  double center_hz_ = 1.0;
  OffsetKind offset_kind_ = OffsetKind::integer;
};

/// Absolute frequency (Hz) of a signed mode index.
double mode_frequency(const ModeBasis& basis, int index);

/// Row <-> signed index bijection for a given comb size and offset kind.
int index_to_row(int n, OffsetKind kind, int index);
int row_to_index(int n, OffsetKind kind, int row);

enum class LatticeKind { square, honeycomb, single_pump };

struct LatticeSpec {
  LatticeKind kind = LatticeKind::square;
  int n = 0;
  int n_x = 0;

  /// Throws invalid_spec on violated invariants. `single_pump` ignores n_x.
  void validate() const;

  OffsetKind offset_kind() const {
    return kind == LatticeKind::honeycomb ? OffsetKind::half_integer : OffsetKind::integer;
  }

  bool operator==(const LatticeSpec&) const = default;
};

std::string to_string(LatticeKind kind);
LatticeKind lattice_kind_from_string(const std::string& name);
std::string to_string(OffsetKind kind);
OffsetKind offset_kind_from_string(const std::string& name);

struct Edge {
  int row_i = 0;
  int row_j = 0;
  double weight = 0.0;
};

/// Symmetric N x N graph with zero diagonal; rows follow the ModeBasis ordering.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  AdjacencyMatrix(Matrix entries, OffsetKind labeling);

  static AdjacencyMatrix zeros(int n, OffsetKind labeling);

  int n() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  OffsetKind labeling() const { return labeling_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// Entries restricted to {0, +1, -1}.
  bool is_normalized() const;
  /// Upper-triangle edges (row_i < row_j), sorted by (row_i, row_j).
  std::vector<Edge> edges() const;
  int index_of_row(int row) const { return row_to_index(n(), labeling_, row); }

  /// 0/1 matrix of the edge support, signs dropped.
  AdjacencyMatrix support() const;

  bool operator==(const AdjacencyMatrix& other) const;

 private:
  Matrix entries_;
  OffsetKind labeling_ = OffsetKind::integer;
};

/// Square lattice on a chiral cylinder: m links to -m+-1 and -m+-N_x.
AdjacencyMatrix build_square_adjacency(const LatticeSpec& spec);

/// Honeycomb from the frequency-sum rule with pump offsets {+1, -1, N_x-1}
/// on a half-integer comb.
AdjacencyMatrix build_honeycomb_adjacency(const LatticeSpec& spec);

/// Independent two-mode pairs (m, -m); mode 0 stays isolated.
AdjacencyMatrix build_single_pump_adjacency(const LatticeSpec& spec);

AdjacencyMatrix build_adjacency(const LatticeSpec& spec);

struct GraphStats {
  std::vector<int> degrees;
  int component_count = 0;
  bool bipartite = true;
};

GraphStats graph_stats(const AdjacencyMatrix& adjacency);

enum class GraphFormat { dot, edge_csv };

GraphFormat graph_format_from_string(const std::string& name);

/// DOT or `i,j,weight` CSV with signed mode indices as node labels.
std::string export_graph(const AdjacencyMatrix& adjacency, GraphFormat format);

}  // namespace cvc

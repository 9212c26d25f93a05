#include "cvcluster/pumpsynth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"

namespace cvc {

double wrap_phase(double phase) {
  const double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(phase, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  if (wrapped >= two_pi) wrapped = 0.0;
  return wrapped;
}

void PumpScheme::validate() const {
  target.validate();
  require(basis.count() == target.n, ErrorKind::invalid_spec,
          "basis mode count does not match the target lattice");
  require(basis.offset_kind() == target.offset_kind(), ErrorKind::invalid_spec,
          "basis offset kind does not match the target lattice");
  std::set<int> seen;
  for (const PumpTone& tone : tones) {
    require(std::isfinite(tone.amplitude) && tone.amplitude >= 0.0, ErrorKind::invalid_spec,
            "pump amplitude must be finite and non-negative");
    require(std::isfinite(tone.phase), ErrorKind::invalid_spec, "pump phase must be finite");
    require(seen.insert(tone.k).second, ErrorKind::invalid_spec,
            "duplicate pump offset k=" + std::to_string(tone.k));
  }
}

PumpScheme square_scheme(int n, int n_x, double g, const CombGrid& grid) {
  const LatticeSpec spec{LatticeKind::square, n, n_x};
  spec.validate();
  require(g >= 0.0, ErrorKind::invalid_spec, "pump amplitude must be non-negative");
  PumpScheme scheme;
  scheme.basis = ModeBasis(n, grid.spacing_hz, grid.center_hz, OffsetKind::integer);
  scheme.target = spec;
  scheme.tones = {{+1, g, 0.0}, {-1, g, 0.0}, {+n_x, g, 0.0}, {-n_x, g, std::numbers::pi}};
  scheme.validate();
  return scheme;
}

PumpScheme honeycomb_scheme(int n, int n_x, double g, std::optional<int> pi_tone,
                            const CombGrid& grid) {
  const LatticeSpec spec{LatticeKind::honeycomb, n, n_x};
  spec.validate();
  require(n_x >= 3, ErrorKind::invalid_spec, "honeycomb scheme needs n_x >= 3");
  require(g >= 0.0, ErrorKind::invalid_spec, "pump amplitude must be non-negative");
  const int selector = pi_tone.value_or(n_x - 1);
  require(selector == 1 || selector == -1 || selector == n_x - 1, ErrorKind::invalid_spec,
          "pi_tone must be one of +1, -1, n_x-1");

  double center = grid.center_hz;
  const double ratio = std::round(2.0 * center / grid.spacing_hz);
  if (std::fmod(std::abs(ratio), 2.0) == 0.0) center += 0.5 * grid.spacing_hz;

  PumpScheme scheme;
  scheme.basis = ModeBasis(n, grid.spacing_hz, center, OffsetKind::half_integer);
  scheme.target = spec;
  for (int k : {+1, -1, n_x - 1}) {
    scheme.tones.push_back({k, g, k == selector ? std::numbers::pi : 0.0});
  }
  scheme.validate();
  return scheme;
}

PumpScheme single_pump_scheme(int n, double g, const CombGrid& grid) {
  const LatticeSpec spec{LatticeKind::single_pump, n, 0};
  spec.validate();
  require(g >= 0.0, ErrorKind::invalid_spec, "pump amplitude must be non-negative");
  PumpScheme scheme;
  scheme.basis = ModeBasis(n, grid.spacing_hz, grid.center_hz, OffsetKind::integer);
  scheme.target = spec;
  scheme.tones = {{0, g, 0.0}};
  scheme.validate();
  return scheme;
}

PumpScheme scheme_for(const LatticeSpec& spec, double g, std::optional<int> pi_tone,
                      const CombGrid& grid) {
  switch (spec.kind) {
    case LatticeKind::square: return square_scheme(spec.n, spec.n_x, g, grid);
    case LatticeKind::honeycomb: return honeycomb_scheme(spec.n, spec.n_x, g, pi_tone, grid);
    case LatticeKind::single_pump: return single_pump_scheme(spec.n, g, grid);
  }
  fail(ErrorKind::invalid_spec, "unknown lattice kind");
}

double pump_waveform(const PumpScheme& scheme, double t) {
  // Phase is reduced in cycles of the window period in extended precision:
  // Omega_k t = 2pi * h_k * (t * spacing) with h_k = (2 f0 + k spacing) / spacing.
  using ld = long double;
  const ld spacing = scheme.basis.spacing_hz();
  const ld windows = static_cast<ld>(t) * spacing;
  const ld frac_window = windows - std::floor(windows);
  double value = 0.0;
  for (const PumpTone& tone : scheme.tones) {
    const ld harmonic = (2.0L * scheme.basis.center_hz() + tone.k * spacing) / spacing;
    const ld h_int = std::round(harmonic);
    ld cycles = 0.0L;
    if (std::abs(harmonic - h_int) < 1e-9L) {
      cycles = h_int * frac_window;
    } else {
      cycles = harmonic * windows;
    }
    cycles -= std::floor(cycles);
    const double angle = static_cast<double>(2.0L * std::numbers::pi_v<ld> * cycles);
    value += tone.amplitude * std::cos(angle + tone.phase);
  }
  return value;
}

AdjacencyMatrix expected_adjacency(const PumpScheme& scheme) {
  return signed_expected_adjacency(scheme).support();
}

AdjacencyMatrix signed_expected_adjacency(const PumpScheme& scheme) {
  const CMatrix g = coupling_matrix(scheme);
  const int n = static_cast<int>(g.rows());
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double mag = std::abs(g(i, j));
      if (mag == 0.0) continue;
      const double re = g(i, j).real();
      // Purely imaginary couplings show up in x-x correlations instead; keep the edge.
      a(i, j) = std::abs(re) <= 1e-12 * mag ? 1.0 : (re > 0.0 ? -1.0 : 1.0);
    }
  }
  return AdjacencyMatrix(std::move(a), scheme.basis.offset_kind());
}

std::string scheme_to_json(const PumpScheme& scheme) {
  nlohmann::ordered_json doc;
  doc["basis"] = {
      {"count", scheme.basis.count()},
      {"spacing_hz", scheme.basis.spacing_hz()},
      {"center_hz", scheme.basis.center_hz()},
      {"offset_kind", to_string(scheme.basis.offset_kind())},
  };
  doc["target"] = {
      {"kind", to_string(scheme.target.kind)},
      {"n", scheme.target.n},
      {"n_x", scheme.target.n_x},
  };
  doc["tones"] = nlohmann::ordered_json::array();
  for (const PumpTone& tone : scheme.tones) {
    doc["tones"].push_back({{"k", tone.k}, {"amplitude", tone.amplitude}, {"phase", tone.phase}});
  }
  return doc.dump(2) + "\n";
}

PumpScheme scheme_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    PumpScheme scheme;
    const auto& b = doc.at("basis");
    scheme.basis = ModeBasis(b.at("count").get<int>(), b.at("spacing_hz").get<double>(),
                             b.at("center_hz").get<double>(),
                             offset_kind_from_string(b.at("offset_kind").get<std::string>()));
    const auto& t = doc.at("target");
    scheme.target.kind = lattice_kind_from_string(t.at("kind").get<std::string>());
    scheme.target.n = t.at("n").get<int>();
    scheme.target.n_x = t.at("n_x").get<int>();
    for (const auto& tone : doc.at("tones")) {
      scheme.tones.push_back({tone.at("k").get<int>(), tone.at("amplitude").get<double>(),
                              tone.at("phase").get<double>()});
    }
    scheme.validate();
    return scheme;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("malformed scheme JSON: ") + e.what());
  }
}

}  // namespace cvc

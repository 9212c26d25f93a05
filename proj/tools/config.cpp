#include "config.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/io.hpp"

namespace cvc::cli {

using ojson = nlohmann::ordered_json;

void RunConfig::validate() const {
  lattice.validate();
  if (pi_tone) {
    require(lattice.kind == LatticeKind::honeycomb, ErrorKind::invalid_spec,
            "pi_tone only applies to honeycomb lattices");
  }
  require(comb.spacing_hz > 0.0 && comb.center_hz > 0.0, ErrorKind::invalid_spec,
          "comb center and spacing must be positive");
  require(!pump_ratios.empty(), ErrorKind::invalid_spec, "need at least one pump ratio");
  for (double r : pump_ratios) {
    require(std::isfinite(r) && r >= 0.0, ErrorKind::invalid_spec,
            "pump ratios must be finite and non-negative");
  }
  require(std::isfinite(tau) && tau > 0.0, ErrorKind::invalid_spec, "tau must be positive");
  require(eta > 0.0 && eta <= 1.0, ErrorKind::invalid_spec, "eta must lie in (0, 1]");
  require(windows == 0 || windows >= 2, ErrorKind::invalid_spec,
          "windows must be 0 (simulation only) or at least 2");
  chain.validate(lattice.n);
  require(theta_points >= 2, ErrorKind::invalid_spec, "theta_points must be at least 2");
  require(threshold > 0.0 && threshold < 1.0, ErrorKind::invalid_spec,
          "threshold must lie in (0, 1)");
  require(jackknife_blocks == 0 || jackknife_blocks >= 2, ErrorKind::invalid_spec,
          "jackknife_blocks must be 0 or at least 2");
  require(windows == 0 || jackknife_blocks == 0 || windows >= 2 * jackknife_blocks,
          ErrorKind::invalid_spec, "need at least two windows per jackknife block");
  require(workers >= 1, ErrorKind::invalid_spec, "workers must be at least 1");
  // Constructing the scheme checks the comb itself.
  (void)scheme_for_ratio(pump_ratios.front());
}

double RunConfig::amplitude_for(double ratio) const { return ratio * calibrate_g3db() / tau; }

double RunConfig::g_tau_for(double ratio) const { return ratio * calibrate_g3db(); }

PumpScheme RunConfig::scheme_for_ratio(double ratio) const {
  return scheme_for(lattice, amplitude_for(ratio), pi_tone, comb);
}

namespace {

ojson to_ojson(const RunConfig& c, bool with_runtime) {
  ojson j;
  j["lattice"] = {{"kind", to_string(c.lattice.kind)}, {"n", c.lattice.n}, {"n_x", c.lattice.n_x}};
  j["lattice"]["pi_tone"] = c.pi_tone ? ojson(*c.pi_tone) : ojson(nullptr);
  j["comb"] = {{"center_hz", c.comb.center_hz}, {"spacing_hz", c.comb.spacing_hz}};
  j["pump"] = {{"ratios", c.pump_ratios}, {"tau", c.tau}};
  j["eta"] = c.eta;
  j["windows"] = c.windows;
  j["chain"] = {{"added_noise_photons", c.chain.added_noise_photons},
                {"gain_db", c.chain.gain_db},
                {"z_c", c.chain.z_c},
                {"tau_d_rad_per_mhz", c.chain.tau_d_rad_per_mhz}};
  j["seed"] = c.chain.seed;
  j["theta_points"] = c.theta_points;
  j["threshold"] = c.threshold;
  j["jackknife_blocks"] = c.jackknife_blocks;
  j["project"] = c.project;
  if (with_runtime) {
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::canonical_json() const { return to_ojson(*this, false).dump(); }

std::string RunConfig::hash() const { return fnv1a_hex(canonical_json()); }

std::string config_to_json(const RunConfig& cfg) { return to_ojson(cfg, true).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    require(j.is_object(), ErrorKind::invalid_spec, "config must be a JSON object");
    if (j.contains("lattice")) {
      const auto& l = j.at("lattice");
      if (l.contains("kind")) c.lattice.kind = lattice_kind_from_string(l.at("kind").get<std::string>());
      maybe(l, "n", c.lattice.n);
      maybe(l, "n_x", c.lattice.n_x);
      if (l.contains("pi_tone") && !l.at("pi_tone").is_null()) c.pi_tone = l.at("pi_tone").get<int>();
    }
    if (j.contains("comb")) {
      maybe(j.at("comb"), "center_hz", c.comb.center_hz);
      maybe(j.at("comb"), "spacing_hz", c.comb.spacing_hz);
    }
    if (j.contains("pump")) {
      maybe(j.at("pump"), "ratios", c.pump_ratios);
      maybe(j.at("pump"), "tau", c.tau);
    }
    maybe(j, "eta", c.eta);
    maybe(j, "windows", c.windows);
    if (j.contains("chain")) {
      const auto& ch = j.at("chain");
      if (ch.contains("added_noise_photons")) {
        const auto& v = ch.at("added_noise_photons");
        c.chain.added_noise_photons =
            v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      }
      maybe(ch, "gain_db", c.chain.gain_db);
      maybe(ch, "z_c", c.chain.z_c);
      maybe(ch, "tau_d_rad_per_mhz", c.chain.tau_d_rad_per_mhz);
    }
    maybe(j, "seed", c.chain.seed);
    maybe(j, "theta_points", c.theta_points);
    maybe(j, "threshold", c.threshold);
    maybe(j, "jackknife_blocks", c.jackknife_blocks);
    maybe(j, "project", c.project);
    maybe(j, "workers", c.workers);
    maybe(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_spec, std::string("bad config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_text_file(path)); }

}  // namespace cvc::cli

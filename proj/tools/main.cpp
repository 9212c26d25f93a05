#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "cvcluster/io.hpp"

namespace {

using cvc::cli::RunConfig;

// Flag values that, when given, replace the corresponding config entry.
struct Overrides {
  std::string config;
  std::optional<std::string> lattice;
  std::optional<int> n, n_x, pi_tone, theta_points, jackknife_blocks, workers;
  std::optional<std::int64_t> windows;
  std::optional<std::uint64_t> seed;
  std::vector<double> g, noise;
  std::optional<double> tau, eta, gain_db, tau_d, z_c, threshold;
  bool no_project = false;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration");
  cmd->add_option("--lattice", o.lattice, "square | honeycomb | single_pump");
  cmd->add_option("--n", o.n, "number of modes");
  cmd->add_option("--nx", o.n_x, "lattice width N_x");
  cmd->add_option("--pi-tone", o.pi_tone, "honeycomb tone offset carrying phase pi");
  cmd->add_option("--g", o.g, "pump strengths g/g_3dB");
  cmd->add_option("--tau", o.tau, "interaction time");
  cmd->add_option("--eta", o.eta, "output transmission in (0, 1]");
  cmd->add_option("--windows", o.windows, "demodulated windows M (0: simulation only)");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("--noise", o.noise, "added noise photons (one value or one per mode)");
  cmd->add_option("--gain-db", o.gain_db, "chain gain in dB");
  cmd->add_option("--tau-d", o.tau_d, "chain phase slope in rad/MHz");
  cmd->add_option("--z-c", o.z_c, "characteristic impedance in ohm");
  cmd->add_option("--theta-points", o.theta_points, "rotation grid size over [0, pi)");
  cmd->add_option("--threshold", o.threshold, "adjacency threshold relative to max |A|");
  cmd->add_option("--jackknife-blocks", o.jackknife_blocks, "window blocks for the jackknife (0: off)");
  cmd->add_flag("--no-project", o.no_project, "analyze the corrected covariance without projection");
  cmd->add_option("--workers", o.workers, "parallel ladder points");
  cmd->add_option("-o,--out", o.out, "output directory");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : cvc::cli::load_config(o.config);
  if (o.lattice) c.lattice.kind = cvc::lattice_kind_from_string(*o.lattice);
  if (o.n) c.lattice.n = *o.n;
  if (o.n_x) c.lattice.n_x = *o.n_x;
  if (o.pi_tone) c.pi_tone = *o.pi_tone;
  if (!o.g.empty()) c.pump_ratios = o.g;
  if (o.tau) c.tau = *o.tau;
  if (o.eta) c.eta = *o.eta;
  if (o.windows) c.windows = *o.windows;
  if (o.seed) c.chain.seed = *o.seed;
  if (!o.noise.empty()) c.chain.added_noise_photons = o.noise;
  if (o.gain_db) c.chain.gain_db = *o.gain_db;
  if (o.tau_d) c.chain.tau_d_rad_per_mhz = *o.tau_d;
  if (o.z_c) c.chain.z_c = *o.z_c;
  if (o.theta_points) c.theta_points = *o.theta_points;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.jackknife_blocks) c.jackknife_blocks = *o.jackknife_blocks;
  if (o.no_project) c.project = false;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.output_dir = *o.out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable cluster state simulation and verification"};
  app.set_version_flag("--version", cvc::tool_version());
  app.require_subcommand(1);

  Overrides o;
  std::string input, samples, calibration, format = "dot", output;

  auto* synth = app.add_subcommand("synth", "pump scheme and predicted graph");
  auto* simulate = app.add_subcommand("simulate", "ideal (lossy) covariance per pump strength");
  auto* sample = app.add_subcommand("sample", "chain output windows from a covariance");
  auto* estimate = app.add_subcommand("estimate", "covariance from sampled windows");
  auto* analyze = app.add_subcommand("analyze", "nullifiers, adjacency and HER of a covariance");
  auto* pipeline = app.add_subcommand("pipeline", "full ladder over pump strengths");
  auto* exporter = app.add_subcommand("export", "graph export (predicted or extracted)");
  for (auto* cmd : {synth, simulate, sample, estimate, analyze, pipeline, exporter}) add_common(cmd, o);
  sample->add_option("-i,--input", input, "covariance CSV")->required();
  estimate->add_option("-s,--samples", samples, "sample stream (.bin or .csv)")->required();
  estimate->add_option("--calibration", calibration, "calibration JSON (default: from config)");
  analyze->add_option("-i,--input", input, "covariance CSV")->required();
  exporter->add_option("-i,--input", input, "covariance CSV to extract the graph from");
  exporter->add_option("-f,--format", format, "dot | edge_csv");
  exporter->add_option("--output", output, "file to write (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (synth->parsed()) cvc::cli::cmd_synth(cfg);
    if (simulate->parsed()) cvc::cli::cmd_simulate(cfg);
    if (sample->parsed()) cvc::cli::cmd_sample(cfg, input);
    if (estimate->parsed()) cvc::cli::cmd_estimate(cfg, samples, calibration);
    if (analyze->parsed()) cvc::cli::cmd_analyze(cfg, input);
    if (pipeline->parsed()) cvc::cli::cmd_pipeline(cfg);
    if (exporter->parsed()) {
      cvc::cli::cmd_export(cfg, input, cvc::graph_format_from_string(format), output);
    }
  } catch (const cvc::Error& e) {
    std::cerr << "cvcluster: " << e.what() << "\n";
    return cvc::cli::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "cvcluster: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

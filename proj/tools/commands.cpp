#include "commands.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cvcluster/io.hpp"
#include "cvcluster/pumpsynth.hpp"

namespace cvc::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec:
    case ErrorKind::invalid_argument: return 1;
    case ErrorKind::numerical: return 2;
    case ErrorKind::io: return 3;
  }
  return 1;
}

namespace {

template <class F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage " + name + ": " + e.detail());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string point_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "g_%02zu", index);
  return buf;
}

ojson meta_json(const FileMetadata& meta) {
  ojson m = ojson::object();
  for (const auto& [k, v] : meta.fields) m[k] = v;
  return m;
}

std::string csv_header(const FileMetadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta.fields) out += "# " + k + ": " + v + "\n";
  return out;
}

std::string dot_header(const FileMetadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta.fields) out += "// " + k + ": " + v + "\n";
  return out;
}

std::string graph_with_header(const AdjacencyMatrix& a, GraphFormat format, const FileMetadata& meta) {
  const std::string body = export_graph(a, format);
  return (format == GraphFormat::dot ? dot_header(meta) : csv_header(meta)) + body;
}

FileMetadata point_metadata(const RunConfig& cfg, double ratio) {
  FileMetadata meta = standard_metadata(cfg.hash());
  meta.set("g_over_g3db", format_double(ratio));
  return meta;
}

ojson projection_json(const ProjectionResult& p) {
  return {{"changed", p.changed},
          {"iterations", p.iterations},
          {"distance", p.distance},
          {"min_symplectic_eigenvalue", p.min_symplectic}};
}

ojson report_json(const AnalysisOutcome& a, const RunConfig& cfg, const FileMetadata& meta,
                  const std::optional<JackknifeEstimate>& jk,
                  const std::optional<ProjectionResult>& projection) {
  ojson j;
  j["metadata"] = meta_json(meta);
  j["theta_opt"] = a.sweep.theta_opt;
  j["theta_grid_argmin"] = a.sweep.grid_argmin;
  j["min_normalized_variance"] = a.sweep.min_value;
  j["min_db"] = a.nullifiers.db;
  j["nullifiers"] = {{"theta", a.nullifiers.theta},
                     {"mean_normalized", a.nullifiers.mean_normalized},
                     {"db", a.nullifiers.db},
                     {"variances", a.nullifiers.variances},
                     {"references", a.nullifiers.references},
                     {"normalized", a.nullifiers.normalized}};
  if (jk) {
    j["jackknife_over_window_blocks"] = {{"blocks", cfg.jackknife_blocks},
                                         {"value", jk->value},
                                         {"standard_error", jk->standard_error},
                                         {"sigmas_below_vacuum", jk->sigmas_below_vacuum}};
  }
  j["extraction"] = {{"condition_number", a.extraction.condition_number},
                     {"asymmetry", a.extraction.asymmetry},
                     {"regularized", a.extraction.regularized},
                     {"ridge", a.extraction.ridge}};
  j["adjacency"] = {{"threshold", cfg.threshold},
                    {"threshold_stable", a.threshold_stable},
                    {"matches_target", a.matches_target},
                    {"edges", a.adjacency.edges().size()}};
  j["her"] = {{"kind", to_string(a.her.kind)},
              {"value", a.her.value},
              {"offsets", a.her.offsets},
              {"contributions", a.her.contributions}};
  j["hidden_ratio"] = a.hidden_ratio ? ojson(*a.hidden_ratio) : ojson(nullptr);
  if (projection) j["projection"] = projection_json(*projection);
  return j;
}

void write_analysis(const fs::path& dir, const AnalysisOutcome& a, const RunConfig& cfg,
                    const FileMetadata& meta, const std::optional<JackknifeEstimate>& jk,
                    const std::optional<ProjectionResult>& projection) {
  FileMetadata m = meta;
  m.set("theta", format_double(a.sweep.theta_opt)).set("rows", "ascending_frequency");
  write_text_file(dir / "A.csv", matrix_to_csv(a.extraction.a, m));
  write_text_file(dir / "U.csv", matrix_to_csv(a.extraction.u, m));
  write_text_file(dir / "adjacency.csv", graph_with_header(a.adjacency, GraphFormat::edge_csv, meta));
  write_text_file(dir / "sweep.csv", sweep_to_csv(a.sweep, meta));
  write_text_file(dir / "report.json", report_json(a, cfg, meta, jk, projection).dump(2) + "\n");
}

}  // namespace

AnalysisOutcome analyze_covariance(const RunConfig& cfg, const PumpScheme& scheme,
                                   const CovarianceMatrix& cov) {
  require(cov.n_modes() == scheme.basis.count(), ErrorKind::invalid_argument,
          "covariance has " + std::to_string(cov.n_modes()) + " modes, lattice expects " +
              std::to_string(scheme.basis.count()));
  const AdjacencyMatrix target_signed = signed_expected_adjacency(scheme);
  const AdjacencyMatrix target = target_signed.support();

  AnalysisOutcome out;
  out.sweep = nullifier_sweep(cov, target_signed, theta_grid(cfg.theta_points));
  const CovarianceMatrix rotated = rotate_global(cov, out.sweep.theta_opt);
  out.nullifiers = nullifier_variances(rotated, target_signed);
  out.nullifiers.theta = out.sweep.theta_opt;
  out.extraction = extract_AU(rotated);
  const OffsetKind labeling = scheme.basis.offset_kind();
  out.adjacency = normalize_adjacency(out.extraction.a, cfg.threshold, labeling);
  out.threshold_stable = true;
  for (double t : {0.3, 0.4, 0.5, 0.6, 0.7}) {
    if (!(normalize_adjacency(out.extraction.a, t, labeling) == out.adjacency)) out.threshold_stable = false;
  }
  out.matches_target = out.adjacency.support() == target;
  out.her = her(out.extraction.u, scheme.target.n_x, scheme.target.kind);

  const auto canonical = canonical_positions(target);
  const auto hidden = hidden_positions(target, scheme.target.kind, scheme.target.n_x);
  if (!canonical.empty() && !hidden.empty()) {
    try {
      out.hidden_ratio = canonical_hidden_ratio(rotated, canonical, hidden);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::numerical) throw;
    }
  }
  return out;
}

GaussianState simulate_state(const RunConfig& cfg, double ratio) {
  const PumpScheme scheme = cfg.scheme_for_ratio(ratio);
  GaussianState st = evolve(vacuum(scheme.basis), scheme, cfg.tau);
  if (cfg.eta < 1.0) st = apply_loss(st, cfg.eta);
  return st;
}

EstimationOutcome simulate_measurement(const RunConfig& cfg, const GaussianState& state,
                                       std::uint64_t seed) {
  require(cfg.windows >= 2, ErrorKind::invalid_spec, "measurement needs at least two windows");
  ChainConfig chain = cfg.chain;
  chain.seed = seed;
  WindowGenerator gen(state, cfg.windows, chain);
  const int blocks = cfg.jackknife_blocks >= 2 ? cfg.jackknife_blocks : 1;
  std::vector<CovarianceAccumulator> accs(static_cast<std::size_t>(blocks),
                                          CovarianceAccumulator(gen.dimension()));
  Matrix chunk;
  std::int64_t pos = 0;
  for (int b = 0; b < blocks; ++b) {
    const std::int64_t end = cfg.windows * (b + 1) / blocks;
    while (pos < end) {
      const std::int64_t got = gen.next_block(chunk, std::min(kWindowBlock, end - pos));
      accs[b].add_block(chunk);
      pos += got;
    }
  }
  CovarianceAccumulator total(gen.dimension());
  for (const auto& a : accs) total.merge(a);

  const CalibrationRecord calib = calibration_from_chain(chain, state.basis.count());
  EstimationOutcome out;
  out.corrected = correct_chain(estimate_covariance(total, state.basis, chain.z_c), calib, state.basis);
  out.projection = project_physical(out.corrected);
  if (blocks >= 2) {
    for (const auto& a : accs) {
      out.block_covariances.push_back(
          correct_chain(estimate_covariance(a, state.basis, chain.z_c), calib, state.basis));
    }
  }
  return out;
}

PointResult run_point(const RunConfig& cfg, std::size_t index, const std::string& dir_name) {
  const fs::path dir(dir_name);
  ensure_dir(dir);
  PointResult res;
  res.ratio = cfg.pump_ratios.at(index);
  res.g_tau = cfg.g_tau_for(res.ratio);
  const FileMetadata meta = point_metadata(cfg, res.ratio);
  const PumpScheme scheme = cfg.scheme_for_ratio(res.ratio);

  const GaussianState truth = stage("simulate", [&] { return simulate_state(cfg, res.ratio); });
  write_covariance(dir / "V_true.csv", truth.cov, truth.basis, meta);

  CovarianceMatrix analyzed = truth.cov;
  std::vector<CovarianceMatrix> blocks;
  if (cfg.windows > 0) {
    EstimationOutcome est = stage("estimate", [&] {
      return simulate_measurement(cfg, truth, cfg.chain.seed + index);
    });
    write_covariance(dir / "V_corrected.csv", est.corrected, truth.basis, meta);
    analyzed = cfg.project ? est.projection.cov : est.corrected;
    res.projection = est.projection;
    blocks = std::move(est.block_covariances);
  }
  write_covariance(dir / "V.csv", analyzed, truth.basis, meta);

  res.analysis = stage("analyze", [&] { return analyze_covariance(cfg, scheme, analyzed); });
  if (blocks.size() >= 2) {
    res.jackknife = stage("analyze", [&] {
      return nullifier_jackknife(blocks, signed_expected_adjacency(scheme).entries(),
                                 res.analysis.sweep.theta_opt);
    });
    res.analysis.nullifiers.standard_error = res.jackknife->standard_error;
    res.analysis.nullifiers.sigmas_below_vacuum = res.jackknife->sigmas_below_vacuum;
  }
  stage("write", [&] {
    write_analysis(dir, res.analysis, cfg, meta, res.jackknife, res.projection);
    return 0;
  });
  return res;
}

void cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  const double ratio = cfg.pump_ratios.front();
  const PumpScheme scheme = cfg.scheme_for_ratio(ratio);
  const FileMetadata meta = point_metadata(cfg, ratio);
  ojson doc = ojson::parse(scheme_to_json(scheme));
  doc["metadata"] = meta_json(meta);
  write_text_file(out / "scheme.json", doc.dump(2) + "\n");
  const AdjacencyMatrix predicted = expected_adjacency(scheme);
  write_text_file(out / "adjacency.csv", graph_with_header(predicted, GraphFormat::edge_csv, meta));
  write_text_file(out / "graph.dot", graph_with_header(predicted, GraphFormat::dot, meta));
}

void cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  for (std::size_t k = 0; k < cfg.pump_ratios.size(); ++k) {
    const double ratio = cfg.pump_ratios[k];
    const GaussianState st = stage("simulate", [&] { return simulate_state(cfg, ratio); });
    write_covariance(out / ("state_" + point_name(k) + ".csv"), st.cov, st.basis,
                     point_metadata(cfg, ratio));
  }
}

void cmd_sample(const RunConfig& cfg, const std::string& input) {
  cfg.validate();
  require(cfg.windows >= 2, ErrorKind::invalid_spec, "sample needs --windows >= 2");
  ModeBasis basis;
  const CovarianceMatrix cov = read_covariance(input, &basis);
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  GaussianState st{cov, Vector::Zero(2 * cov.n_modes()), basis};
  FileMetadata meta = standard_metadata(cfg.hash());
  meta.set("seed", std::to_string(cfg.chain.seed));
  stage("sample", [&] {
    WindowGenerator gen(st, cfg.windows, cfg.chain);
    SampleStreamWriter writer(out / "samples.bin", basis, meta);
    Matrix block;
    while (gen.remaining() > 0) {
      gen.next_block(block);
      writer.write_block(block);
    }
    writer.close();
    return 0;
  });
  write_text_file(out / "calibration.json",
                  calibration_to_json(calibration_from_chain(cfg.chain, basis.count()), &meta));
}

void cmd_estimate(const RunConfig& cfg, const std::string& samples, const std::string& calibration) {
  SampleStreamReader reader(samples);
  const ModeBasis basis = reader.basis();
  const CalibrationRecord calib = calibration.empty()
                                      ? calibration_from_chain(cfg.chain, basis.count())
                                      : calibration_from_json(read_text_file(calibration));
  calib.validate(basis.count());
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  CovarianceAccumulator acc(reader.dimension());
  Matrix block;
  while (reader.next_block(block, kWindowBlock) > 0) acc.add_block(block);
  const CovarianceMatrix corrected = stage("estimate", [&] {
    return correct_chain(estimate_covariance(acc, basis, cfg.chain.z_c), calib, basis);
  });
  const ProjectionResult proj = stage("project", [&] { return project_physical(corrected); });
  FileMetadata meta = standard_metadata(cfg.hash());
  meta.set("calibration_hash", fnv1a_hex(calibration_to_json(calib)));
  meta.set("stages", "estimate,phase_correct,gain_divide,noise_subtract");
  write_covariance(out / "V_corrected.csv", corrected, basis, meta);
  if (cfg.project) meta.set("stages", "estimate,phase_correct,gain_divide,noise_subtract,project");
  write_covariance(out / "V_estimated.csv", cfg.project ? proj.cov : corrected, basis, meta);
  ojson j;
  j["metadata"] = meta_json(meta);
  j["windows"] = acc.count();
  j["projection"] = projection_json(proj);
  write_text_file(out / "estimate.json", j.dump(2) + "\n");
}

void cmd_analyze(const RunConfig& cfg, const std::string& input) {
  cfg.validate();
  const CovarianceMatrix cov = read_covariance(input);
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  const double ratio = cfg.pump_ratios.front();
  const AnalysisOutcome a =
      stage("analyze", [&] { return analyze_covariance(cfg, cfg.scheme_for_ratio(ratio), cov); });
  write_analysis(out, a, cfg, point_metadata(cfg, ratio), std::nullopt, std::nullopt);
}

std::vector<PointResult> cmd_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  write_text_file(out / "config.json", config_to_json(cfg));

  const std::size_t n = cfg.pump_ratios.size();
  std::vector<std::optional<PointResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        results[k] = run_point(cfg, k, (out / point_name(k)).string());
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const FileMetadata meta = standard_metadata(cfg.hash());
  std::string nullifier_csv = csv_header(meta) +
                              "g_over_g3db,g_tau,theta_opt,min_normalized_variance,min_db,"
                              "jackknife_value,jackknife_standard_error,sigmas_below_vacuum\n";
  std::string her_csv = csv_header(meta) + "g_over_g3db,g_tau,her,hidden_ratio\n";
  ojson points = ojson::array();
  std::optional<std::size_t> best;
  std::vector<PointResult> done;
  for (std::size_t k = 0; k < n; ++k) {
    if (!results[k]) {
      points.push_back({{"point", point_name(k)}, {"g_over_g3db", cfg.pump_ratios[k]}, {"failed", true}});
      continue;
    }
    const PointResult& r = *results[k];
    const AnalysisOutcome& a = r.analysis;
    nullifier_csv += format_double(r.ratio) + "," + format_double(r.g_tau) + "," +
                     format_double(a.sweep.theta_opt) + "," + format_double(a.sweep.min_value) + "," +
                     format_double(a.nullifiers.db) + "," +
                     (r.jackknife ? format_double(r.jackknife->value) : "") + "," +
                     (r.jackknife ? format_double(r.jackknife->standard_error) : "") + "," +
                     (r.jackknife ? format_double(r.jackknife->sigmas_below_vacuum) : "") + "\n";
    her_csv += format_double(r.ratio) + "," + format_double(r.g_tau) + "," + format_double(a.her.value) +
               "," + (a.hidden_ratio ? format_double(*a.hidden_ratio) : "") + "\n";
    ojson p = {{"point", point_name(k)},
               {"g_over_g3db", r.ratio},
               {"g_tau", r.g_tau},
               {"theta_opt", a.sweep.theta_opt},
               {"min_normalized_variance", a.sweep.min_value},
               {"min_db", a.nullifiers.db},
               {"her", a.her.value},
               {"hidden_ratio", a.hidden_ratio ? ojson(*a.hidden_ratio) : ojson(nullptr)},
               {"adjacency_matches_target", a.matches_target},
               {"threshold_stable", a.threshold_stable}};
    if (r.jackknife) {
      p["jackknife_over_window_blocks"] = {{"value", r.jackknife->value},
                                           {"standard_error", r.jackknife->standard_error},
                                           {"sigmas_below_vacuum", r.jackknife->sigmas_below_vacuum}};
    }
    if (r.projection) p["projection"] = projection_json(*r.projection);
    points.push_back(p);
    if (!best || a.sweep.min_value < results[*best]->analysis.sweep.min_value) best = k;
    done.push_back(r);
  }
  write_text_file(out / "nullifier_vs_g.csv", nullifier_csv);
  write_text_file(out / "her_vs_g.csv", her_csv);

  ojson summary;
  summary["metadata"] = meta_json(meta);
  summary["config"] = ojson::parse(cfg.canonical_json());
  summary["points"] = points;
  if (best) {
    summary["nullifier_minimum"] = {{"point", point_name(*best)},
                                    {"g_over_g3db", cfg.pump_ratios[*best]},
                                    {"interior", *best > 0 && *best + 1 < n}};
  }
  write_text_file(out / "summary.json", summary.dump(2) + "\n");

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return done;
}

void cmd_export(const RunConfig& cfg, const std::string& input, GraphFormat format,
                const std::string& output) {
  cfg.validate();
  const double ratio = cfg.pump_ratios.front();
  const PumpScheme scheme = cfg.scheme_for_ratio(ratio);
  FileMetadata meta = point_metadata(cfg, ratio);
  AdjacencyMatrix graph;
  if (input.empty()) {
    graph = expected_adjacency(scheme);
    meta.set("source", "predicted");
  } else {
    graph = stage("analyze", [&] { return analyze_covariance(cfg, scheme, read_covariance(input)); })
                .adjacency;
    meta.set("source", "extracted");
  }
  const std::string text = graph_with_header(graph, format, meta);
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    write_text_file(output, text);
  }
}

}  // namespace cvc::cli

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shapemean/dataset.hpp"
#include "shapemean/errors.hpp"
#include "shapemean/mean.hpp"
#include "shapemean/report.hpp"
#include "shapemean/simulate.hpp"

namespace {

using nlohmann::json;
using namespace shapemean;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json config_echo(const MeanFitConfig& cfg) {
  json smoothing;
  if (cfg.smoothing.mode == SmoothingSelection::Mode::Fixed)
    smoothing = {{"fixed", cfg.smoothing.fixed_eta}};
  else
    smoothing = "gcv";
  return {{"basis_order", cfg.basis_order},
          {"knots", cfg.knots},
          {"penalty_order", cfg.penalty_order},
          {"tolerance", cfg.tolerance},
          {"max_iterations", cfg.max_iterations},
          {"rho", cfg.rho},
          {"nugget", cfg.nugget},
          {"smoothing", smoothing},
          {"backend",
           cfg.backend == MeanFitConfig::Backend::Dense ? "dense" : "sparse"}};
}

MeanFitConfig load_config(const std::string& path) {
  MeanFitConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "basis_order") {
      cfg.basis_order = value.get<int>();
      if (cfg.basis_order != 0 && cfg.basis_order != 1)
        throw UsageError("basis_order must be 0 or 1");
    } else if (key == "knots") {
      cfg.knots = value.get<int>();
    } else if (key == "penalty_order") {
      cfg.penalty_order = value.get<int>();
    } else if (key == "tolerance") {
      cfg.tolerance = value.get<double>();
      if (!(cfg.tolerance > 0)) throw UsageError("tolerance must be > 0");
    } else if (key == "max_iterations") {
      cfg.max_iterations = value.get<int>();
      if (cfg.max_iterations < 1)
        throw UsageError("max_iterations must be >= 1");
    } else if (key == "rho") {
      cfg.rho = value.get<double>();
      if (cfg.rho < 0.0 || cfg.rho > 1.0)
        throw UsageError("rho must lie in [0, 1]");
    } else if (key == "nugget") {
      cfg.nugget = value.get<bool>();
    } else if (key == "smoothing") {
      if (value.is_string() && value.get<std::string>() == "gcv") {
        cfg.smoothing = SmoothingSelection{};
      } else if (value.is_object() && value.contains("fixed") &&
                 value.size() == 1) {
        cfg.smoothing = SmoothingSelection::fixed(value["fixed"].get<double>());
      } else {
        throw UsageError("smoothing must be \"gcv\" or {\"fixed\": eta}");
      }
    } else if (key == "backend") {
      const std::string backend = value.get<std::string>();
      if (backend == "sparse")
        cfg.backend = MeanFitConfig::Backend::Sparse;
      else if (backend == "dense")
        cfg.backend = MeanFitConfig::Backend::Dense;
      else
        throw UsageError("backend must be \"sparse\" or \"dense\"");
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

std::vector<SrvCurve> to_srv(const Dataset& dataset) {
  std::vector<SrvCurve> out;
  out.reserve(dataset.curves.size());
  for (const auto& poly : dataset.curves) out.push_back(polygon_to_srv(poly));
  return out;
}

void attach_ids(ElasticMeanResult& result, const Dataset& dataset) {
  for (std::size_t i = 0; i < result.curves.size(); ++i)
    result.curves[i].id = dataset.curves[i].id;
}

void write_outputs(const std::string& out_dir, const json& report,
                   const json& timings, const std::string* svg) {
  std::filesystem::create_directories(out_dir);
  std::string error;
  if (!validate_report(report, &error))
    throw NumericError("internal: report fails schema check: " + error);
  write_text_file(out_dir + "/report.json", report.dump(2) + "\n");
  write_text_file(out_dir + "/timings.json", timings.dump(2) + "\n");
  if (svg) write_text_file(out_dir + "/mean.svg", *svg);
}

std::string join_labels(const Dataset& dataset, int curve,
                        const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& key : keys) {
    const auto& feats = dataset.features[curve];
    const auto it = feats.find(key);
    if (it == feats.end())
      throw DataError("curve '" + dataset.curves[curve].id +
                      "' lacks feature '" + key + "'");
    if (!out.empty()) out += "|";
    out += it->second;
  }
  return out;
}

std::vector<std::string> split_keys(const std::string& joined) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(joined);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Elastic and inelastic full Procrustes mean shapes of plane "
               "curves"};
  app.require_subcommand(1);

  std::string input, config_path, out_dir;
  int threads = 0;
  std::uint64_t seed = 1;

  auto add_common = [&](CLI::App* sub, bool need_input) {
    auto* in = sub->add_option("--input", input, "input dataset (.csv/.json)");
    if (need_input) in->required();
    sub->add_option("--config", config_path, "config JSON file");
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--seed", seed, "random seed");
  };

  auto* cmd_mean = app.add_subcommand("mean", "elastic full Procrustes mean");
  add_common(cmd_mean, true);
  auto* cmd_inelastic =
      app.add_subcommand("inelastic", "inelastic full Procrustes mean");
  add_common(cmd_inelastic, true);

  auto* cmd_distance =
      app.add_subcommand("distance", "pairwise full Procrustes distances");
  add_common(cmd_distance, true);
  std::string id1, id2;
  cmd_distance->add_option("--id1", id1, "first curve id");
  cmd_distance->add_option("--id2", id2, "second curve id");

  auto* cmd_variance =
      app.add_subcommand("variance", "grouped variance decomposition");
  add_common(cmd_variance, true);
  std::string decompose;
  cmd_variance
      ->add_option("--decompose", decompose,
                   "<primary-keys>:<complement-keys>, comma-separated")
      ->required();

  auto* cmd_simulate = app.add_subcommand("simulate", "generate a dataset");
  add_common(cmd_simulate, false);
  std::string kind = "spiral";
  SpiralSimConfig sim;
  cmd_simulate->add_option("--kind", kind, "generator kind (spiral)");
  cmd_simulate->add_option("--n", sim.n, "number of curves");
  cmd_simulate->add_option("--min-points", sim.min_points, "min points/curve");
  cmd_simulate->add_option("--max-points", sim.max_points, "max points/curve");
  cmd_simulate->add_option("--noise", sim.noise_sd, "relative noise sd");
  bool no_transform = false;
  cmd_simulate->add_flag("--no-transform", no_transform,
                         "skip random similarity transforms");

  CLI11_PARSE(app, argc, argv);

  MeanFitConfig cfg = load_config(config_path);
  cfg.threads = threads;

  json report;
  report["config"] = config_echo(cfg);
  report["seed"] = seed;
  json timings;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  if (app.got_subcommand(cmd_simulate)) {
    if (kind != "spiral") throw UsageError("unknown --kind '" + kind + "'");
    sim.transform = !no_transform;
    sim.seed = seed;
    const std::vector<PlanePolygon> polys = simulate_spirals(sim);
    Dataset dataset;
    dataset.curves = polys;
    dataset.features.resize(polys.size());
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/spirals.json", to_json(dataset));
    report["command"] = "simulate";
    report["warnings"] = json::array();
    report["simulate"] = {{"kind", kind},
                          {"n", sim.n},
                          {"min_points", sim.min_points},
                          {"max_points", sim.max_points},
                          {"noise_sd", sim.noise_sd},
                          {"transform", sim.transform},
                          {"file", "spirals.json"}};
    timings["total_ms"] = elapsed_ms();
    write_outputs(out_dir, report, timings, nullptr);
    return 0;
  }

  const Dataset dataset = ingest(input);
  json warnings = json::array();
  for (const auto& w : dataset.warnings) warnings.push_back(w);

  if (app.got_subcommand(cmd_mean) || app.got_subcommand(cmd_inelastic)) {
    const bool elastic = app.got_subcommand(cmd_mean);
    const std::vector<SrvCurve> curves = to_srv(dataset);
    ElasticMeanResult result = elastic ? estimate_elastic_mean(curves, cfg)
                                       : estimate_inelastic_mean(curves, cfg);
    attach_ids(result, dataset);
    if (!result.converged)
      warnings.push_back("mean estimation did not converge in " +
                         std::to_string(result.iterations) + " iterations");
    for (const CurveState& st : result.curves) {
      if (st.flagged)
        warnings.push_back("curve '" + st.id + "': rotation undefined, kept");
      if (st.collapsed > 0)
        warnings.push_back("curve '" + st.id + "': " +
                           std::to_string(st.collapsed) +
                           " segment(s) collapsed");
    }
    report["command"] = elastic ? "mean" : "inelastic";
    report["warnings"] = std::move(warnings);
    report.update(result_to_json(result));
    const std::string svg = render_svg(result);
    timings["total_ms"] = elapsed_ms();
    write_outputs(out_dir, report, timings, &svg);
    return 0;
  }

  if (app.got_subcommand(cmd_distance)) {
    if (dataset.size() < 2) throw DataError("distance needs two curves");
    auto find = [&](const std::string& id, int fallback) {
      if (id.empty()) return fallback;
      for (int i = 0; i < dataset.size(); ++i)
        if (dataset.curves[i].id == id) return i;
      throw DataError("no curve with id '" + id + "'");
    };
    const int i1 = find(id1, 0), i2 = find(id2, 1);
    const SrvCurve q1 = polygon_to_srv(dataset.curves[i1]);
    const SrvCurve q2 = polygon_to_srv(dataset.curves[i2]);
    const RotationAlignment inelastic =
        inelastic_distance(to_piecewise(q1), to_piecewise(q2));
    const double elastic = elastic_distance(q1, q2, cfg.alignment);
    report["command"] = "distance";
    report["warnings"] = std::move(warnings);
    report["distance"] = {{"id1", dataset.curves[i1].id},
                          {"id2", dataset.curves[i2].id},
                          {"inelastic", inelastic.distance},
                          {"elastic", elastic}};
    timings["total_ms"] = elapsed_ms();
    write_outputs(out_dir, report, timings, nullptr);
    return 0;
  }

  // variance
  const auto colon = decompose.find(':');
  if (colon == std::string::npos)
    throw UsageError("--decompose expects <primary-keys>:<complement-keys>");
  const std::vector<std::string> primary_keys =
      split_keys(decompose.substr(0, colon));
  const std::vector<std::string> complement_keys =
      split_keys(decompose.substr(colon + 1));
  if (primary_keys.empty())
    throw UsageError("--decompose needs at least one primary key");
  std::vector<std::string> primary, complement;
  for (int i = 0; i < dataset.size(); ++i) {
    primary.push_back(join_labels(dataset, i, primary_keys));
    complement.push_back(join_labels(dataset, i, complement_keys));
  }
  const VarianceDecomposition decomposition =
      variance_decomposition(to_srv(dataset), primary, complement, cfg);
  report["command"] = "variance";
  report["warnings"] = std::move(warnings);
  report["variance"] = variance_to_json(decomposition);
  timings["total_ms"] = elapsed_ms();
  write_outputs(out_dir, report, timings, nullptr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

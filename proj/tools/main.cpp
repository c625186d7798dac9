#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vortexshape/config.hpp"
#include "vortexshape/io.hpp"
#include "vortexshape/validate.hpp"

namespace fs = std::filesystem;
using namespace vortexshape;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

struct Overrides {
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void apply_overrides(ExperimentSpec& spec, const Overrides& ov) {
  if (ov.max_iter) spec.config.max_iter = *ov.max_iter;
  if (ov.tol) spec.config.tol = *ov.tol;
  if (ov.seed) spec.config.seed = *ov.seed;
}

std::string boundary_file(const fs::path& dir, int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "boundary_iter_%04d.csv", iteration);
  return (dir / buf).string();
}

int run_experiment(const ExperimentSpec& spec, const fs::path& out_dir,
                   Polyline* final_polyline = nullptr) {
  fs::create_directories(out_dir);

  std::ofstream history((out_dir / "history.csv").string());
  history.precision(12);
  write_history_header(history);

  OptimizeResult result = optimize(spec.config, [&](const IterationRecord& rec) {
    write_history_row(history, rec);
    history.flush();
    std::cout << "  iter " << rec.iteration << ": objective " << rec.breakdown.objective
              << ", volume " << rec.breakdown.volume << ", t " << rec.step << "\n";
  });
  history.close();

  if (result.status == RunStatus::SolverError) {
    std::ofstream marker((out_dir / "error.marker").string());
    marker << result.error_message << "\n";
    std::cerr << "solver error: " << result.error_message << "\n";
    return kExitSolver;
  }

  if (spec.output.boundary_every_iteration) {
    for (std::size_t i = 0; i < result.boundary_history.size(); ++i)
      write_polyline_csv(boundary_file(out_dir, result.records[i].iteration),
                         result.boundary_history[i]);
  }
  if (!result.boundary_history.empty()) {
    write_polyline_csv((out_dir / "boundary_final.csv").string(),
                       result.boundary_history.back());
    if (final_polyline) *final_polyline = result.boundary_history.back();
  }

  // normalized trends, matching the per-iteration records
  std::vector<double> obj, vol;
  for (const IterationRecord& rec : result.records) {
    obj.push_back(rec.breakdown.objective);
    vol.push_back(rec.breakdown.volume);
  }
  if (!obj.empty() && obj.front() != 0.0) {
    std::vector<double> n_obj = obj, n_vol = vol;
    for (double& v : n_obj) v /= obj.front();
    for (double& v : n_vol) v /= vol.front();
    write_svg_chart((out_dir / "trend_objective.svg").string(),
                    "normalized objective trend", n_obj);
    write_svg_chart((out_dir / "trend_volume.svg").string(), "normalized volume trend", n_vol);
  }

  if (spec.output.vtk && !result.records.empty()) {
    auto snapshot = [&](const Mesh& m, const std::string& name) {
      auto mesh = std::make_shared<Mesh>(m);
      StokesSolver solver(mesh, spec.config.nu);
      StateSolution st = solver.solve_state(poiseuille_inflow);
      AdjointSolution adj = solver.solve_adjoint(st, spec.config.gamma1, spec.config.gamma2);
      write_vtk_file((out_dir / name).string(), *mesh,
                     {{"velocity", &st.u}, {"pressure", &st.p}, {"adjoint_velocity", &adj.v}});
    };
    Mesh initial = build_channel_mesh(spec.config.geometry, spec.config.h_min,
                                      spec.config.h_max, spec.config.seed);
    snapshot(initial, "state_initial.vtk");
    snapshot(result.final_mesh, "state_final.vtk");
  }

  std::ofstream summary((out_dir / "summary.txt").string());
  summary.precision(12);
  const auto& first = result.records.front();
  const auto& last = result.records.back();
  double dobj = 100.0 * (last.breakdown.objective - first.breakdown.objective) /
                std::abs(first.breakdown.objective);
  double dvol = 100.0 * (last.breakdown.volume - first.breakdown.volume) /
                std::abs(first.breakdown.volume);
  summary << "name: " << spec.name << "\n"
          << "status: " << run_status_name(result.status) << "\n"
          << "iterations: " << result.records.size() - 1 << "\n"
          << "initial objective: " << first.breakdown.objective << "\n"
          << "final objective: " << last.breakdown.objective << "\n"
          << "objective change %: " << dobj << "\n"
          << "initial volume: " << first.breakdown.volume << "\n"
          << "final volume: " << last.breakdown.volume << "\n"
          << "volume change %: " << dvol << "\n";
  std::cout << "status: " << run_status_name(result.status) << ", objective change " << dobj
            << "%, volume change " << dvol << "%\n";
  return kExitOk;
}

int run_sweep(const ExperimentSpec& spec, const fs::path& out_dir) {
  if (!spec.sweep) {
    std::cerr << "config has no [sweep] section\n";
    return kExitConfig;
  }
  fs::create_directories(out_dir);
  Polyline curl_ref, detgrad_ref;
  if (!spec.sweep->compare_curl.empty())
    curl_ref = read_polyline_csv(spec.sweep->compare_curl);
  if (!spec.sweep->compare_detgrad.empty())
    detgrad_ref = read_polyline_csv(spec.sweep->compare_detgrad);

  std::ofstream trend((out_dir / "hausdorff_trend.csv").string());
  trend.precision(12);
  trend << "configuration[1],alpha[1],gamma2[1],hausdorff_vs_curl[length],"
           "hausdorff_vs_detgrad[length]\n";

  for (int k : spec.sweep->configurations) {
    ExperimentSpec variant = spec;
    variant.sweep.reset();
    variant.name = spec.name + "_cfg" + std::to_string(k);
    variant.config.algorithm = Algorithm::dF;
    variant.config.gamma1 = 1.0;
    variant.config.gamma2 = static_cast<double>(k);
    variant.config.alpha = 5.0 + k;
    std::cout << "== configuration " << k << " (alpha " << variant.config.alpha << ", gamma2 "
              << variant.config.gamma2 << ") ==\n";
    Polyline final_poly;
    int rc = run_experiment(variant, out_dir / variant.name, &final_poly);
    if (rc != kExitOk) return rc;
    trend << k << "," << variant.config.alpha << "," << variant.config.gamma2 << ",";
    if (!curl_ref.empty())
      trend << hausdorff_distance(final_poly, curl_ref);
    trend << ",";
    if (!detgrad_ref.empty())
      trend << hausdorff_distance(final_poly, detgrad_ref);
    trend << "\n";
    trend.flush();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"obstacle shape optimization maximizing channel-flow vorticity"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  Overrides ov;
  int max_iter = -1;
  double tol = -1.0;
  long seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config file")->required();
    cmd->add_option("--out", out_dir, "output directory (default out/<name>)");
    cmd->add_option("--max-iter", max_iter, "override max_iter");
    cmd->add_option("--tol", tol, "override stopping tolerance");
    cmd->add_option("--seed", seed, "override mesh seed");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run a single experiment");
  add_common(cmd_run);
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run the mixed-problem configuration sweep");
  add_common(cmd_sweep);
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "run the built-in numerical validation suite");
  std::string ha, hb;
  CLI::App* cmd_h = app.add_subcommand("hausdorff", "Hausdorff distance of two polyline CSVs");
  cmd_h->add_option("a", ha, "first polyline CSV")->required();
  cmd_h->add_option("b", hb, "second polyline CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cmd_validate)) {
      ValidationReport report = run_validation(std::cout);
      return report.all_passed() ? kExitOk : kExitValidation;
    }
    if (app.got_subcommand(cmd_h)) {
      std::cout << hausdorff_distance(read_polyline_csv(ha), read_polyline_csv(hb)) << "\n";
      return kExitOk;
    }

    ExperimentSpec spec;
    try {
      spec = parse_config_file(config_path);
      if (max_iter >= 0) ov.max_iter = max_iter;
      if (tol > 0) ov.tol = tol;
      if (seed >= 0) ov.seed = static_cast<std::uint64_t>(seed);
      apply_overrides(spec, ov);
      spec.config.validate();
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    fs::path out = out_dir.empty() ? fs::path("out") / spec.name : fs::path(out_dir);

    if (app.got_subcommand(cmd_run)) return run_experiment(spec, out);
    if (app.got_subcommand(cmd_sweep)) return run_sweep(spec, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

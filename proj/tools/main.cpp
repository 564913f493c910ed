// densreg — density-sensitive semisupervised kernel regression toolkit.
//
// Subcommands:
//   gen    generate a synthetic instance and write labeled/unlabeled CSVs
//   fit    fit the semisupervised estimator and predict at query points
//   cv     validation-risk selection of (alpha, h)
//   sweep  seeds x methods experiment grid, CSV output
//   dist   pairwise plug-in distance dump for given points
//
// Exit codes: 0 success, 2 usage, 3 data validation, 4 runtime.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "densreg/adapt.hpp"
#include "densreg/dataset_io.hpp"
#include "densreg/density.hpp"
#include "densreg/errors.hpp"
#include "densreg/experiment.hpp"
#include "densreg/geodesic.hpp"
#include "densreg/parallel.hpp"
#include "densreg/regress.hpp"
#include "densreg/rng.hpp"
#include "densreg/synth.hpp"
#include "densreg/types.hpp"

namespace {

using namespace densreg;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct GeneratorFlags {
  std::string name = "smooth";
  std::uint64_t seed = 1;
  double sigma = 0.1;
  // lower_bound
  std::int64_t n_design = 10;
  double c0 = 3.0;
  double r = 0.0;  // 0 → solve the d-equation
  double big_m = 1.0;
  std::int64_t omega_seed = -1;  // -1 → all ones
  // smooth
  double alpha_true = 0.0;
  double beta = 1.0;
  int n_bumps = 3;
  int dim = 2;
  // uniform_components
  std::vector<std::string> boxes;
  std::vector<double> labels;
};

Box parse_box(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw config_error("box '" + text + "' must look like 'lo1,lo2:hi1,hi2'");
  auto parse_list = [&](const std::string& part) {
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= part.size()) {
      const auto comma = part.find(',', pos);
      const std::string tok = part.substr(pos, comma == std::string::npos ? comma : comma - pos);
      char* end = nullptr;
      vals.push_back(std::strtod(tok.c_str(), &end));
      if (end == tok.c_str() || *end != '\0')
        throw config_error("box '" + text + "': bad coordinate '" + tok + "'");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return vals;
  };
  Box b;
  b.lower = Point(parse_list(text.substr(0, colon)));
  b.upper = Point(parse_list(text.substr(colon + 1)));
  b.validate();
  return b;
}

ProblemInstance make_instance(const GeneratorFlags& g) {
  if (g.name == "lower_bound") {
    const std::int64_t q = lower_bound_q(g.n_design, g.dim, g.c0);
    auto omega = g.omega_seed >= 0
                     ? omega_from_seed(q, static_cast<std::uint64_t>(g.omega_seed))
                     : omega_all_ones(q);
    LowerBoundOptions opts;
    opts.sigma = g.sigma;
    if (g.r > 0.0) opts.r = g.r;
    return make_lower_bound_instance(g.n_design, g.dim, std::move(omega), g.big_m, g.c0, opts);
  }
  if (g.name == "smooth") {
    SmoothOptions opts;
    opts.d = g.dim;
    opts.sigma = g.sigma;
    opts.n_bumps = g.n_bumps;
    return make_smooth_instance(g.alpha_true, g.beta, g.seed, opts);
  }
  if (g.name == "uniform_components") {
    if (g.boxes.empty()) throw config_error("uniform_components: at least one --box required");
    std::vector<Box> boxes;
    for (const auto& b : g.boxes) boxes.push_back(parse_box(b));
    return make_uniform_components(boxes, g.labels, g.sigma);
  }
  throw config_error("unknown generator name '" + g.name + "'");
}

nlohmann::json problem_class_json(const ProblemClass& pc) {
  return {{"d", pc.d},       {"lambda0", pc.lambda0}, {"Lambda0", pc.Lambda0},
          {"M", pc.M},       {"sigma", pc.sigma},     {"K", pc.K},
          {"tau0", pc.tau0}, {"beta", pc.beta},       {"C1", pc.C1},
          {"eta", pc.eta},   {"C2", pc.C2}};
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw io_error("write failed for '" + path + "'");
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void add_generator_flags(CLI::App* cmd, GeneratorFlags& g) {
  cmd->add_option("--generator", g.name,
                  "instance generator: uniform_components | lower_bound | smooth");
  cmd->add_option("--seed", g.seed, "base RNG seed");
  cmd->add_option("--sigma", g.sigma, "label noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--n-design", g.n_design, "design size of the hard instance");
  cmd->add_option("--c0", g.c0, "bump-count constant of the hard instance");
  cmd->add_option("--r", g.r, "bump fillet radius; 0 solves the d-equation");
  cmd->add_option("--big-m", g.big_m, "label magnitude bound M")->check(CLI::PositiveNumber);
  cmd->add_option("--omega-seed", g.omega_seed, "random bump ownership seed; -1 = all ones");
  cmd->add_option("--alpha-true", g.alpha_true, "density sensitivity of the smooth instance")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta", g.beta, "smoothness exponent of the smooth instance");
  cmd->add_option("--n-bumps", g.n_bumps, "density bumps in the smooth instance");
  cmd->add_option("--dim", g.dim, "ambient dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--box", g.boxes, "component box 'lo1,lo2:hi1,hi2' (repeatable)");
  cmd->add_option("--labels", g.labels, "component labels")->delimiter(',');
}

void add_pipeline_flags(CLI::App* cmd, PipelineOptions& p, int& conn) {
  cmd->add_option("--grid-res", p.grid_per_axis, "grid cells per axis")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--margin", p.margin, "grid margin beyond the data range");
  cmd->add_option("--c1", p.c1, "sup-norm schedule constant")->check(CLI::PositiveNumber);
  cmd->add_option("--c2", p.c2, "boundary-strip schedule constant")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--h-m", p.h_m, "KDE bandwidth override");
  cmd->add_option("--delta-m", p.delta_m, "boundary strip half-width override");
  cmd->add_option("--connectivity", conn, "grid connectivity: 4, 8 or 16")
      ->check(CLI::IsMember({4, 8, 16}));
  cmd->add_flag("--snap", p.snap_queries,
                "snap off-interior queries to the nearest interior node");
}

Connectivity conn_from_int(int c) {
  return c == 4 ? Connectivity::four : c == 8 ? Connectivity::eight : Connectivity::sixteen;
}

int run(int argc, char** argv) {
  CLI::App app{"density-sensitive semisupervised kernel regression"};
  app.set_config("--config", "", "flat key = value config file; CLI flags take precedence");
  app.require_subcommand(1);

  unsigned threads = 0;
  std::string out_dir = ".";
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--out-dir", out_dir, "default output directory")
      ->envname("DENSREG_OUT_DIR");

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  GeneratorFlags gen_flags;
  std::int64_t gen_n = 100, gen_m = 1000;
  add_generator_flags(gen, gen_flags);
  gen->add_option("--n", gen_n, "labeled rows")->check(CLI::PositiveNumber);
  gen->add_option("--m", gen_m, "unlabeled rows")->check(CLI::PositiveNumber);

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit and predict at query points");
  std::string fit_labeled, fit_unlabeled, fit_queries, fit_output;
  double fit_alpha = 0.0, fit_h = 0.0;
  std::string fit_fallback = "labeled_mean";
  PipelineOptions fit_pipe;
  int fit_conn = 16;
  bool fit_emit_grid = false;
  fit->add_option("--labeled", fit_labeled)->required();
  fit->add_option("--unlabeled", fit_unlabeled)->required();
  fit->add_option("--queries", fit_queries)->required();
  fit->add_option("--alpha", fit_alpha, "density sensitivity")
      ->check(CLI::NonNegativeNumber)
      ->required();
  fit->add_option("--h", fit_h, "bandwidth in plug-in distance units")
      ->check(CLI::PositiveNumber)
      ->required();
  fit->add_option("--fallback", fit_fallback)
      ->check(CLI::IsMember({"labeled_mean", "undefined"}));
  fit->add_option("--output", fit_output, "predictions JSON path");
  fit->add_flag("--emit-grid", fit_emit_grid, "also dump the density model JSON");
  add_pipeline_flags(fit, fit_pipe, fit_conn);

  // ---- cv ----
  auto* cv = app.add_subcommand("cv", "cross-validated selection of (alpha, h)");
  std::string cv_labeled, cv_unlabeled, cv_output;
  std::vector<double> cv_alphas, cv_bandwidths;
  double cv_fraction = 0.5;
  std::uint64_t cv_seed = 1;
  PipelineOptions cv_pipe;
  int cv_conn = 16;
  bool cv_emit_grid = false;
  cv->add_option("--labeled", cv_labeled)->required();
  cv->add_option("--unlabeled", cv_unlabeled)->required();
  cv->add_option("--alphas", cv_alphas, "candidate alphas (default ladder)")->delimiter(',');
  cv->add_option("--bandwidths", cv_bandwidths, "candidate bandwidths (default automatic)")
      ->delimiter(',');
  cv->add_option("--split-fraction", cv_fraction);
  cv->add_option("--cv-seed", cv_seed);
  cv->add_option("--output", cv_output, "selection report JSON path");
  cv->add_flag("--emit-grid", cv_emit_grid);
  add_pipeline_flags(cv, cv_pipe, cv_conn);

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "seeds x methods experiment grid");
  GeneratorFlags sweep_gen;
  SweepConfig sweep_cfg;
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_output;
  int sweep_conn = 16;
  add_generator_flags(sweep, sweep_gen);
  sweep->add_option("--n", sweep_cfg.n, "labeled size")->check(CLI::PositiveNumber);
  sweep->add_option("--m", sweep_cfg.m, "unlabeled size")->check(CLI::PositiveNumber);
  sweep->add_option("--seeds", sweep_seeds, "experiment seeds")->delimiter(',');
  sweep->add_option("--methods", sweep_cfg.methods,
                    "subset of ss_cv, ss_fixed, euclidean_cv")
      ->delimiter(',');
  sweep->add_option("--n-mc", sweep_cfg.n_mc, "Monte-Carlo evaluation draws")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--fixed-alpha", sweep_cfg.fixed_alpha)->check(CLI::NonNegativeNumber);
  sweep->add_option("--fixed-h", sweep_cfg.fixed_h);
  sweep->add_option("--alphas", sweep_cfg.alphas, "candidate alphas")->delimiter(',');
  sweep->add_option("--bandwidths", sweep_cfg.bandwidths, "candidate bandwidths")
      ->delimiter(',');
  sweep->add_option("--split-fraction", sweep_cfg.split_fraction);
  sweep->add_option("--output", sweep_output, "results CSV path");
  add_pipeline_flags(sweep, sweep_cfg.pipeline, sweep_conn);

  // ---- dist ----
  auto* dist = app.add_subcommand("dist", "pairwise plug-in distances");
  std::string dist_unlabeled, dist_points, dist_output;
  double dist_alpha = 1.0;
  PipelineOptions dist_pipe;
  int dist_conn = 16;
  dist->add_option("--unlabeled", dist_unlabeled)->required();
  dist->add_option("--points", dist_points, "CSV of query points")->required();
  dist->add_option("--alpha", dist_alpha)->check(CLI::NonNegativeNumber);
  dist->add_option("--output", dist_output, "distance matrix JSON path");
  add_pipeline_flags(dist, dist_pipe, dist_conn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  default_threads().store(threads);

  if (gen->parsed()) {
    const ProblemInstance inst = make_instance(gen_flags);
    Rng rng_l(derive_seed(gen_flags.seed, 1));
    Rng rng_u(derive_seed(gen_flags.seed, 2));
    const LabeledSet labeled = inst.draw_labeled(static_cast<std::size_t>(gen_n), rng_l);
    const UnlabeledSet unlabeled = inst.draw_unlabeled(static_cast<std::size_t>(gen_m), rng_u);
    save_dataset(labeled, join_path(out_dir, "labeled.csv"));
    save_dataset(unlabeled, join_path(out_dir, "unlabeled.csv"));
    nlohmann::json sidecar = {{"schema_version", 1},
                              {"generator", gen_flags.name},
                              {"seed", gen_flags.seed},
                              {"n", gen_n},
                              {"m", gen_m},
                              {"problem_class", problem_class_json(inst.pclass)},
                              {"support_descriptor", inst.support_descriptor}};
    write_json(sidecar, join_path(out_dir, "instance.json"));
    std::cout << "wrote labeled.csv (" << gen_n << " rows), unlabeled.csv (" << gen_m
              << " rows), instance.json\n";
    return 0;
  }

  if (fit->parsed()) {
    fit_pipe.conn = conn_from_int(fit_conn);
    const LabeledSet labeled = load_labeled(fit_labeled);
    const UnlabeledSet unlabeled = load_unlabeled(fit_unlabeled);
    const UnlabeledSet queries = [&] {
      auto t = detail::read_table(fit_queries);
      if (t.has_y) throw schema_error(fit_queries + ": query file must not carry labels");
      return UnlabeledSet(std::move(t.points));
    }();
    const GridSpec grid = grid_for_data(unlabeled, fit_pipe);
    const DensityModel model = build_density(unlabeled, grid, fit_pipe);
    const GeodesicGraph graph = build_graph(model, fit_alpha, fit_pipe.conn, fit_pipe.threads);
    EstimatorSpec spec;
    spec.alpha = fit_alpha;
    spec.h = fit_h;
    spec.fallback = fit_fallback == "undefined" ? Fallback::Undefined : Fallback::LabeledMean;
    FittedRegressor reg = FittedRegressor::fit(labeled, graph, spec, fit_pipe.m_trunc);
    reg.set_snap_queries(fit_pipe.snap_queries);
    std::vector<Prediction> preds(queries.m());
    for (std::size_t i = 0; i < queries.m(); ++i) preds[i] = reg.predict(queries.points[i]);
    const std::string out_path =
        fit_output.empty() ? join_path(out_dir, "predictions.json") : fit_output;
    write_json(predictions_json(queries.points, preds, fit_alpha, fit_h), out_path);
    if (fit_emit_grid) write_json(to_json(model), join_path(out_dir, "density.json"));
    std::cout << "wrote " << out_path << " (" << queries.m() << " predictions)\n";
    return 0;
  }

  if (cv->parsed()) {
    cv_pipe.conn = conn_from_int(cv_conn);
    const LabeledSet labeled = load_labeled(cv_labeled);
    const UnlabeledSet unlabeled = load_unlabeled(cv_unlabeled);
    const GridSpec grid = grid_for_data(unlabeled, cv_pipe);
    const DensityModel model = build_density(unlabeled, grid, cv_pipe);
    SelectOptions so;
    so.conn = cv_pipe.conn;
    so.threads = cv_pipe.threads;
    SelectionReport report;
    if (!cv_alphas.empty() && !cv_bandwidths.empty()) {
      CandidateGrid grid_spec;
      grid_spec.alphas = cv_alphas;
      grid_spec.bandwidths = cv_bandwidths;
      grid_spec.split_fraction = cv_fraction;
      grid_spec.seed = cv_seed;
      report = select(labeled, model, grid_spec, so);
    } else if (!cv_alphas.empty()) {
      std::vector<AlphaBandwidths> groups;
      for (double a : cv_alphas) groups.push_back({a, {}});
      report = select_grouped(labeled, model, std::move(groups), cv_fraction, cv_seed, so);
    } else {
      report = select_auto(labeled, model, cv_fraction, cv_seed, so);
    }
    const std::string out_path =
        cv_output.empty() ? join_path(out_dir, "selection.json") : cv_output;
    write_json(to_json(report), out_path);
    if (cv_emit_grid) write_json(to_json(model), join_path(out_dir, "density.json"));
    std::cout << "chosen alpha=" << report.chosen.alpha << " h=" << report.chosen.h << " -> "
              << out_path << '\n';
    return 0;
  }

  if (sweep->parsed()) {
    sweep_cfg.pipeline.conn = conn_from_int(sweep_conn);
    sweep_cfg.pipeline.threads = threads;
    if (!sweep_seeds.empty()) sweep_cfg.seeds = sweep_seeds;
    const ProblemInstance inst = make_instance(sweep_gen);
    const auto rows = run_sweep(inst, sweep_cfg);
    const std::string out_path =
        sweep_output.empty() ? join_path(out_dir, "sweep.csv") : sweep_output;
    std::ofstream out(out_path);
    if (!out) throw io_error("cannot open '" + out_path + "' for writing");
    write_sweep_csv(rows, out);
    out.flush();
    if (!out) throw io_error("write failed for '" + out_path + "'");
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    return 0;
  }

  if (dist->parsed()) {
    dist_pipe.conn = conn_from_int(dist_conn);
    const UnlabeledSet unlabeled = load_unlabeled(dist_unlabeled);
    const UnlabeledSet pts = load_unlabeled(dist_points);
    const GridSpec grid = grid_for_data(unlabeled, dist_pipe);
    const DensityModel model = build_density(unlabeled, grid, dist_pipe);
    const GeodesicGraph graph = build_graph(model, dist_alpha, dist_pipe.conn);
    nlohmann::json matrix = nlohmann::json::array();
    for (std::size_t i = 0; i < pts.m(); ++i) {
      const DistanceField field =
          distances_from(graph, pts.points[i], dist_pipe.snap_queries);
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < pts.m(); ++j) {
        const auto res = field.at(graph.snap(pts.points[j], dist_pipe.snap_queries));
        if (res.reachable)
          row.push_back(res.value);
        else
          row.push_back(nullptr);  // infinity; JSON has no inf literal
      }
      matrix.push_back(row);
    }
    nlohmann::json j = {{"schema_version", 1}, {"alpha", dist_alpha}, {"matrix", matrix}};
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& p : pts.points) jp.push_back(p.coords);
    j["points"] = jp;
    const std::string out_path =
        dist_output.empty() ? join_path(out_dir, "distances.json") : dist_output;
    write_json(j, out_path);
    std::cout << "wrote " << out_path << '\n';
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const densreg::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const densreg::uncovered_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const densreg::validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const densreg::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

// Command-line front end: fit / eval / synth / render / grad-check.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cubist/em.hpp"
#include "cubist/errors.hpp"
#include "cubist/gradcheck.hpp"
#include "cubist/io.hpp"
#include "cubist/metrics.hpp"
#include "cubist/robust.hpp"
#include "cubist/synth.hpp"

namespace {

using namespace cubist;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct FitArgs {
  std::string depth_path;
  std::string intrinsics_path;
  std::string weights_path;
  std::string out_path;
  std::string mesh_path;
  std::string diag_path;
  std::uint64_t seed = 0;
  int hypotheses = 4096;
  double tau = 0.004;
  double tau_c_mult = 2.0;
  double beta = 5.0;
  int mss = 6;
  int max_cuboids = 8;
  double theta = -1.0;  // negative: use 9 ln n
  bool refine_em = false;
  bool plain_inliers = false;
  int max_points = 40000;
  int workers = 1;
};

/// Uniform-stride subsample keeping at most max_points entries.
PointCloud subsample(const PointCloud& cloud, int max_points) {
  const std::size_t n = cloud.points.size();
  if (max_points <= 0 || n <= static_cast<std::size_t>(max_points))
    return cloud;
  const std::size_t stride =
      (n + static_cast<std::size_t>(max_points) - 1) / max_points;
  PointCloud out;
  out.points.reserve(n / stride + 1);
  out.pixel_index.reserve(n / stride + 1);
  for (std::size_t i = 0; i < n; i += stride) {
    out.points.push_back(cloud.points[i]);
    out.pixel_index.push_back(cloud.pixel_index[i]);
  }
  return out;
}

int run_fit(const FitArgs& args) {
  const DepthMap depth = load_depth(args.depth_path);
  const Intrinsics K = load_intrinsics(args.intrinsics_path);
  const PointCloud full = backproject(depth, K);
  if (full.points.empty()) throw io_error("fit: depth map has no valid pixels");
  const PointCloud cloud = subsample(full, args.max_points);

  WeightMaps maps =
      args.weights_path.empty()
          ? WeightMaps::uniform(cloud.points.size())
          : load_weight_maps(args.weights_path, K.width, K.height,
                             cloud.pixel_index);

  FitConfig cfg;
  cfg.minimal_set_size = args.mss;
  cfg.hypotheses = args.hypotheses;
  cfg.max_cuboids = args.max_cuboids;
  cfg.seed = args.seed;
  cfg.inlier = InlierParams::with_tau(args.tau, args.beta, args.tau_c_mult);
  cfg.workers = args.workers;
  cfg.metric = args.plain_inliers ? InlierMetric::plain_distance
                                  : InlierMetric::occlusion_aware;
  if (args.theta >= 0.0) cfg.theta = args.theta;

  SceneFit fit = fit_scene(cloud.points, maps, cfg);

  if (args.refine_em && !fit.cuboids.empty()) {
    EmConfig em;
    em.sigma = std::sqrt(args.tau);
    em.size_min = cfg.solver.size_min;
    em.size_max = cfg.solver.size_max;
    fit.cuboids = em_refine(cloud.points, fit.cuboids, em).cuboids;
  }

  save_cuboids(fit.cuboids, args.out_path);
  if (!args.mesh_path.empty()) export_obj(fit.cuboids, args.mesh_path);
  if (!args.diag_path.empty())
    write_file(args.diag_path, diagnostics_to_jsonl(fit.rounds));
  std::cout << "fit: " << fit.cuboids.size() << " cuboid(s) from "
            << cloud.points.size() << " points -> " << args.out_path << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string depth_path;
  std::string intrinsics_path;
  std::string primitives_path;
  std::string family = "cuboid";
  std::vector<double> bounds = {0.20, 0.05};
  std::string report_path;
  std::string mask_path;
  int n_surface = 10000;
  int line_samples = 64;
  int workers = 1;
};

int run_eval(const EvalArgs& args) {
  const DepthMap depth = load_depth(args.depth_path);
  const Intrinsics K = load_intrinsics(args.intrinsics_path);

  EvalReport report;
  CoverageResult cov;
  if (args.family == "cuboid") {
    const auto cuboids = load_cuboids(args.primitives_path);
    report = evaluate(depth, K, cuboids, args.bounds, args.workers);
    if (!args.mask_path.empty()) cov = coverage(depth, K, cuboids, args.workers);
  } else if (args.family == "superquadric") {
    const auto sqs = load_superquadrics(args.primitives_path);
    report = evaluate_superquadrics(depth, K, sqs, args.bounds, args.n_surface,
                                    args.line_samples, args.workers);
    if (!args.mask_path.empty())
      cov = superquadric_coverage(depth, K, sqs, args.line_samples,
                                  args.workers);
  } else {
    throw io_error("eval: unknown family '" + args.family + "'");
  }

  write_file(args.report_path, report_to_json(report));
  if (!args.mask_path.empty())
    save_mask_pgm(cov.mask, depth.width, depth.height, args.mask_path);
  std::cout << "eval: report -> " << args.report_path << "\n";
  return kExitOk;
}

struct SynthArgs {
  int k = 3;
  std::uint64_t seed = 7;
  int width = 640;
  int height = 480;
  double focal = 525.0;
  double noise = 0.0;
  std::string out_dir;
};

int run_synth(const SynthArgs& args) {
  const Intrinsics K = default_intrinsics(args.width, args.height, args.focal);
  const SynthScene scene = make_scene(args.k, SynthRanges{}, K, args.width,
                                      args.height, args.seed, args.noise);
  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  save_depth(scene.depth, (dir / "depth.pfm").string());
  save_intrinsics(K, (dir / "intrinsics.json").string());
  save_cuboids(scene.cuboids, (dir / "cuboids.json").string());
  std::cout << "synth: wrote depth.pfm, intrinsics.json, cuboids.json to "
            << args.out_dir << "\n";
  return kExitOk;
}

struct RenderArgs {
  std::string primitives_path;
  std::string intrinsics_path;
  std::string out_path;
  int workers = 1;
};

int run_render(const RenderArgs& args) {
  const Intrinsics K = load_intrinsics(args.intrinsics_path);
  const auto cuboids = load_cuboids(args.primitives_path);
  const DepthMap depth =
      render_depth(cuboids, K, K.width, K.height, args.workers);
  save_depth(depth, args.out_path);
  std::cout << "render: depth -> " << args.out_path << "\n";
  return kExitOk;
}

int run_grad_check(int trials, std::uint64_t seed) {
  const GradCheckSummary s = run_gradient_check(trials, seed);
  std::cout << "{\"median_relative_error\":" << format_number(s.median_relative_error)
            << ",\"p90_relative_error\":" << format_number(s.p90_relative_error)
            << ",\"seed\":" << s.seed << ",\"step\":" << format_number(s.step)
            << ",\"trials\":" << s.trials << "}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occlusion-aware cuboid scene abstraction"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit cuboids to a depth map");
  fit->add_option("--depth", fit_args.depth_path, "Depth map (.pfm or .csv)")
      ->required();
  fit->add_option("--intrinsics", fit_args.intrinsics_path, "Intrinsics JSON")
      ->required();
  fit->add_option("--weights", fit_args.weights_path, "Sampling weight maps");
  fit->add_option("--seed", fit_args.seed, "RNG seed");
  fit->add_option("--hypotheses", fit_args.hypotheses, "Hypotheses per round");
  fit->add_option("--tau", fit_args.tau, "Inlier threshold");
  fit->add_option("--tau-c-mult", fit_args.tau_c_mult,
                  "Occlusion penalty threshold, multiple of tau");
  fit->add_option("--beta", fit_args.beta, "Inlier softness");
  fit->add_option("--mss", fit_args.mss, "Minimal set size");
  fit->add_option("--max-cuboids", fit_args.max_cuboids, "Cuboid budget");
  fit->add_option("--theta", fit_args.theta,
                  "Stopping threshold override (default 9 ln n)");
  fit->add_flag("--refine-em", fit_args.refine_em, "EM refinement pass");
  fit->add_flag("--plain-inliers", fit_args.plain_inliers,
                "Disable occlusion-aware inlier counting");
  fit->add_option("--max-points", fit_args.max_points,
                  "Uniform-stride point budget");
  fit->add_option("--workers", fit_args.workers, "Worker threads");
  fit->add_option("--out", fit_args.out_path, "Output cuboid JSON")->required();
  fit->add_option("--mesh", fit_args.mesh_path, "Optional OBJ mesh");
  fit->add_option("--diag", fit_args.diag_path, "Round diagnostics JSONL");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate primitives against depth");
  eval->add_option("--depth", eval_args.depth_path, "Depth map")->required();
  eval->add_option("--intrinsics", eval_args.intrinsics_path, "Intrinsics")
      ->required();
  eval->add_option("--primitives", eval_args.primitives_path,
                   "Primitive JSON")
      ->required();
  eval->add_option("--family", eval_args.family, "cuboid | superquadric");
  eval->add_option("--bounds", eval_args.bounds, "AUC bounds in meters")
      ->delimiter(',');
  eval->add_option("--n-surface", eval_args.n_surface,
                   "Superquadric surface samples");
  eval->add_option("--line-samples", eval_args.line_samples,
                   "Superquadric line-of-sight samples");
  eval->add_option("--workers", eval_args.workers, "Worker threads");
  eval->add_option("--report", eval_args.report_path, "Report JSON")
      ->required();
  eval->add_option("--mask", eval_args.mask_path, "Coverage mask PGM");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("--k", synth_args.k, "Number of cuboids");
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--width", synth_args.width, "Image width");
  synth->add_option("--height", synth_args.height, "Image height");
  synth->add_option("--focal", synth_args.focal, "Focal length in pixels");
  synth->add_option("--noise", synth_args.noise, "Gaussian depth noise sigma");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")
      ->required();

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render depth from primitives");
  render->add_option("--primitives", render_args.primitives_path,
                     "Cuboid JSON")
      ->required();
  render->add_option("--intrinsics", render_args.intrinsics_path, "Intrinsics")
      ->required();
  render->add_option("--out", render_args.out_path, "Output depth")->required();
  render->add_option("--workers", render_args.workers, "Worker threads");

  int gc_trials = 50;
  std::uint64_t gc_seed = 1;
  auto* gc = app.add_subcommand("grad-check",
                                "Finite-difference check of the solver "
                                "jacobian");
  gc->add_option("--trials", gc_trials, "Number of minimal sets");
  gc->add_option("--seed", gc_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (synth->parsed()) return run_synth(synth_args);
    if (render->parsed()) return run_render(render_args);
    if (gc->parsed()) return run_grad_check(gc_trials, gc_seed);
  } catch (const io_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

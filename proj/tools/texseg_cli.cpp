#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "texseg/chan_vese.hpp"
#include "texseg/config.hpp"
#include "texseg/evolution.hpp"
#include "texseg/image_io.hpp"
#include "texseg/level_set.hpp"
#include "texseg/parallel.hpp"
#include "texseg/synth.hpp"

namespace {

using namespace texseg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitCollapse = 3;

std::string snapshot_path(const std::string& base, int iter) {
  const auto dot = base.find_last_of('.');
  char tag[16];
  std::snprintf(tag, sizeof tag, "_%06d", iter);
  if (dot == std::string::npos) return base + tag;
  return base.substr(0, dot) + tag + base.substr(dot);
}

struct FileDefaults {
  const std::map<std::string, std::string>& kv;
  CLI::App& app;

  /// File values fill in only where the flag was not given on the command line.
  template <typename T>
  void apply(const std::string& flag, const std::string& key, T& target) const {
    const auto it = kv.find(key);
    if (it == kv.end() || app.count(flag) > 0) return;
    std::stringstream ss(it->second);
    T value;
    if (!(ss >> value) || !ss.eof())
      throw config::ConfigError(key + ": cannot parse '" + it->second + "'");
    target = value;
  }
};

int run(config::RunConfig& cfg, std::optional<std::uint64_t> seed_flag) {
  par::set_max_threads(cfg.threads);

  std::optional<GrayImage> image;
  std::optional<Mask> truth;
  if (cfg.input_path) {
    image.emplace(io::read_pgm(*cfg.input_path));
  } else {
    auto spec = *cfg.synth_spec;
    if (seed_flag) spec.seed = *seed_flag;
    auto composite = synth::generate(spec);
    image.emplace(std::move(composite.image));
    truth.emplace(std::move(composite.truth));
  }

  const level_set::InitShape init = cfg.init.value_or(level_set::Circle{
      image->width() / 2.0, image->height() / 2.0,
      std::min(image->width(), image->height()) / 3.0});

  const auto initial_contours =
      level_set::zero_contour(level_set::init_signed_distance(init, image->width(),
                                                              image->height()));

  evolve::Observer observer;
  if (cfg.snapshot_stride > 0 && cfg.out_overlay) {
    observer = [&](const evolve::EvolutionState& state, const evolve::StepInfo&) {
      if (state.iter % cfg.snapshot_stride != 0) return;
      io::write_overlay(snapshot_path(*cfg.out_overlay, state.iter), *image,
                        initial_contours, level_set::zero_contour(state.phi));
    };
  }

  evolve::SegmentationResult result =
      cfg.mode == "texture"
          ? evolve::evolve(*image, init, cfg.evolve_params, observer)
          : cv::chan_vese_evolve(*image, init, cfg.cv_params);

  if (cfg.out_mask) io::write_pgm_mask(*cfg.out_mask, result.mask);
  if (cfg.out_overlay)
    io::write_overlay(*cfg.out_overlay, *image, initial_contours, result.contours);
  if (cfg.out_cost) {
    std::ostringstream note;
    note << "stop_reason=" << evolve::to_string(result.stop_reason)
         << " iterations=" << result.iterations;
    io::write_cost_csv(*cfg.out_cost, result.cost_history, result.steps, note.str());
  }

  std::cout << "mode=" << cfg.mode << " iterations=" << result.iterations
            << " stop_reason=" << evolve::to_string(result.stop_reason)
            << " J_best=" << result.cost_history[std::distance(
                   result.cost_history.begin(),
                   std::max_element(result.cost_history.begin(),
                                    result.cost_history.end()))];
  if (truth) {
    std::int64_t agree = 0;
    for (int y = 0; y < result.mask.height(); ++y)
      for (int x = 0; x < result.mask.width(); ++x)
        agree += ((result.mask(x, y) != 0) == ((*truth)(x, y) != 0)) ? 1 : 0;
    std::cout << " accuracy="
              << static_cast<double>(agree) / (result.mask.width() * result.mask.height());
  }
  std::cout << "\n";

  if (result.stop_reason == evolve::StopReason::collapse) {
    std::cerr << "collapse: one region emptied after " << result.iterations
              << " iterations; artifacts were still written\n";
    return kExitCollapse;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-region segmentation: level-set gradient ascent on the manifold "
      "distance between region patch statistics, plus a piecewise-constant "
      "baseline (--mode chanvese)."};

  config::RunConfig cfg;
  std::string input, synth_file, init_text;
  std::uint64_t seed = 0;

  app.add_option("--mode", cfg.mode, "texture | chanvese")->capture_default_str();
  app.add_option("--input", input, "8-bit binary PGM (P5) input image");
  app.add_option("--synth", synth_file,
                 "composite spec file (key = value; may also hold run keys)");
  app.add_option("--init", init_text,
                 "circle:cx,cy,r | rectangle:x0,y0,x1,y1 | multi_circle:spacing,r");
  app.add_option("--radius", cfg.evolve_params.radius, "patch side R (odd)")
      ->capture_default_str();
  app.add_option("--lambda", cfg.evolve_params.lambda, "curvature weight (dimensionless)")
      ->capture_default_str();
  app.add_option("--epsilon", cfg.evolve_params.epsilon, "Heaviside width, px")
      ->capture_default_str();
  app.add_option("--dt0", cfg.evolve_params.dt0, "max per-step displacement, px")
      ->capture_default_str();
  app.add_option("--max-iters", cfg.evolve_params.max_iters, "iteration cap")
      ->capture_default_str();
  app.add_option("--reinit-period", cfg.evolve_params.reinit_period,
                 "redistance every K iterations")
      ->capture_default_str();
  app.add_option("--reg", cfg.evolve_params.reg, "moment ridge, relative to trace")
      ->capture_default_str();
  app.add_option("--patience", cfg.evolve_params.patience,
                 "non-increasing steps before stopping")
      ->capture_default_str();
  app.add_option("--seed", seed, "overrides the synth spec seed");
  app.add_option("--threads", cfg.threads, "worker cap (1 = fully sequential)")
      ->capture_default_str();
  app.add_option("--mu", cfg.cv_params.mu, "chanvese: length weight")
      ->capture_default_str();
  app.add_option("--nu", cfg.cv_params.nu, "chanvese: area weight")
      ->capture_default_str();
  app.add_option("--lambda1", cfg.cv_params.lambda1, "chanvese: interior fit weight")
      ->capture_default_str();
  app.add_option("--lambda2", cfg.cv_params.lambda2, "chanvese: exterior fit weight")
      ->capture_default_str();
  std::string out_mask, out_overlay, out_cost;
  app.add_option("--out-mask", out_mask, "mask PGM (255 = interior)");
  app.add_option("--out-overlay", out_overlay,
                 ".ppm = color (initial yellow, final red); else gray PGM");
  app.add_option("--out-cost", out_cost, "cost trace CSV (iter,J,dt,reinit)");
  app.add_option("--snapshot-stride", cfg.snapshot_stride,
                 "write an overlay every K iterations (0 = off)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    std::map<std::string, std::string> kv;
    if (!synth_file.empty()) {
      kv = config::read_config_file(synth_file);
      cfg.synth_spec = config::composite_from_keys(kv);
    }
    if (!input.empty()) cfg.input_path = input;

    const FileDefaults file{kv, app};
    file.apply("--mode", "mode", cfg.mode);
    file.apply("--radius", "radius", cfg.evolve_params.radius);
    file.apply("--lambda", "lambda", cfg.evolve_params.lambda);
    file.apply("--epsilon", "epsilon", cfg.evolve_params.epsilon);
    file.apply("--dt0", "dt0", cfg.evolve_params.dt0);
    file.apply("--max-iters", "max_iters", cfg.evolve_params.max_iters);
    file.apply("--reinit-period", "reinit_period", cfg.evolve_params.reinit_period);
    file.apply("--reg", "reg", cfg.evolve_params.reg);
    file.apply("--patience", "patience", cfg.evolve_params.patience);
    file.apply("--mu", "mu", cfg.cv_params.mu);
    file.apply("--nu", "nu", cfg.cv_params.nu);
    file.apply("--lambda1", "lambda1", cfg.cv_params.lambda1);
    file.apply("--lambda2", "lambda2", cfg.cv_params.lambda2);
    file.apply("--threads", "threads", cfg.threads);

    if (init_text.empty()) {
      if (const auto it = kv.find("init"); it != kv.end()) init_text = it->second;
    }
    if (!init_text.empty()) cfg.init = config::parse_init_shape(init_text);

    cfg.cv_params.epsilon = cfg.evolve_params.epsilon;
    cfg.cv_params.dt0 = cfg.evolve_params.dt0;
    cfg.cv_params.max_iters = cfg.evolve_params.max_iters;
    cfg.cv_params.reinit_period = cfg.evolve_params.reinit_period;

    if (!out_mask.empty()) cfg.out_mask = out_mask;
    if (!out_overlay.empty()) cfg.out_overlay = out_overlay;
    if (!out_cost.empty()) cfg.out_cost = out_cost;

    cfg.validate();
    std::optional<std::uint64_t> seed_flag;
    if (app.count("--seed") > 0) seed_flag = seed;
    return run(cfg, seed_flag);
  } catch (const io::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

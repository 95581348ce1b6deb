#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "texseg/features.hpp"
#include "texseg/grid.hpp"
#include "texseg/level_set.hpp"

namespace texseg::evolve {

struct EvolveParams {
  int radius = 5;           // patch side R (odd)
  double lambda = 0.2;      // dimensionless curvature weight, see lambda_eff below
  double epsilon = 1.0;     // Heaviside/Dirac width, px
  double dt0 = 0.5;         // max per-step displacement, px
  int max_iters = 2000;
  int reinit_period = 25;   // redistance cadence, iterations
  double reg = 1e-6;        // moment ridge, relative to trace
  int patience = 3;         // consecutive non-increasing steps before stopping

  void validate() const;
};

/// Manifold quantities fixed by the current moments. With L_i = Log_{M^i}(M^e)
/// and L_e = Log_{M^e}(M^i): g = M^{-1} L M^{-1}, a = tr(M^{-1} L). The data
/// speed at a pixel is then (N' g_i N - a_i)/area_int + (a_e - N' g_e N)/area_ext.
struct ManifoldCache {
  features::RegionMoments moments;
  Eigen::MatrixXd g_int, g_ext;
  double a_int = 0.0, a_ext = 0.0;
};

ManifoldCache make_cache(features::RegionMoments moments);

struct EvolutionState {
  Field phi;
  int iter = 0;
  std::vector<double> cost_history;  // length iter + 1
  ManifoldCache cache;               // current for phi
};

/// J(phi) = geodesic distance between the smoothed-membership region moments.
double cost(const Field& phi, const features::PatchField& patches,
            const EvolveParams& params);

/// delta_eps(phi) * data term, no curvature. Pixels with
/// delta < 1e-8 * delta(0) are skipped (their speed is identically 0).
Field data_speed_field(const EvolutionState& state, const features::PatchField& patches,
                       const EvolveParams& params);

/// Full ascent speed: data + lambda_eff * curvature * delta_eps.
Field speed_field(const EvolutionState& state, const features::PatchField& patches,
                  const EvolveParams& params, double lambda_eff);

struct StepInfo {
  double dt = 0.0;
  double max_speed = 0.0;
  bool reinitialized = false;
};

/// One ascent step: phi += dt * speed with dt = dt0 / max(max|speed|, 1e-12),
/// redistancing every reinit_period iterations or when the band gradient
/// leaves [0.5, 2]; then refreshes the cache and appends J.
/// Throws features::CollapseError when a region empties.
StepInfo step(EvolutionState& state, const features::PatchField& patches,
              const EvolveParams& params, double lambda_eff);

enum class StopReason { cost_decreased, max_iters, collapse, converged };
const char* to_string(StopReason reason);

struct SegmentationResult {
  Mask mask;  // 1 = interior, from the best-J phi
  std::vector<level_set::Polyline> contours;
  std::vector<double> cost_history;
  int iterations = 0;
  StopReason stop_reason = StopReason::max_iters;
  Field phi;  // best-J phi
  std::vector<StepInfo> steps;
  double lambda_eff = 0.0;
};

using Observer = std::function<void(const EvolutionState&, const StepInfo&)>;

/// Gradient ascent on J from the given initial contour. Stops after `patience`
/// consecutive non-increasing J steps (J_t <= J_{t-1}), at max_iters, or on
/// collapse; the result is rolled back to the highest-J phi seen. The
/// curvature weight is auto-scaled once at iteration 0:
/// lambda_eff = lambda * max|data speed|.
SegmentationResult evolve(const GrayImage& image, const level_set::InitShape& init,
                          const EvolveParams& params, const Observer& observer = {});

}  // namespace texseg::evolve

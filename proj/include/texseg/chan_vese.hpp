#pragma once

#include <utility>

#include "texseg/evolution.hpp"
#include "texseg/features.hpp"
#include "texseg/grid.hpp"
#include "texseg/level_set.hpp"

namespace texseg::cv {

struct ChanVeseParams {
  double mu = 0.1;      // contour-length weight
  double nu = 0.0;      // area weight
  double lambda1 = 1.0;  // interior fit weight
  double lambda2 = 1.0;  // exterior fit weight
  double epsilon = 1.0;
  double dt0 = 0.5;
  int max_iters = 2000;
  int reinit_period = 25;

  void validate() const;
};

/// Weighted mean intensities (c_interior, c_exterior) under the membership.
/// Throws features::CollapseError when a region's weight sum is <= 1e-12.
std::pair<double, double> region_means(const GrayImage& image, const Field& phi,
                                       const features::Membership& membership);

/// Descent speed for the piecewise-constant two-phase energy, written for the
/// interior = {phi < 0} convention:
///   dphi/dt = delta_eps(phi) [mu kappa + nu + lambda1 (I-c1)^2 - lambda2 (I-c2)^2].
/// Intensities near the interior mean c1 get negative speed (pixel is pulled
/// into the interior).
Field chan_vese_speed(const Field& phi, const GrayImage& image,
                      const ChanVeseParams& params, double c1, double c2);

/// Two-phase piecewise-constant energy (data terms + mu * smoothed length +
/// nu * smoothed area), recorded per iteration as the cost trace.
double chan_vese_energy(const GrayImage& image, const Field& phi,
                        const ChanVeseParams& params);

/// Explicit evolution with the same adaptive-step and redistancing machinery
/// as the texture flow. The step floor is calibrated at iteration 0
/// (dt = dt0 / max(|speed|, |speed at iteration 0|)) so the max update decays
/// as the flow stalls; converged = max update < 1e-4 for 5 consecutive
/// iterations.
evolve::SegmentationResult chan_vese_evolve(const GrayImage& image,
                                            const level_set::InitShape& init,
                                            const ChanVeseParams& params);

}  // namespace texseg::cv

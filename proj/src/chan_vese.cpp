#include "texseg/chan_vese.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "texseg/parallel.hpp"

namespace texseg::cv {

namespace {

constexpr double kMinSpeed = 1e-12;
constexpr double kConvergedUpdate = 1e-4;
constexpr int kConvergedStreak = 5;
constexpr int kReinitIters = 10;
constexpr double kReinitDt = 0.3;
constexpr double kBandHalfWidth = 3.0;

}  // namespace

void ChanVeseParams::validate() const {
  if (mu < 0.0 || nu < 0.0)
    throw std::invalid_argument("chan-vese params: mu and nu must be >= 0");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("chan-vese params: lambda1 and lambda2 must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("chan-vese params: epsilon must be > 0");
  if (!(dt0 > 0.0)) throw std::invalid_argument("chan-vese params: dt0 must be > 0");
  if (max_iters < 1) throw std::invalid_argument("chan-vese params: max_iters must be >= 1");
  if (reinit_period < 1)
    throw std::invalid_argument("chan-vese params: reinit_period must be >= 1");
}

std::pair<double, double> region_means(const GrayImage& image, const Field& phi,
                                       const features::Membership& membership) {
  if (!image.values().same_shape(phi))
    throw std::invalid_argument("region_means: image/phi shape mismatch");
  double sum_int = 0.0, sum_ext = 0.0, w_int = 0.0, w_ext = 0.0;
  for (int y = 0; y < phi.height(); ++y)
    for (int x = 0; x < phi.width(); ++x) {
      const double wi = membership.interior_weight(phi(x, y));
      const double we = 1.0 - wi;
      sum_int += wi * image(x, y);
      sum_ext += we * image(x, y);
      w_int += wi;
      w_ext += we;
    }
  if (w_int <= 1e-12 || w_ext <= 1e-12)
    throw features::CollapseError("region_means: a region emptied (interior weight " +
                                  std::to_string(w_int) + ", exterior " +
                                  std::to_string(w_ext) + ")");
  return {sum_int / w_int, sum_ext / w_ext};
}

Field chan_vese_speed(const Field& phi, const GrayImage& image,
                      const ChanVeseParams& params, double c1, double c2) {
  const Field kappa = params.mu > 0.0 ? level_set::curvature(phi)
                                      : Field(phi.width(), phi.height(), 0.0);
  Field speed(phi.width(), phi.height());
  par::parallel_for(phi.height(), [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < phi.width(); ++x) {
        const double i = image(x, y);
        const double fit1 = (i - c1) * (i - c1);
        const double fit2 = (i - c2) * (i - c2);
        speed(x, y) = level_set::dirac_eps(phi(x, y), params.epsilon) *
                      (params.mu * kappa(x, y) + params.nu + params.lambda1 * fit1 -
                       params.lambda2 * fit2);
      }
  });
  return speed;
}

double chan_vese_energy(const GrayImage& image, const Field& phi,
                        const ChanVeseParams& params) {
  const auto membership = features::Membership::smoothed(params.epsilon);
  const auto [c1, c2] = region_means(image, phi, membership);
  const Field grad = level_set::gradient_magnitude(phi);
  double energy = 0.0;
  for (int y = 0; y < phi.height(); ++y)
    for (int x = 0; x < phi.width(); ++x) {
      const double wi = membership.interior_weight(phi(x, y));
      const double i = image(x, y);
      energy += params.lambda1 * (i - c1) * (i - c1) * wi;
      energy += params.lambda2 * (i - c2) * (i - c2) * (1.0 - wi);
      energy += params.mu * level_set::dirac_eps(phi(x, y), params.epsilon) * grad(x, y);
      energy += params.nu * wi;
    }
  return energy;
}

evolve::SegmentationResult chan_vese_evolve(const GrayImage& image,
                                            const level_set::InitShape& init,
                                            const ChanVeseParams& params) {
  params.validate();
  const auto membership = features::Membership::smoothed(params.epsilon);

  Field phi = level_set::init_signed_distance(init, image.width(), image.height());
  evolve::SegmentationResult result{Mask(image.width(), image.height(), 0),
                                    {},
                                    {chan_vese_energy(image, phi, params)},
                                    0,
                                    evolve::StopReason::max_iters,
                                    phi,
                                    {},
                                    0.0};

  double speed_floor = 0.0;
  int quiet_streak = 0;
  for (int t = 1; t <= params.max_iters; ++t) {
    double c1 = 0.0, c2 = 0.0;
    try {
      std::tie(c1, c2) = region_means(image, phi, membership);
    } catch (const features::CollapseError&) {
      result.stop_reason = evolve::StopReason::collapse;
      break;
    }
    const Field speed = chan_vese_speed(phi, image, params, c1, c2);

    evolve::StepInfo info;
    for (double s : speed) info.max_speed = std::max(info.max_speed, std::abs(s));
    if (t == 1) speed_floor = info.max_speed;
    info.dt = params.dt0 / std::max({info.max_speed, speed_floor, kMinSpeed});

    auto it = speed.begin();
    for (double& p : phi) p += info.dt * *it++;

    const auto band = level_set::band_gradient_range(phi, kBandHalfWidth);
    if (t % params.reinit_period == 0 || band[1] > 2.0 || band[1] < 0.5) {
      phi = level_set::reinitialize(phi, kReinitIters, kReinitDt);
      info.reinitialized = true;
    }

    // Commit the step only with its energy entry: cost_history stays at
    // iterations + 1 on the collapse path too.
    double energy = 0.0;
    try {
      energy = chan_vese_energy(image, phi, params);
    } catch (const features::CollapseError&) {
      result.stop_reason = evolve::StopReason::collapse;
      break;
    }
    result.steps.push_back(info);
    result.cost_history.push_back(energy);
    result.iterations = t;

    const double max_update = info.dt * info.max_speed;
    quiet_streak = max_update < kConvergedUpdate ? quiet_streak + 1 : 0;
    if (quiet_streak >= kConvergedStreak) {
      result.stop_reason = evolve::StopReason::converged;
      break;
    }
  }

  result.phi = phi;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) result.mask(x, y) = phi(x, y) < 0.0 ? 1 : 0;
  result.contours = level_set::zero_contour(phi);
  return result;
}

}  // namespace texseg::cv

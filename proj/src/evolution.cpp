#include "texseg/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "texseg/parallel.hpp"
#include "texseg/spd.hpp"

namespace texseg::evolve {

namespace {

constexpr double kMinSpeed = 1e-12;
constexpr double kDiracSkip = 1e-8;
constexpr int kReinitIters = 10;
constexpr double kReinitDt = 0.3;
constexpr double kBandHalfWidth = 3.0;

features::Membership smoothed(const EvolveParams& p) {
  return features::Membership::smoothed(p.epsilon);
}

}  // namespace

void EvolveParams::validate() const {
  if (radius < 1 || radius % 2 == 0)
    throw std::invalid_argument("params: radius must be odd and >= 1");
  if (lambda < 0.0) throw std::invalid_argument("params: lambda must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("params: epsilon must be > 0");
  if (!(dt0 > 0.0)) throw std::invalid_argument("params: dt0 must be > 0");
  if (max_iters < 1) throw std::invalid_argument("params: max_iters must be >= 1");
  if (reinit_period < 1) throw std::invalid_argument("params: reinit_period must be >= 1");
  if (reg < 0.0) throw std::invalid_argument("params: reg must be >= 0");
  if (patience < 1) throw std::invalid_argument("params: patience must be >= 1");
}

ManifoldCache make_cache(features::RegionMoments moments) {
  ManifoldCache cache{std::move(moments), {}, {}, 0.0, 0.0};
  const auto& mi = cache.moments.m_int;
  const auto& me = cache.moments.m_ext;
  const Eigen::MatrixXd l_int = spd::riemannian_log(mi, me).entries();
  const Eigen::MatrixXd l_ext = spd::riemannian_log(me, mi).entries();

  Eigen::LLT<Eigen::MatrixXd> llt_i(mi.entries());
  Eigen::LLT<Eigen::MatrixXd> llt_e(me.entries());
  if (llt_i.info() != Eigen::Success || llt_e.info() != Eigen::Success)
    throw spd::SpdError("make_cache: moment matrix lost positive definiteness");

  const Eigen::MatrixXd mi_inv_l = llt_i.solve(l_int);  // M^i^{-1} L_i
  const Eigen::MatrixXd me_inv_l = llt_e.solve(l_ext);
  cache.a_int = mi_inv_l.trace();
  cache.a_ext = me_inv_l.trace();
  // g = M^{-1} L M^{-1}, symmetric; solve on the right via transpose.
  cache.g_int = llt_i.solve(mi_inv_l.transpose());
  cache.g_ext = llt_e.solve(me_inv_l.transpose());
  cache.g_int = 0.5 * (cache.g_int + cache.g_int.transpose()).eval();
  cache.g_ext = 0.5 * (cache.g_ext + cache.g_ext.transpose()).eval();
  return cache;
}

double cost(const Field& phi, const features::PatchField& patches,
            const EvolveParams& params) {
  const auto m = features::region_second_moments(patches, phi, smoothed(params), params.reg);
  return spd::geodesic_distance(m.m_int, m.m_ext);
}

Field data_speed_field(const EvolutionState& state, const features::PatchField& patches,
                       const EvolveParams& params) {
  const Field& phi = state.phi;
  const ManifoldCache& c = state.cache;
  Field speed(phi.width(), phi.height(), 0.0);
  const double dirac_floor = kDiracSkip * level_set::dirac_eps(0.0, params.epsilon);

  par::parallel_for(phi.height(), [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < phi.width(); ++x) {
        const double d = level_set::dirac_eps(phi(x, y), params.epsilon);
        if (d < dirac_floor) continue;
        const auto n = patches.at(x, y);
        const double qi = n.dot(c.g_int * n);
        const double qe = n.dot(c.g_ext * n);
        speed(x, y) = d * ((qi - c.a_int) / c.moments.area_int +
                           (c.a_ext - qe) / c.moments.area_ext);
      }
  });
  return speed;
}

Field speed_field(const EvolutionState& state, const features::PatchField& patches,
                  const EvolveParams& params, double lambda_eff) {
  Field speed = data_speed_field(state, patches, params);
  if (lambda_eff == 0.0) return speed;
  const Field kappa = level_set::curvature(state.phi);
  par::parallel_for(speed.height(), [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < speed.width(); ++x)
        speed(x, y) += lambda_eff * kappa(x, y) *
                       level_set::dirac_eps(state.phi(x, y), params.epsilon);
  });
  return speed;
}

StepInfo step(EvolutionState& state, const features::PatchField& patches,
              const EvolveParams& params, double lambda_eff) {
  const Field speed = speed_field(state, patches, params, lambda_eff);

  StepInfo info;
  for (double s : speed) info.max_speed = std::max(info.max_speed, std::abs(s));
  info.dt = params.dt0 / std::max(info.max_speed, kMinSpeed);

  auto it = speed.begin();
  for (double& p : state.phi) p += info.dt * *it++;

  const int next_iter = state.iter + 1;
  const auto band = level_set::band_gradient_range(state.phi, kBandHalfWidth);
  if (next_iter % params.reinit_period == 0 || band[1] > 2.0 || band[1] < 0.5) {
    state.phi = level_set::reinitialize(state.phi, kReinitIters, kReinitDt);
    info.reinitialized = true;
  }

  // Cache refresh can throw on collapse; iter moves only on success so
  // cost_history stays at iter + 1 entries on every exit path.
  state.cache = make_cache(
      features::region_second_moments(patches, state.phi, smoothed(params), params.reg));
  state.cost_history.push_back(
      spd::geodesic_distance(state.cache.moments.m_int, state.cache.moments.m_ext));
  state.iter = next_iter;
  return info;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::cost_decreased: return "cost_decreased";
    case StopReason::max_iters: return "max_iters";
    case StopReason::collapse: return "collapse";
    case StopReason::converged: return "converged";
  }
  return "unknown";
}

SegmentationResult evolve(const GrayImage& image, const level_set::InitShape& init,
                          const EvolveParams& params, const Observer& observer) {
  params.validate();
  const auto patches = features::extract_patches(image, params.radius);

  Field phi0 = level_set::init_signed_distance(init, image.width(), image.height());
  ManifoldCache cache0 = make_cache(
      features::region_second_moments(patches, phi0, smoothed(params), params.reg));
  const double j0 = spd::geodesic_distance(cache0.moments.m_int, cache0.moments.m_ext);
  EvolutionState state{std::move(phi0), 0, {j0}, std::move(cache0)};

  // One dimensionless curvature knob: scale lambda by the initial data-speed
  // magnitude, then freeze it.
  double lambda_eff = 0.0;
  {
    const Field s0 = data_speed_field(state, patches, params);
    double peak = 0.0;
    for (double s : s0) peak = std::max(peak, std::abs(s));
    lambda_eff = params.lambda * peak;
  }

  SegmentationResult result{Mask(image.width(), image.height(), 0),
                            {},
                            {},
                            0,
                            StopReason::max_iters,
                            state.phi,
                            {},
                            lambda_eff};
  double best_cost = state.cost_history.front();

  int non_increasing = 0;
  for (int t = 0; t < params.max_iters; ++t) {
    StepInfo info;
    try {
      info = step(state, patches, params, lambda_eff);
    } catch (const features::CollapseError&) {
      result.stop_reason = StopReason::collapse;
      break;
    }
    result.steps.push_back(info);
    if (observer) observer(state, info);

    const double j = state.cost_history.back();
    if (j > best_cost) {
      best_cost = j;
      result.phi = state.phi;
    }
    const double prev = state.cost_history[state.cost_history.size() - 2];
    non_increasing = j <= prev ? non_increasing + 1 : 0;
    if (non_increasing >= params.patience) {
      result.stop_reason = StopReason::cost_decreased;
      break;
    }
  }

  result.cost_history = state.cost_history;
  result.iterations = state.iter;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      result.mask(x, y) = result.phi(x, y) < 0.0 ? 1 : 0;
  result.contours = level_set::zero_contour(result.phi);
  return result;
}

}  // namespace texseg::evolve

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "texseg/evolution.hpp"
#include "texseg/parallel.hpp"
#include "texseg/spd.hpp"
#include "texseg/synth.hpp"

using namespace texseg;
namespace ev = texseg::evolve;
namespace ls = texseg::level_set;
namespace ft = texseg::features;
namespace sy = texseg::synth;

namespace {

ev::EvolutionState make_state(const ft::PatchField& patches, Field phi,
                              const ev::EvolveParams& params) {
  auto cache = ev::make_cache(ft::region_second_moments(
      patches, phi, ft::Membership::smoothed(params.epsilon), params.reg));
  const double j0 =
      spd::geodesic_distance(cache.moments.m_int, cache.moments.m_ext);
  return ev::EvolutionState{std::move(phi), 0, {j0}, std::move(cache)};
}

GrayImage two_noise_composite(int side, double r, std::uint64_t seed) {
  sy::CompositeSpec spec;
  spec.width = side;
  spec.height = side;
  spec.background = sy::GaussianNoise{0.5, 0.05};
  spec.foreground = sy::GaussianNoise{0.5, 0.25};
  spec.region = sy::Disk{side / 2.0, side / 2.0, r};
  spec.seed = seed;
  return sy::generate(spec).image;
}

/// Tangent-space form of the ascent speed, written with the metric primitives
/// instead of the cached quadratic shortcut.
double literal_speed(const ev::EvolutionState& state, const ft::PatchField& patches,
                     double epsilon, int x, int y) {
  const auto& m = state.cache.moments;
  const spd::TangentMatrix l_int = spd::riemannian_log(m.m_int, m.m_ext);
  const spd::TangentMatrix l_ext = spd::riemannian_log(m.m_ext, m.m_int);

  const Eigen::VectorXd n = patches.at(x, y);
  const Eigen::MatrixXd outer = n * n.transpose();
  const spd::TangentMatrix neg_l_int(-l_int.entries(), m.m_int);
  const spd::TangentMatrix di(m.m_int.entries() - outer, m.m_int);
  const spd::TangentMatrix de(m.m_ext.entries() - outer, m.m_ext);

  const double interior = spd::inner_product(m.m_int, neg_l_int, di) / m.area_int;
  const double exterior = spd::inner_product(m.m_ext, l_ext, de) / m.area_ext;
  return ls::dirac_eps(state.phi(x, y), epsilon) * (interior + exterior);
}

}  // namespace

TEST_CASE("evolve params validation rejects bad values") {
  ev::EvolveParams p;
  p.radius = 4;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.lambda = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.dt0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.patience = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("cost: mirror-symmetric split of a mirror-symmetric image is zero") {
  // phi(x) = x - 7.5 is odd under x -> 15 - x while the image is even, so the
  // two region moments coincide exactly and the distance vanishes.
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Field img(16, 16), phi(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) {
      const double v = u(rng);
      img(x, y) = v;
      img(15 - x, y) = v;
    }
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) phi(x, y) = x - 7.5;

  ev::EvolveParams params;
  params.radius = 1;
  const auto patches = ft::extract_patches(GrayImage(std::move(img)), 1);
  CHECK(ev::cost(phi, patches, params) < 1e-8);
}

TEST_CASE("cost: two constant levels give the log-ratio of squared intensities") {
  Field img(16, 16), phi(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      img(x, y) = x < 8 ? 0.2 : 0.3;
      phi(x, y) = x < 8 ? -1.0 : 1.0;
    }
  const auto patches = ft::extract_patches(GrayImage(std::move(img)), 1);
  const auto m =
      ft::region_second_moments(patches, phi, ft::Membership::binary(), 1e-6);
  // Scalar moments 0.04 and 0.09: d = |ln(0.09/0.04)| = ln(2.25).
  CHECK(spd::geodesic_distance(m.m_int, m.m_ext) ==
        doctest::Approx(0.8109302162163288).epsilon(1e-6));
}

TEST_CASE("cost: peaks when the contour matches the texture boundary") {
  const GrayImage image = two_noise_composite(64, 16.0, 77);
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;

  auto j_at = [&](double r) {
    return ev::cost(ls::init_signed_distance(ls::Circle{32, 32, r}, 64, 64), patches,
                    params);
  };
  const double aligned = j_at(16.0);
  CHECK(aligned > j_at(8.0));
  CHECK(aligned > j_at(24.0));
}

TEST_CASE("speed: cached quadratic form equals the tangent-space expression") {
  ev::EvolveParams params;
  params.radius = 3;

  struct Fixture {
    GrayImage image;
    Field phi;
  };
  std::vector<Fixture> fixtures;

  fixtures.push_back({two_noise_composite(24, 8.0, 5),
                      ls::init_signed_distance(ls::Circle{13, 12, 6}, 24, 24)});
  {
    sy::CompositeSpec spec;
    spec.width = 24;
    spec.height = 24;
    spec.background = sy::Stripes{0.0, 4.0, 0.8};
    spec.foreground = sy::Checkerboard{3.0, 0.6};
    spec.region = sy::SquareRegion{12, 12, 7};
    fixtures.push_back({sy::generate(spec).image,
                        ls::init_signed_distance(ls::Rectangle{6, 7, 17, 18}, 24, 24)});
  }
  {
    sy::CompositeSpec spec;
    spec.width = 24;
    spec.height = 24;
    spec.background = sy::Constant{0.35};
    spec.foreground = sy::GaussianNoise{0.5, 0.2};
    spec.region = sy::Disk{12, 12, 7};
    spec.seed = 11;
    fixtures.push_back({sy::generate(spec).image,
                        ls::init_signed_distance(ls::Circle{11, 13, 5}, 24, 24)});
  }

  for (const auto& fx : fixtures) {
    const auto patches = ft::extract_patches(fx.image, 3);
    const auto state = make_state(patches, fx.phi, params);
    const Field speed = ev::data_speed_field(state, patches, params);
    int checked = 0;
    for (int y = 1; y < 24; y += 5)
      for (int x = 2; x < 24; x += 5) {
        CHECK(std::abs(speed(x, y) -
                       literal_speed(state, patches, params.epsilon, x, y)) <= 1e-10);
        ++checked;
      }
    CHECK(checked >= 20);
  }
}

TEST_CASE("speed: pixels far from the interface are skipped exactly") {
  const GrayImage image = two_noise_composite(24, 8.0, 9);
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;

  Field phi = ls::init_signed_distance(ls::Circle{12, 12, 8}, 24, 24);
  phi(0, 0) = 2.0e4;  // dirac ratio ~ (eps/|phi|)^2 = 2.5e-9 < 1e-8 cutoff
  const auto state = make_state(patches, std::move(phi), params);
  const Field speed = ev::data_speed_field(state, patches, params);
  CHECK(speed(0, 0) == 0.0);
  CHECK(literal_speed(state, patches, params.epsilon, 0, 0) != 0.0);
  CHECK(speed(12, 4) != 0.0);  // near the rim: active
}

TEST_CASE("speed: constant image produces only numerical residue") {
  const GrayImage image{Field(32, 32, 0.4)};
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;
  const auto state =
      make_state(patches, ls::init_signed_distance(ls::Circle{16, 16, 8}, 32, 32), params);
  const Field speed = ev::data_speed_field(state, patches, params);
  for (const double s : speed) CHECK(std::abs(s) < 1e-6);
}

TEST_CASE("speed: curvature term adds lambda_eff * kappa * dirac") {
  const GrayImage image{Field(32, 32, 0.4)};
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;
  const Field phi = ls::init_signed_distance(ls::Circle{16, 16, 8}, 32, 32);
  const auto state = make_state(patches, phi, params);

  const double lambda_eff = 0.7;
  const Field speed = ev::speed_field(state, patches, params, lambda_eff);
  const Field kappa = ls::curvature(phi);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double expected =
          lambda_eff * kappa(x, y) * ls::dirac_eps(phi(x, y), params.epsilon);
      CHECK(std::abs(speed(x, y) - expected) < 1e-6);
    }
}

TEST_CASE("speed: is the gradient of half the squared distance") {
  const GrayImage image = two_noise_composite(16, 5.0, 13);
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;
  const Field phi = ls::init_signed_distance(ls::Circle{8, 8, 4}, 16, 16);
  const auto state = make_state(patches, phi, params);
  const Field speed = ev::data_speed_field(state, patches, params);

  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Field dir(16, 16);
    for (double& v : dir) v = u(rng);

    double analytic = 0.0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) analytic += dir(x, y) * speed(x, y);

    const double h = 1e-5;
    auto half_j2_at = [&](double sign) {
      Field shifted = phi;
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) shifted(x, y) += sign * h * dir(x, y);
      const double j = ev::cost(shifted, patches, params);
      return 0.5 * j * j;
    };
    const double fd = (half_j2_at(1.0) - half_j2_at(-1.0)) / (2.0 * h);

    REQUIRE(std::abs(fd) > 1e-6);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("step: displacement is capped at dt0 and dt matches the peak speed") {
  const GrayImage image = two_noise_composite(32, 10.0, 21);
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;
  params.dt0 = 0.25;
  params.reinit_period = 1000;
  auto state =
      make_state(patches, ls::init_signed_distance(ls::Circle{16, 16, 10}, 32, 32), params);
  const Field before = state.phi;

  const auto info = ev::step(state, patches, params, 0.0);
  CHECK_FALSE(info.reinitialized);
  CHECK(info.dt == doctest::Approx(params.dt0 / info.max_speed).epsilon(1e-15));

  double max_move = 0.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      max_move = std::max(max_move, std::abs(state.phi(x, y) - before(x, y)));
  CHECK(max_move == doctest::Approx(params.dt0).epsilon(1e-12));
  CHECK(state.iter == 1);
  CHECK(state.cost_history.size() == 2);
}

TEST_CASE("step: reinit period of one redistances every step") {
  const GrayImage image = two_noise_composite(32, 10.0, 22);
  const auto patches = ft::extract_patches(image, 3);
  ev::EvolveParams params;
  params.radius = 3;
  params.reinit_period = 1;
  auto state =
      make_state(patches, ls::init_signed_distance(ls::Circle{16, 16, 10}, 32, 32), params);

  const auto info = ev::step(state, patches, params, 0.0);
  CHECK(info.reinitialized);
  const auto range = ls::band_gradient_range(state.phi, 3.0);
  CHECK(range[0] >= 0.9);
  CHECK(range[1] <= 1.1);
}

TEST_CASE("evolve: ascends, stops, and reports a consistent result") {
  const GrayImage image = two_noise_composite(48, 14.0, 31);
  ev::EvolveParams params;
  params.radius = 3;
  params.lambda = 0.1;
  params.max_iters = 120;

  const auto result = ev::evolve(image, ls::Circle{24, 24, 9}, params);

  CHECK(result.cost_history.size() == static_cast<std::size_t>(result.iterations) + 1);
  CHECK(result.steps.size() == static_cast<std::size_t>(result.iterations));
  CHECK((result.stop_reason == ev::StopReason::cost_decreased ||
         result.stop_reason == ev::StopReason::max_iters));

  const double j_init = result.cost_history.front();
  const double j_best = *std::max_element(result.cost_history.begin(),
                                          result.cost_history.end());
  CHECK(j_best > j_init);

  // The reported phi is the best-cost iterate, and the mask is its sign.
  const auto patches = ft::extract_patches(image, 3);
  CHECK(ev::cost(result.phi, patches, params) == doctest::Approx(j_best).epsilon(1e-12));
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      CHECK((result.mask(x, y) == 1) == (result.phi(x, y) < 0.0));
  CHECK_FALSE(result.contours.empty());
}

TEST_CASE("evolve: bitwise deterministic, including across thread counts") {
  const GrayImage image = two_noise_composite(32, 10.0, 41);
  ev::EvolveParams params;
  params.radius = 3;
  params.max_iters = 30;

  const auto a = ev::evolve(image, ls::Circle{16, 16, 7}, params);
  par::set_max_threads(4);
  const auto b = ev::evolve(image, ls::Circle{16, 16, 7}, params);
  par::set_max_threads(1);

  REQUIRE(a.cost_history.size() == b.cost_history.size());
  for (std::size_t i = 0; i < a.cost_history.size(); ++i)
    CHECK(a.cost_history[i] == b.cost_history[i]);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(a.mask(x, y) == b.mask(x, y));
}

TEST_CASE("evolve: curvature weight is frozen from the initial speed peak") {
  const GrayImage image = two_noise_composite(32, 10.0, 43);
  ev::EvolveParams params;
  params.radius = 3;
  params.lambda = 0.3;
  params.max_iters = 5;

  const auto result = ev::evolve(image, ls::Circle{16, 16, 8}, params);

  const auto patches = ft::extract_patches(image, 3);
  const auto state =
      make_state(patches, ls::init_signed_distance(ls::Circle{16, 16, 8}, 32, 32), params);
  const Field s0 = ev::data_speed_field(state, patches, params);
  double peak = 0.0;
  for (const double s : s0) peak = std::max(peak, std::abs(s));
  CHECK(result.lambda_eff == doctest::Approx(params.lambda * peak).epsilon(1e-12));
}

TEST_CASE("evolve: observer sees every step in order") {
  const GrayImage image = two_noise_composite(32, 10.0, 47);
  ev::EvolveParams params;
  params.radius = 3;
  params.max_iters = 10;

  std::vector<int> iters;
  const auto result = ev::evolve(image, ls::Circle{16, 16, 7}, params,
                                 [&](const ev::EvolutionState& s, const ev::StepInfo&) {
                                   iters.push_back(s.iter);
                                 });
  CHECK(iters.size() == static_cast<std::size_t>(result.iterations));
  for (std::size_t i = 0; i < iters.size(); ++i)
    CHECK(iters[i] == static_cast<int>(i) + 1);
}

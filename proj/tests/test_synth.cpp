#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

#include "texseg/synth.hpp"

using namespace texseg;
namespace sy = texseg::synth;

namespace {

double mean_of(const Field& f) {
  return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

double stddev_of(const Field& f) {
  const double m = mean_of(f);
  double acc = 0.0;
  for (const double v : f) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(f.size() - 1));
}

/// Mean product of samples `lag` apart along one axis, centered. Periodic
/// textures peak at their period; white noise sits near zero.
double autocorr(const Field& f, int lag, bool along_x) {
  const double m = mean_of(f);
  double acc = 0.0;
  long count = 0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      const int x2 = along_x ? x + lag : x;
      const int y2 = along_x ? y : y + lag;
      if (x2 >= f.width() || y2 >= f.height()) continue;
      acc += (f(x, y) - m) * (f(x2, y2) - m);
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("composite: constant textures take exactly the two levels") {
  sy::CompositeSpec spec;
  spec.width = 32;
  spec.height = 32;
  spec.background = sy::Constant{0.2};
  spec.foreground = sy::Constant{0.8};
  spec.region = sy::Disk{16, 16, 8};
  const auto out = sy::generate(spec);

  long fg_pixels = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const bool in = out.truth(x, y) != 0;
      fg_pixels += in ? 1 : 0;
      CHECK(out.image(x, y) == (in ? 0.8 : 0.2));
      const double dx = x - 16.0, dy = y - 16.0;
      CHECK(in == (dx * dx + dy * dy <= 64.0));
    }
  // Disk of radius 8: pixel count within a couple of rim pixels of pi r^2.
  CHECK(fg_pixels > 180);
  CHECK(fg_pixels < 220);
}

TEST_CASE("composite: identical spec and seed is bit-identical") {
  sy::CompositeSpec spec;
  spec.width = 48;
  spec.height = 40;
  spec.background = sy::GaussianNoise{0.5, 0.1};
  spec.foreground = sy::GaussianNoise{0.5, 0.25};
  spec.region = sy::SquareRegion{24, 20, 10};
  spec.seed = 1234;

  const auto a = sy::generate(spec);
  const auto b = sy::generate(spec);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 48; ++x) {
      CHECK(a.image(x, y) == b.image(x, y));
      CHECK(a.truth(x, y) == b.truth(x, y));
    }
}

TEST_CASE("composite: seeds change the noise, region stays put") {
  sy::CompositeSpec spec;
  spec.width = 32;
  spec.height = 32;
  spec.background = sy::GaussianNoise{0.5, 0.1};
  spec.foreground = sy::GaussianNoise{0.5, 0.1};
  spec.region = sy::Disk{16, 16, 8};
  spec.seed = 1;
  const auto a = sy::generate(spec);
  spec.seed = 2;
  const auto b = sy::generate(spec);

  long differing = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      differing += a.image(x, y) != b.image(x, y) ? 1 : 0;
      CHECK(a.truth(x, y) == b.truth(x, y));
    }
  CHECK(differing > 1000);
}

TEST_CASE("composite: background and foreground draw from distinct streams") {
  // Same noise parameters both sides: if the streams were shared, the two
  // fields would coincide and the composite would hide the region entirely.
  sy::CompositeSpec spec;
  spec.width = 24;
  spec.height = 24;
  spec.background = sy::GaussianNoise{0.5, 0.1};
  spec.foreground = sy::GaussianNoise{0.5, 0.1};
  spec.region = sy::Disk{12, 12, 6};
  spec.seed = 7;
  const auto with_disk = sy::generate(spec);

  spec.region = sy::Disk{12, 12, 3};
  const auto with_small = sy::generate(spec);

  // Outside both disks: background stream, unaffected by the region change.
  CHECK(with_disk.image(1, 1) == with_small.image(1, 1));
  // Inside the big disk only: switching it to background changes the value.
  long changed = 0;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      if (with_disk.truth(x, y) != 0 && with_small.truth(x, y) == 0)
        changed += with_disk.image(x, y) != with_small.image(x, y) ? 1 : 0;
  CHECK(changed > 50);
}

TEST_CASE("stripes: direction and period show up in the autocorrelation") {
  sy::CompositeSpec spec;
  spec.width = 64;
  spec.height = 64;
  spec.background = sy::Stripes{0.0, 4.0, 1.0};
  spec.foreground = sy::Stripes{0.0, 4.0, 1.0};
  spec.region = sy::Disk{32, 32, 8};
  const auto horizontal = sy::generate(spec);
  const Field& v = horizontal.image.values();

  // 0 degrees varies along x: full-period lag along x correlates positively,
  // half-period lag negatively, and columns are constant along y.
  CHECK(autocorr(v, 4, true) > 0.05);
  CHECK(autocorr(v, 2, true) < -0.05);
  CHECK(autocorr(v, 1, false) == doctest::Approx(autocorr(v, 0, false)));

  spec.background = sy::Stripes{90.0, 4.0, 1.0};
  spec.foreground = sy::Stripes{90.0, 4.0, 1.0};
  const auto vertical = sy::generate(spec);
  const Field& w = vertical.image.values();
  CHECK(autocorr(w, 4, false) > 0.05);
  CHECK(autocorr(w, 2, false) < -0.05);
  CHECK(autocorr(w, 1, true) == doctest::Approx(autocorr(w, 0, true)));
}

TEST_CASE("checkerboard: alternates with the requested cell") {
  sy::CompositeSpec spec;
  spec.width = 32;
  spec.height = 32;
  spec.background = sy::Checkerboard{4.0, 0.6};
  spec.foreground = sy::Checkerboard{4.0, 0.6};
  spec.region = sy::Disk{16, 16, 4};
  const auto out = sy::generate(spec);
  const Field& v = out.image.values();
  CHECK(v(0, 0) == doctest::Approx(0.8));
  CHECK(v(4, 0) == doctest::Approx(0.2));
  CHECK(v(4, 4) == doctest::Approx(0.8));
  CHECK(v(3, 0) == doctest::Approx(0.8));  // same cell until x = 4
}

TEST_CASE("gaussian noise: sample statistics match the parameters") {
  sy::CompositeSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.background = sy::GaussianNoise{0.5, 0.1};
  spec.foreground = sy::GaussianNoise{0.5, 0.1};
  spec.region = sy::Disk{64, 64, 8};
  spec.seed = 99;
  const auto out = sy::generate(spec);
  const Field& v = out.image.values();

  CHECK(std::abs(mean_of(v) - 0.5) < 0.01);
  CHECK(std::abs(stddev_of(v) - 0.1) < 0.01);
  // White noise: neighbor correlation is tiny next to the variance.
  CHECK(std::abs(autocorr(v, 1, true)) < 0.1 * autocorr(v, 0, true));
}

TEST_CASE("all composites stay inside [0,1]") {
  sy::CompositeSpec spec;
  spec.width = 48;
  spec.height = 48;
  spec.background = sy::GaussianNoise{0.9, 0.5};  // clips hard at 1
  spec.foreground = sy::Stripes{30.0, 4.0, 3.0};  // contrast overshoots
  spec.region = sy::SquareRegion{24, 24, 12};
  const auto out = sy::generate(spec);
  const Field& v = out.image.values();
  for (const double x : v) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("generate rejects bad frames, textures, regions") {
  sy::CompositeSpec spec;
  spec.width = 32;
  spec.height = 32;
  spec.background = sy::Constant{0.5};
  spec.foreground = sy::Constant{0.5};
  spec.region = sy::Disk{16, 16, 8};

  auto broken = spec;
  broken.width = 6;
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);

  broken = spec;
  broken.background = sy::Stripes{0.0, 1.0, 0.5};  // period < 2
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);

  broken = spec;
  broken.foreground = sy::GaussianNoise{0.5, -0.1};
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);

  broken = spec;
  broken.region = sy::Disk{16, 16, 15};  // touches the frame
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);

  broken = spec;
  broken.region = sy::Disk{16, 16, 0.0};
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);

  broken = spec;
  broken.region = sy::TwoDisks{8, 8, 24, 24, 7};  // 8 - 7 = 1 px margin
  CHECK_THROWS_AS(sy::generate(broken), std::invalid_argument);
}

TEST_CASE("texture parsing round-trips every kind") {
  const auto s = std::get<sy::Stripes>(sy::parse_texture("stripes:45,8,0.5"));
  CHECK(s.orientation_deg == 45.0);
  CHECK(s.period == 8.0);
  CHECK(s.contrast == 0.5);

  const auto c = std::get<sy::Checkerboard>(sy::parse_texture("checkerboard:6,0.4"));
  CHECK(c.cell == 6.0);
  CHECK(c.contrast == 0.4);

  const auto g = std::get<sy::GaussianNoise>(sy::parse_texture("gaussian_noise:0.5,0.25"));
  CHECK(g.mean == 0.5);
  CHECK(g.sigma == 0.25);

  const auto k = std::get<sy::Constant>(sy::parse_texture("constant:0.75"));
  CHECK(k.level == 0.75);
}

TEST_CASE("region parsing round-trips every kind") {
  const auto d = std::get<sy::Disk>(sy::parse_region("disk:64,64,20"));
  CHECK(d.cx == 64.0);
  CHECK(d.cy == 64.0);
  CHECK(d.r == 20.0);

  const auto q = std::get<sy::SquareRegion>(sy::parse_region("square:32,32,10"));
  CHECK(q.half == 10.0);

  const auto t = std::get<sy::TwoDisks>(sy::parse_region("two_disks:20,32,44,32,9"));
  CHECK(t.cx2 == 44.0);
  CHECK(t.r == 9.0);
}

TEST_CASE("parsing rejects malformed text") {
  CHECK_THROWS_AS(sy::parse_texture("stripes"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_texture("stripes:45,8"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_texture("stripes:45,8,0.5,9"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_texture("stripes:45,eight,0.5"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_texture("stripes:45,8 junk,0.5"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_texture("plaid:1,2"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_region("blob:1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_region("disk:64,64"), std::invalid_argument);
  CHECK_THROWS_AS(sy::parse_region(":1,2,3"), std::invalid_argument);
}

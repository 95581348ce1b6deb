#include "texseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace texseg::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Box-Muller on top of mt19937_64: std::normal_distribution output is
/// implementation-defined, this is bit-portable.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;         // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

void validate(const TextureSpec& t) {
  if (const auto* s = std::get_if<Stripes>(&t)) {
    if (s->period < 2.0) throw std::invalid_argument("stripes: period must be >= 2 px");
    if (s->contrast < 0.0) throw std::invalid_argument("stripes: contrast must be >= 0");
  } else if (const auto* c = std::get_if<Checkerboard>(&t)) {
    if (c->cell < 2.0) throw std::invalid_argument("checkerboard: cell must be >= 2 px");
    if (c->contrast < 0.0) throw std::invalid_argument("checkerboard: contrast must be >= 0");
  } else if (const auto* g = std::get_if<GaussianNoise>(&t)) {
    if (g->sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
  } else {
    const auto& k = std::get<Constant>(t);
    if (k.level < 0.0 || k.level > 1.0)
      throw std::invalid_argument("constant: level must be in [0,1]");
  }
}

Field render(const TextureSpec& t, int w, int h, std::uint64_t seed) {
  Field out(w, h);
  if (const auto* s = std::get_if<Stripes>(&t)) {
    const double theta = s->orientation_deg * M_PI / 180.0;
    const double cx = std::cos(theta), sy = std::sin(theta);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out(x, y) = clip01(0.5 + 0.5 * s->contrast *
                                     std::sin(2.0 * M_PI * (x * cx + y * sy) / s->period));
  } else if (const auto* c = std::get_if<Checkerboard>(&t)) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const long long px = static_cast<long long>(std::floor(x / c->cell));
        const long long py = static_cast<long long>(std::floor(y / c->cell));
        const double sign = ((px + py) & 1) ? -1.0 : 1.0;
        out(x, y) = clip01(0.5 + 0.5 * c->contrast * sign);
      }
  } else if (const auto* g = std::get_if<GaussianNoise>(&t)) {
    GaussianStream gauss(seed);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(x, y) = clip01(g->mean + g->sigma * gauss.next());
  } else {
    const auto& k = std::get<Constant>(t);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(x, y) = k.level;
  }
  return out;
}

bool region_contains(const RegionSpec& region, double x, double y) {
  if (const auto* d = std::get_if<Disk>(&region)) {
    const double dx = x - d->cx, dy = y - d->cy;
    return dx * dx + dy * dy <= d->r * d->r;
  }
  if (const auto* s = std::get_if<SquareRegion>(&region))
    return std::abs(x - s->cx) <= s->half && std::abs(y - s->cy) <= s->half;
  const auto& t = std::get<TwoDisks>(region);
  const double d1x = x - t.cx1, d1y = y - t.cy1;
  const double d2x = x - t.cx2, d2y = y - t.cy2;
  return d1x * d1x + d1y * d1y <= t.r * t.r || d2x * d2x + d2y * d2y <= t.r * t.r;
}

void validate_region(const RegionSpec& region, int w, int h) {
  const auto inside = [&](double x0, double y0, double x1, double y1) {
    return x0 >= 2.0 && y0 >= 2.0 && x1 <= w - 3.0 && y1 <= h - 3.0 && x0 < x1 && y0 < y1;
  };
  bool ok = false;
  if (const auto* d = std::get_if<Disk>(&region))
    ok = d->r > 0.0 && inside(d->cx - d->r, d->cy - d->r, d->cx + d->r, d->cy + d->r);
  else if (const auto* s = std::get_if<SquareRegion>(&region))
    ok = s->half > 0.0 &&
         inside(s->cx - s->half, s->cy - s->half, s->cx + s->half, s->cy + s->half);
  else {
    const auto& t = std::get<TwoDisks>(region);
    ok = t.r > 0.0 &&
         inside(std::min(t.cx1, t.cx2) - t.r, std::min(t.cy1, t.cy2) - t.r,
                std::max(t.cx1, t.cx2) + t.r, std::max(t.cy1, t.cy2) + t.r);
  }
  if (!ok)
    throw std::invalid_argument("composite region degenerate or closer than 2 px to the frame");
}

std::vector<double> parse_numbers(const std::string& args, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": bad number '" + item + "'");
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size()) throw std::invalid_argument(what + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.size() != expected)
    throw std::invalid_argument(what + ": expected " + std::to_string(expected) +
                                " comma-separated numbers, got " + std::to_string(out.size()));
  return out;
}

std::pair<std::string, std::string> split_kind(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0)
    throw std::invalid_argument("expected '<kind>:<args>', got '" + text + "'");
  return {text.substr(0, colon), text.substr(colon + 1)};
}

}  // namespace

Composite generate(const CompositeSpec& spec) {
  if (spec.width < 8 || spec.height < 8)
    throw std::invalid_argument("composite: frame must be at least 8x8");
  validate(spec.background);
  validate(spec.foreground);
  validate_region(spec.region, spec.width, spec.height);

  std::uint64_t state = spec.seed;
  const std::uint64_t bg_seed = splitmix64(state);
  const std::uint64_t fg_seed = splitmix64(state);

  Field bg = render(spec.background, spec.width, spec.height, bg_seed);
  Field fg = render(spec.foreground, spec.width, spec.height, fg_seed);

  Field img(spec.width, spec.height);
  Mask truth(spec.width, spec.height, 0);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const bool in = region_contains(spec.region, x, y);
      truth(x, y) = in ? 1 : 0;
      img(x, y) = in ? fg(x, y) : bg(x, y);
    }
  return Composite{GrayImage(std::move(img)), std::move(truth)};
}

TextureSpec parse_texture(const std::string& text) {
  const auto [kind, args] = split_kind(text);
  if (kind == "stripes") {
    const auto v = parse_numbers(args, 3, "stripes");
    return Stripes{v[0], v[1], v[2]};
  }
  if (kind == "checkerboard") {
    const auto v = parse_numbers(args, 2, "checkerboard");
    return Checkerboard{v[0], v[1]};
  }
  if (kind == "gaussian_noise") {
    const auto v = parse_numbers(args, 2, "gaussian_noise");
    return GaussianNoise{v[0], v[1]};
  }
  if (kind == "constant") {
    const auto v = parse_numbers(args, 1, "constant");
    return Constant{v[0]};
  }
  throw std::invalid_argument("unknown texture kind '" + kind + "'");
}

RegionSpec parse_region(const std::string& text) {
  const auto [kind, args] = split_kind(text);
  if (kind == "disk") {
    const auto v = parse_numbers(args, 3, "disk");
    return Disk{v[0], v[1], v[2]};
  }
  if (kind == "square") {
    const auto v = parse_numbers(args, 3, "square");
    return SquareRegion{v[0], v[1], v[2]};
  }
  if (kind == "two_disks") {
    const auto v = parse_numbers(args, 5, "two_disks");
    return TwoDisks{v[0], v[1], v[2], v[3], v[4]};
  }
  throw std::invalid_argument("unknown region kind '" + kind + "'");
}

}  // namespace texseg::synth

#include "texseg/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "texseg/parallel.hpp"

namespace texseg::level_set {

namespace {

constexpr double kGradFloor = 1e-8;

void require_margin(bool ok, const char* what) {
  if (!ok)
    throw std::invalid_argument(std::string(what) +
                                ": shape degenerate or closer than 2 px to the grid border");
}

double circle_sdf(double x, double y, const Circle& c) {
  return std::hypot(x - c.cx, y - c.cy) - c.r;
}

double rectangle_sdf(double x, double y, const Rectangle& r) {
  const double dx = std::max(r.x0 - x, x - r.x1);
  const double dy = std::max(r.y0 - y, y - r.y1);
  if (dx <= 0.0 && dy <= 0.0) return std::max(dx, dy);
  return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
}

struct Stencil {
  double x, y, xx, yy, xy;
};

/// Clamped-index differences: central with /2 in the interior, one-sided /1 at
/// the borders (where the clamped span collapses to one pixel).
Stencil derivatives(const Field& phi, int x, int y) {
  const int w = phi.width(), h = phi.height();
  const int xp = std::min(x + 1, w - 1), xm = std::max(x - 1, 0);
  const int yp = std::min(y + 1, h - 1), ym = std::max(y - 1, 0);
  const double sx = static_cast<double>(xp - xm);
  const double sy = static_cast<double>(yp - ym);
  Stencil d;
  d.x = (phi(xp, y) - phi(xm, y)) / sx;
  d.y = (phi(x, yp) - phi(x, ym)) / sy;
  d.xx = phi(xp, y) - 2.0 * phi(x, y) + phi(xm, y);
  d.yy = phi(x, yp) - 2.0 * phi(x, y) + phi(x, ym);
  d.xy = (phi(xp, yp) - phi(xp, ym) - phi(xm, yp) + phi(xm, ym)) / (sx * sy);
  return d;
}

}  // namespace

Field init_signed_distance(const InitShape& shape, int width, int height) {
  if (width < 3 || height < 3)
    throw std::invalid_argument("init_signed_distance: grid too small");
  Field phi(width, height);

  if (const auto* c = std::get_if<Circle>(&shape)) {
    require_margin(c->r > 0.0 && c->cx - c->r >= 2.0 && c->cy - c->r >= 2.0 &&
                       c->cx + c->r <= width - 3.0 && c->cy + c->r <= height - 3.0,
                   "circle");
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) phi(x, y) = circle_sdf(x, y, *c);
    return phi;
  }

  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    require_margin(r->x0 < r->x1 && r->y0 < r->y1 && r->x0 >= 2.0 && r->y0 >= 2.0 &&
                       r->x1 <= width - 3.0 && r->y1 <= height - 3.0,
                   "rectangle");
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) phi(x, y) = rectangle_sdf(x, y, *r);
    return phi;
  }

  const auto& m = std::get<MultiCircle>(shape);
  require_margin(m.r > 0.0 && m.spacing > 2.0 * m.r, "multi_circle");
  std::vector<Circle> seeds;
  for (int j = 0;; ++j) {
    const double cy = m.spacing * (j + 0.5);
    if (cy + m.r > height - 3.0) break;
    if (cy - m.r < 2.0) continue;
    for (int i = 0;; ++i) {
      const double cx = m.spacing * (i + 0.5);
      if (cx + m.r > width - 3.0) break;
      if (cx - m.r < 2.0) continue;
      seeds.push_back(Circle{cx, cy, m.r});
    }
  }
  require_margin(!seeds.empty(), "multi_circle");
  // Disjoint circles: the union's signed distance is the pointwise minimum.
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : seeds) best = std::min(best, circle_sdf(x, y, s));
      phi(x, y) = best;
    }
  return phi;
}

double heaviside_eps(double phi, double eps) {
  return 0.5 * (1.0 + (2.0 / M_PI) * std::atan(phi / eps));
}

double dirac_eps(double phi, double eps) {
  return (1.0 / M_PI) * eps / (eps * eps + phi * phi);
}

Field curvature(const Field& phi) {
  if (phi.width() < 3 || phi.height() < 3)
    throw std::invalid_argument("curvature: grid must be at least 3x3");
  Field kappa(phi.width(), phi.height());
  par::parallel_for(phi.height(), [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < phi.width(); ++x) {
        const Stencil d = derivatives(phi, x, y);
        const double num =
            d.xx * d.y * d.y - 2.0 * d.x * d.y * d.xy + d.yy * d.x * d.x;
        const double g = std::max(std::hypot(d.x, d.y), kGradFloor);
        kappa(x, y) = num / (g * g * g);
      }
  });
  return kappa;
}

Field gradient_magnitude(const Field& phi) {
  Field g(phi.width(), phi.height());
  par::parallel_for(phi.height(), [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < phi.width(); ++x) {
        const Stencil d = derivatives(phi, x, y);
        g(x, y) = std::hypot(d.x, d.y);
      }
  });
  return g;
}

std::array<double, 2> band_gradient_range(const Field& phi, double band) {
  Field g = gradient_magnitude(phi);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < phi.height(); ++y)
    for (int x = 0; x < phi.width(); ++x)
      if (std::abs(phi(x, y)) <= band) {
        lo = std::min(lo, g(x, y));
        hi = std::max(hi, g(x, y));
      }
  if (lo > hi) return {1.0, 1.0};
  return {lo, hi};
}

Field reinitialize(const Field& phi, int iterations, double dt) {
  if (iterations < 1) throw std::invalid_argument("reinitialize: iterations must be >= 1");
  if (!(dt > 0.0) || dt > 0.5)
    throw std::invalid_argument("reinitialize: dt must satisfy 0 < dt <= 0.5 (CFL)");

  const int w = phi.width(), h = phi.height();
  Field sign(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double p = phi(x, y);
      sign(x, y) = p / std::sqrt(p * p + 1.0);  // h = 1 px smoothing
    }

  Field cur = phi;
  Field next(w, h);
  for (int it = 0; it < iterations; ++it) {
    par::parallel_for(h, [&](std::int64_t y0, std::int64_t y1) {
      for (int y = static_cast<int>(y0); y < y1; ++y)
        for (int x = 0; x < w; ++x) {
          const double p = cur(x, y);
          const double a = x > 0 ? p - cur(x - 1, y) : 0.0;      // backward x
          const double b = x < w - 1 ? cur(x + 1, y) - p : 0.0;  // forward x
          const double c = y > 0 ? p - cur(x, y - 1) : 0.0;      // backward y
          const double d = y < h - 1 ? cur(x, y + 1) - p : 0.0;  // forward y
          const double s = sign(x, y);
          double g2;
          if (s > 0.0) {
            const double ap = std::max(a, 0.0), bm = std::min(b, 0.0);
            const double cp = std::max(c, 0.0), dm = std::min(d, 0.0);
            g2 = std::max(ap * ap, bm * bm) + std::max(cp * cp, dm * dm);
          } else {
            const double am = std::min(a, 0.0), bp = std::max(b, 0.0);
            const double cm = std::min(c, 0.0), dp = std::max(d, 0.0);
            g2 = std::max(am * am, bp * bp) + std::max(cm * cm, dp * dp);
          }
          next(x, y) = p + dt * s * (1.0 - std::sqrt(g2));
        }
    });
    std::swap(cur, next);
  }
  return cur;
}

namespace {

// Edge keys for marching squares: horizontal edge (x..x+1, y) and vertical
// edge (x, y..y+1), disambiguated by the low bit.
std::int64_t h_edge(int x, int y, int w) {
  return (static_cast<std::int64_t>(y) * w + x) * 2;
}
std::int64_t v_edge(int x, int y, int w) {
  return (static_cast<std::int64_t>(y) * w + x) * 2 + 1;
}

struct ContourBuilder {
  const Field& phi;
  std::unordered_map<std::int64_t, std::array<double, 2>> vertex;
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;

  double interp(double p0, double p1) const { return p0 / (p0 - p1); }

  std::int64_t vertex_on_h(int x, int y) {
    const std::int64_t key = h_edge(x, y, phi.width());
    if (!vertex.count(key)) {
      const double t = interp(phi(x, y), phi(x + 1, y));
      vertex[key] = {x + t, static_cast<double>(y)};
    }
    return key;
  }
  std::int64_t vertex_on_v(int x, int y) {
    const std::int64_t key = v_edge(x, y, phi.width());
    if (!vertex.count(key)) {
      const double t = interp(phi(x, y), phi(x, y + 1));
      vertex[key] = {static_cast<double>(x), y + t};
    }
    return key;
  }

  // Cell-local edges 0..3: bottom (y), right (x+1), top (y+1), left (x).
  std::int64_t cell_edge(int x, int y, int e) {
    switch (e) {
      case 0: return vertex_on_h(x, y);
      case 1: return vertex_on_v(x + 1, y);
      case 2: return vertex_on_h(x, y + 1);
      default: return vertex_on_v(x, y);
    }
  }

  void add(int x, int y, int e0, int e1) {
    segments.emplace_back(cell_edge(x, y, e0), cell_edge(x, y, e1));
  }
};

}  // namespace

std::vector<Polyline> zero_contour(const Field& phi) {
  const int w = phi.width(), h = phi.height();
  ContourBuilder b{phi, {}, {}};

  for (int y = 0; y < h - 1; ++y)
    for (int x = 0; x < w - 1; ++x) {
      const bool i00 = phi(x, y) < 0.0;
      const bool i10 = phi(x + 1, y) < 0.0;
      const bool i11 = phi(x + 1, y + 1) < 0.0;
      const bool i01 = phi(x, y + 1) < 0.0;
      const int code = (i00 ? 1 : 0) | (i10 ? 2 : 0) | (i11 ? 4 : 0) | (i01 ? 8 : 0);
      switch (code) {
        case 0: case 15: break;
        case 1: case 14: b.add(x, y, 0, 3); break;
        case 2: case 13: b.add(x, y, 0, 1); break;
        case 3: case 12: b.add(x, y, 1, 3); break;
        case 4: case 11: b.add(x, y, 1, 2); break;
        case 6: case 9:  b.add(x, y, 0, 2); break;
        case 7: case 8:  b.add(x, y, 2, 3); break;
        case 5: {  // inside corners on the 00/11 diagonal
          const double avg = 0.25 * (phi(x, y) + phi(x + 1, y) + phi(x, y + 1) +
                                     phi(x + 1, y + 1));
          if (avg < 0.0) { b.add(x, y, 0, 1); b.add(x, y, 2, 3); }
          else           { b.add(x, y, 0, 3); b.add(x, y, 1, 2); }
          break;
        }
        case 10: {  // inside corners on the 10/01 diagonal
          const double avg = 0.25 * (phi(x, y) + phi(x + 1, y) + phi(x, y + 1) +
                                     phi(x + 1, y + 1));
          if (avg < 0.0) { b.add(x, y, 0, 3); b.add(x, y, 1, 2); }
          else           { b.add(x, y, 0, 1); b.add(x, y, 2, 3); }
          break;
        }
        default: break;
      }
    }

  // Stitch segments into chains; every edge touches at most two segments.
  std::unordered_map<std::int64_t, std::vector<int>> incident;
  for (int s = 0; s < static_cast<int>(b.segments.size()); ++s) {
    incident[b.segments[s].first].push_back(s);
    incident[b.segments[s].second].push_back(s);
  }

  std::vector<bool> used(b.segments.size(), false);
  std::vector<Polyline> result;

  auto walk = [&](int seg, std::int64_t start_edge) {
    Polyline line;
    std::int64_t edge = start_edge;
    int cur = seg;
    line.points.push_back(b.vertex.at(edge));
    while (cur >= 0 && !used[cur]) {
      used[cur] = true;
      const auto& s = b.segments[cur];
      edge = (s.first == edge) ? s.second : s.first;
      line.points.push_back(b.vertex.at(edge));
      if (edge == start_edge) {
        line.closed = true;
        line.points.pop_back();  // implicit closing segment
        break;
      }
      const auto& inc = incident.at(edge);
      cur = -1;
      for (int cand : inc)
        if (!used[cand]) { cur = cand; break; }
    }
    return line;
  };

  // Open chains first, seeded at edges with a single incident segment.
  for (const auto& [edge, segs] : incident) {
    if (segs.size() != 1 || used[segs.front()]) continue;
    result.push_back(walk(segs.front(), edge));
  }
  // Remaining segments belong to closed loops.
  for (int s = 0; s < static_cast<int>(b.segments.size()); ++s) {
    if (used[s]) continue;
    result.push_back(walk(s, b.segments[s].first));
  }
  return result;
}

}  // namespace texseg::level_set

#pragma once

#include <array>
#include <variant>
#include <vector>

#include "texseg/grid.hpp"

namespace texseg::level_set {

// Interior is always {x : phi(x) < 0}.

struct Circle {
  double cx, cy, r;
};
struct Rectangle {
  double x0, y0, x1, y1;
};
/// Grid of seed circles of radius r, centers spaced `spacing` pixels apart.
struct MultiCircle {
  double spacing, r;
};
using InitShape = std::variant<Circle, Rectangle, MultiCircle>;

/// Exact signed distance to the shape boundary, negative inside.
/// The shape must fit inside the grid with at least a 2 px margin.
Field init_signed_distance(const InitShape& shape, int width, int height);

/// H_eps(phi) = 1/2 (1 + (2/pi) atan(phi/eps)), strictly increasing.
double heaviside_eps(double phi, double eps);
/// d/dphi H_eps = (1/pi) eps / (eps^2 + phi^2), even, peak 1/(pi eps) at 0.
double dirac_eps(double phi, double eps);

/// kappa = div(grad phi / |grad phi|) by central differences (one-sided at
/// borders), with gradient-magnitude floor 1e-8.
Field curvature(const Field& phi);

/// Central-difference |grad phi| (one-sided at borders).
Field gradient_magnitude(const Field& phi);

/// Min and max of |grad phi| over pixels with |phi| <= band. Returns {1, 1}
/// when the band is empty.
std::array<double, 2> band_gradient_range(const Field& phi, double band);

/// Sussman redistancing: iterates phi_t = S(phi0) (1 - |grad phi|) with the
/// smoothed sign S = phi0/sqrt(phi0^2 + 1) and Godunov upwind gradients.
/// Requires dt <= 0.5 (CFL for the unit-speed flow).
Field reinitialize(const Field& phi, int iterations, double dt);

struct Polyline {
  std::vector<std::array<double, 2>> points;  // (x, y), sub-pixel
  bool closed = false;
};

/// Marching-squares extraction of the phi = 0 contour with linear edge
/// interpolation. Saddle cells split by the cell-center average (>= 0 treated
/// as exterior). Single-sign phi yields an empty set.
std::vector<Polyline> zero_contour(const Field& phi);

}  // namespace texseg::level_set

#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "texseg/grid.hpp"
#include "texseg/spd.hpp"

namespace texseg::features {

/// One region emptied: its statistics are undefined.
class CollapseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-pixel neighborhood vectors, one column per pixel (x + y*width).
/// vectors(k, idx) is the k-th entry of the row-major flattened side x side
/// window centered on the pixel, sampled with replicate padding.
struct PatchField {
  int width = 0;
  int height = 0;
  int side = 0;  // window side length R; vectors have R^2 rows
  Eigen::MatrixXd vectors;

  Eigen::Index column(int x, int y) const {
    return static_cast<Eigen::Index>(y) * width + x;
  }
  auto at(int x, int y) const { return vectors.col(column(x, y)); }
};

PatchField extract_patches(const GrayImage& image, int side);

/// Region weights from phi: binary (interior = phi < 0) or smoothed via the
/// arctan Heaviside with width epsilon.
struct Membership {
  enum class Mode { binary, smoothed } mode = Mode::binary;
  double epsilon = 1.0;

  static Membership binary() { return {Mode::binary, 1.0}; }
  static Membership smoothed(double eps) { return {Mode::smoothed, eps}; }

  double interior_weight(double phi) const;
};

struct RegionMoments {
  spd::SpdMatrix m_int;  // mean of N(x)N(x)^T over the interior, regularized
  spd::SpdMatrix m_ext;
  double area_int = 0.0;  // interior weight sum, pixels
  double area_ext = 0.0;
};

/// M = sum_x w(x) N(x)N(x)^T / sum_x w(x), then M += (reg tr(M)/R^2 + 1e-10) I.
/// Throws CollapseError when either region's weight sum is <= 1e-12.
RegionMoments region_second_moments(const PatchField& patches, const Field& phi,
                                    const Membership& membership, double reg);

}  // namespace texseg::features

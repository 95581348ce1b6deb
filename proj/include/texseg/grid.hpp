#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace texseg {

/// Dense 2-D field stored row-major. (x, y) indexing with x the column.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("Grid: extents must be positive, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[idx(x, y)]; }
  const T& operator()(int x, int y) const { return data_[idx(x, y)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Nearest in-bounds sample (replicate padding).
  const T& clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width_) x = width_ - 1;
    if (y < 0) y = 0;
    if (y >= height_) y = height_ - 1;
    return data_[idx(x, y)];
  }

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;
using Mask = Grid<unsigned char>;

/// Grayscale image with intensities normalized to [0,1].
class GrayImage {
 public:
  explicit GrayImage(Field values) : values_(std::move(values)) {
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("GrayImage: intensity outside [0,1]");
  }

  int width() const { return values_.width(); }
  int height() const { return values_.height(); }
  double operator()(int x, int y) const { return values_(x, y); }
  const Field& values() const { return values_; }

 private:
  Field values_;
};

}  // namespace texseg

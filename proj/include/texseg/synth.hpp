#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "texseg/grid.hpp"

namespace texseg::synth {

// All textures clip to [0, 1].
struct Stripes {
  double orientation_deg;  // 0 varies along x, 90 along y
  double period;           // >= 2 px
  double contrast;         // peak-to-peak
};
struct Checkerboard {
  double cell;  // >= 2 px
  double contrast;
};
struct GaussianNoise {
  double mean, sigma;  // sigma >= 0
};
struct Constant {
  double level;
};
using TextureSpec = std::variant<Stripes, Checkerboard, GaussianNoise, Constant>;

struct Disk {
  double cx, cy, r;
};
struct SquareRegion {
  double cx, cy, half;  // axis-aligned, side 2*half
};
struct TwoDisks {
  double cx1, cy1, cx2, cy2, r;
};
using RegionSpec = std::variant<Disk, SquareRegion, TwoDisks>;

struct CompositeSpec {
  int width = 0, height = 0;
  TextureSpec background;
  TextureSpec foreground;
  RegionSpec region;
  std::uint64_t seed = 0;
};

struct Composite {
  GrayImage image;
  Mask truth;  // 1 where the foreground texture was placed
};

/// Renders both textures over the full frame from per-texture sub-seeds
/// derived from spec.seed, then composites by the region mask: identical
/// spec + seed is bit-identical, and either texture alone is unaffected by
/// the region shape.
Composite generate(const CompositeSpec& spec);

/// Text forms used in config files and flags:
///   stripes:<deg>,<period>,<contrast>  checkerboard:<cell>,<contrast>
///   gaussian_noise:<mean>,<sigma>      constant:<level>
///   disk:<cx>,<cy>,<r>  square:<cx>,<cy>,<half>  two_disks:<cx1>,<cy1>,<cx2>,<cy2>,<r>
TextureSpec parse_texture(const std::string& text);
RegionSpec parse_region(const std::string& text);

}  // namespace texseg::synth

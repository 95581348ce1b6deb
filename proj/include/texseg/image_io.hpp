#pragma once

#include <string>
#include <vector>

#include "texseg/evolution.hpp"
#include "texseg/grid.hpp"
#include "texseg/level_set.hpp"

namespace texseg::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit binary PGM (P5, maxval <= 255); intensities map to [0,1] via /maxval.
GrayImage read_pgm(const std::string& path);

/// Mask as P5 PGM: 255 where mask != 0 (interior), 0 elsewhere.
void write_pgm_mask(const std::string& path, const Mask& mask);

/// Contour overlay on the input image. A `.ppm` path writes P6 color
/// (initial contour yellow, final red); any other extension writes P5 gray
/// (initial 200, final 255).
void write_overlay(const std::string& path, const GrayImage& image,
                   const std::vector<level_set::Polyline>& initial,
                   const std::vector<level_set::Polyline>& final_contours);

/// Cost trace: header `iter,J,dt,reinit`; row 0 is the initial evaluation
/// (dt = 0, reinit = 0), one row per recorded cost. A non-empty footnote is
/// appended as a trailing `# key=value` line.
void write_cost_csv(const std::string& path, const std::vector<double>& cost_history,
                    const std::vector<evolve::StepInfo>& steps,
                    const std::string& footnote = {});

}  // namespace texseg::io

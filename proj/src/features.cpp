#include "texseg/features.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "texseg/level_set.hpp"
#include "texseg/parallel.hpp"

namespace texseg::features {

PatchField extract_patches(const GrayImage& image, int side) {
  if (side < 1 || side % 2 == 0)
    throw std::invalid_argument("extract_patches: window side must be odd and >= 1");
  if (side > std::min(image.width(), image.height()))
    throw std::invalid_argument("extract_patches: window exceeds image extent");

  const int w = image.width(), h = image.height(), r = side / 2;
  const Field& pix = image.values();
  PatchField patches;
  patches.width = w;
  patches.height = h;
  patches.side = side;
  patches.vectors.resize(static_cast<Eigen::Index>(side) * side,
                         static_cast<Eigen::Index>(w) * h);

  par::parallel_for(h, [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y)
      for (int x = 0; x < w; ++x) {
        const Eigen::Index col = patches.column(x, y);
        Eigen::Index k = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            patches.vectors(k++, col) = pix.clamped(x + dx, y + dy);
      }
  });
  return patches;
}

double Membership::interior_weight(double phi) const {
  if (mode == Mode::binary) return phi < 0.0 ? 1.0 : 0.0;
  return 1.0 - level_set::heaviside_eps(phi, epsilon);
}

RegionMoments region_second_moments(const PatchField& patches, const Field& phi,
                                    const Membership& membership, double reg) {
  if (patches.width != phi.width() || patches.height != phi.height())
    throw std::invalid_argument("region_second_moments: patch/phi shape mismatch");
  if (reg < 0.0) throw std::invalid_argument("region_second_moments: reg must be >= 0");

  const int w = patches.width, h = patches.height;
  const Eigen::Index n = patches.vectors.rows();

  struct RowAcc {
    Eigen::MatrixXd m_int, m_ext;
    double w_int = 0.0, w_ext = 0.0;
  };
  std::vector<RowAcc> rows(h);

  // Per-row partial sums, combined in row order: totals never depend on the
  // worker count.
  par::parallel_for(h, [&](std::int64_t y0, std::int64_t y1) {
    for (int y = static_cast<int>(y0); y < y1; ++y) {
      RowAcc acc;
      acc.m_int = Eigen::MatrixXd::Zero(n, n);
      acc.m_ext = Eigen::MatrixXd::Zero(n, n);
      for (int x = 0; x < w; ++x) {
        const double wi = membership.interior_weight(phi(x, y));
        const double we = 1.0 - wi;
        const auto v = patches.at(x, y);
        if (wi > 0.0) {
          acc.m_int.selfadjointView<Eigen::Lower>().rankUpdate(v, wi);
          acc.w_int += wi;
        }
        if (we > 0.0) {
          acc.m_ext.selfadjointView<Eigen::Lower>().rankUpdate(v, we);
          acc.w_ext += we;
        }
      }
      rows[y] = std::move(acc);
    }
  });

  Eigen::MatrixXd sum_int = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sum_ext = Eigen::MatrixXd::Zero(n, n);
  double area_int = 0.0, area_ext = 0.0;
  for (int y = 0; y < h; ++y) {
    sum_int += rows[y].m_int;
    sum_ext += rows[y].m_ext;
    area_int += rows[y].w_int;
    area_ext += rows[y].w_ext;
  }

  if (area_int <= 1e-12 || area_ext <= 1e-12)
    throw CollapseError("region_second_moments: a region emptied (interior weight " +
                        std::to_string(area_int) + ", exterior " +
                        std::to_string(area_ext) + ")");

  auto finalize = [&](Eigen::MatrixXd& sum, double area) {
    Eigen::MatrixXd m = sum.selfadjointView<Eigen::Lower>();
    m /= area;
    const double ridge = reg * m.trace() / static_cast<double>(n) + 1e-10;
    m.diagonal().array() += ridge;
    return spd::SpdMatrix(m);
  };

  return RegionMoments{finalize(sum_int, area_int), finalize(sum_ext, area_ext),
                       area_int, area_ext};
}

}  // namespace texseg::features

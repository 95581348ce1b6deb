#include "texseg/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>

namespace texseg::io {

namespace {

/// Skips whitespace and `#` comment lines between PNM header tokens.
int next_header_int(std::istream& in, const std::string& path) {
  for (;;) {
    const int c = in.peek();
    if (c == EOF) throw IoError(path + ": truncated header");
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) throw IoError(path + ": malformed header integer");
  return value;
}

std::uint8_t to_byte(double v01) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v01, 0.0, 1.0) * 255.0));
}

/// Stamps a polyline into the pixel grid, sampling each segment densely
/// enough that no pixel along it is skipped.
void rasterize(const std::vector<level_set::Polyline>& lines, int w, int h,
               const std::function<void(int, int)>& plot) {
  for (const auto& line : lines) {
    const std::size_t n = line.points.size();
    if (n == 0) continue;
    const std::size_t segments = line.closed ? n : n - 1;
    for (std::size_t s = 0; s < segments; ++s) {
      const auto& a = line.points[s];
      const auto& b = line.points[(s + 1) % n];
      const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      const int samples = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
      for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const int x = static_cast<int>(std::lround(a[0] + t * (b[0] - a[0])));
        const int y = static_cast<int>(std::lround(a[1] + t * (b[1] - a[1])));
        if (x >= 0 && x < w && y >= 0 && y < h) plot(x, y);
      }
    }
  }
}

bool has_extension(const std::string& path, const std::string& ext) {
  if (path.size() < ext.size()) return false;
  return std::equal(ext.rbegin(), ext.rend(), path.rbegin(),
                    [](char a, char b) { return std::tolower(b) == a; });
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  return out;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (in.gcount() != 2 || magic != "P5") throw IoError(path + ": not a binary PGM (P5)");
  const int width = next_header_int(in, path);
  const int height = next_header_int(in, path);
  const int maxval = next_header_int(in, path);
  if (width <= 0 || height <= 0) throw IoError(path + ": bad dimensions");
  if (maxval <= 0 || maxval > 255) throw IoError(path + ": only maxval <= 255 supported");
  in.get();  // single whitespace byte after maxval

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError(path + ": truncated pixel data");

  Field values(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      values(x, y) = raw[static_cast<std::size_t>(y) * width + x] /
                     static_cast<double>(maxval);
  return GrayImage(std::move(values));
}

void write_pgm_mask(const std::string& path, const Mask& mask) {
  auto out = open_out(path);
  out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      raw[static_cast<std::size_t>(y) * mask.width() + x] = mask(x, y) ? 255 : 0;
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError(path + ": write failed");
}

void write_overlay(const std::string& path, const GrayImage& image,
                   const std::vector<level_set::Polyline>& initial,
                   const std::vector<level_set::Polyline>& final_contours) {
  const int w = image.width(), h = image.height();
  if (has_extension(path, ".ppm")) {
    std::vector<std::array<std::uint8_t, 3>> rgb(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::uint8_t g = to_byte(image(x, y));
        rgb[static_cast<std::size_t>(y) * w + x] = {g, g, g};
      }
    rasterize(initial, w, h, [&](int x, int y) {
      rgb[static_cast<std::size_t>(y) * w + x] = {255, 255, 0};
    });
    rasterize(final_contours, w, h, [&](int x, int y) {
      rgb[static_cast<std::size_t>(y) * w + x] = {255, 0, 0};
    });
    auto out = open_out(path);
    out << "P6\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()),
              static_cast<std::streamsize>(rgb.size() * 3));
    if (!out) throw IoError(path + ": write failed");
    return;
  }

  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray[static_cast<std::size_t>(y) * w + x] = to_byte(image(x, y));
  rasterize(initial, w, h,
            [&](int x, int y) { gray[static_cast<std::size_t>(y) * w + x] = 200; });
  rasterize(final_contours, w, h,
            [&](int x, int y) { gray[static_cast<std::size_t>(y) * w + x] = 255; });
  auto out = open_out(path);
  out << "P5\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
  if (!out) throw IoError(path + ": write failed");
}

void write_cost_csv(const std::string& path, const std::vector<double>& cost_history,
                    const std::vector<evolve::StepInfo>& steps,
                    const std::string& footnote) {
  auto out = open_out(path);
  out << "iter,J,dt,reinit\n";
  std::ostringstream row;
  row.precision(17);
  for (std::size_t i = 0; i < cost_history.size(); ++i) {
    row.str("");
    const bool has_step = i > 0 && i - 1 < steps.size();
    row << i << "," << cost_history[i] << "," << (has_step ? steps[i - 1].dt : 0.0)
        << "," << (has_step && steps[i - 1].reinitialized ? 1 : 0) << "\n";
    out << row.str();
  }
  if (!footnote.empty()) out << "# " << footnote << "\n";
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace texseg::io

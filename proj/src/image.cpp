#include "lanesim/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace lanesim {

namespace {

// Snap sub-nanopixel deviations onto the integer grid.
inline double snap(double v) {
  double r = std::nearbyint(v);
  return (std::fabs(v - r) < 1e-9) ? r : v;
}

}  // namespace

bool sample_bilinear(const ImageBuffer& img, double x, double y, float* out) {
  const int C = img.channels();
  x = snap(x);
  y = snap(y);
  if (!(x >= 0.0 && x <= img.width() - 1 && y >= 0.0 && y <= img.height() - 1)) {
    for (int ch = 0; ch < C; ++ch) out[ch] = 0.0f;
    return false;
  }
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 == img.width() - 1) x0--;   // keep a full 2x2 support at the border
  if (y0 == img.height() - 1) y0--;
  if (img.width() == 1) x0 = 0;
  if (img.height() == 1) y0 = 0;
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  for (int ch = 0; ch < C; ++ch) {
    const double v00 = img.at(y0, x0, ch);
    const double v01 = img.at(y0, x1, ch);
    const double v10 = img.at(y1, x0, ch);
    const double v11 = img.at(y1, x1, ch);
    const double v0 = v00 + (v01 - v00) * fx;
    const double v1 = v10 + (v11 - v10) * fx;
    out[ch] = static_cast<float>(v0 + (v1 - v0) * fy);
  }
  return true;
}

void box_average(const ImageBuffer& img, double x0, double x1, double y0, double y1,
                 double* out) {
  const int C = img.channels();
  if (!(x1 > x0 && y1 > y0))
    throw RuntimeError("box_average: rectangle must have positive area");
  if (x0 < -0.5 || y0 < -0.5 || x1 > img.width() - 0.5 || y1 > img.height() - 0.5)
    throw RuntimeError("box_average: rectangle outside raster");

  const int c0 = static_cast<int>(std::floor(x0 + 0.5));
  const int c1 = std::min(static_cast<int>(std::floor(x1 + 0.5)), img.width() - 1);
  const int r0 = static_cast<int>(std::floor(y0 + 0.5));
  const int r1 = std::min(static_cast<int>(std::floor(y1 + 0.5)), img.height() - 1);

  double acc[16] = {0};
  if (C > 16) throw RuntimeError("box_average: too many channels");
  for (int r = r0; r <= r1; ++r) {
    const double wy = std::min(y1, r + 0.5) - std::max(y0, r - 0.5);
    if (wy <= 0) continue;
    for (int c = c0; c <= c1; ++c) {
      const double wx = std::min(x1, c + 0.5) - std::max(x0, c - 0.5);
      if (wx <= 0) continue;
      const double w = wx * wy;
      for (int ch = 0; ch < C; ++ch) acc[ch] += w * img.at(r, c, ch);
    }
  }
  const double area = (x1 - x0) * (y1 - y0);
  for (int ch = 0; ch < C; ++ch) out[ch] = acc[ch] / area;
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw RuntimeError("save_image: only 1- or 3-channel images supported");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("save_image: cannot open " + path.string());
  f << (img.channels() == 1 ? "P5" : "P6") << "\n"
    << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(img.width()) * img.channels());
  for (int r = 0; r < img.height(); ++r) {
    size_t i = 0;
    for (int c = 0; c < img.width(); ++c)
      for (int ch = 0; ch < img.channels(); ++ch) {
        float v = img.at(r, c, ch);
        v = std::min(1.0f, std::max(0.0f, v));
        row[i++] = static_cast<unsigned char>(std::floor(v * 255.0f + 0.5f));
      }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw RuntimeError("save_image: write failed for " + path.string());
}

namespace {

int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments per the PNM grammar.
  for (;;) {
    int c = in.get();
    if (c == EOF) throw RuntimeError("load_image: truncated header");
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
      continue;
    }
    if (!std::isspace(c)) {
      int v = 0;
      while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
      }
      return v;
    }
  }
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("load_image: cannot open " + path.string());
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  int channels;
  if (m0 == 'P' && m1 == '5') channels = 1;
  else if (m0 == 'P' && m1 == '6') channels = 3;
  else throw RuntimeError("load_image: unsupported format in " + path.string());
  const int w = read_pnm_token(f);
  const int h = read_pnm_token(f);
  const int maxval = read_pnm_token(f);
  if (maxval != 255) throw RuntimeError("load_image: expected maxval 255");
  ImageBuffer img(w, h, channels);
  std::vector<unsigned char> row(static_cast<size_t>(w) * channels);
  for (int r = 0; r < h; ++r) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw RuntimeError("load_image: truncated pixel data in " + path.string());
    size_t i = 0;
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.at(r, c, ch) = static_cast<float>(row[i++]) / 255.0f;
  }
  return img;
}

}  // namespace lanesim

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lanesim/common.hpp"

namespace lanesim {

// Row-major interleaved float image, values nominally in [0, 1].
//
// Pixel coordinate convention used throughout: pixel (row r, col c) has its
// center at continuous coordinates (x=c, y=r) and covers the cell
// [c-0.5, c+0.5] x [r-0.5, r+0.5]. The raster therefore spans
// x in [-0.5, width-0.5], y in [-0.5, height-0.5].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw RuntimeError("ImageBuffer: dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  float& at(int r, int c, int ch) {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }
  float at(int r, int c, int ch) const {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  bool same_shape(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

 private:
  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<float> data_;
};

// Bilinear sample of all channels at continuous (x, y); writes channels()
// floats to out. Returns false (and zeros) outside the interpolation support
// [0, w-1] x [0, h-1]. Coordinates within 1e-9 px of the integer grid are
// snapped to it first, which makes identity warps bit-exact through the
// general sampling path.
bool sample_bilinear(const ImageBuffer& img, double x, double y, float* out);

// Exact area average of the axis-aligned rectangle [x0,x1] x [y0,y1] in cell
// coordinates (see ImageBuffer's convention), one value per channel. The
// rectangle must lie inside the raster and have positive area.
void box_average(const ImageBuffer& img, double x0, double x1, double y0, double y1,
                 double* out);

// Binary PGM (1 channel) / PPM (3 channels), maxval 255.
// Quantization: byte = floor(clamp(v,0,1)*255 + 0.5); load returns byte/255.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);
ImageBuffer load_image(const std::filesystem::path& path);

}  // namespace lanesim

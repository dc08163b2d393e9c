#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textsr/tensor.hpp"

namespace textsr {

// Interleaved h x w x c image with samples in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  bool empty() const { return pixels.empty(); }
  std::size_t size() const { return pixels.size(); }

  double& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

bool same_dims(const Image& a, const Image& b);
void require_same_dims(const Image& a, const Image& b, const char* op);

// ITU-R BT.601 luma; single-channel images pass through.
Image to_gray(const Image& img);
Image clamp01(Image img);
// Rounds each sample to the nearest k/255.
Image quantize8(const Image& img);
Image crop(const Image& img, int x, int y, int w, int h);

Tensor to_tensor(const Image& img);
Image from_tensor(const Tensor& t);

struct ImageSize {
  int width = 0;
  int height = 0;
};

// PNG or JPEG, detected from the file signature. Output is 3-channel RGB.
Image read_image(const std::string& path);
ImageSize read_image_size(const std::string& path);

std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const std::string& path, const Image& img);

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
Image decode_image(const std::vector<std::uint8_t>& bytes);

}  // namespace textsr

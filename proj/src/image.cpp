#include "textsr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

// jpeglib.h needs size_t/FILE declared first.
#include <jpeglib.h>

#include "textsr/error.hpp"

namespace textsr {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

bool is_jpeg(const std::vector<std::uint8_t>& b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::vector<std::uint8_t> to_rgb8(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw ShapeError("8-bit encoding supports 1 or 3 channels, got " +
                     std::to_string(img.channels));
  }
  std::vector<std::uint8_t> out(img.size());
  std::transform(img.pixels.begin(), img.pixels.end(), out.begin(), to_byte);
  return out;
}

Image from_rgb8(const std::uint8_t* data, int w, int h, int c) {
  Image img(h, w, c);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = data[i] / 255.0;
  return img;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError(std::string("png decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(std::string("png decode failed: ") + image.message);
  }
  return from_rgb8(buf.data(), static_cast<int>(image.width),
                   static_cast<int>(image.height), 3);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(const std::vector<std::uint8_t>& bytes, bool header_only,
                  ImageSize* size_out) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> buf;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError(std::string("jpeg decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (header_only) {
    size_out->width = static_cast<int>(cinfo.image_width);
    size_out->height = static_cast<int>(cinfo.image_height);
    jpeg_destroy_decompress(&cinfo);
    return {};
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  buf.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_rgb8(buf.data(), w, h, 3);
}

}  // namespace

bool same_dims(const Image& a, const Image& b) {
  return a.height == b.height && a.width == b.width &&
         a.channels == b.channels;
}

void require_same_dims(const Image& a, const Image& b, const char* op) {
  if (!same_dims(a, b)) {
    throw ShapeError(std::string(op) + ": image dimensions differ (" +
                     std::to_string(a.height) + "x" + std::to_string(a.width) +
                     "x" + std::to_string(a.channels) + " vs " +
                     std::to_string(b.height) + "x" + std::to_string(b.width) +
                     "x" + std::to_string(b.channels) + ")");
  }
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) {
    throw ShapeError("grayscale conversion needs 1 or 3 channels");
  }
  Image g(img.height, img.width, 1);
  for (std::size_t i = 0, n = g.size(); i < n; ++i) {
    const double* p = &img.pixels[i * 3];
    g.pixels[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return g;
}

Image clamp01(Image img) {
  for (auto& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Image quantize8(const Image& img) {
  Image out = img;
  for (auto& v : out.pixels) v = to_byte(v) / 255.0;
  return out;
}

Image crop(const Image& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width ||
      y + h > img.height) {
    throw ParameterError("crop rectangle outside image");
  }
  Image out(h, w, img.channels);
  const std::size_t row = static_cast<std::size_t>(w) * img.channels;
  for (int r = 0; r < h; ++r) {
    const double* src = &img.pixels[(static_cast<std::size_t>(y + r) *
                                         img.width + x) * img.channels];
    std::copy(src, src + row, &out.pixels[static_cast<std::size_t>(r) * row]);
  }
  return out;
}

Tensor to_tensor(const Image& img) {
  return Tensor({static_cast<std::size_t>(img.height),
                 static_cast<std::size_t>(img.width),
                 static_cast<std::size_t>(img.channels)},
                img.pixels);
}

Image from_tensor(const Tensor& t) {
  if (t.rank() != 3) {
    throw ShapeError("image tensors must be [h x w x c], got " +
                     to_string(t.shape()));
  }
  Image img;
  img.height = static_cast<int>(t.dim(0));
  img.width = static_cast<int>(t.dim(1));
  img.channels = static_cast<int>(t.dim(2));
  img.pixels = t.values();
  return img;
}

Image decode_image(const std::vector<std::uint8_t>& bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, false, nullptr);
  throw IoError("unrecognized image format");
}

Image read_image(const std::string& path) {
  try {
    return decode_image(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

ImageSize read_image_size(const std::string& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(),
                                          bytes.size())) {
      throw IoError(path + ": " + image.message);
    }
    ImageSize s{static_cast<int>(image.width), static_cast<int>(image.height)};
    png_image_free(&image);
    return s;
  }
  if (is_jpeg(bytes)) {
    ImageSize s;
    try {
      decode_jpeg(bytes, true, &s);
    } catch (const IoError& e) {
      throw IoError(path + ": " + e.what());
    }
    return s;
  }
  throw IoError(path + ": unrecognized image format");
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  const auto raw = to_rgb8(img);
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("png encode failed: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + n);
      },
      nullptr);
  // Noisy photographic content barely benefits from heavier levels.
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.channels);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(raw.data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::string& path, const Image& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  const auto raw = to_rgb8(img);
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    throw IoError(std::string("jpeg encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(raw.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return out;
}

}  // namespace textsr

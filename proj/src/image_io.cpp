#include "toonbench/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

// jpeglib.h needs size_t/FILE declared first.
#include <jpeglib.h>

#include "toonbench/error.hpp"

namespace toonbench {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

// ---- PNG -------------------------------------------------------------------

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;   // after palette/tRNS expansion: 1, 2, 3 or 4
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

struct MemoryReader {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

struct PngErrorSink {
  std::string message;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink) sink->message = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->data.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, reader->data.data() + reader->offset, length);
  reader->offset += length;
}

// All libpng work happens here; nothing with a non-trivial destructor is
// created between setjmp and a possible longjmp.
bool decode_png_raw(std::span<const std::uint8_t> bytes, DecodedPng& out, PngErrorSink& sink) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    sink.message = "not a PNG stream";
    return false;
  }
  MemoryReader reader{bytes, 0};
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler, png_warning_handler);
  if (!png) {
    sink.message = "libpng initialisation failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    sink.message = "libpng initialisation failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_set_user_limits(png, 1U << 16, 1U << 16);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.bit_depth = out_depth;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  out.samples.resize(count);
  if (out_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = raw[i];
  }
  return true;
}

DecodedPng decode_png(std::span<const std::uint8_t> bytes) {
  DecodedPng decoded;
  PngErrorSink sink;
  if (!decode_png_raw(bytes, decoded, sink)) {
    throw Error(ErrorCode::DecodeError, sink.message);
  }
  if (decoded.width < 1 || decoded.height < 1) {
    throw Error(ErrorCode::ZeroDimension, "PNG has zero width or height");
  }
  if (decoded.bit_depth != 8 && decoded.bit_depth != 16) {
    throw Error(ErrorCode::DecodeError,
                "unsupported bit depth " + std::to_string(decoded.bit_depth));
  }
  return decoded;
}

std::uint8_t to_8bit(std::uint16_t sample, int bit_depth) {
  if (bit_depth == 8) return static_cast<std::uint8_t>(sample);
  // round-half-up(sample / 257)
  return static_cast<std::uint8_t>((2U * sample + 257U) / 514U);
}

std::uint8_t rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299U * r + 587U * g + 114U * b + 500U) / 1000U);
}

struct VectorWriter {
  std::vector<std::uint8_t>* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* writer = static_cast<VectorWriter*>(png_get_io_ptr(png));
  writer->out->insert(writer->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png_raw(int width, int height, int color_type, const std::uint8_t* pixels,
                    std::size_t rowbytes, std::vector<std::uint8_t>& out, PngErrorSink& sink) {
  VectorWriter writer{&out};
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(pixels + y * rowbytes);
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler, png_warning_handler);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &writer, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// ---- JPEG ------------------------------------------------------------------

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

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, bool header_only, RgbImage& out,
                     JpegErrorManager& err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (header_only) {
    out.width = static_cast<int>(cinfo.image_width);
    out.height = static_cast<int>(cinfo.image_height);
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(out.width) * 3;
  out.rgb.resize(stride * out.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.rgb.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes, bool header_only) {
  RgbImage image;
  JpegErrorManager err;
  if (!decode_jpeg_raw(bytes, header_only, image, err)) {
    throw Error(ErrorCode::DecodeError, err.message);
  }
  if (image.width < 1 || image.height < 1) {
    throw Error(ErrorCode::ZeroDimension, "JPEG has zero width or height");
  }
  return image;
}

}  // namespace

AlphaMask decode_mask_png(std::span<const std::uint8_t> bytes) {
  const DecodedPng png = decode_png(bytes);
  const std::size_t n = static_cast<std::size_t>(png.width) * png.height;
  std::vector<std::uint8_t> values(n);
  const auto* s = png.samples.data();
  const int depth = png.bit_depth;
  switch (png.channels) {
    case 1:
      for (std::size_t i = 0; i < n; ++i) values[i] = to_8bit(s[i], depth);
      break;
    case 2:
      for (std::size_t i = 0; i < n; ++i) values[i] = to_8bit(s[2 * i + 1], depth);
      break;
    case 3:
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = rec601_luma(to_8bit(s[3 * i], depth), to_8bit(s[3 * i + 1], depth),
                                to_8bit(s[3 * i + 2], depth));
      }
      break;
    case 4:
      for (std::size_t i = 0; i < n; ++i) values[i] = to_8bit(s[4 * i + 3], depth);
      break;
    default:
      throw Error(ErrorCode::DecodeError, "unsupported channel count");
  }
  return {png.width, png.height, std::move(values)};
}

AlphaMask load_mask(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_mask_png(bytes);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DecodeError) {
      throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::vector<std::uint8_t> encode_mask_png(const AlphaMask& mask) {
  std::vector<std::uint8_t> out;
  PngErrorSink sink;
  if (!encode_png_raw(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, mask.values().data(),
                      static_cast<std::size_t>(mask.width()), out, sink)) {
    throw Error(ErrorCode::IoError, "PNG encoding failed: " + sink.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
  std::vector<std::uint8_t> out;
  PngErrorSink sink;
  if (!encode_png_raw(image.width, image.height, PNG_COLOR_TYPE_RGB, image.rgb.data(),
                      static_cast<std::size_t>(image.width) * 3, out, sink)) {
    throw Error(ErrorCode::IoError, "PNG encoding failed: " + sink.message);
  }
  return out;
}

void save_mask(const fs::path& path, const AlphaMask& mask) {
  const auto bytes = encode_mask_png(mask);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

RgbImage load_rgb_image(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, false);
  const DecodedPng png = decode_png(bytes);
  RgbImage image{png.width, png.height, {}};
  const std::size_t n = static_cast<std::size_t>(png.width) * png.height;
  image.rgb.resize(n * 3);
  const auto* s = png.samples.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      std::uint16_t sample = 0;
      switch (png.channels) {
        case 1:
        case 2: sample = s[i * png.channels]; break;
        default: sample = s[i * png.channels + c]; break;
      }
      image.rgb[i * 3 + c] = to_8bit(sample, png.bit_depth);
    }
  }
  return image;
}

ImageSize read_image_size(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (is_jpeg(bytes)) {
    const RgbImage header = decode_jpeg(bytes, true);
    return {header.width, header.height};
  }
  // IHDR sits at a fixed offset right after the signature.
  if (bytes.size() < 24 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::DecodeError, path.string() + ": neither PNG nor JPEG");
  }
  auto be32 = [&](std::size_t at) {
    return static_cast<int>((std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
                            (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]});
  };
  const ImageSize size{be32(16), be32(20)};
  if (size.width < 1 || size.height < 1) {
    throw Error(ErrorCode::ZeroDimension, path.string());
  }
  return size;
}

}  // namespace toonbench

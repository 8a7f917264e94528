#include "fixtures.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstddef>
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fixtures {

namespace fs = std::filesystem;

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

void paint_shape(std::mt19937_64& rng, std::vector<std::uint8_t>& v, int w, int h,
                 std::uint8_t value) {
  const int cx = uniform(rng, 0, w - 1);
  const int cy = uniform(rng, 0, h - 1);
  const int rx = uniform(rng, 1, std::max(1, w / 2));
  const int ry = uniform(rng, 1, std::max(1, h / 2));
  const bool ellipse = chance(rng, 0.5);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x - cx) / rx;
      const double dy = static_cast<double>(y - cy) / ry;
      const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : (std::abs(x - cx) <= rx && std::abs(y - cy) <= ry);
      if (inside) v[static_cast<std::size_t>(y) * w + x] = value;
    }
  }
}

}  // namespace

AlphaMask random_binary_gt(std::mt19937_64& rng, int w, int h) {
  for (;;) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h, 0);
    const int shapes = uniform(rng, 1, 3);
    for (int s = 0; s < shapes; ++s) paint_shape(rng, v, w, h, 255);
    if (chance(rng, 0.3)) paint_shape(rng, v, w, h, 0);  // holes
    const auto fg = std::count(v.begin(), v.end(), 255);
    if (fg > 0 && fg < static_cast<long>(v.size())) return AlphaMask(w, h, std::move(v));
  }
}

AlphaMask random_prediction(std::mt19937_64& rng, const AlphaMask& gt) {
  const int w = gt.width();
  const int h = gt.height();
  std::vector<std::uint8_t> v(gt.values().begin(), gt.values().end());
  switch (uniform(rng, 0, 4)) {
    case 0: {  // shifted copy
      const int sx = uniform(rng, -2, 2);
      const int sy = uniform(rng, -2, 2);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const int ox = std::clamp(x - sx, 0, w - 1);
          const int oy = std::clamp(y - sy, 0, h - 1);
          v[static_cast<std::size_t>(y) * w + x] = gt.at(ox, oy);
        }
      }
      break;
    }
    case 1:  // salt and pepper
      for (auto& px : v) {
        if (chance(rng, 0.08)) px = static_cast<std::uint8_t>(uniform(rng, 0, 255));
      }
      break;
    case 2:  // soft haze
      for (auto& px : v) {
        px = static_cast<std::uint8_t>(std::clamp(px + uniform(rng, -40, 40), 0, 255));
      }
      break;
    case 3:  // unrelated blobs
      std::fill(v.begin(), v.end(), 0);
      for (int s = uniform(rng, 0, 3); s > 0; --s) {
        paint_shape(rng, v, w, h, static_cast<std::uint8_t>(uniform(rng, 100, 255)));
      }
      break;
    default:  // uniformly random
      for (auto& px : v) px = static_cast<std::uint8_t>(uniform(rng, 0, 255));
      break;
  }
  if (chance(rng, 0.2)) {
    for (int s = uniform(rng, 1, 2); s > 0; --s) {
      paint_shape(rng, v, w, h, static_cast<std::uint8_t>(uniform(rng, 0, 255)));
    }
  }
  return AlphaMask(w, h, std::move(v));
}

MaskPair random_pair(std::mt19937_64& rng, int w, int h) {
  AlphaMask gt = random_binary_gt(rng, w, h);
  if (chance(rng, 0.25)) {
    // Soften some ground-truth values while keeping a mixed binarisation.
    std::vector<std::uint8_t> v(gt.values().begin(), gt.values().end());
    for (auto& px : v) {
      if (chance(rng, 0.1)) px = static_cast<std::uint8_t>(px == 255 ? uniform(rng, 129, 255) : uniform(rng, 0, 128));
    }
    gt = AlphaMask(w, h, std::move(v));
  }
  AlphaMask pred = random_prediction(rng, gt);
  return MaskPair(std::move(pred), std::move(gt));
}

AlphaMask flip_horizontal(const AlphaMask& m) {
  std::vector<std::uint8_t> v(m.size());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      v[static_cast<std::size_t>(y) * m.width() + x] = m.at(m.width() - 1 - x, y);
    }
  }
  return AlphaMask(m.width(), m.height(), std::move(v));
}

AlphaMask flip_vertical(const AlphaMask& m) {
  std::vector<std::uint8_t> v(m.size());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      v[static_cast<std::size_t>(y) * m.width() + x] = m.at(x, m.height() - 1 - y);
    }
  }
  return AlphaMask(m.width(), m.height(), std::move(v));
}

AlphaMask rotate90(const AlphaMask& m) {
  const int w = m.height();
  const int h = m.width();
  std::vector<std::uint8_t> v(m.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      v[static_cast<std::size_t>(y) * w + x] = m.at(y, m.height() - 1 - x);
    }
  }
  return AlphaMask(w, h, std::move(v));
}

AlphaMask filled_rect(int w, int h, int x0, int y0, int rw, int rh, std::uint8_t inside,
                      std::uint8_t outside) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h, outside);
  for (int y = std::max(0, y0); y < std::min(h, y0 + rh); ++y) {
    for (int x = std::max(0, x0); x < std::min(w, x0 + rw); ++x) {
      v[static_cast<std::size_t>(y) * w + x] = inside;
    }
  }
  return AlphaMask(w, h, std::move(v));
}

void write_png(const fs::path& path, int w, int h, int color_type, int bit_depth,
               const std::vector<std::uint16_t>& samples) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
    throw std::runtime_error("libpng write failed");
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t row_samples = static_cast<std::size_t>(w) * channels;
  const std::size_t bytes_per = bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> row(row_samples * bytes_per);
  for (int y = 0; y < h; ++y) {
    for (std::size_t i = 0; i < row_samples; ++i) {
      const std::uint16_t s = samples[static_cast<std::size_t>(y) * row_samples + i];
      if (bit_depth == 16) {
        row[2 * i] = static_cast<png_byte>(s >> 8);  // big-endian
        row[2 * i + 1] = static_cast<png_byte>(s & 0xFF);
      } else {
        row[i] = static_cast<png_byte>(s);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

void write_jpeg(const fs::path& path, int w, int h, const std::vector<std::uint8_t>& rgb,
                int quality) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&rgb[static_cast<std::size_t>(cinfo.next_scanline) * w * 3]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("toonbench-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

namespace {

void write_gray(const fs::path& path, const AlphaMask& m) {
  std::vector<std::uint16_t> s(m.values().begin(), m.values().end());
  write_png(path, m.width(), m.height(), PNG_COLOR_TYPE_GRAY, 8, s);
}

}  // namespace

void write_benchmark_fixture(const fs::path& root) {
  const char* categories[] = {"reference", "emotion", "pose", "factory", "action", "items"};
  constexpr int w = 48;
  constexpr int h = 40;
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  fs::create_directories(root / "pred_a");
  fs::create_directories(root / "pred_b");
  std::string records;
  for (int i = 0; i < 6; ++i) {
    const std::string id = std::string("img_") + static_cast<char>('0' + i);
    // The last image has an empty ground truth to exercise absent metrics.
    std::vector<std::uint8_t> shape(static_cast<std::size_t>(w) * h, 0);
    if (i < 5) {
      const int cx = 12 + 5 * i, cy = 14 + 2 * i, rx = 8 + i, ry = 6 + 2 * i;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const int dx = x - cx, dy = y - cy;
          const bool ellipse = dx * dx * ry * ry + dy * dy * rx * rx <= rx * rx * ry * ry;
          const bool bar = i % 2 == 1 && x >= 30 && x < 44 && y >= 4 && y < 9;
          if (ellipse || bar) shape[static_cast<std::size_t>(y) * w + x] = 255;
        }
      }
    }
    const AlphaMask gt(w, h, std::move(shape));
    std::vector<std::uint16_t> rgb(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t p = 0; p < gt.size(); ++p) {
      rgb[3 * p] = static_cast<std::uint16_t>(gt[p] ? 220 : 30 + (p % 7) * 10);
      rgb[3 * p + 1] = static_cast<std::uint16_t>((p * 3) % 256);
      rgb[3 * p + 2] = static_cast<std::uint16_t>(gt[p] ? 40 : 200);
    }
    write_png(root / "images" / (id + ".png"), w, h, PNG_COLOR_TYPE_RGB, 8, rgb);
    write_gray(root / "masks" / (id + ".png"), gt);

    // Model A: ground truth with light boundary noise.
    std::vector<std::uint8_t> a(gt.values().begin(), gt.values().end());
    for (int y = 1; y + 1 < h; ++y) {
      for (int x = 1; x + 1 < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const bool edge = gt[p] != gt[p - 1] || gt[p] != gt[p + w];
        if (edge && (x + y + i) % 3 == 0) a[p] = static_cast<std::uint8_t>(255 - a[p]);
      }
    }
    write_gray(root / "pred_a" / (id + ".png"), AlphaMask(w, h, std::move(a)));

    // Model B: shifted by two pixels with a soft haze.
    std::vector<std::uint8_t> b(gt.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int v = gt.at(std::max(0, x - 2), y);
        b[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(v ? 230 : 20);
      }
    }
    write_gray(root / "pred_b" / (id + ".png"), AlphaMask(w, h, std::move(b)));

    if (!records.empty()) records += ",\n";
    records += "    {\"id\": \"" + id + "\", \"image\": \"images/" + id + ".png\", \"mask\": \"masks/" +
               id + ".png\", \"category\": \"" + categories[i] + "\", \"split\": \"test\"}";
  }
  std::ofstream out(root / "manifest.json");
  out << "{\n  \"version\": 1,\n  \"seed\": null,\n  \"records\": [\n" << records << "\n  ]\n}\n";
}

}  // namespace fixtures

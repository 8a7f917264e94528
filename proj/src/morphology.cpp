#include "toonbench/morphology.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "toonbench/error.hpp"

namespace toonbench {

namespace {

void require_iterations(int iterations) {
  if (iterations < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "iteration count must be >= 0, got " + std::to_string(iterations));
  }
}

// Sliding "all set" test along one axis over a window of +-radius.
// `stride` walks the line; `length` is the line size.
void erode_line(const std::uint8_t* in, std::uint8_t* out, int length, std::size_t stride,
                int radius, bool outside_set) {
  // Count of clear in-bounds pixels inside the current window.
  int clear = 0;
  auto value = [&](int i) { return in[static_cast<std::size_t>(i) * stride] != 0; };
  for (int i = 0; i <= std::min(radius, length - 1); ++i) clear += value(i) ? 0 : 1;
  for (int i = 0; i < length; ++i) {
    const bool touches_outside = i - radius < 0 || i + radius > length - 1;
    const bool keep = clear == 0 && (outside_set || !touches_outside);
    out[static_cast<std::size_t>(i) * stride] = keep ? 1 : 0;
    const int leaving = i - radius;
    const int entering = i + radius + 1;
    if (leaving >= 0 && !value(leaving)) --clear;
    if (entering < length && !value(entering)) ++clear;
  }
}

BinaryMask erode_square(const BinaryMask& mask, int radius, bool outside_set) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> horizontal(mask.size());
  const auto bits = mask.bits();
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    erode_line(bits.data() + row, horizontal.data() + row, w, 1, radius, outside_set);
  }
  std::vector<std::uint8_t> out(mask.size());
  for (int x = 0; x < w; ++x) {
    erode_line(horizontal.data() + x, out.data() + x, h, static_cast<std::size_t>(w), radius,
               outside_set);
  }
  return {w, h, std::move(out)};
}

BinaryMask erode_cross_once(const BinaryMask& mask, bool outside_set) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> out(mask.size());
  auto get = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return outside_set;
    return mask.at(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool keep = get(x, y) && get(x - 1, y) && get(x + 1, y) && get(x, y - 1) &&
                        get(x, y + 1);
      out[static_cast<std::size_t>(y) * w + x] = keep ? 1 : 0;
    }
  }
  return {w, h, std::move(out)};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, StructuringElement se, int iterations) {
  require_iterations(iterations);
  if (iterations == 0) return mask;
  const bool outside_set = se.out_of_bounds == OutOfBounds::AsForeground;
  if (se.shape == ElementShape::Square3x3) {
    // k passes of a 3x3 square equal one pass of a (2k+1) square.
    return erode_square(mask, iterations, outside_set);
  }
  BinaryMask current = mask;
  for (int i = 0; i < iterations; ++i) current = erode_cross_once(current, outside_set);
  return current;
}

BinaryMask dilate(const BinaryMask& mask, StructuringElement se, int iterations) {
  require_iterations(iterations);
  if (iterations == 0) return mask;
  const StructuringElement dual{se.shape, se.out_of_bounds == OutOfBounds::AsBackground
                                              ? OutOfBounds::AsForeground
                                              : OutOfBounds::AsBackground};
  return erode(mask.complement(), dual, iterations).complement();
}

BinaryMask boundary_band(const BinaryMask& mask, int radius) {
  if (radius < 1) {
    throw Error(ErrorCode::InvalidArgument, "band radius must be >= 1");
  }
  return subtract(mask, erode(mask, {ElementShape::Square3x3, OutOfBounds::AsForeground}, radius));
}

DistanceField::DistanceField(int width, int height, std::vector<std::int64_t> squared,
                             std::vector<std::size_t> nearest)
    : width_(width), height_(height), squared_(std::move(squared)), nearest_(std::move(nearest)) {}

double DistanceField::distance(std::size_t i) const {
  return std::sqrt(static_cast<double>(squared_[i]));
}

DistanceField distance_transform(const BinaryMask& mask) {
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "distance transform needs a set pixel");
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t n = mask.size();
  constexpr int kNone = -1;

  // Column pass: nearest set row within each column (ties go upward).
  std::vector<int> nearest_row(n, kNone);
  std::vector<int> above(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    int last = kNone;
    for (int y = 0; y < h; ++y) {
      if (mask.at(x, y)) last = y;
      above[static_cast<std::size_t>(y)] = last;
    }
    int next = kNone;
    for (int y = h - 1; y >= 0; --y) {
      if (mask.at(x, y)) next = y;
      const int up = above[static_cast<std::size_t>(y)];
      int best = up;
      if (next != kNone && (up == kNone || next - y < y - up)) best = next;
      nearest_row[static_cast<std::size_t>(y) * w + x] = best;
    }
  }

  // Row pass: lower envelope of parabolas (q - c)^2 + g_c^2 over columns c,
  // evaluated at integer q only. starts[k] is the first integer at which
  // envelope entry k is strictly better than its predecessor, so exact ties
  // resolve to the smaller column.
  std::vector<std::int64_t> squared(n);
  std::vector<std::size_t> nearest(n);
  std::vector<int> columns(static_cast<std::size_t>(w));
  std::vector<std::int64_t> starts(static_cast<std::size_t>(w));
  std::vector<std::int64_t> g2(static_cast<std::size_t>(w));
  constexpr std::int64_t kMinusInf = std::numeric_limits<std::int64_t>::min();

  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int r = nearest_row[row + x];
      g2[static_cast<std::size_t>(x)] =
          r == kNone ? -1 : static_cast<std::int64_t>(r - y) * (r - y);
    }
    auto h_of = [&](int c) { return g2[static_cast<std::size_t>(c)] + std::int64_t{c} * c; };
    int k = -1;
    for (int u = 0; u < w; ++u) {
      if (g2[static_cast<std::size_t>(u)] < 0) continue;
      std::int64_t start = kMinusInf;
      while (k >= 0) {
        const int v = columns[static_cast<std::size_t>(k)];
        start = floor_div(h_of(u) - h_of(v), 2 * std::int64_t{u - v}) + 1;
        if (start <= starts[static_cast<std::size_t>(k)]) {
          --k;
          start = kMinusInf;
        } else {
          break;
        }
      }
      ++k;
      columns[static_cast<std::size_t>(k)] = u;
      starts[static_cast<std::size_t>(k)] = start;
    }
    int j = 0;
    for (int q = 0; q < w; ++q) {
      while (j < k && starts[static_cast<std::size_t>(j) + 1] <= q) ++j;
      const int c = columns[static_cast<std::size_t>(j)];
      const std::int64_t dx = q - c;
      squared[row + q] = dx * dx + g2[static_cast<std::size_t>(c)];
      nearest[row + q] = static_cast<std::size_t>(nearest_row[row + c]) * w + c;
    }
  }
  return {w, h, std::move(squared), std::move(nearest)};
}

}  // namespace toonbench

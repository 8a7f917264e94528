#include <gtest/gtest.h>

#include "toonbench/error.hpp"
#include "toonbench/mask.hpp"

using namespace toonbench;

namespace {

template <typename Fn>
ErrorCode code_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(AlphaMask, RejectsZeroAndInconsistentSizes) {
  EXPECT_EQ(code_of([] { AlphaMask(0, 4, std::uint8_t{0}); }), ErrorCode::ZeroDimension);
  EXPECT_EQ(code_of([] { AlphaMask(4, 0, std::uint8_t{0}); }), ErrorCode::ZeroDimension);
  EXPECT_EQ(code_of([] { AlphaMask(2, 2, std::vector<std::uint8_t>(3)); }), ErrorCode::InvalidArgument);
}

TEST(AlphaMask, RowMajorAccess) {
  const AlphaMask m(3, 2, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.at(2, 0), 3);
  EXPECT_EQ(m.at(0, 1), 4);
  EXPECT_EQ(m[5], 6);
  EXPECT_EQ(m.size(), 6u);
}

TEST(Binarize, ThresholdIsStrict) {
  const AlphaMask m(3, 1, {128, 129, 255});
  const BinaryMask b = binarize(m);
  EXPECT_FALSE(b.at(0, 0));
  EXPECT_TRUE(b.at(1, 0));
  EXPECT_TRUE(b.at(2, 0));
}

TEST(Binarize, AllZeroGivesEmpty) {
  for (int t : {0, 64, 128, 254}) {
    EXPECT_TRUE(binarize(AlphaMask(5, 4, std::uint8_t{0}), static_cast<std::uint8_t>(t)).empty());
  }
}

TEST(AbsDiff, Examples) {
  const MaskPair same(AlphaMask(2, 2, std::uint8_t{77}), AlphaMask(2, 2, std::uint8_t{77}));
  EXPECT_EQ(abs_diff(same), AlphaMask(2, 2, std::uint8_t{0}));
  const MaskPair opposite(AlphaMask(1, 1, std::uint8_t{0}), AlphaMask(1, 1, std::uint8_t{255}));
  EXPECT_EQ(abs_diff(opposite)[0], 255);
  const MaskPair close(AlphaMask(1, 1, std::uint8_t{200}), AlphaMask(1, 1, std::uint8_t{190}));
  EXPECT_EQ(abs_diff(close)[0], 10);
}

TEST(MaskPair, DimensionMismatch) {
  EXPECT_EQ(code_of([] { MaskPair(AlphaMask(2, 3, std::uint8_t{0}), AlphaMask(3, 2, std::uint8_t{0})); }),
            ErrorCode::DimensionMismatch);
}

TEST(BinaryMask, SetOperations) {
  const BinaryMask a(4, 1, std::vector<std::uint8_t>{1, 1, 0, 0});
  const BinaryMask b(4, 1, std::vector<std::uint8_t>{0, 1, 1, 0});
  EXPECT_EQ((a & b), BinaryMask(4, 1, std::vector<std::uint8_t>{0, 1, 0, 0}));
  EXPECT_EQ((a | b), BinaryMask(4, 1, std::vector<std::uint8_t>{1, 1, 1, 0}));
  EXPECT_EQ(subtract(a, b), BinaryMask(4, 1, std::vector<std::uint8_t>{1, 0, 0, 0}));
  EXPECT_EQ(a.complement(), BinaryMask(4, 1, std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_TRUE((a & b).is_subset_of(a));
  EXPECT_FALSE(a.is_subset_of(b));
  EXPECT_EQ(a.count(), 2u);
}

TEST(ErrorCode, NamesAreStable) {
  EXPECT_EQ(to_string(ErrorCode::EmptyForeground), "EmptyForeground");
  EXPECT_EQ(to_string(ErrorCode::UnknownHandle), "UnknownHandle");
}

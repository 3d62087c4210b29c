#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "xgem/error.hpp"
#include "xgem/nd/tensor.hpp"

using xgem::nd::Tensor;

TEST(Tensor, DefaultIsScalarZero) {
  Tensor t;
  EXPECT_EQ(t.rank(), 0u);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.item(), 0.0);
}

TEST(Tensor, MatrixLayoutIsRowMajor) {
  const auto m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.at(1, 0), 4.0);
  EXPECT_EQ(m[2], 3.0);
}

TEST(Tensor, RaggedMatrixRejected) { EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), xgem::ShapeError); }

TEST(Tensor, SizeMismatchRejected) { EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), xgem::ShapeError); }

TEST(Tensor, NonFiniteRejected) {
  EXPECT_THROW(Tensor::vector({1.0, std::numeric_limits<double>::quiet_NaN()}), xgem::NumericError);
  EXPECT_THROW(Tensor::scalar(std::numeric_limits<double>::infinity()), xgem::NumericError);
}

TEST(Tensor, RankOneReadsAsRow) {
  const auto v = Tensor::vector({1, 2, 3});
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 3u);
}

TEST(Tensor, RowSlicingAndGather) {
  const auto m = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(m.row_at(2), Tensor::vector({5, 6}));
  EXPECT_EQ(m.rows_slice(1, 2), Tensor::matrix({{3, 4}, {5, 6}}));
  const std::size_t idx[] = {2, 0};
  EXPECT_EQ(m.gather_rows(idx), Tensor::matrix({{5, 6}, {1, 2}}));
  EXPECT_THROW(m.rows_slice(2, 2), xgem::ShapeError);
}

TEST(Tensor, StackRowsRoundTrip) {
  const Tensor rows[] = {Tensor::vector({1, 2}), Tensor::row({3, 4})};
  EXPECT_EQ(xgem::nd::stack_rows(rows), Tensor::matrix({{1, 2}, {3, 4}}));
}

TEST(Tensor, L2DistanceAndArgmax) {
  EXPECT_DOUBLE_EQ(xgem::nd::l2_distance(Tensor::vector({0, 0}), Tensor::vector({3, 4})), 5.0);
  const double v[] = {0.1, 0.7, 0.7, 0.2};
  EXPECT_EQ(xgem::nd::argmax(v), 1u);
}

TEST(Tensor, ReshapeKeepsData) {
  const auto m = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(m.reshaped({4}), Tensor::vector({1, 2, 3, 4}));
  EXPECT_THROW(m.reshaped({3}), xgem::ShapeError);
}

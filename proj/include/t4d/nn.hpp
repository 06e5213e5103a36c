#pragma once

#include <vector>

#include "t4d/error.hpp"
#include "t4d/rng.hpp"

namespace t4d::flow {

// Row-major dense matrix; small enough that hand-rolled loops beat any
// dependency here, and the gradient code stays transparent.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int rows, int cols) : rows(rows), cols(cols), a(static_cast<size_t>(rows) * cols, 0.0) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  static Mat random(int rows, int cols, double scale, Rng& rng);
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// y = x * w + b (x: N x in, w: in x out, b: out).
Mat matmul(const Mat& x, const Mat& w);
Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b);
// Accumulates dw, db and returns dx.
Mat linear_backward(const Mat& x, const Mat& w, const Mat& dy, Mat& dw, std::vector<double>& db);

// Per-row (token-wise) normalization over the channel axis, no affine terms.
Mat layer_norm(const Mat& x, double eps);
Mat layer_norm_backward(const Mat& x, const Mat& dy, double eps);

Mat transpose(const Mat& x);
Mat softmax_rows(const Mat& x);

}  // namespace t4d::flow

#include "t4d/nn.hpp"

#include <cmath>

namespace t4d::flow {

Mat Mat::random(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.uniform(-scale, scale);
  return m;
}

Mat matmul(const Mat& x, const Mat& w) {
  if (x.cols != w.rows) fail(ErrorCode::ShapeMismatch, "matmul inner dimensions differ");
  Mat y(x.rows, w.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < w.cols; ++j) y.at(i, j) += xv * w.at(k, j);
    }
  return y;
}

Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b) {
  if (static_cast<int>(b.size()) != w.cols)
    fail(ErrorCode::ShapeMismatch, "bias length does not match the output width");
  Mat y = matmul(x, w);
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) y.at(i, j) += b[j];
  return y;
}

Mat linear_backward(const Mat& x, const Mat& w, const Mat& dy, Mat& dw, std::vector<double>& db) {
  if (dw.rows != w.rows || dw.cols != w.cols) dw = Mat(w.rows, w.cols);
  if (db.size() != static_cast<size_t>(w.cols)) db.assign(w.cols, 0.0);
  // dw += x^T dy; db += colsum(dy); dx = dy w^T
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      for (int j = 0; j < dy.cols; ++j) dw.at(k, j) += xv * dy.at(i, j);
    }
  for (int i = 0; i < dy.rows; ++i)
    for (int j = 0; j < dy.cols; ++j) db[j] += dy.at(i, j);
  Mat dx(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < dy.cols; ++j) {
      double g = dy.at(i, j);
      if (g == 0.0) continue;
      for (int k = 0; k < x.cols; ++k) dx.at(i, k) += g * w.at(k, j);
    }
  return dx;
}

Mat layer_norm(const Mat& x, double eps) {
  Mat y(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double mean = 0.0;
    for (int j = 0; j < x.cols; ++j) mean += x.at(i, j);
    mean /= x.cols;
    double var = 0.0;
    for (int j = 0; j < x.cols; ++j) {
      double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= x.cols;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < x.cols; ++j) y.at(i, j) = (x.at(i, j) - mean) * inv;
  }
  return y;
}

Mat layer_norm_backward(const Mat& x, const Mat& dy, double eps) {
  Mat dx(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double mean = 0.0;
    for (int j = 0; j < x.cols; ++j) mean += x.at(i, j);
    mean /= x.cols;
    double var = 0.0;
    for (int j = 0; j < x.cols; ++j) {
      double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= x.cols;
    double inv = 1.0 / std::sqrt(var + eps);

    double dy_mean = 0.0, dyy_mean = 0.0;
    for (int j = 0; j < x.cols; ++j) {
      double yj = (x.at(i, j) - mean) * inv;
      dy_mean += dy.at(i, j);
      dyy_mean += dy.at(i, j) * yj;
    }
    dy_mean /= x.cols;
    dyy_mean /= x.cols;
    for (int j = 0; j < x.cols; ++j) {
      double yj = (x.at(i, j) - mean) * inv;
      dx.at(i, j) = inv * (dy.at(i, j) - dy_mean - yj * dyy_mean);
    }
  }
  return dx;
}

Mat transpose(const Mat& x) {
  Mat y(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) y.at(j, i) = x.at(i, j);
  return y;
}

Mat softmax_rows(const Mat& x) {
  Mat y(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double mx = x.at(i, 0);
    for (int j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < x.cols; ++j) {
      double e = std::exp(x.at(i, j) - mx);
      y.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < x.cols; ++j) y.at(i, j) /= sum;
  }
  return y;
}

}  // namespace t4d::flow

#include "t4d/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace t4d::flow {

std::vector<double> interpolate_state(const FlowPair& pair) {
  if (!(pair.t >= 0.0 && pair.t <= 1.0))
    fail(ErrorCode::InvalidArgument, "interpolation time must lie in [0, 1]");
  if (pair.x0.size() != pair.x1.size())
    fail(ErrorCode::ShapeMismatch, "x0 and x1 must have the same dimension");
  std::vector<double> xt(pair.x0.size());
  for (size_t i = 0; i < xt.size(); ++i)
    xt[i] = (1.0 - pair.t) * pair.x0[i] + pair.t * pair.x1[i];
  return xt;
}

FlowField FlowField::init(int dim, int hidden, Rng& rng) {
  if (dim < 1 || hidden < 1) fail(ErrorCode::InvalidArgument, "dim and hidden must be >= 1");
  FlowField f;
  f.dim = dim;
  f.hidden = hidden;
  double s1 = 1.0 / std::sqrt(static_cast<double>(dim + 1));
  double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  f.w1.resize(static_cast<size_t>(hidden) * (dim + 1));
  f.b1.assign(hidden, 0.0);
  f.w2.resize(static_cast<size_t>(dim) * hidden);
  f.b2.assign(dim, 0.0);
  for (double& v : f.w1) v = rng.uniform(-s1, s1);
  for (double& v : f.w2) v = rng.uniform(-s2, s2);
  return f;
}

void FlowField::eval(double t, std::span<const double> x, std::span<double> v_out) const {
  if (static_cast<int>(x.size()) != dim || static_cast<int>(v_out.size()) != dim)
    fail(ErrorCode::ShapeMismatch, "state dimension does not match the field");
  std::vector<double> h(hidden);
  const int in = dim + 1;
  for (int j = 0; j < hidden; ++j) {
    double acc = b1[j];
    const double* row = &w1[static_cast<size_t>(j) * in];
    for (int i = 0; i < dim; ++i) acc += row[i] * x[i];
    acc += row[dim] * t;
    h[j] = std::tanh(acc);
  }
  for (int o = 0; o < dim; ++o) {
    double acc = b2[o];
    const double* row = &w2[static_cast<size_t>(o) * hidden];
    for (int j = 0; j < hidden; ++j) acc += row[j] * h[j];
    v_out[o] = acc;
  }
}

std::vector<double> FlowField::eval(double t, std::span<const double> x) const {
  std::vector<double> v(dim);
  eval(t, x, v);
  return v;
}

size_t FlowField::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

std::vector<double> FlowField::flatten() const {
  std::vector<double> p;
  p.reserve(param_count());
  p.insert(p.end(), w1.begin(), w1.end());
  p.insert(p.end(), b1.begin(), b1.end());
  p.insert(p.end(), w2.begin(), w2.end());
  p.insert(p.end(), b2.begin(), b2.end());
  return p;
}

void FlowField::unflatten(std::span<const double> params) {
  if (params.size() != param_count())
    fail(ErrorCode::ShapeMismatch, "parameter vector length mismatch");
  size_t pos = 0;
  std::copy_n(params.begin() + pos, w1.size(), w1.begin());
  pos += w1.size();
  std::copy_n(params.begin() + pos, b1.size(), b1.begin());
  pos += b1.size();
  std::copy_n(params.begin() + pos, w2.size(), w2.begin());
  pos += w2.size();
  std::copy_n(params.begin() + pos, b2.size(), b2.begin());
}

double fm_loss(const FlowField& field, std::span<const FlowPair> batch) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "fm_loss needs a non-empty batch");
  double total = 0.0;
  std::vector<double> v(field.dim);
  for (const FlowPair& pair : batch) {
    std::vector<double> xt = interpolate_state(pair);
    field.eval(pair.t, xt, v);
    for (int i = 0; i < field.dim; ++i) {
      double r = v[i] - (pair.x1[i] - pair.x0[i]);
      total += r * r;
    }
  }
  return total / static_cast<double>(batch.size());
}

double fm_loss_grad(const FlowField& field, std::span<const FlowPair> batch, FlowField& grad) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "fm_loss needs a non-empty batch");
  grad = field;
  std::fill(grad.w1.begin(), grad.w1.end(), 0.0);
  std::fill(grad.b1.begin(), grad.b1.end(), 0.0);
  std::fill(grad.w2.begin(), grad.w2.end(), 0.0);
  std::fill(grad.b2.begin(), grad.b2.end(), 0.0);

  const int dim = field.dim;
  const int hidden = field.hidden;
  const int in = dim + 1;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  std::vector<double> pre(hidden), h(hidden), v(dim), dv(dim), dh(hidden);
  for (const FlowPair& pair : batch) {
    std::vector<double> xt = interpolate_state(pair);
    for (int j = 0; j < hidden; ++j) {
      double acc = field.b1[j];
      const double* row = &field.w1[static_cast<size_t>(j) * in];
      for (int i = 0; i < dim; ++i) acc += row[i] * xt[i];
      acc += row[dim] * pair.t;
      pre[j] = acc;
      h[j] = std::tanh(acc);
    }
    for (int o = 0; o < dim; ++o) {
      double acc = field.b2[o];
      const double* row = &field.w2[static_cast<size_t>(o) * hidden];
      for (int j = 0; j < hidden; ++j) acc += row[j] * h[j];
      v[o] = acc;
      double r = acc - (pair.x1[o] - pair.x0[o]);
      total += r * r;
      dv[o] = 2.0 * r * inv_b;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int o = 0; o < dim; ++o) {
      double g = dv[o];
      double* wrow = &grad.w2[static_cast<size_t>(o) * hidden];
      const double* frow = &field.w2[static_cast<size_t>(o) * hidden];
      for (int j = 0; j < hidden; ++j) {
        wrow[j] += g * h[j];
        dh[j] += g * frow[j];
      }
      grad.b2[o] += g;
    }
    for (int j = 0; j < hidden; ++j) {
      double da = dh[j] * (1.0 - h[j] * h[j]);
      double* wrow = &grad.w1[static_cast<size_t>(j) * in];
      for (int i = 0; i < dim; ++i) wrow[i] += da * xt[i];
      wrow[dim] += da * pair.t;
      grad.b1[j] += da;
    }
  }
  return total * inv_b;
}

std::vector<double> GaussianMixture::sample(Rng& rng) const {
  if (means.empty()) fail(ErrorCode::InvalidArgument, "mixture needs at least one component");
  const std::vector<double>& mean = means[rng.uniform_int(static_cast<int>(means.size()))];
  std::vector<double> x(mean.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = mean[i] + stddev * rng.normal();
  return x;
}

TrainResult train_toy(FlowField field, const TrainSpec& spec) {
  if (spec.steps < 0) fail(ErrorCode::InvalidArgument, "steps must be >= 0");
  if (spec.dataset_size < 1) fail(ErrorCode::InvalidArgument, "dataset size must be >= 1");
  if (spec.data.dim() != field.dim)
    fail(ErrorCode::ShapeMismatch, "data dimension does not match the field");
  Rng rng(spec.seed);
  TrainResult result;
  result.loss_trace.reserve(spec.steps);
  FlowField grad = field;

  std::vector<FlowPair> batch(spec.dataset_size);
  for (FlowPair& pair : batch) {
    pair.x1 = spec.data.sample(rng);
    pair.x0.resize(field.dim);
    for (double& v : pair.x0) v = rng.normal();
    pair.t = rng.uniform();
  }
  for (int step = 0; step < spec.steps; ++step) {
    double loss = fm_loss_grad(field, batch, grad);
    if (!std::isfinite(loss))
      fail(ErrorCode::NonFiniteLoss, "training diverged at step " + std::to_string(step));
    result.loss_trace.push_back(loss);
    double lr = spec.learning_rate;
    for (size_t i = 0; i < field.w1.size(); ++i) field.w1[i] -= lr * grad.w1[i];
    for (size_t i = 0; i < field.b1.size(); ++i) field.b1[i] -= lr * grad.b1[i];
    for (size_t i = 0; i < field.w2.size(); ++i) field.w2[i] -= lr * grad.w2[i];
    for (size_t i = 0; i < field.b2.size(); ++i) field.b2[i] -= lr * grad.b2[i];
  }
  result.field = std::move(field);
  return result;
}

std::vector<double> euler_sample(const FlowField& field, std::vector<double> x0, int n_steps) {
  if (n_steps < 1) fail(ErrorCode::InvalidArgument, "euler_sample needs n_steps >= 1");
  std::vector<double> v(field.dim);
  double dt = 1.0 / static_cast<double>(n_steps);
  for (int k = 0; k < n_steps; ++k) {
    field.eval(static_cast<double>(k) * dt, x0, v);
    for (int i = 0; i < field.dim; ++i) x0[i] += dt * v[i];
  }
  return x0;
}

TokenGrid concat_condition(const TokenGrid& z_image, const TokenGrid& z_noise,
                           const TokenGrid& z_depth) {
  if (z_image.tokens != z_noise.tokens || z_image.tokens != z_depth.tokens)
    fail(ErrorCode::ShapeMismatch, "condition grids must share the token count");
  TokenGrid out;
  out.tokens = z_image.tokens;
  out.channels = z_image.channels + z_noise.channels + z_depth.channels;
  out.values.resize(static_cast<size_t>(out.tokens) * out.channels);
  for (int n = 0; n < out.tokens; ++n) {
    double* dst = &out.values[static_cast<size_t>(n) * out.channels];
    const double* a = &z_image.values[static_cast<size_t>(n) * z_image.channels];
    const double* b = &z_noise.values[static_cast<size_t>(n) * z_noise.channels];
    const double* c = &z_depth.values[static_cast<size_t>(n) * z_depth.channels];
    std::copy_n(a, z_image.channels, dst);
    std::copy_n(b, z_noise.channels, dst + z_image.channels);
    std::copy_n(c, z_depth.channels, dst + z_image.channels + z_noise.channels);
  }
  return out;
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> point, std::span<const double> analytic, double step) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "grad_check needs step > 0");
  if (point.size() != analytic.size())
    fail(ErrorCode::ShapeMismatch, "gradient length does not match the point");
  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double saved = x[i];
    x[i] = saved + step;
    double fp = f(x);
    x[i] = saved - step;
    double fm = f(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      fail(ErrorCode::NonFiniteLoss, "objective is non-finite near the test point");
    double fd = (fp - fm) / (2.0 * step);
    double an = analytic[i];
    if (!std::isfinite(an)) fail(ErrorCode::NonFiniteLoss, "analytic gradient is non-finite");
    double denom = std::max(std::abs(fd), std::abs(an));
    if (denom < 1e-12) continue;  // both effectively zero
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

}  // namespace t4d::flow

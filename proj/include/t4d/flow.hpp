#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "t4d/error.hpp"
#include "t4d/rng.hpp"

namespace t4d::flow {

struct FlowPair {
  std::vector<double> x0;  // initial state (noise sample)
  std::vector<double> x1;  // target state (data sample)
  double t = 0.0;          // in [0, 1]
};

// x_t = (1 - t) * x0 + t * x1 (linear path). Throws on t outside [0, 1].
std::vector<double> interpolate_state(const FlowPair& pair);

// Velocity field v(t, x): a two-layer perceptron with tanh hidden units,
// input (x, t) of size dim+1, output size dim.
struct FlowField {
  int dim = 0, hidden = 0;
  std::vector<double> w1;  // hidden x (dim+1), row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // dim x hidden, row-major
  std::vector<double> b2;  // dim

  static FlowField init(int dim, int hidden, Rng& rng);

  void eval(double t, std::span<const double> x, std::span<double> v_out) const;
  std::vector<double> eval(double t, std::span<const double> x) const;

  size_t param_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
};

// Mean over the batch of |v(t, x_t) - (x1 - x0)|^2. Throws on an empty batch.
double fm_loss(const FlowField& field, std::span<const FlowPair> batch);

// Returns the loss and fills `grad` (same shape as `field`) with analytic
// parameter gradients of fm_loss, backpropagated by hand.
double fm_loss_grad(const FlowField& field, std::span<const FlowPair> batch, FlowField& grad);

struct GaussianMixture {
  std::vector<std::vector<double>> means;
  double stddev = 1.0;

  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  std::vector<double> sample(Rng& rng) const;
};

struct TrainSpec {
  GaussianMixture data;
  int dataset_size = 512;  // pairs drawn once up front; size 1 = one fixed pair
  int steps = 1000;
  double learning_rate = 0.02;
  uint64_t seed = 1;
};

struct TrainResult {
  FlowField field;
  std::vector<double> loss_trace;  // full-dataset loss at each step, before the update
};

// Draws a fixed training set of dataset_size pairs (x1 from the data
// distribution, x0 standard normal, t uniform), then runs plain full-batch
// gradient descent with a fixed step; deterministic given the seed. Throws
// NonFiniteLoss (message carries the step index) on divergence.
TrainResult train_toy(FlowField field, const TrainSpec& spec);

// x <- x + (1/n) * v(k/n, x) for k = 0..n-1.
std::vector<double> euler_sample(const FlowField& field, std::vector<double> x0, int n_steps);

// Channel-axis concatenation in the order image, noise, depth; all three
// grids must have the same token count. Grids are row-major N x C buffers.
struct TokenGrid {
  int tokens = 0, channels = 0;
  std::vector<double> values;
};
TokenGrid concat_condition(const TokenGrid& z_image, const TokenGrid& z_noise,
                           const TokenGrid& z_depth);

// Central-difference check of an analytic gradient; returns the worst
// relative error over all coordinates. Throws on step <= 0 or non-finite
// values.
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> point, std::span<const double> analytic, double step);

}  // namespace t4d::flow

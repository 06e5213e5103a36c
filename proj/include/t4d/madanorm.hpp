#pragma once

#include <span>

#include "t4d/nn.hpp"

namespace t4d::flow {

// Motion-aware adaptive normalization. Token-wise scale/bias parameters come
// from a linear map of the motion features S; per-channel gates gamma1/gamma2
// control how much of the modulation takes effect:
//   (a1, a2, b1, b2) = Linear(S)
//   F'  = Attn(g1*a1 (.) LN(F)  + g1*b1)
//   F'' = MLP (g2*a2 (.) LN(F') + g2*b2)
// No residual terms; an optional residual variant exists behind a flag but is
// excluded from the conformance tests.
struct MAdaNormParams {
  int channels = 0;       // d
  int feature_dim = 0;    // channels of S
  int mlp_hidden = 0;

  Mat mod_w;                   // feature_dim x 4d
  std::vector<double> mod_b;   // 4d
  std::vector<double> gamma1;  // d
  std::vector<double> gamma2;  // d
  Mat wq, wk, wv, wo;          // d x d each
  Mat mlp_w_in;                // d x mlp_hidden
  std::vector<double> mlp_b_in;
  Mat mlp_w_out;               // mlp_hidden x d
  std::vector<double> mlp_b_out;
  double ln_eps = 1e-6;
  bool residual = false;

  static MAdaNormParams init(int channels, int feature_dim, int mlp_hidden, Rng& rng);

  size_t param_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
};

// Single-head scaled dot-product self-attention over the N tokens.
Mat attention(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo);

// The modulated input to the attention stage, g1*a1 (.) LN(F) + g1*b1;
// exposed so token locality can be tested before attention mixes tokens.
Mat madanorm_premod(const Mat& tokens, const Mat& features, const MAdaNormParams& p);

Mat madanorm_forward(const Mat& tokens, const Mat& features, const MAdaNormParams& p);

struct MAdaNormGrads {
  Mat d_tokens;    // dL/dF
  Mat d_features;  // dL/dS
  MAdaNormParams d_params;
};

// Analytic gradients for a scalar loss with upstream gradient d_out = dL/dF''.
MAdaNormGrads madanorm_backward(const Mat& tokens, const Mat& features, const MAdaNormParams& p,
                                const Mat& d_out);

// Nearest-neighbor resampling of a feature grid to a different token count.
Mat resample_tokens_nearest(const Mat& features, int token_count);

}  // namespace t4d::flow

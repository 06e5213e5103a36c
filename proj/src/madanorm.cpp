#include "t4d/madanorm.hpp"

#include <algorithm>
#include <cmath>

namespace t4d::flow {

namespace {

struct Split {
  Mat a1, a2, b1, b2;  // each N x d
};

Split split_params(const Mat& p, int d) {
  Split s{Mat(p.rows, d), Mat(p.rows, d), Mat(p.rows, d), Mat(p.rows, d)};
  for (int n = 0; n < p.rows; ++n)
    for (int c = 0; c < d; ++c) {
      s.a1.at(n, c) = p.at(n, c);
      s.a2.at(n, c) = p.at(n, d + c);
      s.b1.at(n, c) = p.at(n, 2 * d + c);
      s.b2.at(n, c) = p.at(n, 3 * d + c);
    }
  return s;
}

// m[n,c] = g[c]*a[n,c]*y[n,c] + g[c]*b[n,c]
Mat modulate(const Mat& y, const Mat& a, const Mat& b, const std::vector<double>& g) {
  Mat m(y.rows, y.cols);
  for (int n = 0; n < y.rows; ++n)
    for (int c = 0; c < y.cols; ++c)
      m.at(n, c) = g[c] * (a.at(n, c) * y.at(n, c) + b.at(n, c));
  return m;
}

struct Cache {
  Mat p;  // N x 4d, Linear(S)
  Split sp;
  Mat y1, m1;              // LN(F), modulated
  Mat q, k, v, scores, attn, h, f1;
  Mat y2, m2;              // LN(F'), modulated
  Mat mlp_hidden;          // tanh activations
  Mat f2;
};

Cache forward_cached(const Mat& tokens, const Mat& features, const MAdaNormParams& p) {
  if (features.rows != tokens.rows)
    fail(ErrorCode::ShapeMismatch, "features must be aligned to the token count");
  if (tokens.cols != p.channels || features.cols != p.feature_dim)
    fail(ErrorCode::ShapeMismatch, "channel counts do not match the parameters");

  Cache c;
  c.p = linear(features, p.mod_w, p.mod_b);
  c.sp = split_params(c.p, p.channels);

  c.y1 = layer_norm(tokens, p.ln_eps);
  c.m1 = modulate(c.y1, c.sp.a1, c.sp.b1, p.gamma1);

  c.q = matmul(c.m1, p.wq);
  c.k = matmul(c.m1, p.wk);
  c.v = matmul(c.m1, p.wv);
  double scale = 1.0 / std::sqrt(static_cast<double>(p.channels));
  c.scores = matmul(c.q, transpose(c.k));
  for (double& s : c.scores.a) s *= scale;
  c.attn = softmax_rows(c.scores);
  c.h = matmul(c.attn, c.v);
  c.f1 = matmul(c.h, p.wo);
  if (p.residual)
    for (size_t i = 0; i < c.f1.a.size(); ++i) c.f1.a[i] += tokens.a[i];

  c.y2 = layer_norm(c.f1, p.ln_eps);
  c.m2 = modulate(c.y2, c.sp.a2, c.sp.b2, p.gamma2);

  c.mlp_hidden = linear(c.m2, p.mlp_w_in, p.mlp_b_in);
  for (double& v : c.mlp_hidden.a) v = std::tanh(v);
  c.f2 = linear(c.mlp_hidden, p.mlp_w_out, p.mlp_b_out);
  if (p.residual)
    for (size_t i = 0; i < c.f2.a.size(); ++i) c.f2.a[i] += c.f1.a[i];
  return c;
}

}  // namespace

MAdaNormParams MAdaNormParams::init(int channels, int feature_dim, int mlp_hidden, Rng& rng) {
  if (channels < 1 || feature_dim < 1 || mlp_hidden < 1)
    fail(ErrorCode::InvalidArgument, "MAdaNorm dimensions must be >= 1");
  MAdaNormParams p;
  p.channels = channels;
  p.feature_dim = feature_dim;
  p.mlp_hidden = mlp_hidden;
  double sf = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  double sd = 1.0 / std::sqrt(static_cast<double>(channels));
  double sm = 1.0 / std::sqrt(static_cast<double>(mlp_hidden));
  p.mod_w = Mat::random(feature_dim, 4 * channels, sf, rng);
  p.mod_b.assign(4 * channels, 0.0);
  p.gamma1.assign(channels, 1.0);
  p.gamma2.assign(channels, 1.0);
  p.wq = Mat::random(channels, channels, sd, rng);
  p.wk = Mat::random(channels, channels, sd, rng);
  p.wv = Mat::random(channels, channels, sd, rng);
  p.wo = Mat::random(channels, channels, sd, rng);
  p.mlp_w_in = Mat::random(channels, mlp_hidden, sd, rng);
  p.mlp_b_in.assign(mlp_hidden, 0.0);
  p.mlp_w_out = Mat::random(mlp_hidden, channels, sm, rng);
  p.mlp_b_out.assign(channels, 0.0);
  return p;
}

size_t MAdaNormParams::param_count() const {
  return mod_w.a.size() + mod_b.size() + gamma1.size() + gamma2.size() + wq.a.size() +
         wk.a.size() + wv.a.size() + wo.a.size() + mlp_w_in.a.size() + mlp_b_in.size() +
         mlp_w_out.a.size() + mlp_b_out.size();
}

std::vector<double> MAdaNormParams::flatten() const {
  std::vector<double> out;
  out.reserve(param_count());
  auto push = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
  push(mod_w.a);
  push(mod_b);
  push(gamma1);
  push(gamma2);
  push(wq.a);
  push(wk.a);
  push(wv.a);
  push(wo.a);
  push(mlp_w_in.a);
  push(mlp_b_in);
  push(mlp_w_out.a);
  push(mlp_b_out);
  return out;
}

void MAdaNormParams::unflatten(std::span<const double> params) {
  if (params.size() != param_count())
    fail(ErrorCode::ShapeMismatch, "parameter vector length mismatch");
  size_t pos = 0;
  auto pull = [&params, &pos](std::vector<double>& v) {
    std::copy_n(params.begin() + pos, v.size(), v.begin());
    pos += v.size();
  };
  pull(mod_w.a);
  pull(mod_b);
  pull(gamma1);
  pull(gamma2);
  pull(wq.a);
  pull(wk.a);
  pull(wv.a);
  pull(wo.a);
  pull(mlp_w_in.a);
  pull(mlp_b_in);
  pull(mlp_w_out.a);
  pull(mlp_b_out);
}

Mat attention(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo) {
  Mat q = matmul(x, wq);
  Mat k = matmul(x, wk);
  Mat v = matmul(x, wv);
  double scale = 1.0 / std::sqrt(static_cast<double>(x.cols));
  Mat scores = matmul(q, transpose(k));
  for (double& s : scores.a) s *= scale;
  Mat h = matmul(softmax_rows(scores), v);
  return matmul(h, wo);
}

Mat madanorm_premod(const Mat& tokens, const Mat& features, const MAdaNormParams& p) {
  Cache c = forward_cached(tokens, features, p);
  return c.m1;
}

Mat madanorm_forward(const Mat& tokens, const Mat& features, const MAdaNormParams& p) {
  return forward_cached(tokens, features, p).f2;
}

MAdaNormGrads madanorm_backward(const Mat& tokens, const Mat& features, const MAdaNormParams& p,
                                const Mat& d_out) {
  Cache c = forward_cached(tokens, features, p);
  if (!d_out.same_shape(c.f2))
    fail(ErrorCode::ShapeMismatch, "upstream gradient shape mismatch");

  MAdaNormGrads g;
  g.d_params = p;
  auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  zero(g.d_params.mod_w.a);
  zero(g.d_params.mod_b);
  zero(g.d_params.gamma1);
  zero(g.d_params.gamma2);
  zero(g.d_params.wq.a);
  zero(g.d_params.wk.a);
  zero(g.d_params.wv.a);
  zero(g.d_params.wo.a);
  zero(g.d_params.mlp_w_in.a);
  zero(g.d_params.mlp_b_in);
  zero(g.d_params.mlp_w_out.a);
  zero(g.d_params.mlp_b_out);

  const int d = p.channels;
  const int n_tokens = tokens.rows;

  // MLP backward
  Mat d_hidden = linear_backward(c.mlp_hidden, p.mlp_w_out, d_out, g.d_params.mlp_w_out,
                                 g.d_params.mlp_b_out);
  for (size_t i = 0; i < d_hidden.a.size(); ++i)
    d_hidden.a[i] *= 1.0 - c.mlp_hidden.a[i] * c.mlp_hidden.a[i];
  Mat d_m2 = linear_backward(c.m2, p.mlp_w_in, d_hidden, g.d_params.mlp_w_in,
                             g.d_params.mlp_b_in);

  // Second modulation backward
  Mat d_y2(n_tokens, d);
  Mat d_a2(n_tokens, d), d_b2(n_tokens, d);
  for (int n = 0; n < n_tokens; ++n)
    for (int cc = 0; cc < d; ++cc) {
      double gm = p.gamma2[cc];
      double dm = d_m2.at(n, cc);
      d_y2.at(n, cc) = gm * c.sp.a2.at(n, cc) * dm;
      d_a2.at(n, cc) = gm * c.y2.at(n, cc) * dm;
      d_b2.at(n, cc) = gm * dm;
      g.d_params.gamma2[cc] +=
          (c.sp.a2.at(n, cc) * c.y2.at(n, cc) + c.sp.b2.at(n, cc)) * dm;
    }

  Mat d_f1 = layer_norm_backward(c.f1, d_y2, p.ln_eps);
  if (p.residual)
    for (size_t i = 0; i < d_f1.a.size(); ++i) d_f1.a[i] += d_out.a[i];

  // Attention backward
  std::vector<double> dummy_b(d, 0.0);
  Mat d_h = linear_backward(c.h, p.wo, d_f1, g.d_params.wo, dummy_b);
  Mat d_attn = matmul(d_h, transpose(c.v));
  Mat d_v = matmul(transpose(c.attn), d_h);
  Mat d_scores(n_tokens, n_tokens);
  for (int i = 0; i < n_tokens; ++i) {
    double dot = 0.0;
    for (int j = 0; j < n_tokens; ++j) dot += d_attn.at(i, j) * c.attn.at(i, j);
    for (int j = 0; j < n_tokens; ++j)
      d_scores.at(i, j) = c.attn.at(i, j) * (d_attn.at(i, j) - dot);
  }
  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& s : d_scores.a) s *= scale;
  Mat d_q = matmul(d_scores, c.k);
  Mat d_k = matmul(transpose(d_scores), c.q);

  Mat d_m1(n_tokens, d);
  {
    std::vector<double> db_q(d, 0.0), db_k(d, 0.0), db_v(d, 0.0);
    Mat from_q = linear_backward(c.m1, p.wq, d_q, g.d_params.wq, db_q);
    Mat from_k = linear_backward(c.m1, p.wk, d_k, g.d_params.wk, db_k);
    Mat from_v = linear_backward(c.m1, p.wv, d_v, g.d_params.wv, db_v);
    for (size_t i = 0; i < d_m1.a.size(); ++i)
      d_m1.a[i] = from_q.a[i] + from_k.a[i] + from_v.a[i];
  }

  // First modulation backward
  Mat d_y1(n_tokens, d);
  Mat d_a1(n_tokens, d), d_b1(n_tokens, d);
  for (int n = 0; n < n_tokens; ++n)
    for (int cc = 0; cc < d; ++cc) {
      double gm = p.gamma1[cc];
      double dm = d_m1.at(n, cc);
      d_y1.at(n, cc) = gm * c.sp.a1.at(n, cc) * dm;
      d_a1.at(n, cc) = gm * c.y1.at(n, cc) * dm;
      d_b1.at(n, cc) = gm * dm;
      g.d_params.gamma1[cc] +=
          (c.sp.a1.at(n, cc) * c.y1.at(n, cc) + c.sp.b1.at(n, cc)) * dm;
    }

  g.d_tokens = layer_norm_backward(tokens, d_y1, p.ln_eps);
  if (p.residual)
    for (size_t i = 0; i < g.d_tokens.a.size(); ++i) g.d_tokens.a[i] += d_f1.a[i];

  // Reassemble the gradient of Linear(S) and push through it
  Mat d_p(n_tokens, 4 * d);
  for (int n = 0; n < n_tokens; ++n)
    for (int cc = 0; cc < d; ++cc) {
      d_p.at(n, cc) = d_a1.at(n, cc);
      d_p.at(n, d + cc) = d_a2.at(n, cc);
      d_p.at(n, 2 * d + cc) = d_b1.at(n, cc);
      d_p.at(n, 3 * d + cc) = d_b2.at(n, cc);
    }
  g.d_features = linear_backward(features, p.mod_w, d_p, g.d_params.mod_w, g.d_params.mod_b);
  return g;
}

Mat resample_tokens_nearest(const Mat& features, int token_count) {
  if (token_count < 1) fail(ErrorCode::InvalidArgument, "token count must be >= 1");
  if (features.rows < 1) fail(ErrorCode::InvalidArgument, "cannot resample an empty grid");
  Mat out(token_count, features.cols);
  for (int i = 0; i < token_count; ++i) {
    int src = static_cast<int>((static_cast<int64_t>(i) * features.rows + features.rows / 2) /
                               token_count);
    src = std::min(src, features.rows - 1);
    for (int c = 0; c < features.cols; ++c) out.at(i, c) = features.at(src, c);
  }
  return out;
}

}  // namespace t4d::flow

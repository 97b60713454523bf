#include "crownkit/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crownkit/error.hpp"
#include "crownkit/losses.hpp"
#include "sampler.hpp"

namespace crownkit::heads {

namespace {

using detail::Sampler;

Mat row_of(int n, double v) { return Mat::Constant(1, n, v); }

Mat fan_in_uniform(Sampler& s, int rows, int cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s.uniform(-bound, bound);
  return m;
}

LayerNormParams unit_ln(int d) { return {row_of(d, 1.0), row_of(d, 0.0)}; }

int feature_dim(const HeadToggles& t, int d) {
  if (t.cls_linear_only) return d;
  return t.use_cls_concat ? 2 * d : d;
}

HeadParams init_head(Sampler& s, const HeadToggles& toggles, int d, int outputs) {
  HeadParams p;
  p.adapter.ln = unit_ln(d);
  p.adapter.w1 = fan_in_uniform(s, d, 4 * d);
  p.adapter.b1 = row_of(4 * d, 0.0);
  p.adapter.w2 = fan_in_uniform(s, 4 * d, d);
  p.adapter.b2 = row_of(d, 0.0);
  p.attention.ln_in = unit_ln(d);
  p.attention.w_q = fan_in_uniform(s, d, d);
  p.attention.w_k = fan_in_uniform(s, d, d);
  p.attention.w_v = fan_in_uniform(s, d, d);
  p.attention.w_o = fan_in_uniform(s, d, d);
  p.query = Mat(1, d);
  for (Eigen::Index i = 0; i < d; ++i) p.query(0, i) = 0.02 * s.normal();
  p.ln_out = unit_ln(d);
  const int f = feature_dim(toggles, d);
  p.w_out = fan_in_uniform(s, f, outputs);
  p.b_out = row_of(outputs, 0.0);
  return p;
}

HeadParams zeros_like(const HeadParams& p) {
  HeadParams z = p;
  for_each_tensor(z, [](std::string_view, Mat& m) { m.setZero(); });
  return z;
}

// ---------------------------------------------------------------------------
// Layer norm

struct LnTape {
  Mat xhat;
  Eigen::VectorXd rstd;
};

Mat ln_forward(const Mat& x, const LayerNormParams& p, double eps, LnTape* tape) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (p.gamma.cols() != d || p.beta.cols() != d)
    throw Error(ErrorCode::ShapeMismatch, "layer norm width mismatch");
  Mat xhat(n, d);
  Eigen::VectorXd rstd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    rstd(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mu) * rstd(i);
  }
  Mat y(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    y.row(i) = xhat.row(i).cwiseProduct(p.gamma) + p.beta;
  if (tape) {
    tape->xhat = std::move(xhat);
    tape->rstd = std::move(rstd);
  }
  return y;
}

Mat ln_backward(const Mat& dy, const LnTape& t, const LayerNormParams& p, LayerNormParams& g) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  Mat dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.gamma += dy.row(i).cwiseProduct(t.xhat.row(i));
    g.beta += dy.row(i);
    const Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(p.gamma);
    const double m1 = dxhat.mean();
    const double m2 = dxhat.cwiseProduct(t.xhat.row(i)).mean();
    dx.row(i) = t.rstd(i) * (dxhat.array() - m1 - t.xhat.row(i).array() * m2);
  }
  return dx;
}

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// ---------------------------------------------------------------------------
// Adapter

struct AdapterTape {
  LnTape ln;
  Mat a, h, g;
};

void check_adapter(const AdapterParams& p, int d) {
  if (p.w1.rows() != d || p.w1.cols() != 4 * d || p.b1.cols() != 4 * d || p.w2.rows() != 4 * d ||
      p.w2.cols() != d || p.b2.cols() != d)
    throw Error(ErrorCode::ShapeMismatch, "adapter weights do not match token width");
}

Mat adapter_forward(const Mat& x, const AdapterParams& p, double eps, AdapterTape& t) {
  check_adapter(p, static_cast<int>(x.cols()));
  t.a = ln_forward(x, p.ln, eps, &t.ln);
  t.h = t.a * p.w1;
  t.h.rowwise() += p.b1.row(0);
  t.g = t.h.unaryExpr([](double v) { return gelu(v); });
  Mat y = x + t.g * p.w2;
  y.rowwise() += p.b2.row(0);
  return y;
}

Mat adapter_backward(const Mat& dy, const AdapterParams& p, const AdapterTape& t,
                     AdapterParams& g) {
  g.w2 += t.g.transpose() * dy;
  g.b2 += dy.colwise().sum();
  Mat dh = (dy * p.w2.transpose()).cwiseProduct(t.h.unaryExpr([](double v) { return gelu_grad(v); }));
  g.w1 += t.a.transpose() * dh;
  g.b1 += dh.colwise().sum();
  const Mat da = dh * p.w1.transpose();
  return dy + ln_backward(da, t.ln, p.ln, g.ln);
}

// ---------------------------------------------------------------------------
// Cross-attention

struct AttnTape {
  Mat q0, q, kin, vin, k, v, attn, o;
};

Mat attend(const Mat& q0, const Mat& kin, const Mat& vin, const AttentionParams& p, int n_heads,
           AttnTape& t) {
  const int d = static_cast<int>(vin.cols());
  if (n_heads <= 0 || d % n_heads != 0)
    throw Error(ErrorCode::InvalidHeads, "token width not divisible by the head count");
  if (vin.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "attention needs at least one token");
  if (q0.rows() != 1 || q0.cols() != d || kin.cols() != d || kin.rows() != vin.rows())
    throw Error(ErrorCode::ShapeMismatch, "query/key/value widths differ");
  for (const Mat* w : {&p.w_q, &p.w_k, &p.w_v, &p.w_o})
    if (w->rows() != d || w->cols() != d)
      throw Error(ErrorCode::ShapeMismatch, "attention projections must be d x d");

  const int dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index n = vin.rows();
  t.q0 = q0;
  t.kin = kin;
  t.vin = vin;
  t.q = q0 * p.w_q;
  t.k = kin * p.w_k;
  t.v = vin * p.w_v;
  t.attn.resize(n_heads, n);
  t.o.resize(1, d);
  for (int h = 0; h < n_heads; ++h) {
    const auto qh = t.q.middleCols(h * dh, dh);
    const auto kh = t.k.middleCols(h * dh, dh);
    Eigen::VectorXd s = (kh * qh.transpose()) * scale;
    s.array() -= s.maxCoeff();
    s = s.array().exp();
    s /= s.sum();
    t.attn.row(h) = s.transpose();
    t.o.middleCols(h * dh, dh) = s.transpose() * t.v.middleCols(h * dh, dh);
  }
  return t.o * p.w_o;
}

struct AttnGrads {
  Mat d_q0, d_kin, d_vin;
};

AttnGrads attend_backward(const Mat& dout, const AttentionParams& p, int n_heads,
                          const AttnTape& t, AttentionParams& g) {
  const int d = static_cast<int>(t.v.cols());
  const int dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index n = t.v.rows();

  g.w_o += t.o.transpose() * dout;
  const Mat d_o = dout * p.w_o.transpose();
  Mat dq(1, d), dk(n, d), dv(n, d);
  for (int h = 0; h < n_heads; ++h) {
    const Eigen::VectorXd a = t.attn.row(h).transpose();
    const auto doh = d_o.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = a * doh;
    const Eigen::VectorXd da = t.v.middleCols(h * dh, dh) * doh.transpose();
    const Eigen::VectorXd ds = a.cwiseProduct((da.array() - a.dot(da)).matrix());
    dq.middleCols(h * dh, dh) = ds.transpose() * t.k.middleCols(h * dh, dh) * scale;
    dk.middleCols(h * dh, dh) = ds * t.q.middleCols(h * dh, dh) * scale;
  }
  g.w_q += t.q0.transpose() * dq;
  g.w_k += t.kin.transpose() * dk;
  g.w_v += t.vin.transpose() * dv;
  return {dq * p.w_q.transpose(), dk * p.w_k.transpose(), dv * p.w_v.transpose()};
}

// ---------------------------------------------------------------------------
// One head over resolved (possibly shared) parameters

template <typename Adapter, typename Attention, typename Tensor, typename Norm>
struct Binding {
  Adapter* adapter;
  Attention* attention;
  Tensor* query;
  Norm* ln_out;
  Tensor* w_out;
  Tensor* b_out;
};

using ConstBinding = Binding<const AdapterParams, const AttentionParams, const Mat, const LayerNormParams>;
using GradBinding = Binding<AdapterParams, AttentionParams, Mat, LayerNormParams>;

template <typename P, typename B>
B bind(P& own, P& height, const SharingConfig& share) {
  return {share.mlp ? &height.adapter : &own.adapter,
          share.attention ? &height.attention : &own.attention,
          share.query ? &height.query : &own.query,
          &own.ln_out,
          &own.w_out,
          &own.b_out};
}

struct HeadTape {
  AdapterTape adapter;
  LnTape ln_in;
  Mat z;
  AttnTape attn;
  LnTape ln_out;
  Mat f;
};

Mat head_logits(const TokenSet& tok, const ConstBinding& p, const HeadToggles& tg,
                const Mat& pos, int n_heads, double eps, HeadTape& t) {
  const int d = tok.dim();
  if (tok.cls.rows() != 1 || tok.cls.cols() != d)
    throw Error(ErrorCode::ShapeMismatch, "[CLS] token width differs from patch tokens");
  if (tg.cls_linear_only) {
    t.f = tok.cls;
  } else {
    if (tok.count() < 1) throw Error(ErrorCode::ShapeMismatch, "no patch tokens");
    const Mat y = tg.use_mlp ? adapter_forward(tok.patches, *p.adapter, eps, t.adapter)
                             : tok.patches;
    t.z = ln_forward(y, p.attention->ln_in, eps, &t.ln_in);
    const Mat q0 = tg.use_task_token ? *p.query : Mat(t.z.colwise().mean());
    const Mat kin = tg.use_pos_enc ? Mat(t.z + pos) : t.z;
    const Mat out = attend(q0, kin, t.z, *p.attention, n_heads, t.attn);
    const Mat normed = ln_forward(out, *p.ln_out, eps, &t.ln_out);
    if (tg.use_cls_concat) {
      t.f.resize(1, 2 * d);
      t.f << normed, tok.cls;
    } else {
      t.f = normed;
    }
  }
  if (p.w_out->rows() != t.f.cols() || p.b_out->cols() != p.w_out->cols())
    throw Error(ErrorCode::ShapeMismatch, "output projection does not match head features");
  return t.f * *p.w_out + *p.b_out;
}

void head_backward(const Mat& dlogits, const TokenSet& tok, const ConstBinding& p,
                   const GradBinding& g, const HeadToggles& tg, int n_heads, const HeadTape& t,
                   Mat& d_patches, Mat& d_cls) {
  const int d = tok.dim();
  *g.w_out += t.f.transpose() * dlogits;
  *g.b_out += dlogits;
  const Mat df = dlogits * p.w_out->transpose();
  if (tg.cls_linear_only) {
    d_cls += df;
    return;
  }
  if (tg.use_cls_concat) d_cls += df.rightCols(d);
  const Mat dout = ln_backward(df.leftCols(d), t.ln_out, *p.ln_out, *g.ln_out);
  const AttnGrads ag = attend_backward(dout, *p.attention, n_heads, t.attn, *g.attention);
  Mat dz = ag.d_vin + ag.d_kin;
  if (tg.use_task_token) {
    *g.query += ag.d_q0;
  } else {
    dz.rowwise() += ag.d_q0.row(0) / static_cast<double>(tok.count());
  }
  const Mat dy = ln_backward(dz, t.ln_in, p.attention->ln_in, g.attention->ln_in);
  d_patches += tg.use_mlp ? adapter_backward(dy, *p.adapter, t.adapter, *g.adapter) : dy;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double height_output(double z, OutputActivation act, double h_max) {
  if (act == OutputActivation::SigmoidScaled) return h_max * sigmoid(z);
  return std::max(z, 0.0);
}

double height_output_grad(double z, OutputActivation act, double h_max) {
  if (act == OutputActivation::SigmoidScaled) {
    const double s = sigmoid(z);
    return h_max * s * (1.0 - s);
  }
  return z > 0.0 ? 1.0 : 0.0;
}

Mat softmax_row(const Mat& logits) {
  Mat p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

double log_softmax_at(const Mat& logits, int c) {
  const double m = logits.maxCoeff();
  return logits(0, c) - m - std::log((logits.array() - m).exp().sum());
}

void check_tokens(const TokenSet& tok, const HeadsConfig& cfg) {
  if (tok.dim() != cfg.dim)
    throw Error(ErrorCode::ShapeMismatch, "token width " + std::to_string(tok.dim()) +
                                              " differs from head width " +
                                              std::to_string(cfg.dim));
  if (tok.grid_h * tok.grid_w != tok.count())
    throw Error(ErrorCode::ShapeMismatch, "patch count does not match the token grid");
}

struct ForwardState {
  HeadTape height, species;
  double z_height = 0.0;
  double height_pred = 0.0;
  Mat species_logits;
  Mat probs;
};

ForwardState run_forward(const DualHeads& m, const TokenSet& tok) {
  const HeadsConfig& cfg = m.config;
  cfg.validate();
  check_tokens(tok, cfg);
  const Mat pos = sine_pos_encoding_2d(tok.grid_h, tok.grid_w, cfg.dim);
  const SharingConfig none{};
  const auto hb = bind<const HeadParams, ConstBinding>(m.height, m.height, none);
  const auto sb = bind<const HeadParams, ConstBinding>(m.species, m.height, cfg.sharing);

  ForwardState st;
  const Mat hz = head_logits(tok, hb, cfg.height, pos, cfg.n_heads, cfg.ln_eps, st.height);
  if (hz.cols() != 1) throw Error(ErrorCode::ShapeMismatch, "height head must have one output");
  st.z_height = hz(0, 0);
  st.height_pred = height_output(st.z_height, cfg.height_activation, cfg.h_max);
  st.species_logits = head_logits(tok, sb, cfg.species, pos, cfg.n_heads, cfg.ln_eps, st.species);
  if (st.species_logits.cols() != cfg.n_classes)
    throw Error(ErrorCode::ShapeMismatch, "species head output width differs from n_classes");
  st.probs = softmax_row(st.species_logits);
  return st;
}

double loss_from(const ForwardState& st, const Targets& tg, int n_classes) {
  if (tg.class_index < 0 || tg.class_index >= n_classes)
    throw Error(ErrorCode::IndexOutOfRange, "target class index");
  const double lh = tg.weight_height * smooth_l1(st.height_pred, tg.height);
  const double ls = -tg.weight_species * log_softmax_at(st.species_logits, tg.class_index);
  const double total = lh + ls;
  if (!std::isfinite(total)) throw Error(ErrorCode::NonFinite, "joint loss is not finite");
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

void HeadsConfig::validate() const {
  if (dim <= 0 || dim % 4 != 0) throw Error(ErrorCode::InvalidDim, "dim must be a positive multiple of 4");
  if (n_heads <= 0 || dim % n_heads != 0)
    throw Error(ErrorCode::InvalidHeads, "dim must be divisible by n_heads");
  if (n_classes < 1) throw Error(ErrorCode::InvalidArgument, "n_classes must be >= 1");
  if (height_activation == OutputActivation::SigmoidScaled && !(h_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sigmoid height output needs h_max > 0");
  if (!(ln_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "ln_eps must be > 0");
}

DualHeads init_heads(const HeadsConfig& config, std::uint64_t seed) {
  config.validate();
  Sampler s(seed);
  DualHeads m;
  m.config = config;
  m.height = init_head(s, config.height, config.dim, 1);
  m.species = init_head(s, config.species, config.dim, config.n_classes);
  return m;
}

void for_each_tensor(HeadParams& p, const std::function<void(std::string_view, Mat&)>& fn) {
  fn("adapter.ln.gamma", p.adapter.ln.gamma);
  fn("adapter.ln.beta", p.adapter.ln.beta);
  fn("adapter.w1", p.adapter.w1);
  fn("adapter.b1", p.adapter.b1);
  fn("adapter.w2", p.adapter.w2);
  fn("adapter.b2", p.adapter.b2);
  fn("attention.ln_in.gamma", p.attention.ln_in.gamma);
  fn("attention.ln_in.beta", p.attention.ln_in.beta);
  fn("attention.w_q", p.attention.w_q);
  fn("attention.w_k", p.attention.w_k);
  fn("attention.w_v", p.attention.w_v);
  fn("attention.w_o", p.attention.w_o);
  fn("query", p.query);
  fn("ln_out.gamma", p.ln_out.gamma);
  fn("ln_out.beta", p.ln_out.beta);
  fn("w_out", p.w_out);
  fn("b_out", p.b_out);
}

void for_each_tensor(const HeadParams& p,
                     const std::function<void(std::string_view, const Mat&)>& fn) {
  for_each_tensor(const_cast<HeadParams&>(p),
                  [&](std::string_view name, Mat& m) { fn(name, m); });
}

TokenSet mock_backbone(std::uint64_t seed, int grid_h, int grid_w, int dim, int n_heads) {
  if (dim <= 0 || dim % 4 != 0 || n_heads <= 0 || dim % n_heads != 0)
    throw Error(ErrorCode::InvalidDim, "token width must be divisible by 4 and by n_heads");
  if (grid_h <= 0 || grid_w <= 0) throw Error(ErrorCode::InvalidDim, "empty token grid");
  Sampler s(seed ^ 0x9E3779B97F4A7C15ULL);
  TokenSet t;
  t.grid_h = grid_h;
  t.grid_w = grid_w;
  t.patches.resize(grid_h * grid_w, dim);
  for (Eigen::Index i = 0; i < t.patches.size(); ++i) t.patches.data()[i] = s.normal();
  t.cls.resize(1, dim);
  for (Eigen::Index i = 0; i < dim; ++i) t.cls(0, i) = s.normal();
  return t;
}

Mat sine_pos_encoding_2d(int grid_h, int grid_w, int dim, double temperature) {
  if (dim <= 0 || dim % 4 != 0) throw Error(ErrorCode::InvalidDim, "encoding width must be a multiple of 4");
  if (grid_h <= 0 || grid_w <= 0) throw Error(ErrorCode::InvalidDim, "empty token grid");
  const int half = dim / 2;
  const double two_pi = 2.0 * std::numbers::pi;
  Mat pe(grid_h * grid_w, dim);
  for (int r = 0; r < grid_h; ++r) {
    const double y = (r + 1.0) / grid_h * two_pi;
    for (int c = 0; c < grid_w; ++c) {
      const double x = (c + 1.0) / grid_w * two_pi;
      const int row = r * grid_w + c;
      for (int i = 0; i < half; ++i) {
        const double freq = std::pow(temperature, 2.0 * (i / 2) / half);
        const bool use_sin = i % 2 == 0;
        pe(row, i) = use_sin ? std::sin(y / freq) : std::cos(y / freq);
        pe(row, half + i) = use_sin ? std::sin(x / freq) : std::cos(x / freq);
      }
    }
  }
  return pe;
}

Mat layer_norm(const Mat& x, const LayerNormParams& p, double eps) {
  return ln_forward(x, p, eps, nullptr);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

Mat mlp_adapter_forward(const Mat& tokens, const AdapterParams& p, double eps) {
  AdapterTape t;
  return adapter_forward(tokens, p, eps, t);
}

Mat cross_attention_forward(const Mat& query, const Mat& keys_values, const Mat* pos,
                            const AttentionParams& p, int n_heads, Mat* weights) {
  if (pos && (pos->rows() != keys_values.rows() || pos->cols() != keys_values.cols()))
    throw Error(ErrorCode::ShapeMismatch, "positional encodings must match the key tokens");
  AttnTape t;
  const Mat kin = pos ? Mat(keys_values + *pos) : keys_values;
  Mat out = attend(query, kin, keys_values, p, n_heads, t);
  if (weights) *weights = t.attn;
  return out;
}

double height_head_forward(const TokenSet& tokens, const HeadParams& p, const HeadToggles& toggles,
                           OutputActivation activation, double h_max, int n_heads, double eps) {
  if (activation == OutputActivation::SigmoidScaled && !(h_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sigmoid height output needs h_max > 0");
  const Mat pos = sine_pos_encoding_2d(tokens.grid_h, tokens.grid_w, tokens.dim());
  const auto b = bind<const HeadParams, ConstBinding>(p, p, SharingConfig{});
  HeadTape t;
  const Mat z = head_logits(tokens, b, toggles, pos, n_heads, eps, t);
  return height_output(z(0, 0), activation, h_max);
}

Mat class_head_forward(const TokenSet& tokens, const HeadParams& p, const HeadToggles& toggles,
                       int n_heads, double eps) {
  const Mat pos = sine_pos_encoding_2d(tokens.grid_h, tokens.grid_w, tokens.dim());
  const auto b = bind<const HeadParams, ConstBinding>(p, p, SharingConfig{});
  HeadTape t;
  return softmax_row(head_logits(tokens, b, toggles, pos, n_heads, eps, t));
}

Prediction forward(const DualHeads& model, const TokenSet& tokens) {
  const ForwardState st = run_forward(model, tokens);
  return {st.height_pred, st.probs};
}

double joint_loss(const DualHeads& model, const TokenSet& tokens, const Targets& targets) {
  return loss_from(run_forward(model, tokens), targets, model.config.n_classes);
}

Gradients backward(const DualHeads& model, const TokenSet& tokens, const Targets& targets) {
  const HeadsConfig& cfg = model.config;
  const ForwardState st = run_forward(model, tokens);

  Gradients g;
  g.loss = loss_from(st, targets, cfg.n_classes);
  g.height = zeros_like(model.height);
  g.species = zeros_like(model.species);
  g.d_patches = Mat::Zero(tokens.count(), tokens.dim());
  g.d_cls = Mat::Zero(1, tokens.dim());

  const SharingConfig none{};
  const auto hb = bind<const HeadParams, ConstBinding>(model.height, model.height, none);
  const auto sb = bind<const HeadParams, ConstBinding>(model.species, model.height, cfg.sharing);
  const auto hg = bind<HeadParams, GradBinding>(g.height, g.height, none);
  const auto sg = bind<HeadParams, GradBinding>(g.species, g.height, cfg.sharing);

  const double dl_dh = targets.weight_height * smooth_l1_grad(st.height_pred, targets.height);
  Mat dz_height(1, 1);
  dz_height(0, 0) = dl_dh * height_output_grad(st.z_height, cfg.height_activation, cfg.h_max);
  head_backward(dz_height, tokens, hb, hg, cfg.height, cfg.n_heads, st.height, g.d_patches,
                g.d_cls);

  Mat dlogits = st.probs * targets.weight_species;
  dlogits(0, targets.class_index) -= targets.weight_species;
  head_backward(dlogits, tokens, sb, sg, cfg.species, cfg.n_heads, st.species, g.d_patches,
                g.d_cls);

  auto check_finite = [](std::string_view, const Mat& m) {
    if (!m.allFinite()) throw Error(ErrorCode::NonFinite, "non-finite gradient");
  };
  for_each_tensor(std::as_const(g.height), check_finite);
  for_each_tensor(std::as_const(g.species), check_finite);
  return g;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check(const DualHeads& model, const TokenSet& tokens,
                               const Targets& targets, double step, double tol) {
  const Gradients analytic = backward(model, tokens, targets);
  DualHeads probe = model;
  TokenSet probe_tokens = tokens;

  struct Slot {
    std::string name;
    Mat* value;
    const Mat* grad;
  };
  std::vector<Slot> slots;
  std::vector<const Mat*> grads;
  for_each_tensor(analytic.height, [&](std::string_view, const Mat& m) { grads.push_back(&m); });
  for_each_tensor(analytic.species, [&](std::string_view, const Mat& m) { grads.push_back(&m); });
  std::size_t gi = 0;
  for_each_tensor(probe.height, [&](std::string_view n, Mat& m) {
    slots.push_back({"height." + std::string(n), &m, grads[gi++]});
  });
  for_each_tensor(probe.species, [&](std::string_view n, Mat& m) {
    slots.push_back({"species." + std::string(n), &m, grads[gi++]});
  });
  slots.push_back({"tokens.patches", &probe_tokens.patches, &analytic.d_patches});
  slots.push_back({"tokens.cls", &probe_tokens.cls, &analytic.d_cls});

  GradCheckReport rep;
  rep.tolerance = tol;
  for (const Slot& s : slots) {
    GradCheckEntry e;
    e.name = s.name;
    e.size = static_cast<std::size_t>(s.value->size());
    for (Eigen::Index i = 0; i < s.value->size(); ++i) {
      double& x = s.value->data()[i];
      const double saved = x;
      x = saved + step;
      const double up = joint_loss(probe, probe_tokens, targets);
      x = saved - step;
      const double down = joint_loss(probe, probe_tokens, targets);
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = s.grad->data()[i];
      e.max_rel_error = std::max(e.max_rel_error, relative_error(a, numeric));
      e.max_abs_grad = std::max(e.max_abs_grad, std::abs(a));
    }
    rep.max_rel_error = std::max(rep.max_rel_error, e.max_rel_error);
    rep.entries.push_back(std::move(e));
  }
  rep.passed = rep.max_rel_error < tol;
  return rep;
}

std::vector<std::pair<std::string, HeadsConfig>> ablation_variants(const HeadsConfig& base) {
  std::vector<std::pair<std::string, HeadsConfig>> out;
  out.emplace_back("full", base);
  HeadsConfig c = base;
  c.height.use_mlp = c.species.use_mlp = false;
  out.emplace_back("no_mlp", c);
  c = base;
  c.height.use_pos_enc = c.species.use_pos_enc = false;
  out.emplace_back("no_pos_enc", c);
  c = base;
  c.species.use_task_token = false;
  out.emplace_back("no_task_token_cls", c);
  c = base;
  c.species.use_cls_concat = false;
  out.emplace_back("no_cls_concat_cls", c);
  c = base;
  c.height.use_cls_concat = true;
  out.emplace_back("cls_concat_height", c);
  c = base;
  c.height_activation = OutputActivation::SigmoidScaled;
  if (!(c.h_max > 0.0)) c.h_max = 40.0;
  out.emplace_back("sigmoid_height", c);
  c = base;
  c.height.cls_linear_only = c.species.cls_linear_only = true;
  out.emplace_back("cls_linear", c);
  return out;
}

std::vector<std::pair<std::string, HeadsConfig>> sharing_variants(const HeadsConfig& base) {
  std::vector<std::pair<std::string, HeadsConfig>> out;
  HeadsConfig c = base;
  c.sharing = {false, false, false};
  out.emplace_back("share_none", c);
  c.sharing = {true, false, false};
  out.emplace_back("share_mlp", c);
  c.sharing = {true, true, false};
  out.emplace_back("share_mlp_attention", c);
  c.sharing = {true, true, true};
  out.emplace_back("share_mlp_attention_query", c);
  return out;
}

}  // namespace crownkit::heads

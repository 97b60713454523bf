#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crownkit::heads {

// Row-major storage matches the (tokens x channels) convention used below.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Backbone output: N = grid_h * grid_w patch tokens plus the [CLS] token.
struct TokenSet {
  Mat patches;  // N x d, row-major over the patch grid
  Mat cls;      // 1 x d
  int grid_h = 0;
  int grid_w = 0;

  int dim() const { return static_cast<int>(patches.cols()); }
  int count() const { return static_cast<int>(patches.rows()); }
};

struct LayerNormParams {
  Mat gamma;  // 1 x d
  Mat beta;   // 1 x d
};

/// Pre-norm residual MLP: x + W2 gelu(W1 LN(x) + b1) + b2, hidden width 4d.
struct AdapterParams {
  LayerNormParams ln;
  Mat w1, b1;  // d x 4d, 1 x 4d
  Mat w2, b2;  // 4d x d, 1 x d
};

/// Multi-head cross-attention without projection biases. `ln_in` normalizes
/// the tokens before attention; cross_attention_forward itself does not
/// apply it.
struct AttentionParams {
  LayerNormParams ln_in;
  Mat w_q, w_k, w_v, w_o;  // d x d each
};

struct HeadParams {
  AdapterParams adapter;
  AttentionParams attention;
  Mat query;  // 1 x d learnable task token
  LayerNormParams ln_out;
  Mat w_out;  // F x K, F = d (or 2d with [CLS] concat), K = 1 or C
  Mat b_out;  // 1 x K
};

enum class OutputActivation { Relu, SigmoidScaled };

struct HeadToggles {
  bool use_mlp = true;
  bool use_pos_enc = true;
  /// When off, the mean of the normalized adapted tokens replaces the
  /// learnable query.
  bool use_task_token = true;
  bool use_cls_concat = false;
  /// Plain linear layer on the [CLS] token; every other stage is bypassed.
  bool cls_linear_only = false;
};

/// Which height-head components the species head reuses.
struct SharingConfig {
  bool mlp = false;
  bool attention = false;
  bool query = false;
};

struct HeadsConfig {
  int dim = 16;
  int n_heads = 8;
  int n_classes = 3;
  HeadToggles height{};
  HeadToggles species{.use_cls_concat = true};
  OutputActivation height_activation = OutputActivation::Relu;
  /// Scale of the sigmoid height output (maximum training height).
  double h_max = 0.0;
  SharingConfig sharing{};
  double ln_eps = 1e-6;

  void validate() const;
};

struct DualHeads {
  HeadsConfig config;
  HeadParams height;
  HeadParams species;
};

/// Fan-in scaled uniform matrices, zero biases and LN shifts, unit LN
/// scales, N(0, 0.02^2) query tokens.
DualHeads init_heads(const HeadsConfig& config, std::uint64_t seed);

/// Visits every tensor of a head as (name, tensor).
void for_each_tensor(HeadParams& p, const std::function<void(std::string_view, Mat&)>& fn);
void for_each_tensor(const HeadParams& p,
                     const std::function<void(std::string_view, const Mat&)>& fn);

/// Deterministic pseudo-random tokens standing in for a ViT backbone.
TokenSet mock_backbone(std::uint64_t seed, int grid_h, int grid_w, int dim, int n_heads = 8);

// Building blocks ------------------------------------------------------------

/// DETR-style 2-D sine encoding: first d/2 channels for the row, last d/2 for
/// the column, sin/cos interleaved, coordinates (i + 1) / extent * 2 pi.
Mat sine_pos_encoding_2d(int grid_h, int grid_w, int dim, double temperature = 10000.0);

Mat layer_norm(const Mat& x, const LayerNormParams& p, double eps = 1e-6);
double gelu(double x);

Mat mlp_adapter_forward(const Mat& tokens, const AdapterParams& p, double eps = 1e-6);

/// Softmax(q K^T / sqrt(d_h)) V per head, concatenated, then W_O. Positional
/// encodings (optional, N x d) are added to the keys only. If `weights` is
/// given it receives the n_heads x N attention matrix.
Mat cross_attention_forward(const Mat& query, const Mat& keys_values, const Mat* pos,
                            const AttentionParams& p, int n_heads, Mat* weights = nullptr);

double height_head_forward(const TokenSet& tokens, const HeadParams& p, const HeadToggles& toggles,
                           OutputActivation activation, double h_max, int n_heads,
                           double eps = 1e-6);

/// 1 x C class probabilities.
Mat class_head_forward(const TokenSet& tokens, const HeadParams& p, const HeadToggles& toggles,
                       int n_heads, double eps = 1e-6);

// Joint model ----------------------------------------------------------------

struct Prediction {
  double height = 0.0;
  Mat probs;  // 1 x C
};

Prediction forward(const DualHeads& model, const TokenSet& tokens);

struct Targets {
  double height = 0.0;
  int class_index = 0;
  double weight_height = 1.0;
  double weight_species = 1.0;
};

/// weight_height * smooth_l1(h_pred, h) + weight_species * cross_entropy(p, c).
double joint_loss(const DualHeads& model, const TokenSet& tokens, const Targets& targets);

struct Gradients {
  HeadParams height;
  HeadParams species;
  Mat d_patches;
  Mat d_cls;
  double loss = 0.0;
};

/// Analytic gradients of joint_loss. Shared tensors live in the height head;
/// their gradient is the sum over both heads and the species copy stays zero.
Gradients backward(const DualHeads& model, const TokenSet& tokens, const Targets& targets);

// Verification -----------------------------------------------------------------

struct GradCheckEntry {
  std::string name;
  std::size_t size = 0;
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  bool passed = false;
};

/// |a - n| / max(|a|, |n|, floor), with floor guarding near-zero entries.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central finite differences over every parameter and input token.
GradCheckReport gradient_check(const DualHeads& model, const TokenSet& tokens,
                               const Targets& targets, double step = 1e-5, double tol = 1e-4);

/// Component ablations: full, no_mlp, no_pos_enc, no_task_token_cls,
/// no_cls_concat_cls, cls_concat_height, sigmoid_height, cls_linear.
std::vector<std::pair<std::string, HeadsConfig>> ablation_variants(const HeadsConfig& base);

/// Head parameter sharing: none, mlp, mlp+attention, mlp+attention+query.
std::vector<std::pair<std::string, HeadsConfig>> sharing_variants(const HeadsConfig& base);

}  // namespace crownkit::heads

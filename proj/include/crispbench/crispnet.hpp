#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crispbench/tensor.hpp"

namespace crispbench::net {

// ---------------------------------------------------------------------------
// Primitive kernels. Weights are Tensor4 shaped (out_ch, in_ch, kh, kw); an
// empty bias span means zero bias.

/// Stride-1 cross-correlation with `pad` zeros on every side.
/// Output spatial size: H + 2*pad - kh + 1 (likewise for width).
Tensor4 conv2d(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int pad);

Tensor4 relu(const Tensor4& x);

/// Channels of `a` first, then `b`.
Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
/// Inverse of concat_channels: first `at` channels, remainder.
std::pair<Tensor4, Tensor4> split_channels(const Tensor4& x, int at);

/// (n, c*k*k, h, w) -> (n, c, k*h, k*w) with
/// out(b, c, k*y + dy, k*x + dx) = in(b, c*k*k + dy*k + dx, y, x).
Tensor4 phase_shift(const Tensor4& x, int k);
Tensor4 inverse_phase_shift(const Tensor4& y, int k);

/// conv2d producing o*k*k channels, then phase_shift by k.
Tensor4 subpixel_conv(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int k,
                      int pad);

/// Stride-k transposed convolution with weights (o, i, KH, KW). The full
/// output is cropped by (KH - k) / 2 rows (and (KW - k) / 2 columns) on each
/// side so the result is exactly (n, o, k*H, k*W); KH - k and KW - k must be
/// even. Bias is per output channel.
Tensor4 deconv(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int k);

/// Scatters every sub-kernel of a sub-pixel weight set (o*k*k, i, r, c) into
/// its stride phase of a deconvolution kernel (o, i, k*r, k*c). With odd r and c
/// and pad (r-1)/2, subpixel_conv(x, w, k) == deconv(x, mapped, k).
Tensor4 subpixel_to_deconv_weights(const Tensor4& w, int k);

/// Fixed bilinear up-sampling kernel (channels, channels, K, K) with
/// K = 2k - k % 2, acting on each channel independently. As a deconv it
/// reproduces half-pixel-centred bilinear interpolation away from the border.
Tensor4 bilinear_deconv_weights(int channels, int k);

// ---------------------------------------------------------------------------
// Refinement module and backward pathway (forward pass only).

struct RefinementConfig {
  int k_h = 0;          // lateral (forward pathway) input channels
  int k_u = 0;          // top-down input channels
  int k_h_reduced = 0;  // lateral channels after the 3x3 reduction
  int k_u_reduced = 0;  // top-down channels after the 3x3 reduction
  int k_d = 0;          // channels after fusion; also the up-sampled output width
  int upscale = 2;
  int subpixel_kernel = 3;  // odd; applied with "same" padding

  void validate() const;
};

struct RefinementParams {
  Tensor4 top_down_w;  // (k_u', k_u, 3, 3)
  std::vector<double> top_down_b;
  Tensor4 lateral_w;  // (k_h', k_h, 3, 3)
  std::vector<double> lateral_b;
  Tensor4 fuse_w;  // (k_d, k_u' + k_h', 3, 3)
  std::vector<double> fuse_b;
  Tensor4 up_w;  // (k_d * upscale^2, k_d, s, s)
  std::vector<double> up_b;
};

/// Weight shapes implied by a config, each filled with `fill`.
RefinementParams zero_params(const RefinementConfig& cfg, double fill = 0.0);
/// Uniform in +-1/sqrt(fan_in), biases zero.
RefinementParams random_params(const RefinementConfig& cfg, SeededRng& rng);

/// Reduce both inputs (3x3 conv + ReLU), concatenate top-down first, fuse
/// (3x3 conv + ReLU) and up-sample with a sub-pixel convolution.
Tensor4 refinement_module(const Tensor4& top_down, const Tensor4& lateral,
                          const RefinementConfig& cfg, const RefinementParams& params);

struct PathwayConfig {
  /// Channels of the top of the backward pathway followed by each module's output.
  std::vector<int> module_channels{256, 128, 64, 32};
  int upscale = 2;
  int subpixel_kernel = 3;

  /// Default halving schedule from 256 with `levels` modules.
  static PathwayConfig with_levels(int levels);
  int module_count() const { return static_cast<int>(module_channels.size()) - 1; }
  /// Module config for a given lateral channel count.
  RefinementConfig module_config(int index, int lateral_channels) const;
  void validate() const;
};

struct PathwayParams {
  Tensor4 seed_w;  // (module_channels[0], coarsest side channels, 3, 3)
  std::vector<double> seed_b;
  std::vector<RefinementParams> modules;
};

PathwayParams random_pathway_params(const PathwayConfig& cfg,
                                    const std::vector<Shape4>& side_shapes, SeededRng& rng);

struct PathwayTrace {
  struct Step {
    std::string name;
    Shape4 top_down;
    Shape4 lateral;
    Shape4 output;
  };
  std::vector<Step> steps;
};

/// Folds refinement modules over side features ordered coarse to fine. The
/// top-down seed is a 3x3 conv + ReLU of the coarsest feature to
/// module_channels[0]; module i then fuses the running map with feature i.
Tensor4 refinement_pathway(const std::vector<Tensor4>& side_features, const PathwayConfig& cfg,
                           const PathwayParams& params, PathwayTrace* trace = nullptr);

}  // namespace crispbench::net

#include "crispbench/crispnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crispbench::net {

namespace {

double bias_at(std::span<const double> bias, int c) {
  return bias.empty() ? 0.0 : bias[static_cast<std::size_t>(c)];
}

void check_bias(std::span<const double> bias, int out_ch) {
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_ch)) {
    throw std::invalid_argument("bias has " + std::to_string(bias.size()) + " entries, expected " +
                                std::to_string(out_ch));
  }
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int pad) {
  const Shape4& xs = x.shape();
  const Shape4& ws = w.shape();
  if (pad < 0) throw std::invalid_argument("conv2d: negative padding");
  if (ws.c != xs.c) {
    throw std::invalid_argument("conv2d: kernel expects " + std::to_string(ws.c) +
                                " input channels, got " + std::to_string(xs.c));
  }
  const int out_h = xs.h + 2 * pad - ws.h + 1;
  const int out_w = xs.w + 2 * pad - ws.w + 1;
  if (out_h < 1 || out_w < 1) {
    throw std::invalid_argument("conv2d: kernel " + ws.str() + " larger than padded input " +
                                xs.str());
  }
  check_bias(bias, ws.n);
  Tensor4 out(Shape4{xs.n, ws.n, out_h, out_w});
  for (int b = 0; b < xs.n; ++b) {
    for (int oc = 0; oc < ws.n; ++oc) {
      double* dst = &out.at(b, oc, 0, 0);
      std::fill(dst, dst + static_cast<std::size_t>(out_h) * out_w, bias_at(bias, oc));
      for (int ic = 0; ic < xs.c; ++ic) {
        for (int u = 0; u < ws.h; ++u) {
          for (int v = 0; v < ws.w; ++v) {
            const double k = w.at(oc, ic, u, v);
            if (k == 0.0) continue;
            // Output columns whose input column x + v - pad lies inside the image.
            const int x_lo = std::max(0, pad - v);
            const int x_hi = std::min(out_w, xs.w + pad - v);
            for (int y = 0; y < out_h; ++y) {
              const int iy = y + u - pad;
              if (iy < 0 || iy >= xs.h) continue;
              const double* src = &x.at(b, ic, iy, 0);
              double* row = dst + static_cast<std::size_t>(y) * out_w;
              for (int ox = x_lo; ox < x_hi; ++ox) row[ox] += k * src[ox + v - pad];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 relu(const Tensor4& x) {
  Tensor4 out = x;
  for (double& v : out.data()) v = std::max(0.0, v);
  return out;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  const Shape4& as = a.shape();
  const Shape4& bs = b.shape();
  if (as.n != bs.n || as.h != bs.h || as.w != bs.w) {
    throw std::invalid_argument("concat_channels: " + as.str() + " vs " + bs.str());
  }
  Tensor4 out(Shape4{as.n, as.c + bs.c, as.h, as.w});
  const std::size_t plane = static_cast<std::size_t>(as.h) * as.w;
  for (int n = 0; n < as.n; ++n) {
    std::copy_n(&a.at(n, 0, 0, 0), plane * as.c, &out.at(n, 0, 0, 0));
    std::copy_n(&b.at(n, 0, 0, 0), plane * bs.c, &out.at(n, as.c, 0, 0));
  }
  return out;
}

std::pair<Tensor4, Tensor4> split_channels(const Tensor4& x, int at) {
  const Shape4& s = x.shape();
  if (at < 1 || at >= s.c) throw std::invalid_argument("split_channels: split point out of range");
  Tensor4 a(Shape4{s.n, at, s.h, s.w});
  Tensor4 b(Shape4{s.n, s.c - at, s.h, s.w});
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    std::copy_n(&x.at(n, 0, 0, 0), plane * at, &a.at(n, 0, 0, 0));
    std::copy_n(&x.at(n, at, 0, 0), plane * (s.c - at), &b.at(n, 0, 0, 0));
  }
  return {std::move(a), std::move(b)};
}

Tensor4 phase_shift(const Tensor4& x, int k) {
  const Shape4& s = x.shape();
  if (k < 1) throw std::invalid_argument("phase_shift: k must be >= 1");
  if (s.c % (k * k) != 0) {
    throw std::invalid_argument("phase_shift: " + std::to_string(s.c) +
                                " channels not divisible by k^2 = " + std::to_string(k * k));
  }
  const int oc_count = s.c / (k * k);
  Tensor4 out(Shape4{s.n, oc_count, s.h * k, s.w * k});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < oc_count; ++c) {
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          const int src_c = c * k * k + dy * k + dx;
          for (int y = 0; y < s.h; ++y) {
            for (int xx = 0; xx < s.w; ++xx) {
              out.at(n, c, k * y + dy, k * xx + dx) = x.at(n, src_c, y, xx);
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 inverse_phase_shift(const Tensor4& y, int k) {
  const Shape4& s = y.shape();
  if (k < 1) throw std::invalid_argument("inverse_phase_shift: k must be >= 1");
  if (s.h % k != 0 || s.w % k != 0) {
    throw std::invalid_argument("inverse_phase_shift: spatial dims not divisible by k");
  }
  Tensor4 out(Shape4{s.n, s.c * k * k, s.h / k, s.w / k});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int yy = 0; yy < s.h; ++yy) {
        for (int xx = 0; xx < s.w; ++xx) {
          out.at(n, c * k * k + (yy % k) * k + (xx % k), yy / k, xx / k) = y.at(n, c, yy, xx);
        }
      }
    }
  }
  return out;
}

Tensor4 subpixel_conv(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int k,
                      int pad) {
  if (k < 1) throw std::invalid_argument("subpixel_conv: k must be >= 1");
  if (w.shape().n % (k * k) != 0) {
    throw std::invalid_argument("subpixel_conv: kernel output channels not divisible by k^2");
  }
  return phase_shift(conv2d(x, w, bias, pad), k);
}

Tensor4 deconv(const Tensor4& x, const Tensor4& w, std::span<const double> bias, int k) {
  const Shape4& xs = x.shape();
  const Shape4& ws = w.shape();
  if (k < 1) throw std::invalid_argument("deconv: stride must be >= 1");
  if (ws.c != xs.c) {
    throw std::invalid_argument("deconv: kernel expects " + std::to_string(ws.c) +
                                " input channels, got " + std::to_string(xs.c));
  }
  if (ws.h < k || ws.w < k || (ws.h - k) % 2 != 0 || (ws.w - k) % 2 != 0) {
    throw std::invalid_argument("deconv: kernel " + ws.str() +
                                " cannot be cropped symmetrically to stride " + std::to_string(k));
  }
  check_bias(bias, ws.n);
  const int crop_y = (ws.h - k) / 2;
  const int crop_x = (ws.w - k) / 2;
  const int out_h = xs.h * k;
  const int out_w = xs.w * k;
  Tensor4 out(Shape4{xs.n, ws.n, out_h, out_w});
  for (int b = 0; b < xs.n; ++b) {
    for (int oc = 0; oc < ws.n; ++oc) {
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
          // Full-output coordinates; input pixel iy contributes through tap fy - k*iy.
          const int fy = oy + crop_y;
          const int fx = ox + crop_x;
          const int iy_lo = std::max(0, (fy - ws.h + k) / k);
          const int iy_hi = std::min(xs.h - 1, fy / k);
          const int ix_lo = std::max(0, (fx - ws.w + k) / k);
          const int ix_hi = std::min(xs.w - 1, fx / k);
          double acc = bias_at(bias, oc);
          for (int ic = 0; ic < xs.c; ++ic) {
            for (int iy = iy_lo; iy <= iy_hi; ++iy) {
              const int ty = fy - k * iy;
              if (ty < 0 || ty >= ws.h) continue;
              for (int ix = ix_lo; ix <= ix_hi; ++ix) {
                const int tx = fx - k * ix;
                if (tx < 0 || tx >= ws.w) continue;
                acc += x.at(b, ic, iy, ix) * w.at(oc, ic, ty, tx);
              }
            }
          }
          out.at(b, oc, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

Tensor4 subpixel_to_deconv_weights(const Tensor4& w, int k) {
  const Shape4& s = w.shape();
  if (k < 1 || s.n % (k * k) != 0) {
    throw std::invalid_argument("subpixel weights need o*k^2 output channels");
  }
  if (s.h % 2 == 0 || s.w % 2 == 0) {
    throw std::invalid_argument("sub-pixel to deconv mapping needs odd kernel sizes");
  }
  const int o = s.n / (k * k);
  Tensor4 out(Shape4{o, s.c, k * s.h, k * s.w});
  for (int oc = 0; oc < o; ++oc) {
    for (int dy = 0; dy < k; ++dy) {
      for (int dx = 0; dx < k; ++dx) {
        const int sub = oc * k * k + dy * k + dx;
        for (int ic = 0; ic < s.c; ++ic) {
          for (int u = 0; u < s.h; ++u) {
            for (int v = 0; v < s.w; ++v) {
              // Deconvolution flips the taps relative to cross-correlation.
              out.at(oc, ic, k * (s.h - 1 - u) + dy, k * (s.w - 1 - v) + dx) = w.at(sub, ic, u, v);
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 bilinear_deconv_weights(int channels, int k) {
  if (channels < 1 || k < 1) throw std::invalid_argument("bilinear kernel: bad arguments");
  const int size = 2 * k - k % 2;
  const double factor = (size + 1) / 2;
  const double center = size % 2 == 1 ? factor - 1.0 : factor - 0.5;
  std::vector<double> taps(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    taps[static_cast<std::size_t>(i)] = 1.0 - std::abs(i - center) / factor;
  }
  Tensor4 out(Shape4{channels, channels, size, size});
  for (int c = 0; c < channels; ++c) {
    for (int u = 0; u < size; ++u) {
      for (int v = 0; v < size; ++v) {
        out.at(c, c, u, v) = taps[static_cast<std::size_t>(u)] * taps[static_cast<std::size_t>(v)];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void RefinementConfig::validate() const {
  if (k_h < 1 || k_u < 1 || k_h_reduced < 1 || k_u_reduced < 1 || k_d < 1) {
    throw std::invalid_argument("refinement config: channel counts must be >= 1");
  }
  if (k_h_reduced > k_h || k_u_reduced > k_u) {
    throw std::invalid_argument("refinement config: reduced widths must not exceed inputs");
  }
  if (upscale < 1) throw std::invalid_argument("refinement config: upscale must be >= 1");
  if (subpixel_kernel < 1 || subpixel_kernel % 2 == 0) {
    throw std::invalid_argument("refinement config: sub-pixel kernel size must be odd");
  }
}

RefinementParams zero_params(const RefinementConfig& cfg, double fill) {
  cfg.validate();
  const int s = cfg.subpixel_kernel;
  const int k2 = cfg.upscale * cfg.upscale;
  RefinementParams p;
  p.top_down_w = Tensor4(Shape4{cfg.k_u_reduced, cfg.k_u, 3, 3}, fill);
  p.top_down_b.assign(static_cast<std::size_t>(cfg.k_u_reduced), fill);
  p.lateral_w = Tensor4(Shape4{cfg.k_h_reduced, cfg.k_h, 3, 3}, fill);
  p.lateral_b.assign(static_cast<std::size_t>(cfg.k_h_reduced), fill);
  p.fuse_w = Tensor4(Shape4{cfg.k_d, cfg.k_u_reduced + cfg.k_h_reduced, 3, 3}, fill);
  p.fuse_b.assign(static_cast<std::size_t>(cfg.k_d), fill);
  p.up_w = Tensor4(Shape4{cfg.k_d * k2, cfg.k_d, s, s}, fill);
  p.up_b.assign(static_cast<std::size_t>(cfg.k_d * k2), fill);
  return p;
}

namespace {

void fill_fan_in(Tensor4& w, SeededRng& rng) {
  const Shape4& s = w.shape();
  const double bound = 1.0 / std::sqrt(static_cast<double>(s.c) * s.h * s.w);
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
}

}  // namespace

RefinementParams random_params(const RefinementConfig& cfg, SeededRng& rng) {
  RefinementParams p = zero_params(cfg);
  fill_fan_in(p.top_down_w, rng);
  fill_fan_in(p.lateral_w, rng);
  fill_fan_in(p.fuse_w, rng);
  fill_fan_in(p.up_w, rng);
  return p;
}

Tensor4 refinement_module(const Tensor4& top_down, const Tensor4& lateral,
                          const RefinementConfig& cfg, const RefinementParams& params) {
  cfg.validate();
  if (top_down.channels() != cfg.k_u) {
    throw std::invalid_argument("refinement: top-down input has " +
                                std::to_string(top_down.channels()) + " channels, config says " +
                                std::to_string(cfg.k_u));
  }
  if (lateral.channels() != cfg.k_h) {
    throw std::invalid_argument("refinement: lateral input has " +
                                std::to_string(lateral.channels()) + " channels, config says " +
                                std::to_string(cfg.k_h));
  }
  if (top_down.batch() != lateral.batch() || top_down.height() != lateral.height() ||
      top_down.width() != lateral.width()) {
    throw std::invalid_argument("refinement: top-down " + top_down.shape().str() +
                                " and lateral " + lateral.shape().str() + " differ spatially");
  }
  const Tensor4 u = relu(conv2d(top_down, params.top_down_w, params.top_down_b, 1));
  const Tensor4 h = relu(conv2d(lateral, params.lateral_w, params.lateral_b, 1));
  const Tensor4 fused = relu(conv2d(concat_channels(u, h), params.fuse_w, params.fuse_b, 1));
  return subpixel_conv(fused, params.up_w, params.up_b, cfg.upscale, cfg.subpixel_kernel / 2);
}

PathwayConfig PathwayConfig::with_levels(int levels) {
  if (levels < 1) throw std::invalid_argument("pathway needs at least one level");
  PathwayConfig cfg;
  cfg.module_channels.clear();
  int channels = 256;
  for (int i = 0; i <= levels; ++i) {
    if (channels < 1) throw std::invalid_argument("too many levels for a 256-channel top");
    cfg.module_channels.push_back(channels);
    channels /= 2;
  }
  return cfg;
}

void PathwayConfig::validate() const {
  if (module_channels.size() < 2) {
    throw std::invalid_argument("pathway schedule needs a top width and at least one module");
  }
  for (int c : module_channels) {
    if (c < 1) throw std::invalid_argument("pathway channel counts must be >= 1");
  }
  if (upscale < 1) throw std::invalid_argument("pathway upscale must be >= 1");
}

RefinementConfig PathwayConfig::module_config(int index, int lateral_channels) const {
  const int width = module_channels[static_cast<std::size_t>(index) + 1];
  RefinementConfig cfg;
  cfg.k_u = module_channels[static_cast<std::size_t>(index)];
  cfg.k_h = lateral_channels;
  cfg.k_u_reduced = width;
  cfg.k_h_reduced = width;
  cfg.k_d = width;
  cfg.upscale = upscale;
  cfg.subpixel_kernel = subpixel_kernel;
  return cfg;
}

PathwayParams random_pathway_params(const PathwayConfig& cfg,
                                    const std::vector<Shape4>& side_shapes, SeededRng& rng) {
  cfg.validate();
  if (static_cast<int>(side_shapes.size()) != cfg.module_count()) {
    throw std::invalid_argument("need one side feature per refinement module");
  }
  PathwayParams p;
  p.seed_w = Tensor4(Shape4{cfg.module_channels.front(), side_shapes.front().c, 3, 3});
  fill_fan_in(p.seed_w, rng);
  p.seed_b.assign(static_cast<std::size_t>(cfg.module_channels.front()), 0.0);
  for (int i = 0; i < cfg.module_count(); ++i) {
    p.modules.push_back(
        random_params(cfg.module_config(i, side_shapes[static_cast<std::size_t>(i)].c), rng));
  }
  return p;
}

Tensor4 refinement_pathway(const std::vector<Tensor4>& side_features, const PathwayConfig& cfg,
                           const PathwayParams& params, PathwayTrace* trace) {
  cfg.validate();
  if (side_features.empty() || static_cast<int>(side_features.size()) != cfg.module_count()) {
    throw std::invalid_argument("pathway: expected " + std::to_string(cfg.module_count()) +
                                " side features, got " + std::to_string(side_features.size()));
  }
  if (params.modules.size() != side_features.size()) {
    throw std::invalid_argument("pathway: parameter count does not match module count");
  }
  Tensor4 running = relu(conv2d(side_features.front(), params.seed_w, params.seed_b, 1));
  if (trace != nullptr) {
    trace->steps.push_back({"top", side_features.front().shape(), side_features.front().shape(),
                            running.shape()});
  }
  for (std::size_t i = 0; i < side_features.size(); ++i) {
    const Tensor4& lateral = side_features[i];
    if (lateral.height() != running.height() || lateral.width() != running.width()) {
      throw std::invalid_argument("pathway: side feature " + std::to_string(i) + " is " +
                                  lateral.shape().str() + " but the running map is " +
                                  running.shape().str());
    }
    const RefinementConfig mcfg = cfg.module_config(static_cast<int>(i), lateral.channels());
    Tensor4 next = refinement_module(running, lateral, mcfg, params.modules[i]);
    if (trace != nullptr) {
      trace->steps.push_back(
          {"refine" + std::to_string(i + 1), running.shape(), lateral.shape(), next.shape()});
    }
    running = std::move(next);
  }
  return running;
}

}  // namespace crispbench::net

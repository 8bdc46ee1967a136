#pragma once

#include <vector>

#include "angio/image.hpp"

namespace angio {

/// Bilinear sample with border-clamped coordinates. Exposed because the
/// flow estimator and the synthetic generator warp through the same rule.
double sample_bilinear_clamped(const Plane& p, double x, double y);

/// Warp src through a flow field combined with per-pixel kernels:
///   out(x) = sum_r K(x,r) * bilinear(src, x + flow(x) + offset(r))
/// with tap offsets -k/2+1 .. k/2 on each axis. Zero flow with a delta
/// kernel is a bitwise identity.
Image adaptive_warp(const Image& src, const FlowField& flow, const KernelField& kernels);

struct WarpVjp {
    Plane d_src;
    FlowField d_flow;
    std::vector<double> d_kernels; // H*W*k*k, same layout as KernelField
};

/// VJPs of adaptive_warp w.r.t. source image, flow, and kernel weights.
/// d_flow uses the analytic spatial derivative of the bilinear sampler,
/// which is zero where the clamped coordinate saturates.
WarpVjp adaptive_warp_vjp(const Image& src, const FlowField& flow,
                          const KernelField& kernels, const Plane& upstream);

/// Time-weighted blend Ihat = clamp01((1-t)*warped0 + t*warped1 + residual).
Image blend(const Image& warped0, const Image& warped1, double t,
            const Image* residual = nullptr);

} // namespace angio

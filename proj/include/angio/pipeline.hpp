#pragma once

#include <optional>
#include <string>
#include <vector>

#include "angio/estimators.hpp"
#include "angio/image.hpp"
#include "angio/loss.hpp"
#include "angio/projection.hpp"

namespace angio {

enum class KernelMode { delta, uniform };

struct PipelineConfig {
    std::vector<double> t_values{0.5};
    FlowEstimatorConfig flow;
    DepthProviderKind depth = DepthProviderKind::constant(1.0);
    KernelMode kernel_mode = KernelMode::delta;
    int kernel_size = 4;
    LossWeights loss;
    FeatureKind structure_feature = FeatureKind::sobel_magnitude;
    int threads = 1;

    void validate() const {
        if (t_values.empty()) throw ConfigError("t_values must be non-empty");
        for (double t : t_values)
            if (!(t > 0.0 && t < 1.0))
                throw ConfigError("each t must lie strictly inside (0,1)");
        if (kernel_size < 2 || kernel_size % 2 != 0)
            throw ConfigError("kernel_size must be even and >= 2");
        if (threads < 1) throw ConfigError("threads must be >= 1");
        flow.validate();
        loss.validate();
    }
};

/// Optional bypasses: inject ground-truth flows or depths (all four are
/// independent) and carry frame indices for file-backed depth providers.
struct PipelineOverrides {
    const FlowField* flow_0_to_1 = nullptr;
    const FlowField* flow_1_to_0 = nullptr;
    const DepthMap* depth0 = nullptr;
    const DepthMap* depth1 = nullptr;
    int frame_index0 = -1;
    int frame_index1 = -1;
};

struct InterpolationDiagnostics {
    FlowField flow_0_to_1, flow_1_to_0;
    ProjectionResult projection_t0, projection_t1; // pre-hole-fill
    FlowField flow_t0, flow_t1;                    // hole-filled
    Image warped0, warped1;
};

/// Full composition: bidirectional flow -> depth -> depth-aware projection
/// with hole filling -> adaptive warping -> (1-t)/t blend. The residual
/// hook of the synthesis stage defaults to zero.
Image interpolate(const Image& I0, const Image& I1, double t,
                  const PipelineConfig& cfg,
                  InterpolationDiagnostics* diagnostics = nullptr,
                  const PipelineOverrides* overrides = nullptr,
                  const Image* residual = nullptr);

/// Scalar surrogate for the synthesis network's free parameters:
///   alpha biases the blend weights to (1-t+alpha, t-alpha),
///   kappa sharpens the warp kernels exp(-kappa*|r|^2)/Z.
struct BlendParams {
    double alpha = 0.0;
    double kappa = 0.0;
};

/// Interpolate the middle frame of a triplet under the given parameters
/// (t = 0.5). Exposed so fitting and its tests share one definition.
Image interpolate_with_params(const Triplet& triplet, const PipelineConfig& cfg,
                              const BlendParams& params);

struct FitResult {
    BlendParams params;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_history;
};

/// Gradient descent on the mean total loss over triplets w.r.t.
/// (alpha, kappa); the learning rate halves every ceil(steps/5) steps.
/// Returns the best parameters seen, so final loss <= initial loss.
FitResult fit_blend_params(const std::vector<Triplet>& triplets,
                           const PipelineConfig& cfg, const BlendParams& init,
                           int steps, double lr);

} // namespace angio

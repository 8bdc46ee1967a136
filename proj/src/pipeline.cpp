#include "angio/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "angio/warping.hpp"

namespace angio {

namespace {

KernelField make_kernels(const PipelineConfig& cfg, int h, int w) {
    switch (cfg.kernel_mode) {
    case KernelMode::delta: return KernelField::delta(h, w, cfg.kernel_size);
    case KernelMode::uniform: return KernelField::uniform(h, w, cfg.kernel_size);
    }
    throw ConfigError("unknown kernel mode");
}

double squared_tap_radius(const KernelField& k, int tap) {
    const double dy = k.tap_offset(tap / k.k());
    const double dx = k.tap_offset(tap % k.k());
    return dx * dx + dy * dy;
}

// Flows, depths, and filled projections for one frame pair at one t; the
// part of the composition that does not depend on BlendParams.
struct ProjectedPair {
    FlowField flow_t0, flow_t1;
};

ProjectedPair project_pair(const Image& I0, const Image& I1, double t,
                           const PipelineConfig& cfg,
                           const PipelineOverrides* ov,
                           InterpolationDiagnostics* diag) {
    const PipelineOverrides none{};
    if (!ov) ov = &none;

    FlowField f01 = ov->flow_0_to_1 ? *ov->flow_0_to_1
                                    : estimate_flow(I0, I1, cfg.flow, cfg.threads);
    FlowField f10 = ov->flow_1_to_0 ? *ov->flow_1_to_0
                                    : estimate_flow(I1, I0, cfg.flow, cfg.threads);
    DepthMap d0 = ov->depth0 ? *ov->depth0
                             : provide_depth(cfg.depth, I0, ov->frame_index0);
    DepthMap d1 = ov->depth1 ? *ov->depth1
                             : provide_depth(cfg.depth, I1, ov->frame_index1);

    ProjectionResult p0 = project_flow(f01, d0, t, ProjectionDirection::to_frame0);
    ProjectionResult p1 = project_flow(f10, d1, t, ProjectionDirection::to_frame1);
    ProjectedPair out{fill_holes(p0), fill_holes(p1)};

    if (diag) {
        diag->flow_0_to_1 = std::move(f01);
        diag->flow_1_to_0 = std::move(f10);
        diag->flow_t0 = out.flow_t0;
        diag->flow_t1 = out.flow_t1;
        diag->projection_t0 = std::move(p0);
        diag->projection_t1 = std::move(p1);
    }
    return out;
}

} // namespace

Image interpolate(const Image& I0, const Image& I1, double t,
                  const PipelineConfig& cfg, InterpolationDiagnostics* diagnostics,
                  const PipelineOverrides* overrides, const Image* residual) {
    cfg.validate();
    if (!I0.same_size(I1)) throw ShapeError("input frames differ in size");
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie strictly inside (0,1)");

    const ProjectedPair pp = project_pair(I0, I1, t, cfg, overrides, diagnostics);
    const KernelField kernels = make_kernels(cfg, I0.height(), I0.width());
    Image warped0 = adaptive_warp(I0, pp.flow_t0, kernels);
    Image warped1 = adaptive_warp(I1, pp.flow_t1, kernels);
    Image out = blend(warped0, warped1, t, residual);
    if (diagnostics) {
        diagnostics->warped0 = std::move(warped0);
        diagnostics->warped1 = std::move(warped1);
    }
    return out;
}

Image interpolate_with_params(const Triplet& triplet, const PipelineConfig& cfg,
                              const BlendParams& params) {
    cfg.validate();
    const double t = 0.5;
    const ProjectedPair pp = project_pair(triplet.prev, triplet.next, t, cfg, nullptr, nullptr);
    const KernelField kernels = KernelField::sharpness(
        triplet.prev.height(), triplet.prev.width(), cfg.kernel_size, params.kappa);
    const Image w0 = adaptive_warp(triplet.prev, pp.flow_t0, kernels);
    const Image w1 = adaptive_warp(triplet.next, pp.flow_t1, kernels);
    Plane out(w0.height(), w0.width());
    const double b0 = (1.0 - t) + params.alpha;
    const double b1 = t - params.alpha;
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(b0 * w0[i] + b1 * w1[i], 0.0, 1.0);
    return Image(std::move(out));
}

FitResult fit_blend_params(const std::vector<Triplet>& triplets,
                           const PipelineConfig& cfg, const BlendParams& init,
                           int steps, double lr) {
    cfg.validate();
    if (triplets.empty()) throw DataError("fit needs at least one triplet");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (lr < 0.0 || !std::isfinite(lr)) throw ConfigError("learning rate must be >= 0");
    if (!std::isfinite(init.alpha) || !std::isfinite(init.kappa))
        throw DomainError("initial parameters must be finite");

    const double t = 0.5;
    const int n = static_cast<int>(triplets.size());

    // The projected flows do not depend on (alpha, kappa); compute them once.
    std::vector<ProjectedPair> projected;
    projected.reserve(n);
    for (const Triplet& tr : triplets)
        projected.push_back(project_pair(tr.prev, tr.next, t, cfg, nullptr, nullptr));

    // Mean loss over triplets and its gradient w.r.t. (alpha, kappa).
    const auto evaluate = [&](const BlendParams& p, double* g_alpha, double* g_kappa) {
        double loss_sum = 0.0, ga = 0.0, gk = 0.0;
        const double b0 = (1.0 - t) + p.alpha;
        const double b1 = t - p.alpha;
        for (int i = 0; i < n; ++i) {
            const Triplet& tr = triplets[i];
            const KernelField kernels = KernelField::sharpness(
                tr.prev.height(), tr.prev.width(), cfg.kernel_size, p.kappa);
            const Image w0 = adaptive_warp(tr.prev, projected[i].flow_t0, kernels);
            const Image w1 = adaptive_warp(tr.next, projected[i].flow_t1, kernels);
            Plane pred(w0.height(), w0.width());
            Plane pass(w0.height(), w0.width()); // clamp subgradient mask
            for (size_t j = 0; j < pred.size(); ++j) {
                const double raw = b0 * w0[j] + b1 * w1[j];
                pred[j] = std::clamp(raw, 0.0, 1.0);
                pass[j] = (raw > 0.0 && raw < 1.0) ? 1.0 : 0.0;
            }
            const LossValue lv = total_loss_and_grad(Image(pred), tr.mid, cfg.loss,
                                                     cfg.structure_feature);
            loss_sum += lv.total;
            if (!g_alpha) continue;

            Plane up0(w0.height(), w0.width());
            Plane up1(w0.height(), w0.width());
            for (size_t j = 0; j < pred.size(); ++j) {
                const double g = lv.d_pred[j] * pass[j];
                ga += g * (w0[j] - w1[j]);
                up0[j] = g * b0;
                up1[j] = g * b1;
            }
            // Chain the kernel cotangents through dK_r/dkappa.
            const WarpVjp v0 = adaptive_warp_vjp(tr.prev, projected[i].flow_t0, kernels, up0);
            const WarpVjp v1 = adaptive_warp_vjp(tr.next, projected[i].flow_t1, kernels, up1);
            const int taps = kernels.taps();
            double mean_r2 = 0.0;
            for (int tap = 0; tap < taps; ++tap)
                mean_r2 += kernels.weight(0, 0, tap) * squared_tap_radius(kernels, tap);
            for (size_t px = 0; px < pred.size(); ++px) {
                for (int tap = 0; tap < taps; ++tap) {
                    const double dk_dkappa = kernels.weight(0, 0, tap) *
                                             (mean_r2 - squared_tap_radius(kernels, tap));
                    gk += (v0.d_kernels[px * taps + tap] + v1.d_kernels[px * taps + tap]) *
                          dk_dkappa;
                }
            }
        }
        if (g_alpha) {
            *g_alpha = ga / n;
            *g_kappa = gk / n;
        }
        return loss_sum / n;
    };

    const int decay_every = (steps + 4) / 5; // lr halves every ceil(steps/5) steps
    FitResult result;
    BlendParams params = init;
    BlendParams best = init;
    double best_loss = 0.0;

    for (int step = 0; step < steps; ++step) {
        double ga = 0.0, gk = 0.0;
        const double loss = evaluate(params, &ga, &gk);
        if (!std::isfinite(loss))
            throw NumericError("non-finite loss at fit step " + std::to_string(step));
        result.loss_history.push_back(loss);
        if (step == 0) {
            result.initial_loss = loss;
            best_loss = loss;
        } else if (loss < best_loss) {
            best_loss = loss;
            best = params;
        }
        const double rate = lr * std::pow(0.5, step / decay_every);
        params.alpha -= rate * ga;
        params.kappa -= rate * gk;
        if (!std::isfinite(params.alpha) || !std::isfinite(params.kappa))
            throw NumericError("non-finite parameters at fit step " + std::to_string(step));
    }
    const double final_loss = evaluate(params, nullptr, nullptr);
    if (!std::isfinite(final_loss))
        throw NumericError("non-finite loss at fit step " + std::to_string(steps));
    result.loss_history.push_back(final_loss);
    if (final_loss < best_loss) {
        best_loss = final_loss;
        best = params;
    }
    result.params = best;
    result.final_loss = best_loss;
    return result;
}

} // namespace angio

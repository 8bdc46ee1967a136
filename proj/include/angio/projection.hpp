#pragma once

#include <cstdint>
#include <vector>

#include "angio/image.hpp"

namespace angio {

/// Which intermediate flow is being produced. to_frame0 consumes the
/// forward flow F_{0->1} with depth D_0 and yields F_{t->0}; to_frame1
/// consumes F_{1->0} with D_1 and yields F_{t->1}.
enum class ProjectionDirection { to_frame0, to_frame1 };

/// Output of the depth-aware scatter before hole filling. `flow` holds the
/// scaled weighted mean at covered pixels and zero elsewhere; `coverage`
/// marks pixels whose source set is non-empty; `weight_sum` accumulates
/// sum(1/D) per target and is positive exactly where coverage is set.
struct ProjectionResult {
    FlowField flow;
    std::vector<uint8_t> coverage;
    Plane weight_sum;

    int height() const { return flow.height(); }
    int width() const { return flow.width(); }
    bool covered(int y, int x) const {
        return coverage[static_cast<size_t>(y) * flow.width() + x] != 0;
    }
};

/// Scatter a bidirectional flow to time t with inverse-depth weighting.
///
/// For to_frame0, each source pixel y lands on x = round(y + t*F(y)) and
/// contributes weight 1/D(y); the covered output is -t times the weighted
/// mean of contributing flows. For to_frame1 the target uses (1-t)*F(y)
/// and the scale is -(1-t). Targets outside the frame are dropped.
/// Sources accumulate in ascending row-major order.
ProjectionResult project_flow(const FlowField& src_flow, const DepthMap& src_depth,
                              double t, ProjectionDirection direction);

/// Fill uncovered pixels by synchronous 4-neighbor diffusion: each pass,
/// every uncovered pixel with at least one covered 4-neighbor takes the
/// mean of those neighbors' values and becomes covered; a pass reads only
/// the previous pass's coverage and values. Repeats until fully covered.
/// Throws DomainError when no pixel is covered.
FlowField fill_holes(const ProjectionResult& result);

/// Reference semantics of the projection: for every target pixel,
/// enumerate all sources and test membership directly. Quadratic; grids
/// are capped at 64x64. Intended for tests.
ProjectionResult project_flow_oracle(const FlowField& src_flow, const DepthMap& src_depth,
                                     double t, ProjectionDirection direction);

struct ProjectionVjp {
    FlowField d_src_flow;
    Plane d_src_depth;
};

/// Vector-Jacobian product of fill_holes(project_flow(...)) with respect to
/// the source flow and depth. The membership sets are treated as locally
/// constant (round(.) is piecewise constant); upstream cotangents on
/// hole-filled pixels are routed back through the diffusion averages to
/// covered pixels first.
ProjectionVjp project_flow_vjp(const FlowField& src_flow, const DepthMap& src_depth,
                               double t, ProjectionDirection direction,
                               const FlowField& upstream);

} // namespace angio

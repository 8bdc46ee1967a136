#include "angio/projection.hpp"

#include <array>
#include <cmath>

namespace angio {

namespace {

struct ScatterSums {
    Plane num_u, num_v; // sum of (1/D) * flow
    Plane wsum;         // sum of 1/D
};

void check_projection_inputs(const FlowField& flow, const DepthMap& depth, double t) {
    if (flow.height() != depth.height() || flow.width() != depth.width())
        throw ShapeError("flow and depth dimensions differ");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0,1]");
}

// Fraction of the source flow that carries a pixel from its own frame to
// time t.
double advect_fraction(double t, ProjectionDirection dir) {
    return dir == ProjectionDirection::to_frame0 ? t : 1.0 - t;
}

double output_scale(double t, ProjectionDirection dir) {
    return dir == ProjectionDirection::to_frame0 ? -t : -(1.0 - t);
}

ScatterSums scatter(const FlowField& flow, const DepthMap& depth, double s) {
    const int h = flow.height(), w = flow.width();
    ScatterSums sums{Plane(h, w, 0.0), Plane(h, w, 0.0), Plane(h, w, 0.0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fu = flow.u().at(y, x);
            const double fv = flow.v().at(y, x);
            const double tx = round_half_away(x + s * fu);
            const double ty = round_half_away(y + s * fv);
            if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
            const int xi = static_cast<int>(tx);
            const int yi = static_cast<int>(ty);
            const double inv_d = 1.0 / depth.at(y, x);
            sums.num_u.at(yi, xi) += inv_d * fu;
            sums.num_v.at(yi, xi) += inv_d * fv;
            sums.wsum.at(yi, xi) += inv_d;
        }
    }
    return sums;
}

ProjectionResult finalize(ScatterSums sums, double scale) {
    const int h = sums.wsum.height(), w = sums.wsum.width();
    Plane out_u(h, w, 0.0), out_v(h, w, 0.0);
    std::vector<uint8_t> coverage(static_cast<size_t>(h) * w, 0);
    for (size_t i = 0; i < coverage.size(); ++i) {
        if (sums.wsum[i] > 0.0) {
            coverage[i] = 1;
            out_u[i] = scale * (sums.num_u[i] / sums.wsum[i]);
            out_v[i] = scale * (sums.num_v[i] / sums.wsum[i]);
        }
    }
    ProjectionResult r;
    r.flow = FlowField(std::move(out_u), std::move(out_v));
    r.coverage = std::move(coverage);
    r.weight_sum = std::move(sums.wsum);
    return r;
}

// One fill event: pixel `target` became covered from `n` previously
// covered 4-neighbors.
struct FillEvent {
    int target;
    std::array<int, 4> sources;
    int n;
};

FlowField fill_holes_impl(const ProjectionResult& result, std::vector<FillEvent>* trace) {
    const int h = result.height(), w = result.width();
    size_t covered_count = 0;
    for (uint8_t c : result.coverage) covered_count += c;
    if (covered_count == 0)
        throw DomainError("fill_holes requires at least one covered pixel");

    Plane u = result.flow.u();
    Plane v = result.flow.v();
    std::vector<uint8_t> cov = result.coverage;
    std::vector<uint8_t> cov_next = cov;
    Plane u_next = u, v_next = v;

    while (covered_count < static_cast<size_t>(h) * w) {
        size_t newly = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t idx = static_cast<size_t>(y) * w + x;
                if (cov[idx]) continue;
                FillEvent ev{static_cast<int>(idx), {}, 0};
                double su = 0.0, sv = 0.0;
                const int ny[4] = {y - 1, y + 1, y, y};
                const int nx[4] = {x, x, x - 1, x + 1};
                for (int k = 0; k < 4; ++k) {
                    if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
                    const size_t nidx = static_cast<size_t>(ny[k]) * w + nx[k];
                    if (!cov[nidx]) continue;
                    su += u[nidx];
                    sv += v[nidx];
                    ev.sources[ev.n++] = static_cast<int>(nidx);
                }
                if (ev.n == 0) continue;
                u_next[idx] = su / ev.n;
                v_next[idx] = sv / ev.n;
                cov_next[idx] = 1;
                ++newly;
                if (trace) trace->push_back(ev);
            }
        }
        covered_count += newly;
        cov = cov_next;
        u = u_next;
        v = v_next;
    }
    return FlowField(std::move(u), std::move(v));
}

} // namespace

ProjectionResult project_flow(const FlowField& src_flow, const DepthMap& src_depth,
                              double t, ProjectionDirection direction) {
    check_projection_inputs(src_flow, src_depth, t);
    ScatterSums sums = scatter(src_flow, src_depth, advect_fraction(t, direction));
    return finalize(std::move(sums), output_scale(t, direction));
}

ProjectionResult project_flow_oracle(const FlowField& src_flow, const DepthMap& src_depth,
                                     double t, ProjectionDirection direction) {
    check_projection_inputs(src_flow, src_depth, t);
    const int h = src_flow.height(), w = src_flow.width();
    if (h > 64 || w > 64) throw ConfigError("oracle is limited to grids <= 64x64");
    const double s = advect_fraction(t, direction);
    const double scale = output_scale(t, direction);

    ScatterSums sums{Plane(h, w, 0.0), Plane(h, w, 0.0), Plane(h, w, 0.0)};
    for (int ty = 0; ty < h; ++ty) {
        for (int tx = 0; tx < w; ++tx) {
            // Enumerate every source in ascending row-major order and test
            // membership; accumulation order matches the scatter path.
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double fu = src_flow.u().at(y, x);
                    const double fv = src_flow.v().at(y, x);
                    if (round_half_away(x + s * fu) != tx) continue;
                    if (round_half_away(y + s * fv) != ty) continue;
                    const double inv_d = 1.0 / src_depth.at(y, x);
                    sums.num_u.at(ty, tx) += inv_d * fu;
                    sums.num_v.at(ty, tx) += inv_d * fv;
                    sums.wsum.at(ty, tx) += inv_d;
                }
            }
        }
    }
    return finalize(std::move(sums), scale);
}

FlowField fill_holes(const ProjectionResult& result) {
    return fill_holes_impl(result, nullptr);
}

ProjectionVjp project_flow_vjp(const FlowField& src_flow, const DepthMap& src_depth,
                               double t, ProjectionDirection direction,
                               const FlowField& upstream) {
    check_projection_inputs(src_flow, src_depth, t);
    if (!upstream.same_size(src_flow))
        throw ShapeError("upstream cotangent dimensions differ");

    const int h = src_flow.height(), w = src_flow.width();
    const double s = advect_fraction(t, direction);
    const double scale = output_scale(t, direction);

    ScatterSums sums = scatter(src_flow, src_depth, s);
    ProjectionResult primal = finalize(
        ScatterSums{sums.num_u, sums.num_v, sums.wsum}, scale);

    std::vector<FillEvent> trace;
    fill_holes_impl(primal, &trace);

    // Route cotangents on filled pixels back to covered pixels: reverse the
    // fill events so later passes distribute before the pixels they read.
    Plane cot_u = upstream.u();
    Plane cot_v = upstream.v();
    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
        const double gu = cot_u[it->target] / it->n;
        const double gv = cot_v[it->target] / it->n;
        for (int k = 0; k < it->n; ++k) {
            cot_u[it->sources[k]] += gu;
            cot_v[it->sources[k]] += gv;
        }
        cot_u[it->target] = 0.0;
        cot_v[it->target] = 0.0;
    }

    // Covered output at x: out_c = scale * num_c(x) / W(x). For source y in
    // S(x): d out_c / d f_{y,c} = scale * w_y / W, and
    // d out_c / d w_y = scale * (f_{y,c} - num_c/W) / W with w_y = 1/D(y).
    Plane d_u(h, w, 0.0), d_v(h, w, 0.0), d_depth(h, w, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fu = src_flow.u().at(y, x);
            const double fv = src_flow.v().at(y, x);
            const double tx = round_half_away(x + s * fu);
            const double ty = round_half_away(y + s * fv);
            if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
            const size_t tidx = static_cast<size_t>(ty) * w + static_cast<size_t>(tx);
            const double W = sums.wsum[tidx];
            const double depth_y = src_depth.at(y, x);
            const double inv_d = 1.0 / depth_y;
            const double gu = cot_u[tidx];
            const double gv = cot_v[tidx];
            d_u.at(y, x) = gu * scale * inv_d / W;
            d_v.at(y, x) = gv * scale * inv_d / W;
            const double mean_u = sums.num_u[tidx] / W;
            const double mean_v = sums.num_v[tidx] / W;
            const double d_w = (gu * scale * (fu - mean_u) + gv * scale * (fv - mean_v)) / W;
            d_depth.at(y, x) = d_w * (-inv_d * inv_d);
        }
    }
    ProjectionVjp out;
    out.d_src_flow = FlowField(std::move(d_u), std::move(d_v));
    out.d_src_depth = std::move(d_depth);
    return out;
}

} // namespace angio

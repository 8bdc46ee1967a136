#include "angio/warping.hpp"

#include <algorithm>
#include <cmath>

namespace angio {

namespace {

struct BilinearTaps {
    int x0, x1, y0, y1;
    double fx, fy;
    bool sat_x, sat_y; // clamped coordinate saturated (derivative is zero)
};

BilinearTaps locate(const Plane& p, double x, double y) {
    const int w = p.width(), h = p.height();
    BilinearTaps t{};
    t.sat_x = (x <= 0.0 || x >= w - 1);
    t.sat_y = (y <= 0.0 || y >= h - 1);
    const double cx = std::clamp(x, 0.0, static_cast<double>(w - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(h - 1));
    t.x0 = static_cast<int>(std::floor(cx));
    t.y0 = static_cast<int>(std::floor(cy));
    t.fx = cx - t.x0;
    t.fy = cy - t.y0;
    t.x1 = std::min(t.x0 + 1, w - 1);
    t.y1 = std::min(t.y0 + 1, h - 1);
    return t;
}

void check_warp_shapes(const Image& src, const FlowField& flow, const KernelField& kernels) {
    if (src.height() != flow.height() || src.width() != flow.width())
        throw ShapeError("src and flow dimensions differ");
    if (src.height() != kernels.height() || src.width() != kernels.width())
        throw ShapeError("src and kernel field dimensions differ");
}

} // namespace

double sample_bilinear_clamped(const Plane& p, double x, double y) {
    const BilinearTaps t = locate(p, x, y);
    const double top = (1.0 - t.fx) * p.at(t.y0, t.x0) + t.fx * p.at(t.y0, t.x1);
    const double bot = (1.0 - t.fx) * p.at(t.y1, t.x0) + t.fx * p.at(t.y1, t.x1);
    return (1.0 - t.fy) * top + t.fy * bot;
}

Image adaptive_warp(const Image& src, const FlowField& flow, const KernelField& kernels) {
    check_warp_shapes(src, flow, kernels);
    const int h = src.height(), w = src.width(), k = kernels.k();
    const Plane& sp = src.plane();
    Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x + flow.u().at(y, x);
            const double py = y + flow.v().at(y, x);
            double acc = 0.0;
            int tap = 0;
            for (int j = 0; j < k; ++j) {
                const double dy = kernels.tap_offset(j);
                for (int i = 0; i < k; ++i, ++tap) {
                    const double wgt = kernels.weight(y, x, tap);
                    if (wgt == 0.0) continue; // keeps the delta kernel bit-exact
                    const double dx = kernels.tap_offset(i);
                    acc += wgt * sample_bilinear_clamped(sp, px + dx, py + dy);
                }
            }
            out.at(y, x) = acc;
        }
    }
    return Image(std::move(out));
}

WarpVjp adaptive_warp_vjp(const Image& src, const FlowField& flow,
                          const KernelField& kernels, const Plane& upstream) {
    check_warp_shapes(src, flow, kernels);
    if (upstream.height() != src.height() || upstream.width() != src.width())
        throw ShapeError("upstream cotangent dimensions differ");
    const int h = src.height(), w = src.width(), k = kernels.k();
    const int taps = kernels.taps();
    const Plane& sp = src.plane();

    WarpVjp out;
    out.d_src = Plane(h, w, 0.0);
    out.d_flow = FlowField(h, w);
    out.d_kernels.assign(static_cast<size_t>(h) * w * taps, 0.0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double up = upstream.at(y, x);
            const double px = x + flow.u().at(y, x);
            const double py = y + flow.v().at(y, x);
            double gu = 0.0, gv = 0.0;
            int tap = 0;
            for (int j = 0; j < k; ++j) {
                const double dy = kernels.tap_offset(j);
                for (int i = 0; i < k; ++i, ++tap) {
                    const double dx = kernels.tap_offset(i);
                    const BilinearTaps bt = locate(sp, px + dx, py + dy);
                    const double v00 = sp.at(bt.y0, bt.x0), v01 = sp.at(bt.y0, bt.x1);
                    const double v10 = sp.at(bt.y1, bt.x0), v11 = sp.at(bt.y1, bt.x1);
                    const double top = (1.0 - bt.fx) * v00 + bt.fx * v01;
                    const double bot = (1.0 - bt.fx) * v10 + bt.fx * v11;
                    const double value = (1.0 - bt.fy) * top + bt.fy * bot;

                    // d out / d K(x,r) = sampled value, independent of the weight.
                    out.d_kernels[(static_cast<size_t>(y) * w + x) * taps + tap] = up * value;

                    const double wgt = kernels.weight(y, x, tap);
                    if (wgt == 0.0) continue;

                    const double g = up * wgt;
                    // source image cotangent: bilinear weights, accumulated
                    // because clamped corners can coincide.
                    out.d_src.at(bt.y0, bt.x0) += g * (1.0 - bt.fy) * (1.0 - bt.fx);
                    out.d_src.at(bt.y0, bt.x1) += g * (1.0 - bt.fy) * bt.fx;
                    out.d_src.at(bt.y1, bt.x0) += g * bt.fy * (1.0 - bt.fx);
                    out.d_src.at(bt.y1, bt.x1) += g * bt.fy * bt.fx;

                    if (!bt.sat_x) {
                        const double dvdx = (1.0 - bt.fy) * (v01 - v00) + bt.fy * (v11 - v10);
                        gu += g * dvdx;
                    }
                    if (!bt.sat_y) {
                        const double dvdy = bot - top;
                        gv += g * dvdy;
                    }
                }
            }
            out.d_flow.u().at(y, x) = gu;
            out.d_flow.v().at(y, x) = gv;
        }
    }
    return out;
}

Image blend(const Image& warped0, const Image& warped1, double t, const Image* residual) {
    if (!warped0.same_size(warped1))
        throw ShapeError("blend operands differ in size");
    if (residual && !residual->same_size(warped0))
        throw ShapeError("residual dimensions differ");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("blend t must lie in [0,1]");
    const int h = warped0.height(), w = warped0.width();
    Plane out(h, w);
    for (size_t i = 0; i < out.size(); ++i) {
        double v = (1.0 - t) * warped0[i] + t * warped1[i];
        if (residual) v += (*residual)[i];
        out[i] = std::clamp(v, 0.0, 1.0);
    }
    return Image(std::move(out));
}

} // namespace angio

#include "angio/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "angio/io.hpp"
#include "angio/parallel.hpp"
#include "angio/warping.hpp"

namespace angio {

namespace {

// Presmoothing applied to the luminance planes; the heavier blur guards
// each 2x decimation against aliasing.
constexpr double kPresmoothSigma = 0.8;
constexpr double kDecimateSigma = 1.1;

Plane gaussian_smooth(const Plane& src, double sigma, int threads) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int h = src.height(), w = src.width();
    Plane tmp(h, w), out(h, w);
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * src.at(y, std::clamp(x + i, 0, w - 1));
            tmp.at(y, x) = acc;
        }
    });
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at(std::clamp(y + i, 0, h - 1), x);
            out.at(y, x) = acc;
        }
    });
    return out;
}

/// Bilinear resize with half-pixel centers (area mapping), clamped.
Plane resize_bilinear(const Plane& src, int nh, int nw) {
    const int h = src.height(), w = src.width();
    Plane out(nh, nw);
    const double sy = static_cast<double>(h) / nh;
    const double sx = static_cast<double>(w) / nw;
    for (int y = 0; y < nh; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < nw; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            out.at(y, x) = sample_bilinear_clamped(src, fx, fy);
        }
    }
    return out;
}

Plane gradient_x(const Plane& p) {
    const int h = p.height(), w = p.width();
    Plane g(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            g.at(y, x) = 0.5 * (p.at(y, std::min(x + 1, w - 1)) - p.at(y, std::max(x - 1, 0)));
    return g;
}

Plane gradient_y(const Plane& p) {
    const int h = p.height(), w = p.width();
    Plane g(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            g.at(y, x) = 0.5 * (p.at(std::min(y + 1, h - 1), x) - p.at(std::max(y - 1, 0), x));
    return g;
}

Plane warp_by_flow(const Plane& p, const Plane& u, const Plane& v, int threads) {
    const int h = p.height(), w = p.width();
    Plane out(h, w);
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x)
            out.at(y, x) = sample_bilinear_clamped(p, x + u.at(y, x), y + v.at(y, x));
    });
    return out;
}

// Re-linearization cycles per pyramid level. One cycle leaves a shrinkage
// bias on larger motions; three drive each level to its own fixed point.
constexpr int kWarpsPerLevel = 3;

// Horn-Schunck at one scale: warp, linearize, run fixed-count Jacobi
// sweeps, repeat. The Jacobi form keeps the result independent of the
// number of worker threads.
void horn_schunck_level(const Plane& i1, const Plane& i2, Plane& u, Plane& v,
                        double alpha, int iterations, int threads) {
    const int h = i1.height(), w = i1.width();
    const double alpha2 = alpha * alpha;

    const Plane i2x_full = gradient_x(i2);
    const Plane i2y_full = gradient_y(i2);

    Plane c(h, w), un(h, w), vn(h, w);
    for (int warp = 0; warp < kWarpsPerLevel; ++warp) {
        const Plane i2w = warp_by_flow(i2, u, v, threads);
        const Plane ix = warp_by_flow(i2x_full, u, v, threads);
        const Plane iy = warp_by_flow(i2y_full, u, v, threads);

        // Linearized data residual: r(u,v) = ix*u + iy*v + c.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                c.at(y, x) = i2w.at(y, x) - i1.at(y, x) -
                             ix.at(y, x) * u.at(y, x) - iy.at(y, x) * v.at(y, x);

        for (int it = 0; it < iterations; ++it) {
            parallel_for(0, h, threads, [&](int y) {
                const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
                for (int x = 0; x < w; ++x) {
                    const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
                    const double ubar =
                        (u.at(ym, x) + u.at(yp, x) + u.at(y, xm) + u.at(y, xp)) / 6.0 +
                        (u.at(ym, xm) + u.at(ym, xp) + u.at(yp, xm) + u.at(yp, xp)) / 12.0;
                    const double vbar =
                        (v.at(ym, x) + v.at(yp, x) + v.at(y, xm) + v.at(y, xp)) / 6.0 +
                        (v.at(ym, xm) + v.at(ym, xp) + v.at(yp, xm) + v.at(yp, xp)) / 12.0;
                    const double gx = ix.at(y, x), gy = iy.at(y, x);
                    const double r = (gx * ubar + gy * vbar + c.at(y, x)) /
                                     (alpha2 + gx * gx + gy * gy);
                    un.at(y, x) = ubar - gx * r;
                    vn.at(y, x) = vbar - gy * r;
                }
            });
            std::swap(u, un);
            std::swap(v, vn);
        }
    }
}

} // namespace

FlowField estimate_flow(const Image& a, const Image& b,
                        const FlowEstimatorConfig& cfg, int threads) {
    cfg.validate();
    if (!a.same_size(b)) throw ShapeError("flow estimation inputs differ in size");
    const int levels = cfg.pyramid_levels;
    const double coarsest_scale = std::pow(cfg.downscale_factor, levels - 1);
    if (std::min(a.height(), a.width()) * coarsest_scale < 8.0)
        throw ConfigError("image too small for the requested pyramid depth");

    // Intensities scaled to [0,255] so the default alpha works at the
    // classic Horn-Schunck magnitude.
    Plane la(a.height(), a.width()), lb(a.height(), a.width());
    for (size_t i = 0; i < la.size(); ++i) {
        la[i] = a[i] * 255.0;
        lb[i] = b[i] * 255.0;
    }
    la = gaussian_smooth(la, kPresmoothSigma, threads);
    lb = gaussian_smooth(lb, kPresmoothSigma, threads);

    std::vector<Plane> pa{la}, pb{lb};
    for (int l = 1; l < levels; ++l) {
        const Plane& prev_a = pa.back();
        const Plane& prev_b = pb.back();
        const int nh = std::max(1, static_cast<int>(std::ceil(prev_a.height() * cfg.downscale_factor)));
        const int nw = std::max(1, static_cast<int>(std::ceil(prev_a.width() * cfg.downscale_factor)));
        pa.push_back(resize_bilinear(gaussian_smooth(prev_a, kDecimateSigma, threads), nh, nw));
        pb.push_back(resize_bilinear(gaussian_smooth(prev_b, kDecimateSigma, threads), nh, nw));
    }

    Plane u(pa.back().height(), pa.back().width(), 0.0);
    Plane v(pa.back().height(), pa.back().width(), 0.0);
    for (int l = levels - 1; l >= 0; --l) {
        if (l != levels - 1) {
            // Prolongate to the finer grid; displacement values scale with
            // the grid refinement.
            Plane u2 = resize_bilinear(u, pa[l].height(), pa[l].width());
            Plane v2 = resize_bilinear(v, pa[l].height(), pa[l].width());
            const double gain = 1.0 / cfg.downscale_factor;
            for (size_t i = 0; i < u2.size(); ++i) {
                u2[i] *= gain;
                v2[i] *= gain;
            }
            u = std::move(u2);
            v = std::move(v2);
        }
        horn_schunck_level(pa[l], pb[l], u, v, cfg.alpha, cfg.iterations_per_level, threads);
    }
    return FlowField(std::move(u), std::move(v));
}

DepthMap provide_depth(const DepthProviderKind& kind, const Image& frame, int frame_index) {
    switch (kind.tag()) {
    case DepthProviderKind::Tag::constant:
        return DepthMap(frame.height(), frame.width(), kind.constant_value());
    case DepthProviderKind::Tag::from_file: {
        DepthMap d = read_depth(kind.path());
        if (d.height() != frame.height() || d.width() != frame.width())
            throw ShapeError("depth file dimensions do not match the frame");
        return d;
    }
    case DepthProviderKind::Tag::synthetic_ground_truth: {
        if (frame_index < 0)
            throw ConfigError("synthetic depth provider needs a frame index");
        char name[64];
        std::snprintf(name, sizeof(name), "/depths/depth_%06d.flo", frame_index);
        DepthMap d = read_depth(kind.path() + name);
        if (d.height() != frame.height() || d.width() != frame.width())
            throw ShapeError("depth file dimensions do not match the frame");
        return d;
    }
    }
    throw ConfigError("unknown depth provider");
}

} // namespace angio

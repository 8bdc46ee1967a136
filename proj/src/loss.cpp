#include "angio/loss.hpp"

#include <algorithm>
#include <cmath>

namespace angio {

namespace {

void check_pair(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw ShapeError("loss operands differ in size");
}

// Keeps the magnitude differentiable at zero gradient response.
constexpr double kMagnitudeFloor = 1e-12;

const int kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
const int kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

void sobel_pair(const Plane& p, Plane& gx, Plane& gy) {
    const int h = p.height(), w = p.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0, sy = 0.0;
            for (int j = -1; j <= 1; ++j) {
                const int yy = std::clamp(y + j, 0, h - 1);
                for (int i = -1; i <= 1; ++i) {
                    const int xx = std::clamp(x + i, 0, w - 1);
                    const double v = p.at(yy, xx);
                    sx += kSobelX[j + 1][i + 1] * v;
                    sy += kSobelY[j + 1][i + 1] * v;
                }
            }
            gx.at(y, x) = sx;
            gy.at(y, x) = sy;
        }
    }
}

Plane feature_map(const Plane& p, FeatureKind phi) {
    if (phi == FeatureKind::identity) return p;
    return sobel_magnitude(p);
}

// Adjoint of the replicated-border Sobel + magnitude chain.
Plane sobel_magnitude_vjp(const Plane& p, const Plane& upstream) {
    const int h = p.height(), w = p.width();
    Plane gx(h, w), gy(h, w);
    sobel_pair(p, gx, gy);
    Plane d(h, w, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = std::sqrt(gx.at(y, x) * gx.at(y, x) +
                                       gy.at(y, x) * gy.at(y, x) +
                                       kMagnitudeFloor * kMagnitudeFloor);
            const double dgx = upstream.at(y, x) * gx.at(y, x) / m;
            const double dgy = upstream.at(y, x) * gy.at(y, x) / m;
            for (int j = -1; j <= 1; ++j) {
                const int yy = std::clamp(y + j, 0, h - 1);
                for (int i = -1; i <= 1; ++i) {
                    const int xx = std::clamp(x + i, 0, w - 1);
                    d.at(yy, xx) += dgx * kSobelX[j + 1][i + 1] + dgy * kSobelY[j + 1][i + 1];
                }
            }
        }
    }
    return d;
}

} // namespace

Plane sobel_magnitude(const Plane& p) {
    const int h = p.height(), w = p.width();
    Plane gx(h, w), gy(h, w), m(h, w);
    sobel_pair(p, gx, gy);
    for (size_t i = 0; i < m.size(); ++i)
        m[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] +
                         kMagnitudeFloor * kMagnitudeFloor);
    return m;
}

double reconstruction_loss(const Image& pred, const Image& gt, double epsilon) {
    check_pair(pred, gt);
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    double sum = 0.0;
    for (size_t i = 0; i < pred.size(); ++i)
        sum += charbonnier(std::fabs(pred[i] - gt[i]), epsilon);
    return sum;
}

double structure_loss(const Image& pred, const Image& gt, FeatureKind phi, double epsilon) {
    check_pair(pred, gt);
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    const Plane fp = feature_map(pred.plane(), phi);
    const Plane fg = feature_map(gt.plane(), phi);
    double sum = 0.0;
    for (size_t i = 0; i < fp.size(); ++i)
        sum += charbonnier(std::fabs(fp[i] - fg[i]), epsilon);
    return sum;
}

LossValue total_loss_and_grad(const Image& pred, const Image& gt,
                              const LossWeights& weights, FeatureKind phi) {
    check_pair(pred, gt);
    weights.validate();
    const double eps = weights.epsilon;
    const int h = pred.height(), w = pred.width();

    LossValue out;
    out.d_pred = Plane(h, w, 0.0);

    // l1 term and its gradient: d rho(|d|)/d pred = d / sqrt(d^2 + eps^2).
    double l1 = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - gt[i];
        const double rho = std::sqrt(d * d + eps * eps);
        l1 += rho;
        out.d_pred[i] = weights.lambda1 * d / rho;
    }

    // l2 term: charbonnier on feature maps, chained through the feature.
    const Plane fp = feature_map(pred.plane(), phi);
    const Plane fg = feature_map(gt.plane(), phi);
    double l2 = 0.0;
    Plane d_feature(h, w);
    for (size_t i = 0; i < fp.size(); ++i) {
        const double d = fp[i] - fg[i];
        const double rho = std::sqrt(d * d + eps * eps);
        l2 += rho;
        d_feature[i] = weights.lambda2 * d / rho;
    }
    if (phi == FeatureKind::identity) {
        for (size_t i = 0; i < pred.size(); ++i) out.d_pred[i] += d_feature[i];
    } else {
        const Plane back = sobel_magnitude_vjp(pred.plane(), d_feature);
        for (size_t i = 0; i < pred.size(); ++i) out.d_pred[i] += back[i];
    }

    out.reconstruction = l1;
    out.structure = l2;
    out.total = weights.lambda1 * l1 + weights.lambda2 * l2;
    out.per_pixel_mean = out.total / static_cast<double>(pred.size());
    return out;
}

} // namespace angio

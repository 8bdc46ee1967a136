#pragma once

#include "angio/image.hpp"

namespace angio {

struct LossWeights {
    double lambda1 = 0.95;
    double lambda2 = 0.05;
    double epsilon = 1e-4;

    void validate() const {
        if (lambda1 < 0.0 || lambda2 < 0.0)
            throw ConfigError("loss weights must be >= 0");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    }
};

/// Feature map used by the structure term. sobel_magnitude replaces the
/// learned feature extractor with an edge-emphasis map.
enum class FeatureKind { identity, sobel_magnitude };

/// rho(x) = sqrt(x^2 + eps^2), the smooth absolute-value surrogate.
inline double charbonnier(double x, double epsilon) {
    return std::sqrt(x * x + epsilon * epsilon);
}

/// Sum over pixels of rho(|pred - gt|). Note the floor: identical images
/// score N*eps, not zero.
double reconstruction_loss(const Image& pred, const Image& gt, double epsilon);

/// Sobel gradient magnitude with replicated borders (feature map behind
/// FeatureKind::sobel_magnitude). Exposed for tests.
Plane sobel_magnitude(const Plane& p);

/// reconstruction loss applied to feature maps of both images.
double structure_loss(const Image& pred, const Image& gt, FeatureKind phi,
                      double epsilon);

struct LossValue {
    double total = 0.0;
    double reconstruction = 0.0;
    double structure = 0.0;
    double per_pixel_mean = 0.0;
    Plane d_pred; // dL/dpred
};

/// L = lambda1 * l1 + lambda2 * l2 with the analytic gradient w.r.t. the
/// prediction, chained through rho and the feature map.
LossValue total_loss_and_grad(const Image& pred, const Image& gt,
                              const LossWeights& weights, FeatureKind phi);

} // namespace angio

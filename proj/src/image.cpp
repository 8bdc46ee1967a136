#include "angio/image.hpp"

#include <cmath>

namespace angio {

void KernelField::validate() const {
    const int nt = taps();
    const size_t n = static_cast<size_t>(h_) * w_;
    for (size_t p = 0; p < n; ++p) {
        double sum = 0.0;
        for (int tap = 0; tap < nt; ++tap) {
            const double w = weights_[p * nt + tap];
            if (!std::isfinite(w) || w < 0.0)
                throw DomainError("kernel weights must be finite and >= 0");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > normalization_tol)
            throw DomainError("per-pixel kernel does not sum to 1");
    }
}

KernelField KernelField::delta(int height, int width, int k) {
    if (k < 2 || k % 2 != 0) throw ConfigError("kernel side must be even and >= 2");
    std::vector<double> w(static_cast<size_t>(height) * width * k * k, 0.0);
    // zero-offset tap: axis index i with i - k/2 + 1 == 0
    const int c = k / 2 - 1;
    const int center_tap = c * k + c;
    const int nt = k * k;
    for (size_t p = 0; p < static_cast<size_t>(height) * width; ++p)
        w[p * nt + center_tap] = 1.0;
    return KernelField(height, width, k, std::move(w));
}

KernelField KernelField::uniform(int height, int width, int k) {
    if (k < 2 || k % 2 != 0) throw ConfigError("kernel side must be even and >= 2");
    std::vector<double> w(static_cast<size_t>(height) * width * k * k,
                          1.0 / (static_cast<double>(k) * k));
    return KernelField(height, width, k, std::move(w));
}

KernelField KernelField::sharpness(int height, int width, int k, double kappa) {
    if (k < 2 || k % 2 != 0) throw ConfigError("kernel side must be even and >= 2");
    if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
    // Beyond +-20 the softmax is numerically saturated anyway; clamping
    // keeps exp() finite for any finite input.
    kappa = std::clamp(kappa, -20.0, 20.0);
    const int nt = k * k;
    std::vector<double> proto(nt);
    double z = 0.0;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            const double dy = j - k / 2 + 1;
            const double dx = i - k / 2 + 1;
            const double e = std::exp(-kappa * (dx * dx + dy * dy));
            proto[j * k + i] = e;
            z += e;
        }
    }
    for (int tap = 0; tap < nt; ++tap) proto[tap] /= z;
    std::vector<double> w(static_cast<size_t>(height) * width * nt);
    for (size_t p = 0; p < static_cast<size_t>(height) * width; ++p)
        for (int tap = 0; tap < nt; ++tap) w[p * nt + tap] = proto[tap];
    return KernelField(height, width, k, std::move(w));
}

} // namespace angio

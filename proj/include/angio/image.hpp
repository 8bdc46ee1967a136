#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "angio/errors.hpp"

namespace angio {

// Rounding convention used throughout: round half away from zero.
// std::round implements exactly this; the wrapper exists so call sites
// that depend on the tie rule say so explicitly.
inline double round_half_away(double v) { return std::round(v); }

// Quantize a normalized intensity to an 8-bit code.
inline int quantize8(double v) {
    const double r = round_half_away(v * 255.0);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<int>(r);
}

/// Row-major H x W grid of doubles. Plain storage shared by all 2-D types;
/// carries no value constraints of its own.
class Plane {
public:
    Plane() = default;
    Plane(int height, int width, double fill = 0.0)
        : h_(height), w_(width), v_(static_cast<size_t>(height) * width, fill) {
        if (height <= 0 || width <= 0)
            throw ShapeError("Plane dimensions must be positive");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    size_t size() const { return v_.size(); }

    double& at(int y, int x) { return v_[static_cast<size_t>(y) * w_ + x]; }
    double at(int y, int x) const { return v_[static_cast<size_t>(y) * w_ + x]; }
    double& operator[](size_t i) { return v_[i]; }
    double operator[](size_t i) const { return v_[i]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    bool same_size(const Plane& o) const { return h_ == o.h_ && w_ == o.w_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    int h_ = 0, w_ = 0;
    std::vector<double> v_;
};

/// Grayscale frame with intensities normalized to [0,1], stored as doubles.
/// Construction validates finiteness and range; overshoot up to 1e-5 from
/// rounded convex combinations is snapped back onto the range.
class Image {
public:
    Image() = default;
    Image(int height, int width, double fill = 0.0) : px_(height, width, fill) {
        validate();
    }
    explicit Image(Plane p) : px_(std::move(p)) { validate(); }

    int height() const { return px_.height(); }
    int width() const { return px_.width(); }
    size_t size() const { return px_.size(); }

    double at(int y, int x) const { return px_.at(y, x); }
    double operator[](size_t i) const { return px_[i]; }
    const Plane& plane() const { return px_; }

    bool same_size(const Image& o) const { return px_.same_size(o.px_); }

    static constexpr int source_bit_depth = 8;

private:
    void validate() {
        constexpr double slack = 1e-5;
        for (size_t i = 0; i < px_.size(); ++i) {
            const double v = px_[i];
            if (!std::isfinite(v))
                throw DomainError("Image intensity is not finite");
            if (v < -slack || v > 1.0 + slack)
                throw DomainError("Image intensity outside [0,1]");
            if (v < 0.0) px_[i] = 0.0;
            else if (v > 1.0) px_[i] = 1.0;
        }
    }

    Plane px_;
};

/// Dense displacement field in pixels: u is the x (rightward) component,
/// v the y (downward) component.
class FlowField {
public:
    FlowField() = default;
    FlowField(int height, int width, double fill_u = 0.0, double fill_v = 0.0)
        : u_(height, width, fill_u), v_(height, width, fill_v) {
        validate();
    }
    FlowField(Plane u, Plane v) : u_(std::move(u)), v_(std::move(v)) {
        if (!u_.same_size(v_))
            throw ShapeError("FlowField u/v planes differ in size");
        validate();
    }

    int height() const { return u_.height(); }
    int width() const { return u_.width(); }
    size_t size() const { return u_.size(); }

    Plane& u() { return u_; }
    Plane& v() { return v_; }
    const Plane& u() const { return u_; }
    const Plane& v() const { return v_; }

    bool same_size(const FlowField& o) const { return u_.same_size(o.u_); }

private:
    void validate() const {
        if (!u_.all_finite() || !v_.all_finite())
            throw DomainError("FlowField contains non-finite values");
    }

    Plane u_, v_;
};

/// Strictly positive relative depth; 1/d must be finite everywhere.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int height, int width, double fill = 1.0) : d_(height, width, fill) {
        validate();
    }
    explicit DepthMap(Plane d) : d_(std::move(d)) { validate(); }

    int height() const { return d_.height(); }
    int width() const { return d_.width(); }
    double at(int y, int x) const { return d_.at(y, x); }
    double operator[](size_t i) const { return d_[i]; }
    const Plane& plane() const { return d_; }

private:
    void validate() const {
        for (size_t i = 0; i < d_.size(); ++i) {
            if (!std::isfinite(d_[i]) || d_[i] <= 0.0)
                throw DomainError("DepthMap values must be finite and > 0");
        }
    }

    Plane d_;
};

/// Per-pixel k x k interpolation kernels. Weights are row-major over
/// (tap_dy, tap_dx) and each pixel's kernel sums to 1 within 1e-6.
class KernelField {
public:
    static constexpr double normalization_tol = 1e-6;

    KernelField() = default;
    KernelField(int height, int width, int k, std::vector<double> weights)
        : h_(height), w_(width), k_(k), weights_(std::move(weights)) {
        if (k_ < 2 || k_ % 2 != 0)
            throw ConfigError("kernel side must be even and >= 2");
        if (weights_.size() != static_cast<size_t>(h_) * w_ * k_ * k_)
            throw ShapeError("KernelField weight count mismatch");
        validate();
    }

    /// Weight 1 on the zero-offset tap: warping degenerates to pure
    /// bilinear sampling through the flow.
    static KernelField delta(int height, int width, int k = 4);
    /// Uniform 1/k^2 everywhere.
    static KernelField uniform(int height, int width, int k = 4);
    /// Spatially constant softmax kernel exp(-kappa*|r|^2)/Z; kappa = 0 is
    /// uniform, large kappa approaches delta.
    static KernelField sharpness(int height, int width, int k, double kappa);

    int height() const { return h_; }
    int width() const { return w_; }
    int k() const { return k_; }
    int taps() const { return k_ * k_; }

    /// Tap offset along one axis for tap index 0..k-1: -k/2+1 .. k/2.
    int tap_offset(int i) const { return i - k_ / 2 + 1; }

    double weight(int y, int x, int tap) const {
        return weights_[(static_cast<size_t>(y) * w_ + x) * taps() + tap];
    }
    const std::vector<double>& weights() const { return weights_; }

private:
    void validate() const;

    int h_ = 0, w_ = 0, k_ = 0;
    std::vector<double> weights_;
};

/// Three consecutive frames; the middle one is the prediction target.
struct Triplet {
    Image prev, mid, next;
    std::string source_id;
    int frame_index = 0;

    Triplet() = default;
    Triplet(Image p, Image m, Image n, std::string id = "", int index = 0)
        : prev(std::move(p)), mid(std::move(m)), next(std::move(n)),
          source_id(std::move(id)), frame_index(index) {
        if (!prev.same_size(mid) || !mid.same_size(next))
            throw ShapeError("Triplet frames differ in size");
    }
};

} // namespace angio

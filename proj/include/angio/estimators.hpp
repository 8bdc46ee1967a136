#pragma once

#include <string>

#include "angio/image.hpp"

namespace angio {

/// Coarse-to-fine Horn-Schunck configuration. alpha was fixed once by an
/// endpoint-error sweep on synthetic translations; intensities are scaled
/// to [0,255] internally so the default is meaningful at that scale.
struct FlowEstimatorConfig {
    int pyramid_levels = 4;
    int iterations_per_level = 100;
    double alpha = 10.0;
    double downscale_factor = 0.5;

    void validate() const {
        if (pyramid_levels < 1) throw ConfigError("pyramid_levels must be >= 1");
        if (iterations_per_level < 1) throw ConfigError("iterations_per_level must be >= 1");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (!(downscale_factor > 0.0 && downscale_factor < 1.0))
            throw ConfigError("downscale_factor must be in (0,1)");
    }
};

/// Dense flow F_{a->b}: content at pixel p of `a` appears at p + F(p) in
/// `b`. Deterministic for identical inputs, config, and any thread count.
FlowField estimate_flow(const Image& a, const Image& b,
                        const FlowEstimatorConfig& cfg, int threads = 1);

/// Depth sources standing in for a learned depth network.
class DepthProviderKind {
public:
    enum class Tag { constant, from_file, synthetic_ground_truth };

    static DepthProviderKind constant(double value) {
        if (!(value > 0.0)) throw ConfigError("constant depth must be > 0");
        DepthProviderKind k;
        k.tag_ = Tag::constant;
        k.value_ = value;
        return k;
    }
    static DepthProviderKind from_file(std::string path) {
        DepthProviderKind k;
        k.tag_ = Tag::from_file;
        k.path_ = std::move(path);
        return k;
    }
    /// Reads the generator-emitted depth files (depth_%06d.flo) for the
    /// requested frame index from a synthetic clip directory.
    static DepthProviderKind synthetic_ground_truth(std::string clip_dir) {
        DepthProviderKind k;
        k.tag_ = Tag::synthetic_ground_truth;
        k.path_ = std::move(clip_dir);
        return k;
    }

    Tag tag() const { return tag_; }
    double constant_value() const { return value_; }
    const std::string& path() const { return path_; }

private:
    Tag tag_ = Tag::constant;
    double value_ = 1.0;
    std::string path_;
};

/// Resolve a depth map for a frame. frame_index is only consulted by the
/// synthetic_ground_truth provider. Dimension mismatches raise ShapeError;
/// non-positive depths in files raise DomainError.
DepthMap provide_depth(const DepthProviderKind& kind, const Image& frame,
                       int frame_index = -1);

} // namespace angio

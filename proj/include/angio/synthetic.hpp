#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "angio/image.hpp"

namespace angio {

enum class CardiacPhase { systole, diastole, transition };

enum class MotionProfile { sinusoid, linear };

/// Configuration of the vessel phantom. The continuous scene is a seeded
/// vessel tree darkened by a contrast front advancing along arc length,
/// deformed by a global displacement A*sin(2*pi*tau/P) times a smooth
/// direction/envelope field.
struct PhantomConfig {
    uint64_t seed = 1;
    int height = 256;
    int width = 256;
    int n_branches = 5;
    double vessel_width = 4.0;     // px, full width of the dark profile
    int cycle_period = 12;         // P, frames per cardiac cycle
    double motion_amplitude = 4.0; // px
    double contrast_speed = 8.0;   // arc-length px per frame
    int n_frames = 24;
    MotionProfile motion = MotionProfile::sinusoid;

    void validate() const {
        if (height < 8 || width < 8) throw ConfigError("phantom size too small");
        if (n_branches < 1) throw ConfigError("n_branches must be >= 1");
        if (!(vessel_width > 0.5)) throw ConfigError("vessel_width too small");
        if (cycle_period < 4) throw ConfigError("cycle_period must be >= 4");
        if (motion_amplitude < 0.0) throw ConfigError("motion_amplitude must be >= 0");
        if (!(contrast_speed > 0.0)) throw ConfigError("contrast_speed must be > 0");
        if (n_frames < 3) throw ConfigError("n_frames must be >= 3");
    }
};

/// The continuous scene model. Frames, depths, flows, and occlusion masks
/// can be evaluated at arbitrary (fractional) times; integer/half-integer
/// sampling in SyntheticClip is just the common case.
class ClipModel {
public:
    explicit ClipModel(const PhantomConfig& cfg);
    ~ClipModel();
    ClipModel(ClipModel&&) noexcept;
    ClipModel& operator=(ClipModel&&) noexcept;
    ClipModel(const ClipModel&) = delete;
    ClipModel& operator=(const ClipModel&) = delete;

    const PhantomConfig& config() const;

    Image render(double tau) const;
    DepthMap depth(double tau) const;

    /// Flow on the tau_from grid carrying each pixel to its position at
    /// tau_to; exact up to the fixed-point inversion tolerance (1e-12).
    FlowField flow(double tau_from, double tau_to) const;

    /// Forward-splat multiplicity mask on the tau_to grid: nonzero where
    /// the rounded pixel transport from tau_from is not one-to-one
    /// (collisions or uncovered targets).
    std::vector<uint8_t> occlusion_mask(double tau_from, double tau_to) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SyntheticClip {
    PhantomConfig config;
    std::vector<Image> frames;                    // times 0..n-1
    std::vector<Image> half_frames;               // times k+0.5, size n-1
    std::vector<FlowField> flows;                 // F_{k -> k+1}, size n-1
    std::vector<std::vector<uint8_t>> occlusion;  // per consecutive pair
    std::vector<DepthMap> depths;                 // per integer frame
    std::vector<CardiacPhase> phases;             // per integer frame
};

/// Frames render independently; the branch geometry is drawn once from the
/// seed at model construction, so results do not depend on thread count.
SyntheticClip generate_clip(const PhantomConfig& cfg, int threads = 1);

/// Per-frame phase labels: frames within +-1 of an extremum of
/// sin(2*pi*tau/P) are transition; the rest alternate systole (rising
/// displacement) and diastole (falling). Zero amplitude labels everything
/// diastole.
std::vector<CardiacPhase> phase_labels(const PhantomConfig& cfg);

const char* phase_name(CardiacPhase p);

/// Emit frames (PGM), truth flows (.flo), occlusion masks (PGM), depth
/// maps (.flo container), half frames, and a key-value manifest.
void write_clip(const SyntheticClip& clip, const std::string& dir);

} // namespace angio

#include "angio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "angio/io.hpp"
#include "angio/parallel.hpp"

namespace angio {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBackgroundDepth = 1.8;
constexpr double kBackgroundWeight = 0.35;
constexpr double kIntensityFloor = 0.02;
constexpr double kInversionTol = 1e-13;

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Branch {
    std::vector<Vec2> pts;      // dense polyline, material coordinates
    std::vector<double> arc;    // cumulative arc length incl. parent offset
    double half_width = 2.0;    // Gaussian sigma of the dark profile
    double contrast = 0.5;      // darkening amplitude
    double depth_value = 1.0;
};

struct SegmentRef {
    int branch;
    int seg;
};

double smoothstep01(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * (3.0 - 2.0 * s);
}

} // namespace

struct ClipModel::Impl {
    PhantomConfig cfg;
    std::vector<Branch> branches;

    // Spatial index over all branch segments for nearest-distance queries.
    double cell = 8.0;
    double grid_x0 = 0.0, grid_y0 = 0.0;
    int grid_w = 0, grid_h = 0;
    std::vector<std::vector<SegmentRef>> cells;
    double reach = 0.0; // query radius that still influences intensity

    explicit Impl(const PhantomConfig& c) : cfg(c) {
        cfg.validate();
        build_branches();
        build_index();
    }

    // --- geometry -------------------------------------------------------

    void build_branches() {
        std::mt19937_64 rng(cfg.seed);
        auto uni = [&rng](double lo, double hi) {
            return std::uniform_real_distribution<double>(lo, hi)(rng);
        };

        const double W = cfg.width, H = cfg.height;
        const double step = 2.0;

        // Trunk: slow random-curvature walk from the upper region downward.
        Branch trunk;
        trunk.half_width = cfg.vessel_width / 2.0;
        trunk.contrast = uni(0.42, 0.5);
        trunk.depth_value = 0.55;
        {
            Vec2 p{W * uni(0.3, 0.55), H * uni(0.06, 0.14)};
            double heading = kPi / 2.0 + uni(-0.25, 0.25); // mostly downward
            double curv = 0.0;
            const int steps = static_cast<int>(0.42 * H);
            trunk.pts.push_back(p);
            trunk.arc.push_back(0.0);
            for (int i = 0; i < steps; ++i) {
                curv = 0.92 * curv + 0.08 * uni(-0.12, 0.12);
                heading += curv;
                p.x += step * std::cos(heading);
                p.y += step * std::sin(heading);
                trunk.pts.push_back(p);
                trunk.arc.push_back(trunk.arc.back() + step);
            }
        }
        branches.push_back(std::move(trunk));

        for (int b = 1; b < cfg.n_branches; ++b) {
            const Branch& parent = branches[0];
            const int attach = static_cast<int>(
                uni(0.12, 0.75) * static_cast<double>(parent.pts.size() - 2));
            Branch side;
            side.half_width = cfg.vessel_width / 2.0 * uni(0.6, 0.85);
            side.contrast = uni(0.3, 0.42);
            side.depth_value = 0.7 + 0.22 * ((b - 1) % 4);

            Vec2 p = parent.pts[attach];
            const Vec2& q = parent.pts[attach + 1];
            double heading = std::atan2(q.y - p.y, q.x - p.x);
            heading += (b % 2 == 0 ? 1.0 : -1.0) * uni(0.5, 1.0);
            double curv = 0.0;
            const int steps = static_cast<int>(uni(0.16, 0.3) * H);
            side.pts.push_back(p);
            side.arc.push_back(parent.arc[attach]);
            for (int i = 0; i < steps; ++i) {
                curv = 0.9 * curv + 0.1 * uni(-0.16, 0.16);
                heading += curv;
                p.x += step * std::cos(heading);
                p.y += step * std::sin(heading);
                side.pts.push_back(p);
                side.arc.push_back(side.arc.back() + step);
            }
            branches.push_back(std::move(side));
        }
    }

    void build_index() {
        double max_sigma = 0.0;
        for (const auto& b : branches) max_sigma = std::max(max_sigma, b.half_width);
        reach = 3.5 * max_sigma;
        const double pad = reach + cfg.motion_amplitude + 4.0;

        grid_x0 = -pad;
        grid_y0 = -pad;
        grid_w = static_cast<int>(std::ceil((cfg.width + 2 * pad) / cell));
        grid_h = static_cast<int>(std::ceil((cfg.height + 2 * pad) / cell));
        cells.assign(static_cast<size_t>(grid_w) * grid_h, {});

        for (int bi = 0; bi < static_cast<int>(branches.size()); ++bi) {
            const auto& pts = branches[bi].pts;
            for (int si = 0; si + 1 < static_cast<int>(pts.size()); ++si) {
                const double lo_x = std::min(pts[si].x, pts[si + 1].x) - reach;
                const double hi_x = std::max(pts[si].x, pts[si + 1].x) + reach;
                const double lo_y = std::min(pts[si].y, pts[si + 1].y) - reach;
                const double hi_y = std::max(pts[si].y, pts[si + 1].y) + reach;
                const int cx0 = std::max(0, static_cast<int>((lo_x - grid_x0) / cell));
                const int cx1 = std::min(grid_w - 1, static_cast<int>((hi_x - grid_x0) / cell));
                const int cy0 = std::max(0, static_cast<int>((lo_y - grid_y0) / cell));
                const int cy1 = std::min(grid_h - 1, static_cast<int>((hi_y - grid_y0) / cell));
                for (int cy = cy0; cy <= cy1; ++cy)
                    for (int cx = cx0; cx <= cx1; ++cx)
                        cells[static_cast<size_t>(cy) * grid_w + cx].push_back({bi, si});
            }
        }
    }

    // Nearest distance and arc position per branch around a material point.
    void query(double x, double y, std::vector<double>& d2, std::vector<double>& arc) const {
        const int cx = static_cast<int>((x - grid_x0) / cell);
        const int cy = static_cast<int>((y - grid_y0) / cell);
        d2.assign(branches.size(), 1e30);
        arc.assign(branches.size(), 0.0);
        if (cx < 0 || cx >= grid_w || cy < 0 || cy >= grid_h) return;
        for (const SegmentRef& ref : cells[static_cast<size_t>(cy) * grid_w + cx]) {
            const auto& b = branches[ref.branch];
            const Vec2& p = b.pts[ref.seg];
            const Vec2& q = b.pts[ref.seg + 1];
            const double vx = q.x - p.x, vy = q.y - p.y;
            const double len2 = vx * vx + vy * vy;
            double s = len2 > 0.0 ? ((x - p.x) * vx + (y - p.y) * vy) / len2 : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            const double dx = x - (p.x + s * vx);
            const double dy = y - (p.y + s * vy);
            const double dist2 = dx * dx + dy * dy;
            if (dist2 < d2[ref.branch]) {
                d2[ref.branch] = dist2;
                arc[ref.branch] = b.arc[ref.seg] +
                                  s * (b.arc[ref.seg + 1] - b.arc[ref.seg]);
            }
        }
    }

    // --- motion ---------------------------------------------------------

    double time_profile(double tau) const {
        if (cfg.motion == MotionProfile::linear) return tau / cfg.cycle_period;
        return std::sin(2.0 * kPi * tau / cfg.cycle_period);
    }

    // Smooth displacement field, zero on the frame border so content never
    // enters or leaves the domain.
    Vec2 displacement_at(double x, double y, double s) const {
        const double W = cfg.width, H = cfg.height;
        const double ex = std::sin(kPi * std::clamp(x / (W - 1.0), 0.0, 1.0));
        const double ey = std::sin(kPi * std::clamp(y / (H - 1.0), 0.0, 1.0));
        const double envelope = ex * ey;
        const double theta = 0.35 * kPi +
                             0.8 * std::sin(2.0 * kPi * (0.9 * x + 0.5 * y) / (W + H) + 0.6) +
                             0.4 * std::sin(2.0 * kPi * y / H + 2.1);
        const double amp = cfg.motion_amplitude * s * envelope;
        return {amp * std::cos(theta), amp * std::sin(theta)};
    }

    // Material coordinate whose deformed position at time factor s is (x,y).
    Vec2 invert_at(double x, double y, double s) const {
        Vec2 m{x, y};
        for (int it = 0; it < 60; ++it) {
            const Vec2 d = displacement_at(m.x, m.y, s);
            const Vec2 next{x - d.x, y - d.y};
            const double delta = std::fabs(next.x - m.x) + std::fabs(next.y - m.y);
            m = next;
            if (delta < kInversionTol) break;
        }
        return m;
    }

    // --- scene fields in material coordinates -----------------------------

    double background(double x, double y) const {
        const double W = cfg.width, H = cfg.height;
        return 0.78 + 0.07 * std::sin(2.0 * kPi * 1.3 * x / W + 0.7) *
                          std::sin(2.0 * kPi * 1.1 * y / H + 1.9) +
               0.05 * std::sin(2.0 * kPi * (x + y) / (0.7 * (W + H)) + 0.3);
    }

    double front_factor(double arc, double tau) const {
        const double ramp = 3.0 * cfg.vessel_width;
        return smoothstep01((cfg.contrast_speed * tau - arc) / ramp + 1.0);
    }

    // Pulsatile contrast density: the systolic inflow bolus briefly dilutes
    // the agent once per cycle, peaking at the positive motion extremum.
    // Gated by the motion amplitude so a static phantom stays static.
    double pulse_gain(double tau) const {
        if (cfg.motion == MotionProfile::linear) return 1.0;
        const double strength = 0.5 * std::min(1.0, cfg.motion_amplitude);
        if (strength <= 0.0) return 1.0;
        const double theta = 2.0 * kPi * tau / cfg.cycle_period - kPi / 2.0;
        return 1.0 - strength * std::exp(6.0 * (std::cos(theta) - 1.0));
    }

    // Total vessel darkening at a material point; the part of the
    // appearance no pixel transport between frames can explain.
    double darkening_at(double mx, double my, double tau,
                        std::vector<double>& d2, std::vector<double>& arc) const {
        query(mx, my, d2, arc);
        double sum = 0.0;
        for (size_t b = 0; b < branches.size(); ++b) {
            if (d2[b] >= reach * reach) continue;
            const double sigma = branches[b].half_width;
            const double profile = std::exp(-0.5 * d2[b] / (sigma * sigma)) -
                                   std::exp(-0.5 * (reach * reach) / (sigma * sigma));
            if (profile <= 0.0) continue;
            sum += branches[b].contrast * profile * front_factor(arc[b], tau);
        }
        return pulse_gain(tau) * sum;
    }

    double intensity_at(double mx, double my, double tau,
                        std::vector<double>& d2, std::vector<double>& arc) const {
        const double v = background(mx, my) - darkening_at(mx, my, tau, d2, arc);
        return std::clamp(v, kIntensityFloor, 1.0);
    }

    double depth_at(double mx, double my, double tau,
                    std::vector<double>& d2, std::vector<double>& arc) const {
        query(mx, my, d2, arc);
        double wsum = kBackgroundWeight;
        double dsum = kBackgroundWeight * kBackgroundDepth;
        for (size_t b = 0; b < branches.size(); ++b) {
            if (d2[b] >= reach * reach) continue;
            const double sigma = branches[b].half_width;
            const double profile = std::exp(-0.5 * d2[b] / (sigma * sigma)) -
                                   std::exp(-0.5 * (reach * reach) / (sigma * sigma));
            if (profile <= 0.0) continue;
            const double w = profile * front_factor(arc[b], tau);
            wsum += w;
            dsum += w * branches[b].depth_value;
        }
        return dsum / wsum;
    }
};

ClipModel::ClipModel(const PhantomConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
ClipModel::~ClipModel() = default;
ClipModel::ClipModel(ClipModel&&) noexcept = default;
ClipModel& ClipModel::operator=(ClipModel&&) noexcept = default;

const PhantomConfig& ClipModel::config() const { return impl_->cfg; }

Image ClipModel::render(double tau) const {
    const int h = impl_->cfg.height, w = impl_->cfg.width;
    const double s = impl_->time_profile(tau);
    Plane out(h, w);
    parallel_for(0, h, 1, [&](int y) {
        std::vector<double> d2, arc;
        for (int x = 0; x < w; ++x) {
            const Vec2 m = impl_->invert_at(x, y, s);
            out.at(y, x) = impl_->intensity_at(m.x, m.y, tau, d2, arc);
        }
    });
    return Image(std::move(out));
}

DepthMap ClipModel::depth(double tau) const {
    const int h = impl_->cfg.height, w = impl_->cfg.width;
    const double s = impl_->time_profile(tau);
    Plane out(h, w);
    std::vector<double> d2, arc;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 m = impl_->invert_at(x, y, s);
            out.at(y, x) = impl_->depth_at(m.x, m.y, tau, d2, arc);
        }
    }
    return DepthMap(std::move(out));
}

FlowField ClipModel::flow(double tau_from, double tau_to) const {
    const int h = impl_->cfg.height, w = impl_->cfg.width;
    const double s_from = impl_->time_profile(tau_from);
    const double s_to = impl_->time_profile(tau_to);
    Plane u(h, w), v(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 m = impl_->invert_at(x, y, s_from);
            const Vec2 d = impl_->displacement_at(m.x, m.y, s_to);
            u.at(y, x) = (m.x + d.x) - x;
            v.at(y, x) = (m.y + d.y) - y;
        }
    }
    return FlowField(std::move(u), std::move(v));
}

std::vector<uint8_t> ClipModel::occlusion_mask(double tau_from, double tau_to) const {
    const int h = impl_->cfg.height, w = impl_->cfg.width;
    const FlowField f = flow(tau_from, tau_to);
    std::vector<int> count(static_cast<size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double tx = round_half_away(x + f.u().at(y, x));
            const double ty = round_half_away(y + f.v().at(y, x));
            if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
            ++count[static_cast<size_t>(ty) * w + static_cast<size_t>(tx)];
        }
    }
    std::vector<uint8_t> mask(count.size(), 0);
    for (size_t i = 0; i < count.size(); ++i) mask[i] = count[i] != 1;

    // Contrast dynamics (the advancing front and the systolic dilution
    // pulse) change appearance in a way no pixel transport can reproduce;
    // mask wherever the darkening differs materially between the two
    // times. Evaluated on the tau_to grid like the multiplicity counts.
    const double s_to = impl_->time_profile(tau_to);
    std::vector<double> d2, arc;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 m = impl_->invert_at(x, y, s_to);
            const double delta = std::fabs(impl_->darkening_at(m.x, m.y, tau_from, d2, arc) -
                                           impl_->darkening_at(m.x, m.y, tau_to, d2, arc));
            if (delta > 0.008) mask[static_cast<size_t>(y) * w + x] = 1;
        }
    }
    return mask;
}

SyntheticClip generate_clip(const PhantomConfig& cfg, int threads) {
    ClipModel model(cfg);
    SyntheticClip clip;
    clip.config = cfg;
    clip.frames.resize(cfg.n_frames);
    clip.depths.resize(cfg.n_frames);
    clip.half_frames.resize(cfg.n_frames - 1);
    clip.flows.resize(cfg.n_frames - 1);
    clip.occlusion.resize(cfg.n_frames - 1);
    parallel_for(0, cfg.n_frames, threads, [&](int k) {
        clip.frames[k] = model.render(k);
        clip.depths[k] = model.depth(k);
        if (k + 1 < cfg.n_frames) {
            clip.half_frames[k] = model.render(k + 0.5);
            clip.flows[k] = model.flow(k, k + 1);
            clip.occlusion[k] = model.occlusion_mask(k, k + 1);
        }
    });
    clip.phases = phase_labels(cfg);
    return clip;
}

std::vector<CardiacPhase> phase_labels(const PhantomConfig& cfg) {
    cfg.validate();
    std::vector<CardiacPhase> labels(cfg.n_frames, CardiacPhase::diastole);
    if (cfg.motion_amplitude <= 0.0 || cfg.motion == MotionProfile::linear)
        return labels;
    const double P = cfg.cycle_period;
    for (int i = 0; i < cfg.n_frames; ++i) {
        // Distance to the nearest extremum of sin(2*pi*tau/P), which sit at
        // P/4 + m*P/2.
        const double rel = std::fmod(std::fmod(i - P / 4.0, P / 2.0) + P / 2.0, P / 2.0);
        const double dist = std::min(rel, P / 2.0 - rel);
        if (dist <= 1.0 + 1e-9) {
            labels[i] = CardiacPhase::transition;
        } else {
            const double slope = std::cos(2.0 * kPi * i / P);
            labels[i] = slope > 0.0 ? CardiacPhase::systole : CardiacPhase::diastole;
        }
    }
    return labels;
}

const char* phase_name(CardiacPhase p) {
    switch (p) {
    case CardiacPhase::systole: return "systole";
    case CardiacPhase::diastole: return "diastole";
    case CardiacPhase::transition: return "transition";
    }
    return "unknown";
}

void write_clip(const SyntheticClip& clip, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir + "/frames");
    fs::create_directories(dir + "/half");
    fs::create_directories(dir + "/flows");
    fs::create_directories(dir + "/masks");
    fs::create_directories(dir + "/depths");

    char name[64];
    for (size_t k = 0; k < clip.frames.size(); ++k) {
        std::snprintf(name, sizeof(name), "/frames/frame_%06zu.pgm", k);
        save_frame(clip.frames[k], dir + name);
        std::snprintf(name, sizeof(name), "/depths/depth_%06zu.flo", k);
        write_depth(clip.depths[k], dir + name);
    }
    for (size_t k = 0; k < clip.half_frames.size(); ++k) {
        std::snprintf(name, sizeof(name), "/half/half_%06zu.pgm", k);
        save_frame(clip.half_frames[k], dir + name);
        std::snprintf(name, sizeof(name), "/flows/flow_%06zu.flo", k);
        write_flow(clip.flows[k], dir + name);

        const auto& mask = clip.occlusion[k];
        Plane m(clip.frames[k].height(), clip.frames[k].width());
        for (size_t i = 0; i < mask.size(); ++i) m[i] = mask[i] ? 1.0 : 0.0;
        std::snprintf(name, sizeof(name), "/masks/mask_%06zu.pgm", k);
        save_frame(Image(std::move(m)), dir + name);
    }

    std::ofstream mf(dir + "/manifest.txt");
    if (!mf) throw DataError("cannot write manifest in " + dir);
    const PhantomConfig& c = clip.config;
    mf << "seed = " << c.seed << "\n"
       << "height = " << c.height << "\n"
       << "width = " << c.width << "\n"
       << "n_branches = " << c.n_branches << "\n"
       << "vessel_width = " << c.vessel_width << "\n"
       << "cycle_period = " << c.cycle_period << "\n"
       << "motion_amplitude = " << c.motion_amplitude << "\n"
       << "contrast_speed = " << c.contrast_speed << "\n"
       << "n_frames = " << c.n_frames << "\n"
       << "motion = " << (c.motion == MotionProfile::linear ? "linear" : "sinusoid") << "\n";
    for (size_t i = 0; i < clip.phases.size(); ++i) {
        std::snprintf(name, sizeof(name), "phase_%06zu = ", i);
        mf << name << phase_name(clip.phases[i]) << "\n";
    }
    if (!mf) throw DataError("manifest write failure in " + dir);
}

} // namespace angio

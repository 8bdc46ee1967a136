#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "angio/image.hpp"

namespace angio {

struct FrameRecord {
    int frame_index = 0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

struct MetricSeries {
    std::string clip_id;
    std::string method_id;
    std::vector<FrameRecord> records;
};

struct PeriodReport {
    std::optional<int> detected_period; // frames; >= 2 when present
    std::vector<int> dip_indices;       // frame indices of PSNR dips
    double confidence = 0.0;            // normalized autocorrelation peak
};

/// 10*log10(1/MSE) on normalized intensities (MAX = 1), capped at 99 dB
/// so zero-MSE frames stay plottable.
double psnr(const Image& a, const Image& b);

/// PSNR restricted to pixels where exclude_mask is zero. Used by the
/// synthetic-oracle checks that score outside occlusion masks.
double psnr_masked(const Image& a, const Image& b,
                   const std::vector<uint8_t>& exclude_mask);

/// Mean local SSIM, 11x11 Gaussian window sigma 1.5, K1=0.01, K2=0.03,
/// dynamic range 1. Averaged over positions where the window fits.
double ssim(const Image& a, const Image& b);

using Interpolator = std::function<Image(const Image&, const Image&, double)>;

/// Predict every interior frame i from its neighbors i-1 and i+1 at the
/// given t and score it against the original: N frames in, N-2 records
/// out. Predictions run in parallel over frames.
MetricSeries interpolation_protocol(const std::vector<Image>& clip,
                                    const Interpolator& interpolate,
                                    double t = 0.5,
                                    const std::string& clip_id = "clip",
                                    const std::string& method_id = "method",
                                    int threads = 1);

/// Mean-removed autocorrelation of the PSNR sequence. The detected period
/// is the lag of the highest peak with normalized value >= 0.3 (ties go to
/// the smallest lag); dips are local minima below mean - 0.5*stddev.
PeriodReport detect_period(const MetricSeries& series);

/// Emit report.csv (one row per frame record), summary.json (per-series
/// means and period info), and psnr.svg (one polyline per series, one
/// marker per dip) into out_dir.
void emit_report(const std::vector<MetricSeries>& series,
                 const std::vector<PeriodReport>& periods,
                 const std::string& out_dir);

} // namespace angio

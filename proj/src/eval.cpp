#include "angio/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "angio/parallel.hpp"

namespace angio {

namespace {

constexpr double kPsnrCap = 99.0;

double mse(const Image& a, const Image& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
    if (m <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

std::string format_double(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

double psnr(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw ShapeError("psnr operands differ in size");
    return psnr_from_mse(mse(a, b));
}

double psnr_masked(const Image& a, const Image& b,
                   const std::vector<uint8_t>& exclude_mask) {
    if (!a.same_size(b)) throw ShapeError("psnr operands differ in size");
    if (exclude_mask.size() != a.size())
        throw ShapeError("mask size does not match the images");
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (exclude_mask[i]) continue;
        const double d = a[i] - b[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw DomainError("mask excludes every pixel");
    return psnr_from_mse(sum / static_cast<double>(n));
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw ShapeError("ssim operands differ in size");
    constexpr int radius = 5; // 11x11 window
    constexpr double sigma = 1.5;
    constexpr double c1 = 0.01 * 0.01; // (K1 * L)^2, L = 1
    constexpr double c2 = 0.03 * 0.03;
    const int h = a.height(), w = a.width();
    if (h < 2 * radius + 1 || w < 2 * radius + 1)
        throw ShapeError("image smaller than the 11x11 SSIM window");

    double window[2 * radius + 1][2 * radius + 1];
    double wsum = 0.0;
    for (int j = -radius; j <= radius; ++j)
        for (int i = -radius; i <= radius; ++i) {
            window[j + radius][i + radius] = std::exp(-0.5 * (i * i + j * j) / (sigma * sigma));
            wsum += window[j + radius][i + radius];
        }
    for (auto& row : window)
        for (double& v : row) v /= wsum;

    double total = 0.0;
    size_t count = 0;
    for (int y = radius; y < h - radius; ++y) {
        for (int x = radius; x < w - radius; ++x) {
            double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                for (int i = -radius; i <= radius; ++i) {
                    const double wgt = window[j + radius][i + radius];
                    const double va = a.at(y + j, x + i);
                    const double vb = b.at(y + j, x + i);
                    mu_a += wgt * va;
                    mu_b += wgt * vb;
                    aa += wgt * (va * va);
                    bb += wgt * (vb * vb);
                    ab += wgt * (va * vb); // grouping keeps ssim(a,b) == ssim(b,a) bitwise
                }
            }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double num = (2.0 * (mu_a * mu_b) + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

MetricSeries interpolation_protocol(const std::vector<Image>& clip,
                                    const Interpolator& interpolate, double t,
                                    const std::string& clip_id,
                                    const std::string& method_id, int threads) {
    if (clip.size() < 3)
        throw DataError("interpolation protocol needs at least 3 frames");
    const int n = static_cast<int>(clip.size());
    MetricSeries series;
    series.clip_id = clip_id;
    series.method_id = method_id;
    series.records.resize(n - 2);
    parallel_for(1, n - 1, threads, [&](int i) {
        const Image pred = interpolate(clip[i - 1], clip[i + 1], t);
        FrameRecord rec;
        rec.frame_index = i;
        rec.psnr_db = psnr(pred, clip[i]);
        rec.ssim = ssim(pred, clip[i]);
        series.records[i - 1] = rec;
    });
    return series;
}

PeriodReport detect_period(const MetricSeries& series) {
    const int n = static_cast<int>(series.records.size());
    if (n < 8) throw DataError("series too short for period detection");

    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = series.records[i].psnr_db;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;

    PeriodReport report;
    if (var <= 0.0) return report; // constant series: no period, no dips

    // Per-sample normalized autocorrelation so long lags are not penalized
    // by the shrinking overlap.
    const int max_lag = n / 2;
    std::vector<double> r(max_lag + 1, 0.0);
    for (int k = 2; k <= max_lag; ++k) {
        double acc = 0.0;
        for (int i = 0; i + k < n; ++i) acc += (x[i] - mean) * (x[i + k] - mean);
        r[k] = (acc / (n - k)) / var;
    }
    double rmax = -1.0;
    for (int k = 2; k <= max_lag; ++k) rmax = std::max(rmax, r[k]);
    int best = 0;
    for (int k = 2; k <= max_lag; ++k) {
        if (r[k] >= rmax - 1e-9) {
            best = k; // smallest lag within tolerance of the peak
            break;
        }
    }
    report.confidence = std::clamp(rmax, 0.0, 1.0);
    if (rmax >= 0.3) report.detected_period = best;

    const double dip_level = mean - 0.5 * std::sqrt(var);
    for (int i = 1; i + 1 < n; ++i) {
        if (x[i] < dip_level && x[i] < x[i - 1] && x[i] <= x[i + 1])
            report.dip_indices.push_back(series.records[i].frame_index);
    }
    return report;
}

void emit_report(const std::vector<MetricSeries>& series,
                 const std::vector<PeriodReport>& periods,
                 const std::string& out_dir) {
    if (series.empty()) throw DataError("emit_report needs at least one series");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // CSV: one row per frame record.
    {
        std::ofstream csv(out_dir + "/report.csv");
        if (!csv) throw DataError("cannot write report.csv in " + out_dir);
        csv << "clip,method,frame_index,psnr_db,ssim\n";
        for (const auto& s : series)
            for (const auto& rec : s.records)
                csv << s.clip_id << "," << s.method_id << "," << rec.frame_index << ","
                    << format_double(rec.psnr_db, 6) << ","
                    << format_double(rec.ssim, 6) << "\n";
        if (!csv) throw DataError("report.csv write failure");
    }

    // JSON summary: per-series means plus period info when available.
    {
        nlohmann::json root;
        root["series"] = nlohmann::json::array();
        for (size_t si = 0; si < series.size(); ++si) {
            const auto& s = series[si];
            double mp = 0.0, ms = 0.0;
            for (const auto& rec : s.records) {
                mp += rec.psnr_db;
                ms += rec.ssim;
            }
            const double inv = s.records.empty() ? 0.0 : 1.0 / s.records.size();
            nlohmann::json item;
            item["clip"] = s.clip_id;
            item["method"] = s.method_id;
            item["frames"] = s.records.size();
            item["mean_psnr_db"] = mp * inv;
            item["mean_ssim"] = ms * inv;
            if (si < periods.size()) {
                const auto& p = periods[si];
                item["detected_period"] =
                    p.detected_period ? nlohmann::json(*p.detected_period)
                                      : nlohmann::json(nullptr);
                item["confidence"] = p.confidence;
                item["dip_indices"] = p.dip_indices;
            }
            root["series"].push_back(std::move(item));
        }
        std::ofstream js(out_dir + "/summary.json");
        if (!js) throw DataError("cannot write summary.json in " + out_dir);
        js << root.dump(2) << "\n";
        if (!js) throw DataError("summary.json write failure");
    }

    // SVG: PSNR vs frame index, one polyline per series, one marker per dip.
    {
        const int width = 840, height = 420, ml = 50, mr = 20, mt = 20, mb = 40;
        double lo = 1e30, hi = -1e30;
        int imin = 1 << 30, imax = -(1 << 30);
        for (const auto& s : series) {
            for (const auto& rec : s.records) {
                lo = std::min(lo, rec.psnr_db);
                hi = std::max(hi, rec.psnr_db);
                imin = std::min(imin, rec.frame_index);
                imax = std::max(imax, rec.frame_index);
            }
        }
        if (hi <= lo) hi = lo + 1.0;
        if (imax <= imin) imax = imin + 1;
        lo -= 1.0;
        hi += 1.0;
        const auto sx = [&](double i) {
            return ml + (i - imin) / (imax - imin) * (width - ml - mr);
        };
        const auto sy = [&](double v) {
            return height - mb - (v - lo) / (hi - lo) * (height - mt - mb);
        };
        static const char* palette[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad",
                                        "#d35400", "#16a085"};
        std::ofstream svg(out_dir + "/psnr.svg");
        if (!svg) throw DataError("cannot write psnr.svg in " + out_dir);
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
            << "\" height=\"" << height << "\">\n";
        svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
            << width - mr << "\" y2=\"" << height - mb
            << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
            << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << (width / 2) << "\" y=\"" << height - 8
            << "\" font-size=\"13\">frame index</text>\n";
        svg << "<text x=\"12\" y=\"" << (height / 2)
            << "\" font-size=\"13\" transform=\"rotate(-90 12 " << (height / 2)
            << ")\">PSNR [dB]</text>\n";
        for (size_t si = 0; si < series.size(); ++si) {
            const auto& s = series[si];
            const char* color = palette[si % 6];
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& rec : s.records)
                svg << format_double(sx(rec.frame_index), 2) << ","
                    << format_double(sy(rec.psnr_db), 2) << " ";
            svg << "\"/>\n";
            svg << "<text x=\"" << width - mr - 120 << "\" y=\""
                << mt + 16 * (si + 1) << "\" font-size=\"12\" fill=\"" << color
                << "\">" << s.method_id << "</text>\n";
            if (si < periods.size()) {
                for (int dip : periods[si].dip_indices) {
                    double v = 0.0;
                    for (const auto& rec : s.records)
                        if (rec.frame_index == dip) v = rec.psnr_db;
                    svg << "<circle class=\"dip\" cx=\"" << format_double(sx(dip), 2)
                        << "\" cy=\"" << format_double(sy(v), 2)
                        << "\" r=\"4\" fill=\"none\" stroke=\"" << color
                        << "\" stroke-width=\"1.5\"/>\n";
                }
            }
        }
        svg << "</svg>\n";
        if (!svg) throw DataError("psnr.svg write failure");
    }
}

} // namespace angio

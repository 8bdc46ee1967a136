#include "angio/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "angio/io.hpp"

namespace angio {

namespace {

double mean_abs_diff(const Image& a, const Image& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

Image flip_plane(const Image& img, bool horizontal, bool vertical) {
    const int h = img.height(), w = img.width();
    Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = vertical ? h - 1 - y : y;
        for (int x = 0; x < w; ++x) {
            const int sx = horizontal ? w - 1 - x : x;
            out.at(y, x) = img.at(sy, sx);
        }
    }
    return Image(std::move(out));
}

} // namespace

std::pair<std::vector<int>, DedupReport>
deduplicate(const std::vector<Image>& frames, const DedupConfig& cfg) {
    if (frames.empty()) throw DataError("deduplicate requires at least one frame");
    if (cfg.threshold < 0.0) throw ConfigError("dedup threshold must be >= 0");
    if (cfg.min_unique_gap < 1) throw ConfigError("min_unique_gap must be >= 1");

    std::vector<int> kept{0};
    DedupReport report;
    report.total = static_cast<int>(frames.size());

    int run_start = -1;
    for (int i = 1; i < report.total; ++i) {
        if (!frames[i].same_size(frames[kept.back()]))
            throw ShapeError("frames differ in size");
        const bool too_close = (i - kept.back()) < cfg.min_unique_gap;
        const bool duplicate =
            mean_abs_diff(frames[i], frames[kept.back()]) <= cfg.threshold;
        if (duplicate || too_close) {
            if (run_start < 0) run_start = i;
        } else {
            if (run_start >= 0) {
                report.drop_runs.emplace_back(run_start, i - 1);
                run_start = -1;
            }
            kept.push_back(i);
        }
    }
    if (run_start >= 0) report.drop_runs.emplace_back(run_start, report.total - 1);
    report.kept = static_cast<int>(kept.size());
    report.effective_fps =
        static_cast<double>(report.kept) / report.total * cfg.recording_fps;
    return {std::move(kept), std::move(report)};
}

Image apply_mask(const Image& img, const std::vector<MaskRegion>& regions) {
    for (const MaskRegion& r : regions) {
        if (r.x < 0 || r.y < 0 || r.w < 0 || r.h < 0 ||
            r.x + r.w > img.width() || r.y + r.h > img.height())
            throw DomainError("mask region outside frame bounds");
        if (!std::isfinite(r.fill) || r.fill < 0.0 || r.fill > 1.0)
            throw DomainError("mask fill must lie in [0,1]");
    }
    Plane out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.at(y, x) = img.at(y, x);
    for (const MaskRegion& r : regions)
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) out.at(y, x) = r.fill;
    return Image(std::move(out));
}

std::vector<Triplet> extract_triplets(const std::vector<Image>& frames, int stride,
                                      const std::string& source_id) {
    if (frames.size() < 3) throw DataError("need at least 3 frames for triplets");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    std::vector<Triplet> out;
    for (size_t i = 0; i + 2 < frames.size(); i += stride)
        out.emplace_back(frames[i], frames[i + 1], frames[i + 2], source_id,
                         static_cast<int>(i));
    return out;
}

Image flip_horizontal(const Image& img) { return flip_plane(img, true, false); }
Image flip_vertical(const Image& img) { return flip_plane(img, false, true); }

std::vector<Triplet> augment_flips(const Triplet& t) {
    std::vector<Triplet> out;
    out.reserve(4);
    out.push_back(t);
    out.emplace_back(flip_horizontal(t.prev), flip_horizontal(t.mid),
                     flip_horizontal(t.next), t.source_id + ":hflip", t.frame_index);
    out.emplace_back(flip_vertical(t.prev), flip_vertical(t.mid),
                     flip_vertical(t.next), t.source_id + ":vflip", t.frame_index);
    out.emplace_back(flip_horizontal(flip_vertical(t.prev)),
                     flip_horizontal(flip_vertical(t.mid)),
                     flip_horizontal(flip_vertical(t.next)),
                     t.source_id + ":hvflip", t.frame_index);
    return out;
}

void write_triplets(const std::vector<Triplet>& triplets, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream manifest(dir + "/manifest.txt");
    if (!manifest) throw DataError("cannot write manifest in " + dir);
    char sub[64];
    for (size_t i = 0; i < triplets.size(); ++i) {
        const Triplet& t = triplets[i];
        std::snprintf(sub, sizeof(sub), "%06zu", i);
        const std::string tdir = dir + "/" + sub;
        fs::create_directories(tdir);
        save_frame(t.prev, tdir + "/0.pgm");
        save_frame(t.mid, tdir + "/1.pgm");
        save_frame(t.next, tdir + "/2.pgm");
        const std::string id = t.source_id.empty() ? "clip" : t.source_id;
        const size_t colon = id.find(':');
        const std::string base = colon == std::string::npos ? id : id.substr(0, colon);
        const std::string tag = colon == std::string::npos ? "none" : id.substr(colon + 1);
        manifest << sub << "\t" << base << "\t" << t.frame_index << "\t" << tag << "\n";
    }
    if (!manifest) throw DataError("manifest write failure in " + dir);
}

std::vector<Triplet> load_triplets(const std::string& dir) {
    std::ifstream manifest(dir + "/manifest.txt");
    if (!manifest) throw DataError("cannot open manifest in " + dir);
    std::vector<Triplet> out;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sub, base, tag;
        int frame_index = 0;
        if (!(ss >> sub >> base >> frame_index >> tag))
            throw FormatError("malformed triplet manifest line: " + line);
        const std::string tdir = dir + "/" + sub;
        const std::string id = tag == "none" ? base : base + ":" + tag;
        out.emplace_back(load_frame(tdir + "/0.pgm"), load_frame(tdir + "/1.pgm"),
                         load_frame(tdir + "/2.pgm"), id, frame_index);
    }
    if (out.empty()) throw DataError("no triplets found in " + dir);
    return out;
}

} // namespace angio

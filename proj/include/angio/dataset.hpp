#pragma once

#include <string>
#include <utility>
#include <vector>

#include "angio/image.hpp"

namespace angio {

/// Privacy-masking rectangle; pixels inside are set to `fill`.
struct MaskRegion {
    int x = 0, y = 0, w = 0, h = 0;
    double fill = 0.0;
};

struct DedupConfig {
    double threshold = 1.0 / 255.0; // mean absolute intensity difference
    int min_unique_gap = 1;         // minimum raw-frame spacing between kept frames
    double recording_fps = 25.0;    // screen-recording rate, for the fps estimate
};

struct DedupReport {
    int total = 0;
    int kept = 0;
    std::vector<std::pair<int, int>> drop_runs; // [first_dropped, last_dropped]
    double effective_fps = 0.0;                 // kept/total * recording_fps
};

/// Remove near-duplicate frames: frame i is dropped iff its mean absolute
/// difference to the last kept frame is <= threshold (or it violates
/// min_unique_gap). The first frame is always kept. Comparing against the
/// last kept frame collapses whole duplicate runs.
std::pair<std::vector<int>, DedupReport>
deduplicate(const std::vector<Image>& frames, const DedupConfig& cfg);

/// Fill the given rectangles; out-of-bounds regions raise DomainError.
Image apply_mask(const Image& img, const std::vector<MaskRegion>& regions);

/// Consecutive triplets (i, i+1, i+2) for i = 0, stride, 2*stride, ...
std::vector<Triplet> extract_triplets(const std::vector<Image>& frames, int stride,
                                      const std::string& source_id = "");

/// The 4-element flip group {identity, hflip, vflip, hvflip}, applied
/// consistently to all three frames. source_id gains a ":tag" suffix.
std::vector<Triplet> augment_flips(const Triplet& t);

Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);

/// Write triplets as <dir>/<clip>/<index>/{0,1,2}.pgm plus a manifest with
/// one line per triplet: source_id, frame index, augmentation tag.
void write_triplets(const std::vector<Triplet>& triplets, const std::string& dir);

/// Load triplets back from a directory written by write_triplets.
std::vector<Triplet> load_triplets(const std::string& dir);

} // namespace angio

#include <doctest.h>

#include <cmath>

#include "angio/dataset.hpp"
#include "support/test_support.hpp"

using namespace angio;
using namespace angio::test;

namespace {

Image noisy_copy(const Image& base, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    Plane p(base.height(), base.width());
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = std::clamp(base[i] + dist(rng), 0.0, 1.0);
    return Image(std::move(p));
}

std::vector<Image> duplicated_stream(const std::vector<Image>& uniques,
                                     const std::vector<int>& copies) {
    std::vector<Image> out;
    for (size_t i = 0; i < uniques.size(); ++i)
        for (int c = 0; c < copies[i]; ++c) out.push_back(uniques[i]);
    return out;
}

} // namespace

TEST_CASE("dedup recovers the unique frames from a duplicated stream") {
    auto rng = make_rng(101);
    std::vector<Image> uniques;
    for (int i = 0; i < 10; ++i) uniques.push_back(random_image(rng, 12, 12));
    std::vector<int> copies(10, 2);
    copies[9] = 1; // last one appears once
    const std::vector<Image> stream = duplicated_stream(uniques, copies);
    REQUIRE(stream.size() == 19);

    const auto [kept, report] = deduplicate(stream, DedupConfig{});
    REQUIRE(kept.size() == 10);
    for (size_t i = 0; i < kept.size(); ++i) {
        // Every kept frame equals its unique source exactly.
        for (size_t px = 0; px < uniques[i].size(); ++px)
            REQUIRE(stream[kept[i]][px] == uniques[i][px]);
    }
    CHECK(report.total == 19);
    CHECK(report.kept == 10);
    CHECK(report.effective_fps == doctest::Approx(10.0 / 19.0 * 25.0));
}

TEST_CASE("all-distinct frames are all kept and dedup is idempotent") {
    auto rng = make_rng(103);
    std::vector<Image> frames;
    for (int i = 0; i < 8; ++i) frames.push_back(random_image(rng, 10, 10));
    const auto [kept, report] = deduplicate(frames, DedupConfig{});
    CHECK(kept.size() == 8);
    CHECK(report.drop_runs.empty());

    // Re-running on the kept output removes nothing.
    std::vector<Image> surviving;
    for (int i : kept) surviving.push_back(frames[i]);
    const auto [kept2, report2] = deduplicate(surviving, DedupConfig{});
    CHECK(kept2.size() == surviving.size());
}

TEST_CASE("noise sweep around the default threshold") {
    auto rng = make_rng(107);
    const Image base = random_image(rng, 16, 16);

    // Independent +-0.5/255 noise on both copies: mean |diff| ~ 2a/3 is
    // about 0.33/255, well under the one-quantization-step threshold.
    int dropped = 0, kept_count = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Image> pair{noisy_copy(base, rng, 0.5 / 255.0),
                                noisy_copy(base, rng, 0.5 / 255.0)};
        const auto [kept, report] = deduplicate(pair, DedupConfig{});
        dropped += (kept.size() == 1);
    }
    CHECK(dropped == 20);

    // Amplitude 2/255 pushes the mean difference (~1.33/255) past it.
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Image> pair{noisy_copy(base, rng, 2.0 / 255.0),
                                noisy_copy(base, rng, 2.0 / 255.0)};
        const auto [kept, report] = deduplicate(pair, DedupConfig{});
        kept_count += (kept.size() == 2);
    }
    CHECK(kept_count == 20);
}

TEST_CASE("dedup rejects empty input") {
    CHECK_THROWS_AS(deduplicate({}, DedupConfig{}), DataError);
}

TEST_CASE("mask application: identity, full frame, overlap, idempotence") {
    auto rng = make_rng(109);
    const Image img = random_image(rng, 10, 12);

    const Image same = apply_mask(img, {});
    for (size_t i = 0; i < img.size(); ++i) CHECK(same[i] == img[i]);

    const Image zeroed = apply_mask(img, {{0, 0, 12, 10, 0.0}});
    for (size_t i = 0; i < zeroed.size(); ++i) CHECK(zeroed[i] == 0.0);

    const std::vector<MaskRegion> overlapping{{1, 1, 5, 5, 0.0}, {3, 3, 6, 4, 0.0}};
    const Image once = apply_mask(img, overlapping);
    const Image twice = apply_mask(once, overlapping);
    for (size_t i = 0; i < once.size(); ++i) CHECK(once[i] == twice[i]);
    CHECK(once.at(2, 2) == 0.0);
    CHECK(once.at(5, 8) == 0.0);
    CHECK(once.at(9, 11) == img.at(9, 11));

    // Disjoint regions commute.
    const MaskRegion r1{0, 0, 3, 3, 0.2};
    const MaskRegion r2{6, 6, 3, 3, 0.8};
    const Image ab = apply_mask(apply_mask(img, {r1}), {r2});
    const Image ba = apply_mask(apply_mask(img, {r2}), {r1});
    for (size_t i = 0; i < ab.size(); ++i) CHECK(ab[i] == ba[i]);

    CHECK_THROWS_AS(apply_mask(img, {{8, 8, 10, 3, 0.0}}), DomainError);
}

TEST_CASE("masking commutes with dedup for frame-constant regions") {
    auto rng = make_rng(113);
    std::vector<Image> uniques;
    for (int i = 0; i < 5; ++i) uniques.push_back(random_image(rng, 12, 12));
    const std::vector<Image> stream = duplicated_stream(uniques, {2, 2, 2, 2, 2});
    const std::vector<MaskRegion> regions{{2, 2, 4, 4, 0.0}};

    const auto [kept_raw, ra] = deduplicate(stream, DedupConfig{});
    std::vector<Image> masked;
    for (const Image& f : stream) masked.push_back(apply_mask(f, regions));
    const auto [kept_masked, rb] = deduplicate(masked, DedupConfig{});
    CHECK(kept_raw == kept_masked);
}

TEST_CASE("triplet extraction counts") {
    auto rng = make_rng(127);
    std::vector<Image> five;
    for (int i = 0; i < 5; ++i) five.push_back(random_image(rng, 6, 6));
    CHECK(extract_triplets(five, 1).size() == 3);

    std::vector<Image> three(five.begin(), five.begin() + 3);
    CHECK(extract_triplets(three, 1).size() == 1);

    std::vector<Image> hundred;
    const Image proto = random_image(rng, 4, 4);
    for (int i = 0; i < 100; ++i) hundred.push_back(proto);
    CHECK(extract_triplets(hundred, 2).size() == 49);

    CHECK_THROWS_AS(extract_triplets(three, 0), ConfigError);
    std::vector<Image> two(five.begin(), five.begin() + 2);
    CHECK_THROWS_AS(extract_triplets(two, 1), DataError);

    // Triplets are consecutive in index order.
    const auto trips = extract_triplets(five, 2, "c");
    REQUIRE(trips.size() == 2);
    CHECK(trips[0].frame_index == 0);
    CHECK(trips[1].frame_index == 2);
}

TEST_CASE("flip augmentation: group structure") {
    auto rng = make_rng(131);
    const Triplet t(random_image(rng, 8, 8), random_image(rng, 8, 8),
                    random_image(rng, 8, 8), "clip", 0);
    const auto aug = augment_flips(t);
    REQUIRE(aug.size() == 4);

    // hflip twice is the identity.
    const Image back = flip_horizontal(flip_horizontal(t.mid));
    for (size_t i = 0; i < back.size(); ++i) CHECK(back[i] == t.mid[i]);

    // vflip of an asymmetric frame differs from the original.
    double diff = 0.0;
    for (size_t i = 0; i < t.mid.size(); ++i)
        diff = std::max(diff, std::fabs(aug[2].mid[i] - t.mid[i]));
    CHECK(diff > 0.0);

    // hvflip equals hflip composed with vflip.
    const Image hv = flip_horizontal(flip_vertical(t.prev));
    for (size_t i = 0; i < hv.size(); ++i) CHECK(aug[3].prev[i] == hv[i]);

    CHECK(aug[1].source_id == "clip:hflip");
    CHECK(aug[2].source_id == "clip:vflip");
    CHECK(aug[3].source_id == "clip:hvflip");
}

TEST_CASE("triplet directory round trip") {
    auto rng = make_rng(137);
    std::vector<Image> frames;
    for (int i = 0; i < 5; ++i) {
        Plane p(6, 6);
        for (size_t j = 0; j < p.size(); ++j)
            p[j] = static_cast<double>(rng() % 256) / 255.0;
        frames.push_back(Image(std::move(p)));
    }
    const auto trips = extract_triplets(frames, 1, "vc1");
    const std::string dir = make_temp_dir("triplets");
    write_triplets(trips, dir);
    const auto back = load_triplets(dir);
    REQUIRE(back.size() == trips.size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].source_id == trips[i].source_id);
        CHECK(back[i].frame_index == trips[i].frame_index);
        for (size_t px = 0; px < back[i].mid.size(); ++px)
            REQUIRE(back[i].mid[px] == trips[i].mid[px]);
    }
}

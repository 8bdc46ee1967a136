#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "angio/eval.hpp"
#include "support/test_support.hpp"

using namespace angio;
using namespace angio::test;

namespace {

// Independent SSIM implementation: same published constants, but built
// from separable window coefficients and centered-moment accumulation.
double ssim_reference(const Image& a, const Image& b) {
    const int radius = 5;
    const double sigma = 1.5;
    std::vector<double> k1d(2 * radius + 1);
    double ks = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k1d[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        ks += k1d[i + radius];
    }
    for (double& v : k1d) v /= ks;

    const double c1 = 1e-4, c2 = 9e-4;
    const int h = a.height(), w = a.width();
    double total = 0.0;
    int count = 0;
    for (int y = radius; y < h - radius; ++y) {
        for (int x = radius; x < w - radius; ++x) {
            double mu_a = 0.0, mu_b = 0.0;
            for (int j = -radius; j <= radius; ++j)
                for (int i = -radius; i <= radius; ++i) {
                    const double wt = k1d[j + radius] * k1d[i + radius];
                    mu_a += wt * a.at(y + j, x + i);
                    mu_b += wt * b.at(y + j, x + i);
                }
            double va = 0.0, vb = 0.0, vab = 0.0;
            for (int j = -radius; j <= radius; ++j)
                for (int i = -radius; i <= radius; ++i) {
                    const double wt = k1d[j + radius] * k1d[i + radius];
                    const double da = a.at(y + j, x + i) - mu_a;
                    const double db = b.at(y + j, x + i) - mu_b;
                    va += wt * da * da;
                    vb += wt * db * db;
                    vab += wt * da * db;
                }
            total += ((2 * mu_a * mu_b + c1) * (2 * vab + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
            ++count;
        }
    }
    return total / count;
}

Image textured(int h, int w, uint64_t seed) {
    auto rng = make_rng(seed);
    return random_image(rng, h, w);
}

} // namespace

TEST_CASE("psnr cap, floor, and the one-lsb case") {
    const Image a(8, 8, 0.4);
    CHECK(psnr(a, a) == 99.0);

    const Image zeros(8, 8, 0.0);
    const Image ones(8, 8, 1.0);
    CHECK(psnr(zeros, ones) == doctest::Approx(0.0).epsilon(1e-12));

    Plane shifted(8, 8, 0.3 + 1.0 / 255.0);
    const Image b(std::move(shifted));
    const Image base(8, 8, 0.3);
    CHECK(psnr(base, b) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-9));

    CHECK_THROWS_AS(psnr(a, Image(8, 9, 0.0)), ShapeError);
}

TEST_CASE("psnr symmetry and monotone degradation with noise") {
    auto rng = make_rng(139);
    const Image a = textured(16, 16, 139);
    double prev = 1e9;
    for (double amp : {0.01, 0.03, 0.09, 0.27}) {
        std::uniform_real_distribution<double> dist(-amp, amp);
        Plane p(16, 16);
        for (size_t i = 0; i < p.size(); ++i)
            p[i] = std::clamp(a[i] + dist(rng), 0.0, 1.0);
        const Image noisy(std::move(p));
        const double fwd = psnr(a, noisy);
        CHECK(fwd == psnr(noisy, a));
        CHECK(fwd < prev);
        prev = fwd;
    }
}

TEST_CASE("psnr_masked scores only unmasked pixels") {
    const Image a(4, 4, 0.5);
    Plane p(4, 4, 0.5);
    p.at(0, 0) = 1.0;
    const Image b(std::move(p));
    std::vector<uint8_t> mask(16, 0);
    mask[0] = 1;
    CHECK(psnr_masked(a, b, mask) == 99.0);
    CHECK(psnr(a, b) < 99.0);
    std::vector<uint8_t> all(16, 1);
    CHECK_THROWS_AS(psnr_masked(a, b, all), DomainError);
}

TEST_CASE("ssim identities and reference agreement") {
    const Image img = textured(24, 24, 149);
    CHECK(ssim(img, img) == 1.0);

    // Constant offset: compare against the independent implementation.
    Plane p(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) p.at(y, x) = std::min(1.0, img.at(y, x) * 0.8 + 0.1);
    const Image shifted(std::move(p));
    const double mine = ssim(img, shifted);
    const double ref = ssim_reference(img, shifted);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-6));
    CHECK(std::fabs(mine) <= 1.0);

    CHECK(ssim(img, shifted) == ssim(shifted, img));

    CHECK_THROWS_AS(ssim(Image(8, 8, 0.1), Image(8, 8, 0.1)), ShapeError);
}

TEST_CASE("protocol scores every interior frame once") {
    std::vector<Image> clip(5, Image(16, 16, 0.5));
    const Interpolator identity_interp = [](const Image& a, const Image&, double) {
        return a;
    };
    const MetricSeries s = interpolation_protocol(clip, identity_interp, 0.5, "c", "m");
    REQUIRE(s.records.size() == 3);
    for (const auto& r : s.records) {
        CHECK(r.psnr_db == 99.0);
        CHECK(r.ssim == 1.0);
    }
    CHECK(s.records[0].frame_index == 1);
    CHECK(s.records[2].frame_index == 3);

    std::vector<Image> nine(9, Image(16, 16, 0.2));
    CHECK(interpolation_protocol(nine, identity_interp).records.size() == 7);

    std::vector<Image> two(2, Image(16, 16, 0.2));
    CHECK_THROWS_AS(interpolation_protocol(two, identity_interp), DataError);
}

TEST_CASE("detect_period: constant series has no period") {
    MetricSeries s;
    for (int i = 0; i < 20; ++i) s.records.push_back({i, 35.0, 0.9});
    const PeriodReport r = detect_period(s);
    CHECK(!r.detected_period.has_value());
    CHECK(r.dip_indices.empty());
}

TEST_CASE("detect_period: sinusoid of period 8 over 32 points") {
    MetricSeries s;
    for (int i = 0; i < 32; ++i)
        s.records.push_back({i, 35.0 + 3.0 * std::sin(2.0 * M_PI * i / 8.0), 0.9});
    const PeriodReport r = detect_period(s);
    REQUIRE(r.detected_period.has_value());
    CHECK(*r.detected_period == 8);
    CHECK(r.confidence > 0.9);

    // Constant offsets do not change the detection (mean removal).
    MetricSeries shifted = s;
    for (auto& rec : shifted.records) rec.psnr_db += 11.0;
    const PeriodReport r2 = detect_period(shifted);
    REQUIRE(r2.detected_period.has_value());
    CHECK(*r2.detected_period == 8);

    MetricSeries tiny;
    for (int i = 0; i < 7; ++i) tiny.records.push_back({i, 1.0 * i, 0.0});
    CHECK_THROWS_AS(detect_period(tiny), DataError);
}

TEST_CASE("detect_period finds dips below mean - 0.5 stddev") {
    MetricSeries s;
    for (int i = 0; i < 24; ++i) {
        double v = 40.0;
        if (i % 8 == 4) v = 30.0; // deep dip at 4, 12, 20
        s.records.push_back({i, v, 0.9});
    }
    const PeriodReport r = detect_period(s);
    REQUIRE(r.dip_indices.size() == 3);
    CHECK(r.dip_indices[0] == 4);
    CHECK(r.dip_indices[1] == 12);
    CHECK(r.dip_indices[2] == 20);
    REQUIRE(r.detected_period.has_value());
    CHECK(*r.detected_period == 8);
}

TEST_CASE("emit_report writes consistent CSV, JSON, and SVG") {
    MetricSeries s1, s2;
    s1.clip_id = "vc1";
    s1.method_id = "hs-interp";
    s2.clip_id = "vc1";
    s2.method_id = "baseline";
    for (int i = 0; i < 12; ++i) {
        s1.records.push_back({i + 1, 38.0 + std::sin(i * 0.7), 0.93});
        s2.records.push_back({i + 1, 35.0 + std::cos(i * 0.9), 0.90});
    }
    PeriodReport p1;
    p1.detected_period = 9;
    p1.confidence = 0.8;
    p1.dip_indices = {3, 9};
    PeriodReport p2; // none detected, no dips

    const std::string dir = make_temp_dir("report");
    emit_report({s1, s2}, {p1, p2}, dir);

    std::ifstream csv(dir + "/report.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "clip,method,frame_index,psnr_db,ssim");
    int rows = 0;
    double sum_psnr = 0.0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        ++rows;
        if (rows <= 12) {
            std::istringstream ss(line);
            std::string cell;
            for (int c = 0; c < 4; ++c) std::getline(ss, cell, ',');
            sum_psnr += std::stod(cell);
        }
    }
    CHECK(rows == 24);

    std::ifstream js(dir + "/summary.json");
    REQUIRE(js.good());
    nlohmann::json root = nlohmann::json::parse(js);
    REQUIRE(root["series"].size() == 2);
    CHECK(root["series"][0]["mean_psnr_db"].get<double>() ==
          doctest::Approx(sum_psnr / 12.0).epsilon(1e-6));
    CHECK(root["series"][0]["detected_period"].get<int>() == 9);
    CHECK(root["series"][1]["detected_period"].is_null());

    std::ifstream svgf(dir + "/psnr.svg");
    REQUIRE(svgf.good());
    std::string svg((std::istreambuf_iterator<char>(svgf)), std::istreambuf_iterator<char>());
    size_t polylines = 0, dips = 0;
    for (size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1))
        ++polylines;
    for (size_t pos = svg.find("class=\"dip\""); pos != std::string::npos;
         pos = svg.find("class=\"dip\"", pos + 1))
        ++dips;
    CHECK(polylines == 2);
    CHECK(dips == 2);
}

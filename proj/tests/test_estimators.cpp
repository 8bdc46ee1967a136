#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "angio/estimators.hpp"
#include "angio/io.hpp"
#include "angio/projection.hpp"
#include "support/test_support.hpp"

using namespace angio;
using namespace angio::test;

namespace {

// Band-limited texture: shortest period 12 px so every pyramid level of a
// 64px image still resolves it.
double texture(double x, double y) {
    double v = 0.5 + 0.18 * std::sin(2 * M_PI * x / 19.0) * std::sin(2 * M_PI * y / 15.0) +
               0.14 * std::sin(2 * M_PI * x / 12.0 + 1.1) +
               0.1 * std::sin(2 * M_PI * y / 13.5 + 0.4) +
               0.05 * std::sin(2 * M_PI * (x + y) / 27.0);
    return std::clamp(v, 0.0, 1.0);
}

Image textured_image(int h, int w, double shift_x, double shift_y) {
    Plane p(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) p.at(y, x) = texture(x - shift_x, y - shift_y);
    return Image(std::move(p));
}

} // namespace

TEST_CASE("identical inputs give (numerically) zero flow") {
    auto rng = make_rng(67);
    const Image a = random_image(rng, 32, 32);
    FlowEstimatorConfig cfg;
    cfg.pyramid_levels = 2;
    const FlowField f = estimate_flow(a, a, cfg);
    for (size_t i = 0; i < f.size(); ++i) {
        CHECK(std::fabs(f.u()[i]) < 1e-6);
        CHECK(std::fabs(f.v()[i]) < 1e-6);
    }
}

TEST_CASE("constant images give zero flow") {
    const Image a(32, 32, 0.42);
    const Image b(32, 32, 0.42);
    FlowEstimatorConfig cfg;
    cfg.pyramid_levels = 2;
    const FlowField f = estimate_flow(a, b, cfg);
    for (size_t i = 0; i < f.size(); ++i) {
        CHECK(std::fabs(f.u()[i]) < 1e-6);
        CHECK(std::fabs(f.v()[i]) < 1e-6);
    }
}

TEST_CASE("recovers a 3px translation within 0.3px on the interior") {
    const Image a = textured_image(64, 64, 0.0, 0.0);
    const Image b = textured_image(64, 64, 3.0, 0.0);
    FlowEstimatorConfig cfg;
    const FlowField f = estimate_flow(a, b, cfg);
    double mu = 0.0, mv = 0.0;
    int n = 0;
    for (int y = 8; y < 56; ++y) {
        for (int x = 8; x < 56; ++x) {
            mu += f.u().at(y, x);
            mv += f.v().at(y, x);
            ++n;
        }
    }
    mu /= n;
    mv /= n;
    CHECK(std::fabs(mu - 3.0) < 0.3);
    CHECK(std::fabs(mv) < 0.3);
}

TEST_CASE("flow estimation is deterministic across thread counts") {
    const Image a = textured_image(48, 48, 0.0, 0.0);
    const Image b = textured_image(48, 48, 1.2, -0.8);
    FlowEstimatorConfig cfg;
    cfg.pyramid_levels = 3;
    const FlowField f1 = estimate_flow(a, b, cfg, 1);
    const FlowField f2 = estimate_flow(a, b, cfg, 1);
    const FlowField f8 = estimate_flow(a, b, cfg, 8);
    CHECK(max_abs_diff(f1, f2) == 0.0);
    CHECK(max_abs_diff(f1, f8) == 0.0);
}

TEST_CASE("pyramid depth is validated against the image size") {
    const Image a(16, 16, 0.5);
    FlowEstimatorConfig cfg;
    cfg.pyramid_levels = 4; // 16 / 2^3 = 2 < 8
    CHECK_THROWS_AS(estimate_flow(a, a, cfg), ConfigError);
}

TEST_CASE("constant depth provider fills the frame dimensions") {
    const Image frame(4, 4, 0.1);
    const DepthMap d = provide_depth(DepthProviderKind::constant(1.0), frame);
    REQUIRE(d.height() == 4);
    REQUIRE(d.width() == 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(d.at(y, x) == 1.0);

    CHECK_THROWS_AS(DepthProviderKind::constant(0.0), ConfigError);
}

TEST_CASE("projection is identical under constant depth rescaling") {
    auto rng = make_rng(71);
    const Image frame(8, 8, 0.3);
    const FlowField flow = random_flow(rng, 8, 8, -3.0, 3.0);
    const DepthMap d1 = provide_depth(DepthProviderKind::constant(1.0), frame);
    const DepthMap d5 = provide_depth(DepthProviderKind::constant(5.0), frame);
    const ProjectionResult r1 = project_flow(flow, d1, 0.5, ProjectionDirection::to_frame0);
    const ProjectionResult r5 = project_flow(flow, d5, 0.5, ProjectionDirection::to_frame0);
    CHECK(max_abs_diff(r1.flow, r5.flow) < 1e-12);
}

TEST_CASE("file depth provider validates positivity and shape") {
    const std::string dir = make_temp_dir("estimators");
    const std::string good = dir + "/depth_ok.flo";
    write_depth(DepthMap(4, 4, 2.0), good);
    const Image frame(4, 4, 0.0);
    const DepthMap d = provide_depth(DepthProviderKind::from_file(good), frame);
    CHECK(d.at(1, 1) == 2.0);

    // A zero entry must be rejected at load time.
    const std::string bad = dir + "/depth_bad.flo";
    FlowField raw(4, 4, 1.0, 0.0);
    raw.u()[5] = 0.0;
    write_flow(raw, bad);
    CHECK_THROWS_AS(provide_depth(DepthProviderKind::from_file(bad), frame), DomainError);

    const Image other(5, 4, 0.0);
    CHECK_THROWS_AS(provide_depth(DepthProviderKind::from_file(good), other), ShapeError);
}

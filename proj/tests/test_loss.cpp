#include <doctest.h>

#include <cmath>

#include "angio/loss.hpp"
#include "support/test_support.hpp"

using namespace angio;
using namespace angio::test;

TEST_CASE("charbonnier values") {
    CHECK(charbonnier(0.0, 1e-4) == 1e-4);
    CHECK(charbonnier(1.0, 1e-4) == doctest::Approx(std::sqrt(1.0 + 1e-8)).epsilon(1e-15));
    // sqrt((3e-4)^2 + (1e-4)^2) = sqrt(1e-7)
    CHECK(charbonnier(3e-4, 1e-4) == doctest::Approx(std::sqrt(1e-7)).epsilon(1e-12));
    CHECK(charbonnier(3e-4, 1e-4) == doctest::Approx(3.16228e-4).epsilon(1e-5));
}

TEST_CASE("reconstruction loss floor and single-pixel value") {
    const Image a(2, 2, 0.5);
    CHECK(reconstruction_loss(a, a, 1e-4) == doctest::Approx(4e-4).epsilon(1e-12));

    const Image zero(1, 1, 0.0);
    const Image one(1, 1, 1.0);
    CHECK(reconstruction_loss(zero, one, 1e-4) ==
          doctest::Approx(std::sqrt(1.0 + 1e-8)).epsilon(1e-15));

    CHECK_THROWS_AS(reconstruction_loss(a, Image(2, 3, 0.5), 1e-4), ShapeError);
}

TEST_CASE("reconstruction loss matches a per-pixel loop oracle") {
    auto rng = make_rng(73);
    const Image pred = random_image(rng, 8, 8);
    const Image gt = random_image(rng, 8, 8);
    const double eps = 1e-4;
    double expected = 0.0;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double d = std::fabs(pred.at(y, x) - gt.at(y, x));
            expected += std::sqrt(d * d + eps * eps);
        }
    CHECK(reconstruction_loss(pred, gt, eps) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("structure loss identities") {
    auto rng = make_rng(79);
    const Image pred = random_image(rng, 8, 8);
    const Image gt = random_image(rng, 8, 8);
    const double eps = 1e-4;

    // Identity feature: definitionally the reconstruction loss.
    CHECK(structure_loss(pred, gt, FeatureKind::identity, eps) ==
          doctest::Approx(reconstruction_loss(pred, gt, eps)).epsilon(1e-15));

    // Identical images: floor.
    CHECK(structure_loss(pred, pred, FeatureKind::sobel_magnitude, eps) ==
          doctest::Approx(64 * eps).epsilon(1e-12));

    // Constants differing by 0.3: Sobel responses are zero on both sides.
    const Image c1(6, 6, 0.2);
    const Image c2(6, 6, 0.5);
    CHECK(structure_loss(c1, c2, FeatureKind::sobel_magnitude, eps) ==
          doctest::Approx(36 * eps).epsilon(1e-9));
}

TEST_CASE("total loss floor, weights, and zero gradient at the optimum") {
    const LossWeights w;
    const Image img(8, 8, 0.618);
    const LossValue lv = total_loss_and_grad(img, img, w, FeatureKind::sobel_magnitude);
    CHECK(lv.total == doctest::Approx((0.95 + 0.05) * 64 * 1e-4).epsilon(1e-12));
    for (size_t i = 0; i < lv.d_pred.size(); ++i) CHECK(lv.d_pred[i] == 0.0);

    auto rng = make_rng(83);
    const Image pred = random_image(rng, 8, 8);
    const Image gt = random_image(rng, 8, 8);
    LossWeights only_l1;
    only_l1.lambda2 = 0.0;
    const LossValue l1_only = total_loss_and_grad(pred, gt, only_l1, FeatureKind::identity);
    CHECK(l1_only.total ==
          doctest::Approx(0.95 * reconstruction_loss(pred, gt, 1e-4)).epsilon(1e-13));
}

TEST_CASE("loss is symmetric and bounded below") {
    auto rng = make_rng(89);
    const Image a = random_image(rng, 9, 9);
    const Image b = random_image(rng, 9, 9);
    const LossWeights w;
    for (auto phi : {FeatureKind::identity, FeatureKind::sobel_magnitude}) {
        const double lab = total_loss_and_grad(a, b, w, phi).total;
        const double lba = total_loss_and_grad(b, a, w, phi).total;
        CHECK(lab == doctest::Approx(lba).epsilon(1e-12));
        CHECK(lab >= (w.lambda1 + w.lambda2) * 81 * w.epsilon - 1e-15);
    }
}

TEST_CASE("gradients stay finite at kink-adjacent inputs") {
    const Image a(5, 5, 0.5);
    Plane p(5, 5, 0.5);
    p.at(2, 2) = 0.5 + 1e-13; // deep inside the charbonnier well
    const LossValue lv =
        total_loss_and_grad(Image(std::move(p)), a, LossWeights{}, FeatureKind::sobel_magnitude);
    for (size_t i = 0; i < lv.d_pred.size(); ++i) CHECK(std::isfinite(lv.d_pred[i]));
}

TEST_CASE("analytic gradient matches finite differences") {
    auto rng = make_rng(97);
    const LossWeights w;
    // Small h keeps the truncation error tiny near the charbonnier kink
    // (curvature ~ 1/eps); the loss itself is cheap enough to probe densely.
    const double h_step = 5e-8;
    for (auto phi : {FeatureKind::identity, FeatureKind::sobel_magnitude}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Image pred = random_image(rng, 8, 8);
            const Image gt = random_image(rng, 8, 8);
            const LossValue lv = total_loss_and_grad(pred, gt, w, phi);

            double scale = 0.0;
            for (size_t i = 0; i < lv.d_pred.size(); ++i)
                scale = std::max(scale, std::fabs(lv.d_pred[i]));

            double max_err = 0.0;
            for (size_t i = 0; i < pred.size(); ++i) {
                Plane pp = pred.plane(), pm = pred.plane();
                pp[i] += h_step;
                pm[i] -= h_step;
                const double lp =
                    w.lambda1 * reconstruction_loss(Image(pp), gt, w.epsilon) +
                    w.lambda2 * structure_loss(Image(pp), gt, phi, w.epsilon);
                const double lm =
                    w.lambda1 * reconstruction_loss(Image(pm), gt, w.epsilon) +
                    w.lambda2 * structure_loss(Image(pm), gt, phi, w.epsilon);
                const double fd = (lp - lm) / (2.0 * h_step);
                max_err = std::max(max_err, std::fabs(fd - lv.d_pred[i]));
            }
            CHECK(max_err / std::max(scale, 1e-8) < 1e-4);
        }
    }
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "angio/io.hpp"
#include "support/test_support.hpp"

using namespace angio;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    static const std::string dir = test::make_temp_dir("core");
    return dir + "/" + name;
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), bytes.size());
}

} // namespace

TEST_CASE("pgm 2x2 payload maps v/255") {
    const std::string path = temp_path("tiny.pgm");
    std::string data = "P5\n2 2\n255\n";
    data.push_back(static_cast<char>(0));
    data.push_back(static_cast<char>(255));
    data.push_back(static_cast<char>(128));
    data.push_back(static_cast<char>(64));
    write_bytes(path, data);
    const Image img = load_frame(path);
    REQUIRE(img.height() == 2);
    REQUIRE(img.width() == 2);
    CHECK(img[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(img[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(img[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
    CHECK(img[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("all-zero pgm loads as zeros") {
    const std::string path = temp_path("zeros.pgm");
    std::string data = "P5\n8 8\n255\n";
    data.append(64, '\0');
    write_bytes(path, data);
    const Image img = load_frame(path);
    for (size_t i = 0; i < img.size(); ++i) CHECK(img[i] == 0.0);
}

TEST_CASE("truncated pgm payload is a format error") {
    const std::string path = temp_path("trunc.pgm");
    write_bytes(path, "P5\n4 4\n255\n\0\0\0");
    CHECK_THROWS_AS(load_frame(path), FormatError);
}

TEST_CASE("non-8-bit pgm is rejected") {
    const std::string path = temp_path("deep.pgm");
    write_bytes(path, "P5\n1 1\n65535\n\0\0");
    CHECK_THROWS_AS(load_frame(path), FormatError);
}

TEST_CASE("save_frame quantizes round-half-away") {
    CHECK(quantize8(1.0) == 255);
    CHECK(quantize8(0.5) == 128); // round(127.5) away from zero
    CHECK(quantize8(0.0) == 0);

    const std::string path = temp_path("ones.pgm");
    save_frame(Image(3, 3, 1.0), path);
    const Image back = load_frame(path);
    for (size_t i = 0; i < back.size(); ++i) CHECK(back[i] == 1.0);
}

TEST_CASE("image save/load round-trips quantized values") {
    auto rng = test::make_rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int h = 3 + static_cast<int>(rng() % 6);
        const int w = 3 + static_cast<int>(rng() % 6);
        // Pre-quantize so the round trip must be exact.
        Plane p(h, w);
        for (size_t i = 0; i < p.size(); ++i)
            p[i] = static_cast<double>(rng() % 256) / 255.0;
        const Image img(std::move(p));
        const std::string path = temp_path("roundtrip.pgm");
        save_frame(img, path);
        const Image back = load_frame(path);
        REQUIRE(back.same_size(img));
        for (size_t i = 0; i < img.size(); ++i) REQUIRE(back[i] == img[i]);
    }
}

TEST_CASE("png save/load round-trips and rejects non-grayscale") {
    auto rng = test::make_rng(11);
    Plane p(9, 7);
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<double>(rng() % 256) / 255.0;
    const Image img(std::move(p));
    const std::string path = temp_path("frame.png");
    save_frame(img, path);
    const Image back = load_frame(path);
    REQUIRE(back.same_size(img));
    for (size_t i = 0; i < img.size(); ++i) CHECK(back[i] == img[i]);

    CHECK_THROWS_AS(load_frame(temp_path("missing.png")), DataError);

    // PNG signature followed by garbage chunks.
    std::string junk("\x89PNG\r\n\x1a\n", 8);
    junk.append(24, 'x');
    write_bytes(temp_path("junk.png"), junk);
    CHECK_THROWS_AS(load_frame(temp_path("junk.png")), FormatError);
}

TEST_CASE("flo 1x1 layout is 12-byte header plus 8-byte payload") {
    const std::string path = temp_path("one.flo");
    FlowField f(1, 1, 2.0, -3.0);
    write_flow(f, path);
    CHECK(fs::file_size(path) == 20); // 4 magic + 4 w + 4 h + 2 floats
    const FlowField back = read_flow(path);
    CHECK(back.u()[0] == 2.0f);
    CHECK(back.v()[0] == -3.0f);
}

TEST_CASE("flo round-trip is bitwise at 32-bit precision") {
    auto rng = test::make_rng(13);
    FlowField f = test::random_flow(rng, 16, 16, -20.0, 20.0);
    // Snap to float precision first; the file stores 32-bit values.
    Plane u(16, 16), v(16, 16);
    for (size_t i = 0; i < f.size(); ++i) {
        u[i] = static_cast<float>(f.u()[i]);
        v[i] = static_cast<float>(f.v()[i]);
    }
    const FlowField snapped(std::move(u), std::move(v));
    const std::string path = temp_path("rand.flo");
    write_flow(snapped, path);
    const FlowField back = read_flow(path);
    for (size_t i = 0; i < back.size(); ++i) {
        REQUIRE(back.u()[i] == snapped.u()[i]);
        REQUIRE(back.v()[i] == snapped.v()[i]);
    }
}

TEST_CASE("flo with wrong magic or truncated payload is rejected") {
    const std::string path = temp_path("bad.flo");
    std::string data(20, '\0');
    write_bytes(path, data);
    CHECK_THROWS_AS(read_flow(path), FormatError);

    // Valid header claiming 2x2 but carrying a single pixel's payload.
    const std::string good = temp_path("short.flo");
    write_flow(FlowField(1, 1, 1.0, 2.0), good);
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes[4] = 2; // width = 2
    bytes[8] = 2; // height = 2
    write_bytes(temp_path("short2.flo"), bytes);
    CHECK_THROWS_AS(read_flow(temp_path("short2.flo")), FormatError);
}

TEST_CASE("constructors reject non-finite and out-of-range values") {
    Plane bad(2, 2, 0.5);
    bad[1] = std::nan("");
    CHECK_THROWS_AS(Image(std::move(bad)), DomainError);

    Plane big(2, 2, 0.5);
    big[0] = 1.5;
    CHECK_THROWS_AS(Image(std::move(big)), DomainError);

    Plane inf_u(2, 2, 0.0);
    inf_u[2] = INFINITY;
    CHECK_THROWS_AS(FlowField(std::move(inf_u), Plane(2, 2, 0.0)), DomainError);

    Plane zero_depth(2, 2, 1.0);
    zero_depth[3] = 0.0;
    CHECK_THROWS_AS(DepthMap(std::move(zero_depth)), DomainError);

    std::vector<double> w(16, 1.0 / 8.0); // sums to 2
    CHECK_THROWS_AS(KernelField(1, 1, 4, std::move(w)), DomainError);
}

TEST_CASE("depth files use the flo container with v zeroed") {
    const std::string path = temp_path("depth.flo");
    DepthMap d(4, 4, 2.5);
    write_depth(d, path);
    const FlowField raw = read_flow(path);
    for (size_t i = 0; i < raw.size(); ++i) {
        CHECK(raw.u()[i] == 2.5);
        CHECK(raw.v()[i] == 0.0);
    }
    const DepthMap back = read_depth(path);
    for (size_t i = 0; i < d.plane().size(); ++i) CHECK(back[i] == 2.5);

    DepthMap pos(2, 2, 1.0);
    write_depth(pos, path);
    // Corrupt one depth to zero through the flow writer.
    FlowField zeroed(2, 2, 0.0, 0.0);
    write_flow(zeroed, path);
    CHECK_THROWS_AS(read_depth(path), DomainError);
}

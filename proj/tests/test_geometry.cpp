#include <doctest.h>

#include <cmath>

#include "oiqa/sphere_geometry.hpp"
#include "ref/ref_kernels.hpp"
#include "test_support.hpp"

using namespace oiqa;

namespace {

double px_dist(const PixelCoord& a, const PixelCoord& b, int width) {
    double dx = std::abs(a.x - b.x);
    dx = std::min(dx, width - dx);  // seam wrap
    return std::hypot(dx, a.y - b.y);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("erp_to_dir at landmark pixels") {
    // Center pixel of any ERP maps to (0, 0).
    const SphereDirection c = erp_to_dir({2.0, 1.0}, 4, 2);
    CHECK(c.lat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.lon == doctest::Approx(0.0).epsilon(1e-12));

    // Top-left pixel center of a 4x2 image, from the mapping formulas:
    // lon = (0.5/4)*2pi - pi = -pi + pi/4, lat = pi/2 - (0.5/2)*pi = pi/4.
    const SphereDirection tl = erp_to_dir({0.5, 0.5}, 4, 2);
    CHECK(tl.lat == doctest::Approx(kPi / 2 - kPi / 4).epsilon(1e-12));
    CHECK(tl.lon == doctest::Approx(-kPi + kPi / 4).epsilon(1e-12));
}

TEST_CASE("erp_to_dir rejects out-of-range pixels") {
    CHECK_THROWS_AS(erp_to_dir({-0.1, 0.5}, 4, 2), Error);
    CHECK_THROWS_AS(erp_to_dir({4.0, 0.5}, 4, 2), Error);
    CHECK_THROWS_AS(erp_to_dir({1.0, 2.0}, 4, 2), Error);
}

TEST_CASE("dir_to_erp landmarks and seam wrap") {
    const PixelCoord c = dir_to_erp({0.0, 0.0}, 256, 128);
    CHECK(c.x == doctest::Approx(128.0));
    CHECK(c.y == doctest::Approx(64.0));

    // lon just below pi lands just below the right edge.
    const PixelCoord seam = dir_to_erp({0.0, kPi - 1e-9}, 256, 128);
    CHECK(seam.x < 256.0);
    CHECK(seam.x == doctest::Approx(256.0).epsilon(1e-9));

    // lon == pi is out of the canonical range; the wrap is modulo width.
    const PixelCoord wrapped = dir_to_erp({0.0, kPi}, 256, 128);
    CHECK(wrapped.x == doctest::Approx(0.0));
}

TEST_CASE("pixel -> direction -> pixel round trip") {
    Rng rng(42);
    const int w = 512, h = 256;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const PixelCoord p{rng.uniform(0.0, w), rng.uniform(0.0, h)};
        const PixelCoord q = dir_to_erp(erp_to_dir(p, w, h), w, h);
        worst = std::max(worst, px_dist(p, q, w));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("direction -> pixel -> direction round trip away from poles") {
    Rng rng(43);
    const int w = 512, h = 256;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        SphereDirection d;
        d.lat = rng.uniform(-kPi / 2 + 1e-3, kPi / 2 - 1e-3);
        d.lon = rng.uniform(-kPi, kPi - 1e-12);
        const PixelCoord p = dir_to_erp(d, w, h);
        const SphereDirection d2 = erp_to_dir(p, w, h);
        const PixelCoord p2 = dir_to_erp(d2, w, h);
        worst = std::max(worst, px_dist(p, p2, w));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("unit vector round trip") {
    Rng rng(44);
    for (int i = 0; i < 1000; ++i) {
        SphereDirection d;
        d.lat = rng.uniform(-kPi / 2 + 1e-6, kPi / 2 - 1e-6);
        d.lon = rng.uniform(-kPi, kPi - 1e-9);
        const Vec3 v = dir_to_unit(d);
        const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        CHECK(std::abs(norm - 1.0) < 1e-9);
        const SphereDirection d2 = unit_to_dir(v);
        CHECK(d2.lat == doctest::Approx(d.lat).epsilon(1e-12));
        CHECK(d2.lon == doctest::Approx(d.lon).epsilon(1e-12));
    }
}

TEST_CASE("viewport of a constant image is constant") {
    const ErpImage src = ErpImage::wrap(test::constant_raster(128, 64, 0.4f, 0.2f, 0.7f));
    const Viewport vp = extract_viewport(src, ViewportSpec{{0.3, 1.0}, 90.0, 32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            CHECK(vp.image.at(x, y, 0) == 0.4f);
            CHECK(vp.image.at(x, y, 1) == 0.2f);
            CHECK(vp.image.at(x, y, 2) == 0.7f);
        }
}

TEST_CASE("viewport spec validation") {
    const ErpImage src = ErpImage::wrap(Raster(64, 32, 0.5f));
    CHECK_THROWS_AS(extract_viewport(src, ViewportSpec{{0, 0}, 0.0, 32, 32}), Error);
    CHECK_THROWS_AS(extract_viewport(src, ViewportSpec{{0, 0}, 180.0, 32, 32}), Error);
    CHECK_THROWS_AS(extract_viewport(src, ViewportSpec{{0, 0}, 90.0, 1, 32}), Error);
}

TEST_CASE("vertical stripe at lon 0 lands in the viewport center column") {
    Raster erp(256, 128, 0.0f);
    for (int y = 0; y < 128; ++y)
        for (int x = 126; x <= 129; ++x)
            for (int c = 0; c < 3; ++c) erp.at(x, y, c) = 1.0f;
    const ErpImage src = ErpImage::wrap(std::move(erp));
    const Viewport vp = extract_viewport(src, ViewportSpec{{0.0, 0.0}, 90.0, 64, 64});

    double best = -1.0;
    int best_col = -1;
    for (int x = 0; x < 64; ++x) {
        double s = 0.0;
        for (int y = 0; y < 64; ++y) s += vp.image.at(x, y, 0);
        if (s > best) {
            best = s;
            best_col = x;
        }
    }
    CHECK((best_col == 31 || best_col == 32));
}

TEST_CASE("mirror-symmetric erp gives mirrored viewports at lon 0 and 180") {
    // B(lon) = B(pi - lon): mirror symmetry about the 90-degree meridian.
    const Raster a = test::textured_raster(256, 128, 11);
    Raster b(256, 128);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 256; ++x) {
            // Mirror x about the column at lon = pi/2 (x0 = 192): x' = 383 - x.
            const int xm = ((383 - x) % 256 + 256) % 256;
            for (int c = 0; c < 3; ++c)
                b.at(x, y, c) = 0.5f * (a.at(x, y, c) + a.at(xm, y, c));
        }
    const ErpImage sym = ErpImage::wrap(std::move(b));
    const Viewport v0 = extract_viewport(sym, ViewportSpec{{0.0, 0.0}, 90.0, 48, 48});
    const Viewport v1 = extract_viewport(sym, ViewportSpec{{0.0, kPi - 1e-15}, 90.0, 48, 48});

    double worst = 0.0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            for (int c = 0; c < 3; ++c)
                worst = std::max(worst,
                                 std::abs(double(v0.image.at(x, y, c)) -
                                          v1.image.at(47 - x, y, c)));
    CHECK(worst < 1e-5);
}

TEST_CASE("viewport extraction is intensity-linear") {
    const Raster base = test::textured_raster(256, 128, 12);
    Raster scaled = base;
    const float a = 0.37f;
    for (auto& v : scaled.data) v *= a;
    const ViewportSpec spec{{0.2, -1.1}, 90.0, 40, 40};
    const Viewport v1 = extract_viewport(ErpImage::wrap(base), spec);
    const Viewport v2 = extract_viewport(ErpImage::wrap(scaled), spec);
    double worst = 0.0;
    for (size_t i = 0; i < v1.image.data.size(); ++i)
        worst = std::max(worst, std::abs(double(a * v1.image.data[i]) - v2.image.data[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("rotation commutes with viewport extraction") {
    const ErpImage src = ErpImage::wrap(test::textured_raster(256, 128, 13));
    const double delta = kPi / 2;  // 64 px, exact circular shift
    const ErpImage rot = rotate_longitude(src, delta);
    const Viewport va = extract_viewport(rot, ViewportSpec{{0.0, 0.7 + delta}, 90.0, 48, 48});
    const Viewport vb = extract_viewport(src, ViewportSpec{{0.0, 0.7}, 90.0, 48, 48});
    double worst = 0.0;
    for (size_t i = 0; i < va.image.data.size(); ++i)
        worst = std::max(worst, std::abs(double(va.image.data[i]) - vb.image.data[i]));
    CHECK(worst < 1e-5);
}

TEST_CASE("equatorial set longitudes") {
    const ErpImage src = ErpImage::wrap(Raster(64, 32, 0.5f));
    const auto set8 = equatorial_viewport_set(src, 8, ViewportSpec{{0, 0}, 90.0, 8, 8});
    REQUIRE(set8.size() == 8);
    for (int k = 0; k < 8; ++k) {
        CHECK(set8[k].spec.center.lat == 0.0);
        // 45-degree spacing
        CHECK(set8[k].spec.center.lon ==
              doctest::Approx(-kPi + k * kPi / 4).epsilon(1e-12));
    }
    const auto set1 = equatorial_viewport_set(src, 1, ViewportSpec{{0, 0}, 90.0, 8, 8});
    REQUIRE(set1.size() == 1);
    CHECK(set1[0].spec.center.lon == doctest::Approx(-kPi));
    CHECK_THROWS_AS(equatorial_viewport_set(src, 0, ViewportSpec{}), Error);
}

TEST_CASE("rotating the erp by 45 degrees cyclically shifts the m=8 set") {
    const ErpImage src = ErpImage::wrap(test::textured_raster(256, 128, 14));
    const ViewportSpec tmpl{{0, 0}, 90.0, 32, 32};
    const auto orig = equatorial_viewport_set(src, 8, tmpl);
    const ErpImage rot = rotate_longitude(src, kPi / 4);  // 32 px shift
    const auto shifted = equatorial_viewport_set(rot, 8, tmpl);

    // Content that was at lon L now sits at L + 45deg, so shifted[k] shows
    // what orig[k-1] showed.
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
        const auto& a = shifted[k].image;
        const auto& b = orig[(k + 7) % 8].image;
        for (size_t i = 0; i < a.data.size(); ++i)
            worst = std::max(worst, std::abs(double(a.data[i]) - b.data[i]));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("rotate_longitude non-integer shift stays in range") {
    const ErpImage src = ErpImage::wrap(test::textured_raster(64, 32, 15));
    const ErpImage rot = rotate_longitude(src, 0.123);
    CHECK(rot.width() == 64);
    // rotating by 2pi is the identity
    const ErpImage full = rotate_longitude(src, 2.0 * kPi);
    for (size_t i = 0; i < src.raster.data.size(); ++i)
        CHECK(full.raster.data[i] == src.raster.data[i]);
}

TEST_CASE("parallel viewport kernel matches the serial reference") {
    const Raster erp = test::textured_raster(256, 128, 16);
    const ViewportSpec spec{{0.4, 2.0}, 75.0, 56, 40};
    const Viewport par = extract_viewport(ErpImage::wrap(erp), spec);
    const Raster ser = ref::extract_viewport_ref(erp, spec);
    double worst = 0.0;
    for (size_t i = 0; i < ser.data.size(); ++i)
        worst = std::max(worst, std::abs(double(par.image.data[i]) - ser.data[i]));
    CHECK(worst < 1e-6);
}

}  // TEST_SUITE

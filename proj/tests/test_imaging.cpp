#include <catch2/catch_amalgamated.hpp>

#include <fruitgrade/geometry.hpp>
#include <fruitgrade/imaging.hpp>
#include <fruitgrade/rng.hpp>
#include <fruitgrade/synthgen.hpp>

#include <cmath>

using namespace fruitgrade;
using namespace fruitgrade::imaging;

namespace {

/// Independent Otsu oracle: direct two-pass evaluation of the between-class
/// variance at every candidate threshold.
int otsu_brute_force(const GrayImage& img) {
    int best_k = 0;
    double best = -1;
    const double total = static_cast<double>(img.pixels.size());
    for (int k = 0; k <= 254; ++k) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (auto p : img.pixels) {
            if (p <= k) {
                n0 += 1;
                s0 += p;
            } else {
                n1 += 1;
                s1 += p;
            }
        }
        double var = 0;
        if (n0 > 0 && n1 > 0) {
            double mu0 = s0 / n0, mu1 = s1 / n1;
            var = (n0 / total) * (n1 / total) * (mu0 - mu1) * (mu0 - mu1);
        }
        if (var > best) {
            best = var;
            best_k = k;
        }
    }
    return best_k;
}

GrayImage random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img(w, h);
    for (auto& p : img.pixels)
        p = static_cast<std::uint8_t>(rng.next() % 256);
    return img;
}

} // namespace

TEST_CASE("otsu picks the lowest threshold among exact ties") {
    GrayImage img(2, 2);
    img.pixels = {0, 0, 255, 255};
    CHECK(otsu_threshold(img) == 0);
    CHECK(otsu_brute_force(img) == 0);
}

TEST_CASE("otsu rejects a single-intensity image") {
    GrayImage img(3, 3, 7);
    CHECK_THROWS_AS(otsu_threshold(img), std::runtime_error);
}

TEST_CASE("otsu separates a two-lump histogram") {
    Rng rng(11);
    GrayImage img(20, 10);
    for (int i = 0; i < 100; ++i)
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(
            std::lround(30.0 + 5.0 * rng.gaussian()), 0L, 255L));
    for (int i = 100; i < 200; ++i)
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(
            std::lround(200.0 + 5.0 * rng.gaussian()), 0L, 255L));
    int k = otsu_threshold(img);
    CHECK(k >= 40);
    CHECK(k <= 190);
    CHECK(k == otsu_brute_force(img));
}

TEST_CASE("otsu equals the brute-force oracle on random images") {
    for (std::uint64_t s = 0; s < 25; ++s) {
        auto img = random_image(32, 32, 900 + s);
        CHECK(otsu_threshold(img) == otsu_brute_force(img));
    }
}

TEST_CASE("binarize keeps the bright fruit as foreground") {
    GrayImage img(10, 10, 30);
    for (int y = 3; y < 7; ++y)
        for (int x = 3; x < 7; ++x)
            img.at(x, y) = 220;
    auto bin = binarize(img, otsu_threshold(img));
    CHECK(bin.count() == 16);
    CHECK(bin.at(4, 4));
    CHECK_FALSE(bin.at(0, 0));
}

TEST_CASE("binarize complements when the background is brighter than the fruit") {
    GrayImage img(10, 10, 220);
    for (int y = 3; y < 7; ++y)
        for (int x = 3; x < 7; ++x)
            img.at(x, y) = 30;
    auto bin = binarize(img, otsu_threshold(img));
    CHECK(bin.count() == 16);
    CHECK(bin.at(4, 4)); // fruit stays foreground after the complement
    CHECK_FALSE(bin.at(0, 0));
}

TEST_CASE("binarize validates the threshold range") {
    GrayImage img(2, 2, 10);
    CHECK_THROWS_AS(binarize(img, -1), std::invalid_argument);
    CHECK_THROWS_AS(binarize(img, 255), std::invalid_argument);
}

TEST_CASE("clean_silhouette drops speckles and keeps the disc") {
    BinaryImage bin(40, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x)
            if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= 100)
                bin.set(x, y, true);
    std::size_t disc = bin.count();
    bin.set(1, 1, true);
    bin.set(38, 2, true);
    bin.set(2, 38, true);
    auto cleaned = clean_silhouette(bin);
    CHECK(cleaned.count() == disc);
    CHECK_FALSE(cleaned.at(1, 1));
}

TEST_CASE("clean_silhouette fills the hole of an annulus") {
    BinaryImage bin(40, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            int d2 = (x - 20) * (x - 20) + (y - 20) * (y - 20);
            if (d2 <= 144 && d2 >= 36)
                bin.set(x, y, true);
        }
    auto cleaned = clean_silhouette(bin);
    CHECK(cleaned.at(20, 20)); // interior filled
    std::size_t full_disc = 0;
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x)
            if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= 144)
                ++full_disc;
    CHECK(cleaned.count() == full_disc);
}

TEST_CASE("clean_silhouette on a 2x2 checkerboard keeps one pixel") {
    BinaryImage bin(2, 2);
    bin.set(0, 0, true);
    bin.set(1, 1, true);
    auto cleaned = clean_silhouette(bin);
    // both 4-connected components have size 1; earliest row-major one wins
    CHECK(cleaned.count() == 1);
    CHECK(cleaned.at(0, 0));
}

TEST_CASE("clean_silhouette is idempotent") {
    Rng rng(4);
    BinaryImage bin(30, 30);
    for (auto& m : bin.mask)
        m = rng.uniform() < 0.45 ? 1 : 0;
    bin.set(15, 15, true);
    auto once = clean_silhouette(bin);
    auto twice = clean_silhouette(once);
    CHECK(once.mask == twice.mask);
}

TEST_CASE("clean_silhouette rejects an empty mask") {
    BinaryImage bin(5, 5);
    CHECK_THROWS_AS(clean_silhouette(bin), std::runtime_error);
}

TEST_CASE("calibration averages the two axis ratios") {
    auto s = calibrate(20, 20, 40, 40);
    CHECK(s.mm_per_pixel == Catch::Approx(0.5));
    CHECK(s.mm2_per_pixel == Catch::Approx(0.25));
    CHECK(calibrate(20, 10, 40, 20).mm_per_pixel == Catch::Approx(0.5));
    // 20x20 mm at 40x42 px: mean(0.5, 20/42)
    CHECK(calibrate(20, 20, 40, 42).mm_per_pixel ==
          Catch::Approx(0.5 * (0.5 + 20.0 / 42.0)).epsilon(1e-12));
    CHECK_THROWS_AS(calibrate(0, 20, 40, 40), std::invalid_argument);
}

TEST_CASE("measure_view on a solid rectangle") {
    BinaryImage bin(60, 40);
    for (int y = 5; y < 35; ++y) // 30 rows
        for (int x = 5; x < 55; ++x) // 50 cols
            bin.set(x, y, true);
    CalibrationScale s{0.5, 0.25};
    auto m = measure_view(bin, s);
    CHECK(m.extent_h == Catch::Approx(25.0));
    CHECK(m.extent_v == Catch::Approx(15.0));
    CHECK(m.area == Catch::Approx(50 * 30 * 0.25));
    // area is exactly count * mm2_per_pixel
    CHECK(m.area == static_cast<double>(bin.count()) * s.mm2_per_pixel);
}

TEST_CASE("measure_view on a single pixel") {
    BinaryImage bin(3, 3);
    bin.set(1, 1, true);
    CalibrationScale s{1.0, 1.0};
    auto m = measure_view(bin, s);
    CHECK(m.extent_h == 1.0);
    CHECK(m.extent_v == 1.0);
    CHECK(m.area == 1.0);
    CHECK_THROWS_AS(measure_view(BinaryImage(3, 3), s), std::runtime_error);
}

TEST_CASE("assemble_features averages the shared extents") {
    ViewMeasurement m1{46.0, 44.0, 1800.0};
    ViewMeasurement m2{46.4, 41.0, 1700.0};
    ViewMeasurement m3{44.4, 41.2, 1650.0};
    auto f = assemble_features(m1, m2, m3);
    CHECK(f.length == Catch::Approx(46.2));
    CHECK(f.width == Catch::Approx(0.5 * (44.0 + 44.4)));
    CHECK(f.thickness == Catch::Approx(0.5 * (41.0 + 41.2)));
    CHECK(f.pa1 == 1800.0);
    CHECK(f.pa2 == 1700.0);
    CHECK(f.pa3 == 1650.0);
}

TEST_CASE("metrology round-trip recovers a mean-sized fruit") {
    auto vs = synthgen::default_varieties();
    synthgen::GroundTruthFruit f;
    f.length_mm = vs[0].length_mean;
    f.width_mm = vs[0].width_mean;
    f.thickness_mm = vs[0].thickness_mean;
    f.squareness = vs[0].squareness;
    synthgen::RenderConfig cfg;
    cfg.mm_per_pixel = 0.1;
    cfg.image_width = 640;
    cfg.image_height = 640;
    auto views = synthgen::render_views(f, cfg);
    CalibrationScale s{cfg.mm_per_pixel, cfg.mm_per_pixel * cfg.mm_per_pixel};
    auto m1 = measure_view(clean_silhouette(binarize(views[0], otsu_threshold(views[0]))), s);
    auto m2 = measure_view(clean_silhouette(binarize(views[1], otsu_threshold(views[1]))), s);
    auto m3 = measure_view(clean_silhouette(binarize(views[2], otsu_threshold(views[2]))), s);
    auto feats = assemble_features(m1, m2, m3);
    CHECK(std::abs(feats.length - f.length_mm) <= 0.3);
    CHECK(std::abs(feats.width - f.width_mm) <= 0.3);
    CHECK(std::abs(feats.thickness - f.thickness_mm) <= 0.3);
    CHECK(std::abs(feats.pa1 - 1878.12) / 1878.12 < 0.01);
}

TEST_CASE("pgm write / read round trip") {
    GrayImage img = random_image(17, 9, 31);
    auto path = std::string("test_roundtrip.pgm");
    write_pgm(img, path);
    auto back = read_pgm(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
    std::remove(path.c_str());
}

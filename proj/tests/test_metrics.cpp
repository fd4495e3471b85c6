#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/rng.hpp"

using namespace despeckle;

namespace {

ImageGrid filled(int height, int width, double value) {
    ImageGrid img;
    img.height = height;
    img.width = width;
    img.pixels.assign(static_cast<std::size_t>(height) * width, value);
    return img;
}

ImageGrid speckled(int height, int width, double looks, double mean, std::uint64_t seed) {
    ImageGrid img = filled(height, width, mean);
    Rng rng(seed);
    for (double& v : img.pixels) v = mean / looks * gamma_deviate(looks, rng);
    return img;
}

// direct evaluation of the quality index from raw sums, independent of the
// library's factorization into correlation/luminance/contrast
double q_oracle(const ImageGrid& x, const ImageGrid& y) {
    const double n = static_cast<double>(x.pixels.size());
    double sx = 0.0, sy = 0.0;
    for (double v : x.pixels) sx += v;
    for (double v : y.pixels) sy += v;
    const double mx = sx / n, my = sy / n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < x.pixels.size(); ++i) {
        vx += (x.pixels[i] - mx) * (x.pixels[i] - mx);
        vy += (y.pixels[i] - my) * (y.pixels[i] - my);
        cxy += (x.pixels[i] - mx) * (y.pixels[i] - my);
    }
    vx /= n - 1.0;
    vy /= n - 1.0;
    cxy /= n - 1.0;
    return 4.0 * cxy * mx * my / ((vx + vy) * (mx * mx + my * my));
}

}  // namespace

TEST_CASE("region mean and variance on a pinned grid") {
    ImageGrid img = filled(4, 4, 0.0);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) img.at(r, c) = r * 4.0 + c;  // 0..15

    const Rect all{0, 0, 4, 4};
    CHECK(region_mean(img, all) == doctest::Approx(7.5).epsilon(1e-15));
    // sum of squared deviations of 0..15 about 7.5 is 340 -> 340/15
    CHECK(region_variance(img, all) == doctest::Approx(340.0 / 15.0).epsilon(1e-13));

    const Rect corner{2, 1, 2, 2};  // values 9,10,13,14
    CHECK(region_mean(img, corner) == doctest::Approx(11.5).epsilon(1e-15));
    CHECK(region_variance(img, corner) == doctest::Approx(17.0 / 3.0).epsilon(1e-13));

    CHECK_THROWS_AS(region_mean(img, Rect{3, 3, 2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(region_variance(img, Rect{0, 0, 1, 1}), std::invalid_argument);
}

TEST_CASE("equivalent number of looks") {
    const ImageGrid img = speckled(100, 100, 4.0, 150.0, 2718);
    const Rect all{0, 0, 100, 100};
    CHECK(enl(img, all) == doctest::Approx(4.0).epsilon(0.05));

    // scale invariance: both mean and std scale linearly
    ImageGrid scaled = img;
    for (double& v : scaled.pixels) v *= 37.0;
    CHECK(enl(scaled, all) == doctest::Approx(enl(img, all)).epsilon(1e-12));

    const ImageGrid flat = filled(8, 8, 5.0);
    CHECK_THROWS_AS(enl(flat, Rect{0, 0, 8, 8}), std::domain_error);
}

TEST_CASE("line contrast and its deviation") {
    ImageGrid img = filled(9, 9, 20.0);
    LineAnnotation line;
    for (int r = 2; r < 7; ++r) {
        img.at(r, 4) = 200.0;
        line.line.push_back({r, 4});
        line.flank_a.push_back({r, 2});
        line.flank_b.push_back({r, 6});
    }
    line.reference_contrast = 2.0 * 200.0 - 40.0;

    CHECK(line_contrast(img, line) == doctest::Approx(360.0).epsilon(1e-15));
    CHECK(line_contrast_deviation(img, line) == doctest::Approx(0.0).scale(1.0));

    // adding a constant leaves the contrast unchanged
    ImageGrid shifted = img;
    for (double& v : shifted.pixels) v += 10.0;
    CHECK(line_contrast(shifted, line) == doctest::Approx(360.0).epsilon(1e-13));

    // a flattened line loses contrast by exactly the flattening amount
    ImageGrid blurred = img;
    for (int r = 2; r < 7; ++r) blurred.at(r, 4) = 150.0;
    CHECK(line_contrast_deviation(blurred, line) == doctest::Approx(100.0).epsilon(1e-13));

    LineAnnotation bad = line;
    bad.line.push_back({50, 50});
    CHECK_THROWS_AS(line_contrast(img, bad), std::invalid_argument);
    bad = line;
    bad.flank_a.clear();
    CHECK_THROWS_AS(line_contrast(img, bad), std::invalid_argument);
}

TEST_CASE("edge metrics") {
    ImageGrid img = filled(20, 20, 55.0);
    for (int r = 0; r < 20; ++r)
        for (int c = 10; c < 20; ++c) img.at(r, c) = 195.0;

    EdgeAnnotation edge;
    edge.strip_a = Rect{2, 5, 16, 3};   // left of the edge
    edge.strip_b = Rect{2, 12, 16, 3};  // right of the edge
    edge.reference_step = 140.0;

    EdgeMetrics m = edge_metrics(img, edge);
    CHECK(m.gradient == 0.0);
    CHECK(m.variance == 0.0);

    // swapping the strips changes nothing
    EdgeAnnotation swapped = edge;
    std::swap(swapped.strip_a, swapped.strip_b);
    const EdgeMetrics ms = edge_metrics(img, swapped);
    CHECK(ms.gradient == m.gradient);
    CHECK(ms.variance == m.variance);

    // shrinking the step by 30 shows up as gradient deviation 30
    ImageGrid dimmer = img;
    for (int r = 0; r < 20; ++r)
        for (int c = 10; c < 20; ++c) dimmer.at(r, c) = 165.0;
    CHECK(edge_metrics(dimmer, edge).gradient == doctest::Approx(30.0).epsilon(1e-13));

    // variance asymmetry is picked up by the second component
    ImageGrid rough = img;
    int flip = 0;
    for (int r = 2; r < 18; ++r)
        for (int c = 12; c < 15; ++c) rough.at(r, c) += ((flip++ % 2) ? 2.0 : -2.0);
    const double expected = region_variance(rough, edge.strip_b);
    CHECK(edge_metrics(rough, edge).variance == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("quality index") {
    const ImageGrid x = speckled(40, 40, 3.0, 100.0, 99);

    CHECK(q_index(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    ImageGrid doubled = x;
    for (double& v : doubled.pixels) v *= 2.0;
    // correlation 1, luminance 2*2/(1+4) = 0.8, contrast 0.8
    CHECK(q_index(x, doubled) == doctest::Approx(0.64).epsilon(1e-12));

    ImageGrid negated = x;
    for (double& v : negated.pixels) v = -v;
    CHECK(q_index(x, negated) == doctest::Approx(q_oracle(x, negated)).epsilon(1e-12));
    CHECK(std::fabs(q_index(x, negated)) <= 1.0 + 1e-12);

    const ImageGrid y = speckled(40, 40, 3.0, 100.0, 100);
    CHECK(q_index(x, y) == q_index(y, x));
    CHECK(q_index(x, y) == doctest::Approx(q_oracle(x, y)).epsilon(1e-12));

    // independent fields decorrelate
    const ImageGrid big_a = speckled(100, 100, 2.0, 80.0, 7);
    const ImageGrid big_b = speckled(100, 100, 2.0, 80.0, 8);
    CHECK(std::fabs(q_index(big_a, big_b)) < 0.1);

    CHECK_THROWS_AS(q_index(x, filled(40, 40, 3.0)), std::domain_error);
    CHECK_THROWS_AS(q_index(x, filled(10, 10, 3.0)), std::invalid_argument);
}

TEST_CASE("laplacian stencil and mirrored borders") {
    ImageGrid img = filled(3, 3, 0.0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) img.at(r, c) = 1.0 + r * 3.0 + c;  // 1..9

    const ImageGrid lap = laplacian(img);
    // centre: 2 + 8 + 4 + 6 - 4*5
    CHECK(lap.at(1, 1) == 0.0);
    // corner (0,0): up and left mirror to row/col 1: 4 + 4 + 2 + 2 - 4*1
    CHECK(lap.at(0, 0) == 8.0);
    // edge (0,1): up mirrors to row 1: 5 + 5 + 1 + 3 - 4*2
    CHECK(lap.at(0, 1) == 6.0);

    // full cross-check against an independent mirror computation
    const ImageGrid noisy = speckled(9, 7, 1.0, 50.0, 321);
    const ImageGrid ln = laplacian(noisy);
    for (int r = 0; r < noisy.height; ++r) {
        for (int c = 0; c < noisy.width; ++c) {
            auto px = [&](int rr, int cc) {
                return noisy.at(mirror_index(rr, noisy.height), mirror_index(cc, noisy.width));
            };
            const double expected =
                px(r - 1, c) + px(r + 1, c) + px(r, c - 1) + px(r, c + 1) - 4.0 * px(r, c);
            CHECK(ln.at(r, c) == expected);
        }
    }

    const ImageGrid flat = laplacian(filled(5, 5, 7.0));
    for (double v : flat.pixels) CHECK(v == 0.0);

    CHECK_THROWS_AS(laplacian(ImageGrid{}), std::invalid_argument);
}

TEST_CASE("edge correlation index") {
    const ImageGrid x = speckled(40, 40, 3.0, 100.0, 55);

    CHECK(beta_rho(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    // affine maps with positive gain preserve the index exactly
    ImageGrid affine = x;
    for (double& v : affine.pixels) v = 3.0 * v + 7.0;
    CHECK(beta_rho(x, affine) == doctest::Approx(1.0).epsilon(1e-12));

    ImageGrid negated = x;
    for (double& v : negated.pixels) v = -2.0 * v;
    CHECK(beta_rho(x, negated) == doctest::Approx(-1.0).epsilon(1e-12));

    const ImageGrid other = speckled(100, 100, 3.0, 100.0, 56);
    const ImageGrid base = speckled(100, 100, 3.0, 100.0, 57);
    CHECK(std::fabs(beta_rho(base, other)) < 0.1);

    CHECK_THROWS_AS(beta_rho(x, filled(40, 40, 2.0)), std::domain_error);
    CHECK_THROWS_AS(beta_rho(x, filled(4, 4, 2.0)), std::invalid_argument);
}

TEST_CASE("metric aggregation averages over annotated structures") {
    // Clean scene: background 20, one bright and one medium vertical line,
    // a 20|180 edge on the right.
    ImageGrid truth = filled(32, 32, 20.0);
    for (int r = 0; r < 32; ++r)
        for (int c = 24; c < 32; ++c) truth.at(r, c) = 180.0;

    LineAnnotation line1, line2;
    for (int r = 4; r < 28; ++r) {
        truth.at(r, 6) = 180.0;
        line1.line.push_back({r, 6});
        line1.flank_a.push_back({r, 4});
        line1.flank_b.push_back({r, 8});
        truth.at(r, 12) = 100.0;
        line2.line.push_back({r, 12});
        line2.flank_a.push_back({r, 10});
        line2.flank_b.push_back({r, 14});
    }
    line1.reference_contrast = 2.0 * 180.0 - 40.0;
    line2.reference_contrast = 2.0 * 100.0 - 40.0;

    EdgeAnnotation edge1, edge2;
    edge1.strip_a = Rect{2, 18, 12, 3};
    edge1.strip_b = Rect{2, 26, 12, 3};
    edge1.reference_step = 160.0;
    edge2.strip_a = Rect{16, 18, 12, 3};
    edge2.strip_b = Rect{16, 26, 12, 3};
    edge2.reference_step = 160.0;

    PhantomAnnotation annotation;
    annotation.homogeneous_region = Rect{0, 0, 3, 16};  // clear of all structures
    annotation.lines = {line1, line2};
    annotation.edges = {edge1, edge2};

    // A "filtered" image: line2 flattened, edge2 dimmed, some texture in the
    // homogeneous region and in one strip.
    ImageGrid test = truth;
    for (int r = 4; r < 28; ++r) test.at(r, 12) = 85.0;
    for (int r = 16; r < 28; ++r)
        for (int c = 26; c < 29; ++c) test.at(r, c) = 170.0;
    int flip = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 16; ++c) test.at(r, c) += ((flip++ % 2) ? 0.5 : -0.5);
    flip = 0;
    for (int r = 2; r < 14; ++r)
        for (int c = 18; c < 21; ++c) test.at(r, c) += ((flip++ % 3) ? 1.0 : -2.0);

    const MetricsReport report = compute_metrics(test, truth, annotation);

    const double expected_lines = 0.5 * (line_contrast_deviation(test, line1) +
                                         line_contrast_deviation(test, line2));
    const EdgeMetrics m1 = edge_metrics(test, edge1);
    const EdgeMetrics m2 = edge_metrics(test, edge2);
    CHECK(report.line_contrast_deviation == doctest::Approx(expected_lines).epsilon(1e-13));
    CHECK(report.edge_gradient == doctest::Approx(0.5 * (m1.gradient + m2.gradient)).epsilon(1e-13));
    CHECK(report.edge_variance == doctest::Approx(0.5 * (m1.variance + m2.variance)).epsilon(1e-13));
    CHECK(report.enl == doctest::Approx(enl(test, annotation.homogeneous_region)).epsilon(1e-13));
    CHECK(report.q_index == doctest::Approx(q_index(test, truth)).epsilon(1e-13));
    CHECK(report.beta_rho == doctest::Approx(beta_rho(test, truth)).epsilon(1e-13));

    // spot values implied by the construction
    CHECK(line_contrast_deviation(test, line1) == doctest::Approx(0.0).scale(1.0));
    CHECK(line_contrast_deviation(test, line2) == doctest::Approx(30.0).epsilon(1e-13));
    // the strip_a texture is mean-free, so it shows up in the variance only
    CHECK(m1.gradient == doctest::Approx(0.0).scale(1.0));
    CHECK(m1.variance == doctest::Approx(region_variance(test, edge1.strip_a)).epsilon(1e-13));
    CHECK(m2.gradient == doctest::Approx(10.0).epsilon(1e-13));
}

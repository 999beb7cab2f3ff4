#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tcpde/conv.hpp"

using namespace tcpde;
using testsup::random_grid;

TEST_CASE("kernel construction") {
    CHECK_THROWS_AS(make_kernel(0.0), std::domain_error);
    CHECK_THROWS_AS(make_kernel(-1.0), std::domain_error);

    const GaussianKernel k = make_kernel(1.0);
    CHECK(k.radius == 3);
    CHECK(k.taps.size() == 7);
    const double sum = std::accumulate(k.taps.begin(), k.taps.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // Center tap from direct evaluation: exp(0)/sum_d exp(-d^2/2).
    CHECK(k.taps[3] == doctest::Approx(0.3990502796524549).epsilon(1e-12));

    for (double xi : {0.5, 1.0, 2.5}) {
        const GaussianKernel kk = make_kernel(xi);
        CHECK(kk.radius == int(std::ceil(3.0 * xi)));
        for (int d = 0; d <= kk.radius; ++d) {
            CHECK(kk.taps[kk.radius + d] == kk.taps[kk.radius - d]);  // symmetry
            CHECK(kk.taps[kk.radius + d] > 0.0);
            CHECK(kk.taps[kk.radius + d] <= kk.taps[kk.radius]);  // peak at center
        }
    }
}

TEST_CASE("mirror reflection index") {
    CHECK(reflect_index(-1, 5) == 0);
    CHECK(reflect_index(-2, 5) == 1);
    CHECK(reflect_index(5, 5) == 4);
    CHECK(reflect_index(6, 5) == 3);
    CHECK(reflect_index(2, 5) == 2);
    CHECK(reflect_index(-1, 1) == 0);
    CHECK(reflect_index(7, 1) == 0);
    for (int t = -12; t <= 12; ++t) CHECK(reflect_index(t, 5) == oracle::reflect(t, 5));
}

TEST_CASE("convolution maps constants to themselves") {
    const ImageGrid c(16, 12, 1.0, 77.5);
    const ImageGrid out = convolve(c, make_kernel(1.0));
    REQUIRE(out.same_shape(c));
    for (double v : out.data()) CHECK(v == doctest::Approx(77.5).epsilon(1e-13));
}

TEST_CASE("impulse response equals the direct 2-D summation") {
    ImageGrid g(17, 15);
    g(8, 7) = 1.0;
    const ImageGrid out = convolve(g, make_kernel(1.0));
    const ImageGrid ref = oracle::convolve2d(g, 1.0);
    const GaussianKernel k = make_kernel(1.0);

    for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) {
            CHECK(std::abs(out(i, j) - ref(i, j)) <= 1e-14);
            // Interior of the response is the tap outer product.
            const int dx = i - 8, dy = j - 7;
            const double expected = (std::abs(dx) <= 3 && std::abs(dy) <= 3)
                                        ? k.taps[3 + dx] * k.taps[3 + dy]
                                        : 0.0;
            CHECK(out(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("convolution matches the direct 2-D summation on random grids") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const ImageGrid g = random_grid(13, 9, seed);
        const ImageGrid out = convolve(g, make_kernel(1.0));
        const ImageGrid ref = oracle::convolve2d(g, 1.0);
        for (std::size_t p = 0; p < out.pixel_count(); ++p)
            CHECK(std::abs(out.data()[p] - ref.data()[p]) <= 1e-11);
    }
}

TEST_CASE("convolution preserves the mean") {
    const ImageGrid g = random_grid(20, 14, 77);
    const ImageGrid out = convolve(g, make_kernel(1.5));
    CHECK(mean(out) == doctest::Approx(mean(g)).epsilon(1e-9));
}

TEST_CASE("convolution is linear and commutes with constant shifts") {
    const GaussianKernel k = make_kernel(1.0);
    const ImageGrid f = random_grid(12, 12, 31);
    const ImageGrid g = random_grid(12, 12, 32);

    ImageGrid combo(12, 12);
    for (std::size_t p = 0; p < combo.pixel_count(); ++p)
        combo.data()[p] = 2.5 * f.data()[p] - 0.75 * g.data()[p];
    const ImageGrid lhs = convolve(combo, k);
    const ImageGrid cf = convolve(f, k);
    const ImageGrid cg = convolve(g, k);
    for (std::size_t p = 0; p < combo.pixel_count(); ++p)
        CHECK(lhs.data()[p] ==
              doctest::Approx(2.5 * cf.data()[p] - 0.75 * cg.data()[p]).epsilon(1e-10));

    ImageGrid shifted = f;
    for (double& v : shifted.data()) v += 19.25;
    const ImageGrid cs = convolve(shifted, k);
    for (std::size_t p = 0; p < f.pixel_count(); ++p)
        CHECK(cs.data()[p] == doctest::Approx(cf.data()[p] + 19.25).epsilon(1e-10));
}

TEST_CASE("smoothing is non-expansive in max norm") {
    for (std::uint64_t seed : {41u, 42u}) {
        const ImageGrid g = random_grid(15, 15, seed, -100.0, 100.0);
        const ImageGrid out = convolve(g, make_kernel(2.0));
        CHECK(max_abs(out) <= max_abs(g) + 1e-12);
    }
}

TEST_CASE("oversized kernels are rejected") {
    const ImageGrid g(5, 5);
    CHECK_THROWS_AS(convolve(g, make_kernel(2.0)), std::domain_error);  // radius 6
    CHECK_NOTHROW(convolve(g, make_kernel(1.0)));                       // radius 3 < 5
}

TEST_CASE("noise: sigma zero is the identity") {
    const ImageGrid g = random_grid(9, 9, 5);
    const ImageGrid out = add_gaussian_noise(g, {0.0, 0.0, 1234});
    CHECK(out == g);
}

TEST_CASE("noise: same seed gives bitwise identical grids") {
    const ImageGrid g = random_grid(16, 16, 6);
    const NoiseSpec spec{0.0, 20.0, 98765};
    const ImageGrid a = add_gaussian_noise(g, spec);
    const ImageGrid b = add_gaussian_noise(g, spec);
    CHECK(a == b);
    const ImageGrid c = add_gaussian_noise(g, {0.0, 20.0, 98766});
    CHECK_FALSE(a == c);
}

TEST_CASE("noise: sample statistics match the spec within CLT bounds") {
    const ImageGrid g(256, 256, 1.0, 128.0);
    const ImageGrid noisy = add_gaussian_noise(g, {0.0, 20.0, 4242});
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t p = 0; p < g.pixel_count(); ++p) {
        const double d = noisy.data()[p] - 128.0;
        sum += d;
        sumsq += d * d;
    }
    const double n = double(g.pixel_count());
    const double m = sum / n;
    const double sd = std::sqrt(sumsq / n - m * m);
    CHECK(std::abs(sd - 20.0) <= 0.5);
    CHECK(std::abs(m) <= 0.5);
}

TEST_CASE("noise: negative sigma is rejected") {
    const ImageGrid g(4, 4);
    CHECK_THROWS_AS(add_gaussian_noise(g, {0.0, -1.0, 0}), std::domain_error);
}

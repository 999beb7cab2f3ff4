#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tcpde/grid.hpp"

using namespace tcpde;
using testsup::random_grid;

namespace {

ImageGrid ramp_x(int w, int h, double spacing = 1.0) {
    ImageGrid g(w, h, spacing);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) g(i, j) = i * spacing;
    return g;
}

}  // namespace

TEST_CASE("construction enforces basic invariants") {
    CHECK_THROWS_AS(ImageGrid(0, 4), std::domain_error);
    CHECK_THROWS_AS(ImageGrid(4, 0), std::domain_error);
    CHECK_THROWS_AS(ImageGrid(4, 4, -1.0), std::domain_error);
    CHECK_THROWS_AS(ImageGrid(4, 4, 0.0), std::domain_error);
    const ImageGrid g(5, 3, 0.5, 7.0);
    CHECK(g.width() == 5);
    CHECK(g.height() == 3);
    CHECK(g.pixel_count() == 15);
    CHECK(g(4, 2) == 7.0);
}

TEST_CASE("mirror indexing reflects one ghost ring") {
    ImageGrid g(2, 2);
    g(0, 0) = 5;
    g(1, 0) = 7;
    g(0, 1) = 1;
    g(1, 1) = 2;
    CHECK(g.at_symmetric(-1, 0) == 5.0);  // left ghost repeats column 0
    CHECK(g.at_symmetric(2, 0) == 7.0);
    CHECK(g.at_symmetric(0, -1) == 5.0);
    CHECK(g.at_symmetric(1, 2) == 2.0);

    ImageGrid c(3, 3, 1.0, 42.0);
    CHECK(c.at_symmetric(3, 1) == 42.0);
    CHECK(c.at_symmetric(1, 1) == c(1, 1));  // interior identity

    CHECK_THROWS_AS(g.at_symmetric(-2, 0), std::domain_error);
    CHECK_THROWS_AS(g.at_symmetric(0, 3), std::domain_error);
}

TEST_CASE("mirror indexing is the identity on interior pixels") {
    const ImageGrid g = random_grid(6, 5, 11);
    for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) CHECK(g.at_symmetric(i, j) == g(i, j));
}

TEST_CASE("central gradient") {
    const ImageGrid c(4, 4, 1.0, 3.0);
    CHECK(grad_central(c, 2, 2).x == 0.0);
    CHECK(grad_central(c, 2, 2).y == 0.0);

    const ImageGrid r = ramp_x(6, 4, 0.5);
    const Gradient mid = grad_central(r, 3, 2);
    CHECK(mid.x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mid.y == doctest::Approx(0.0));

    // At i=0 the reflected ghost repeats the edge sample, halving the slope.
    const Gradient edge = grad_central(r, 0, 1);
    CHECK(edge.x == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("one-sided gradients") {
    const ImageGrid c(4, 4, 1.0, 9.0);
    CHECK(grad_forward(c, 1, 1).x == 0.0);
    CHECK(grad_backward(c, 1, 1).y == 0.0);

    const ImageGrid r = ramp_x(5, 4);
    CHECK(grad_forward(r, 2, 1).x == doctest::Approx(1.0));
    CHECK(grad_backward(r, 2, 1).x == doctest::Approx(1.0));
    CHECK(grad_forward(r, 4, 1).x == 0.0);   // mirror forces zero at the far edge
    CHECK(grad_backward(r, 0, 1).x == 0.0);  // and at the near edge
}

TEST_CASE("laplacian stencil") {
    const ImageGrid c(5, 5, 1.0, 1.5);
    CHECK(laplacian(c, 2, 2) == 0.0);

    ImageGrid q(7, 5);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 7; ++i) q(i, j) = double(i) * i;
    CHECK(laplacian(q, 3, 2) == doctest::Approx(2.0).epsilon(1e-14));

    const ImageGrid r = ramp_x(7, 5);
    CHECK(laplacian(r, 3, 2) == doctest::Approx(0.0));
}

TEST_CASE("gradient magnitude") {
    const ImageGrid c(4, 4, 1.0, 2.0);
    CHECK(grad_magnitude(c, 1, 1) == 0.0);

    const ImageGrid r = ramp_x(6, 6);
    CHECK(grad_magnitude(r, 2, 2) == doctest::Approx(1.0));

    ImageGrid d(6, 6);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i) d(i, j) = i + j;
    CHECK(grad_magnitude(d, 2, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const ImageGrid g = random_grid(8, 8, 3);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) CHECK(grad_magnitude(g, i, j) >= 0.0);
}

TEST_CASE("weighted divergence") {
    ImageGrid ones(5, 5, 1.0, 1.0);
    const ImageGrid c(5, 5, 1.0, 4.0);
    CHECK(div_weighted(ones, c, 2, 2) == 0.0);

    ImageGrid q(7, 5);
    ImageGrid ones75(7, 5, 1.0, 1.0);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 7; ++i) q(i, j) = double(i) * i;
    CHECK(div_weighted(ones75, q, 3, 2) == doctest::Approx(2.0).epsilon(1e-14));

    // Explicit 3x3 instance against the hand-expanded stencil reference.
    ImageGrid w(3, 3), f(3, 3);
    const double wv[9] = {0.2, 0.9, 0.4, 0.7, 0.5, 1.0, 0.3, 0.8, 0.6};
    const double fv[9] = {5, 1, 8, 2, 9, 4, 7, 3, 6};
    for (int k = 0; k < 9; ++k) {
        w(k % 3, k / 3) = wv[k];
        f(k % 3, k / 3) = fv[k];
    }
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            CHECK(div_weighted(w, f, i, j) ==
                  doctest::Approx(oracle::div_weighted(w, f, i, j)).epsilon(1e-13));

    const ImageGrid small(3, 3);
    CHECK_THROWS_AS(div_weighted(ones, small, 0, 0), std::domain_error);
}

TEST_CASE("difference operators annihilate constant fields bitwise") {
    const ImageGrid c(6, 7, 1.0, 123.25);
    for (int j = 0; j < c.height(); ++j)
        for (int i = 0; i < c.width(); ++i) {
            CHECK(grad_central(c, i, j).x == 0.0);
            CHECK(grad_central(c, i, j).y == 0.0);
            CHECK(grad_forward(c, i, j).x == 0.0);
            CHECK(grad_backward(c, i, j).y == 0.0);
            CHECK(laplacian(c, i, j) == 0.0);
            CHECK(grad_magnitude(c, i, j) == 0.0);
            CHECK(div_weighted(c, c, i, j) == 0.0);
        }
}

TEST_CASE("unit-weight divergence equals the laplacian") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ImageGrid g = random_grid(9, 8, seed);
        ImageGrid ones(9, 8, 1.0, 1.0);
        for (int j = 0; j < g.height(); ++j)
            for (int i = 0; i < g.width(); ++i)
                CHECK(std::abs(div_weighted(ones, g, i, j) - laplacian(g, i, j)) <= 1e-12);
    }
}

TEST_CASE("laplacian sums to zero under mirror boundaries") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ImageGrid g = random_grid(12, 10, 100 + seed);
        double sum = 0.0;
        for (int j = 0; j < g.height(); ++j)
            for (int i = 0; i < g.width(); ++i) sum += laplacian(g, i, j);
        CHECK(std::abs(sum) <= 1e-9 * double(g.pixel_count()) * max_abs(g));
    }
}

TEST_CASE("stencil operators match the triple-loop reference on random grids") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ImageGrid f = random_grid(8, 8, 500 + seed);
        const ImageGrid w = random_grid(8, 8, 900 + seed, 0.0, 1.0);  // diffusivity range
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                CHECK(std::abs(grad_central(f, i, j).x - oracle::grad_x(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_central(f, i, j).y - oracle::grad_y(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_forward(f, i, j).x - oracle::grad_fwd_x(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_forward(f, i, j).y - oracle::grad_fwd_y(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_backward(f, i, j).x - oracle::grad_bwd_x(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_backward(f, i, j).y - oracle::grad_bwd_y(f, i, j)) <= 1e-12);
                CHECK(std::abs(laplacian(f, i, j) - oracle::laplacian(f, i, j)) <= 1e-12);
                CHECK(std::abs(grad_magnitude(f, i, j) - oracle::grad_mag(f, i, j)) <= 1e-12);
                CHECK(std::abs(div_weighted(w, f, i, j) - oracle::div_weighted(w, f, i, j)) <=
                      1e-12);
            }
    }
}

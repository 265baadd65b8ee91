#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fedward/rng.hpp"
#include "fedward/update.hpp"
#include "test_support.hpp"

using namespace fedward;
using testsupport::make_update;
using testsupport::random_update;

TEST_CASE("flatten concatenates layers in declared order") {
    auto u = make_update({{1, 2}, {3}});
    CHECK(flatten(u) == std::vector<double>{1, 2, 3});

    LayeredUpdate empty;
    CHECK(flatten(empty).empty());

    auto zeros = make_update({{0, 0, 0}});
    CHECK(flatten(zeros) == std::vector<double>{0, 0, 0});
}

TEST_CASE("l2_norm") {
    CHECK(l2_norm(make_update({{3, 4}})) == doctest::Approx(5.0));
    CHECK(l2_norm(make_update({{0, 0}, {0}})) == 0.0);
    CHECK(l2_norm(make_update({{1, 1}, {1, 1}})) == doctest::Approx(2.0));
}

TEST_CASE("axpy") {
    auto x = make_update({{1, 2}});
    auto y = make_update({{3, 4}});
    CHECK(flatten(axpy(1.0, x, y)) == std::vector<double>{4, 6});
    CHECK(flatten(axpy(0.0, x, y)) == std::vector<double>{3, 4});

    auto five = make_update({{5, 5}});
    CHECK(flatten(axpy(-1.0, five, five)) == std::vector<double>{0, 0});

    auto bad = make_update({{1, 2, 3}});
    CHECK_THROWS_AS(axpy(1.0, x, bad), std::invalid_argument);
}

TEST_CASE("pairwise_distances basic contracts") {
    auto a = make_update({{0, 0}});
    auto b = make_update({{3, 4}});
    auto d = pairwise_distances({a, b});
    CHECK(d(0, 1) == doctest::Approx(5.0));
    CHECK(d(1, 0) == doctest::Approx(5.0));
    CHECK(d(0, 0) == 0.0);

    auto u = make_update({{1.5, -2.0}});
    auto z = pairwise_distances({u, u, u});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(z(i, j) == 0.0);

    // Scalar subtraction oracle for {0, 1, 3}.
    auto s = pairwise_distances({make_update({{0}}), make_update({{1}}), make_update({{3}})});
    CHECK(s(0, 1) == doctest::Approx(1.0));
    CHECK(s(0, 2) == doctest::Approx(3.0));
    CHECK(s(1, 2) == doctest::Approx(2.0));

    CHECK_THROWS_AS(pairwise_distances({a}), std::invalid_argument);
    CHECK_THROWS_AS(pairwise_distances({a, make_update({{1, 2, 3}})}), std::invalid_argument);
}

TEST_CASE("flatten/unflatten round-trip") {
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        auto u = random_update(rng);
        auto flat = flatten(u);
        auto back = unflatten(flat, u);
        REQUIRE(same_structure(u, back));
        CHECK(flatten(back) == flat);
    }
}

TEST_CASE("l2_norm equals per-layer norm composition") {
    Rng rng(12);
    for (int it = 0; it < 200; ++it) {
        auto u = random_update(rng);
        double per_layer = 0.0;
        for (const auto& l : u.layers) {
            double s = 0.0;
            for (double v : l.values) s += v * v;
            per_layer += s;
        }
        double expected = std::sqrt(per_layer);
        double got = l2_norm(u);
        CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, expected));
    }
}

TEST_CASE("pairwise_distances satisfies metric invariants on random inputs") {
    Rng rng(13);
    for (int it = 0; it < 1000; ++it) {
        std::size_t m = 2 + rng.bounded(6);
        std::size_t dim = 1 + rng.bounded(8);
        std::vector<LayeredUpdate> us;
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> coords(dim);
            for (double& v : coords) v = rng.uniform(-5.0, 5.0);
            us.push_back(testsupport::point_update(coords));
        }
        auto d = pairwise_distances(us);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(d(i, i) == 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                CHECK(d(i, j) == d(j, i));
                CHECK(d(i, j) >= 0.0);
                for (std::size_t k = 0; k < m; ++k)
                    CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
            }
        }
    }
}

TEST_CASE("validate rejects malformed updates") {
    auto ok = make_update({{1, 2}});
    CHECK_NOTHROW(validate(ok));

    LayeredUpdate bad_shape = ok;
    bad_shape.layers[0].shape = {3};
    CHECK_THROWS_AS(validate(bad_shape), std::invalid_argument);

    LayeredUpdate nan_values = ok;
    nan_values.layers[0].values[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(nan_values), std::invalid_argument);

    LayeredUpdate inf_values = ok;
    inf_values.layers[0].values[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(inf_values), std::invalid_argument);
}

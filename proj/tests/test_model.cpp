#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pairtunnel/model.hpp"

using namespace pairtunnel;

TEST_CASE("barrier profile") {
    CHECK(barrier_v(0.0) == 0.0);
    // stationary point at 1/sqrt(2), value (1/sqrt(2)) e^(-1/2)
    const double x_star = 1.0 / std::sqrt(2.0);
    CHECK(barrier_v(x_star) == doctest::Approx(x_star * std::exp(-0.5)).epsilon(1e-12));
    CHECK(barrier_v(x_star) == doctest::Approx(0.42888).epsilon(1e-4));
    CHECK(barrier_v_prime(x_star) == doctest::Approx(0.0).epsilon(1e-14));

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> xs(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double x = xs(rng);
        CHECK(barrier_v(-x) == doctest::Approx(-barrier_v(x)).epsilon(1e-14));
    }
}

TEST_CASE("coupling well") {
    const ModelParams p = ModelParams::paper(1, 3.0);
    CHECK(coupling_u(p, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(std::abs(coupling_u(p, 40.0)) < 1e-300);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> xs(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const double r = xs(rng);
        CHECK(coupling_u(p, -r) == doctest::Approx(coupling_u(p, r)).epsilon(1e-14));
    }
}

TEST_CASE("paper presets") {
    CHECK(ModelParams::paper(1, 3.0).well_width == 1.0);
    CHECK(ModelParams::paper(2, 3.0).well_width == 1.961);
    CHECK(ModelParams::paper(4, 3.0).well_width == 3.162);
    CHECK_THROWS_AS(ModelParams::paper(3, 1.0), std::invalid_argument);
    const ModelParams p = ModelParams::paper(1, 3.0);
    CHECK(p.total_mass() == 2.0);
    CHECK(p.reduced_mass() == 0.5);

    ModelParams bad = p;
    bad.sigma_r = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("composite potential") {
    const ModelParams p3 = ModelParams::paper(1, 3.0);
    CHECK(omega_cartesian(p3, 0.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
    // barrier terms at -55 are below 1e-300; only the coupling at rho=0 remains
    CHECK(omega_cartesian(p3, -55.0, -55.0) == doctest::Approx(-2.0).epsilon(1e-15));
    // odd barriers cancel at R=0 when both scalings are 3
    const double u2 = coupling_u(p3, 2.0);
    CHECK(omega_cm(p3, 0.0, 2.0) == doctest::Approx(u2).epsilon(1e-14));

    // linearity in alpha touches only the first barrier term
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(-4.0, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double x1 = xs(rng), x2 = xs(rng);
        ModelParams pm3 = p3;
        pm3.alpha = -3.0;
        const double diff = omega_cartesian(pm3, x1, x2) - omega_cartesian(p3, x1, x2);
        CHECK(diff == doctest::Approx(-6.0 * barrier_v(x1)).epsilon(1e-12));
    }
}

TEST_CASE("coordinate maps invert and match the potential") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(-8.0, 8.0);
    SUBCASE("equal masses") {
        const ModelParams p = ModelParams::paper(2, -3.0);
        for (int i = 0; i < 200; ++i) {
            const double r = xs(rng), rho = xs(rng);
            const auto c = to_cartesian(p, {r, rho});
            CHECK(c.x1 == doctest::Approx(r - rho / 2.0).epsilon(1e-15));
            CHECK(c.x2 == doctest::Approx(r + rho / 2.0).epsilon(1e-15));
            CHECK(omega_cm(p, r, rho) ==
                  doctest::Approx(omega_cartesian(p, c.x1, c.x2)).epsilon(1e-15));
            const auto back = to_cm(p, c);
            CHECK(back.r == doctest::Approx(r).epsilon(1e-14));
            CHECK(back.rho == doctest::Approx(rho).epsilon(1e-14));
        }
    }
    SUBCASE("general masses") {
        ModelParams p = ModelParams::paper(1, 2.0);
        p.m1 = 1.0;
        p.m2 = 3.0;
        for (int i = 0; i < 200; ++i) {
            const double x1 = xs(rng), x2 = xs(rng);
            const auto cm = to_cm(p, {x1, x2});
            CHECK(cm.r == doctest::Approx((p.m1 * x1 + p.m2 * x2) / 4.0).epsilon(1e-14));
            const auto back = to_cartesian(p, cm);
            CHECK(back.x1 == doctest::Approx(x1).epsilon(1e-13));
            CHECK(back.x2 == doctest::Approx(x2).epsilon(1e-13));
        }
    }
}

TEST_CASE("analytic forces") {
    SUBCASE("diagonal values") {
        const ModelParams p3 = ModelParams::paper(1, 3.0);
        auto f = classical_force(p3, 0.0, 0.0);
        CHECK(f.f1 == doctest::Approx(-3.0).epsilon(1e-15));
        CHECK(f.f2 == doctest::Approx(-3.0).epsilon(1e-15));
        const ModelParams pm3 = ModelParams::paper(1, -3.0);
        f = classical_force(pm3, 0.0, 0.0);
        CHECK(f.f1 == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(f.f2 == doctest::Approx(-3.0).epsilon(1e-15));
        // along the diagonal: F1 = (2 a x^2 - a) e^{-x^2}, F2 = (6 x^2 - 3) e^{-x^2}
        for (double x : {-1.3, -0.4, 0.7, 2.1}) {
            f = classical_force(pm3, x, x);
            const double e = std::exp(-x * x);
            CHECK(f.f1 == doctest::Approx((2.0 * -3.0 * x * x + 3.0) * e).epsilon(1e-13));
            CHECK(f.f2 == doctest::Approx((6.0 * x * x - 3.0) * e).epsilon(1e-13));
        }
    }
    SUBCASE("finite-difference oracle") {
        const ModelParams p = ModelParams::paper(2, -3.0);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> xs(-5.0, 5.0);
        const double h = 1e-5;
        for (int i = 0; i < 1000; ++i) {
            const double x1 = xs(rng), x2 = xs(rng);
            const auto f = classical_force(p, x1, x2);
            const double fd1 =
                -(omega_cartesian(p, x1 + h, x2) - omega_cartesian(p, x1 - h, x2)) / (2 * h);
            const double fd2 =
                -(omega_cartesian(p, x1, x2 + h) - omega_cartesian(p, x1, x2 - h)) / (2 * h);
            const double scale = std::max({1e-8, std::abs(f.f1), std::abs(f.f2)});
            CHECK(std::abs(f.f1 - fd1) / scale < 1e-6);
            CHECK(std::abs(f.f2 - fd2) / scale < 1e-6);
        }
    }
}

#include <doctest.h>

#include <random>

#include "ddro/lifting.hpp"

using namespace ddro;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<long>(xs.size()));
    long k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}
}  // namespace

TEST_CASE("continuous lifting branch values") {
    ParamGrid none{0.0, 10.0, {}};
    CHECK(lift_continuous(5.0, none) == vec({5.0}));

    ParamGrid one{0.0, 10.0, {4.0}};
    CHECK(lift_continuous(6.0, one) == vec({4.0, 2.0}));

    ParamGrid two{0.0, 10.0, {3.0, 7.0}};
    CHECK(lift_continuous(2.0, two) == vec({2.0, 0.0, 0.0}));
    CHECK(lift_continuous(8.0, two) == vec({3.0, 4.0, 1.0}));

    CHECK_THROWS_AS(lift_continuous(11.0, two), std::domain_error);
    CHECK_THROWS_AS(lift_continuous(-0.5, two), std::domain_error);
}

TEST_CASE("binary lifting branch values") {
    ParamGrid none{0.0, 10.0, {}};
    CHECK(lift_binary(7.0, none) == vec({1.0}));

    ParamGrid one{0.0, 10.0, {4.0}};
    CHECK(lift_binary(6.0, one) == vec({1.0}));
    CHECK(lift_binary(4.0, one) == vec({1.0}));  // closed from the left at the breakpoint
    CHECK(lift_binary(3.999, one) == vec({0.0}));

    ParamGrid two{0.0, 10.0, {3.0, 7.0}};
    CHECK(lift_binary(2.0, two) == vec({0.0, 0.0}));
    CHECK(lift_binary(9.0, two) == vec({1.0, 1.0}));
    CHECK_THROWS_AS(lift_binary(10.5, two), std::domain_error);
}

TEST_CASE("lifting identity and monotonicity over random samples") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1.0) b = a + 1.0;
        std::vector<double> pts;
        std::uniform_int_distribution<int> nbp(0, 4);
        int n = nbp(rng);
        std::uniform_real_distribution<double> inside(a + 1e-3 * (b - a), b - 1e-3 * (b - a));
        for (int k = 0; k < n; ++k) pts.push_back(inside(rng));
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        ParamGrid grid{a, b, pts};
        grid.validate();

        std::uniform_real_distribution<double> inbox(a, b);
        double prev_xi = a;
        Eigen::VectorXd prev_bar = lift_continuous(a, grid);
        Eigen::VectorXd prev_hat = lift_binary(a, grid);
        for (int k = 0; k < 500; ++k) {
            const double xi = inbox(rng);
            const auto bar = lift_continuous(xi, grid);
            CHECK(std::abs(bar.sum() - xi) <= 1e-12 * std::max(1.0, std::abs(xi)));
            const auto hat = lift_binary(xi, grid);
            // componentwise monotone in xi; indicators nonincreasing in j
            if (xi >= prev_xi) {
                for (int j = 0; j < bar.size(); ++j) CHECK(bar(j) >= prev_bar(j) - 1e-12);
                for (int j = 0; j < hat.size(); ++j) CHECK(hat(j) >= prev_hat(j) - 1e-12);
                prev_xi = xi;
                prev_bar = bar;
                prev_hat = hat;
            }
            for (int j = 0; j + 1 < hat.size(); ++j) CHECK(hat(j) >= hat(j + 1));
        }
    }
}

TEST_CASE("vertex set single breakpoint") {
    ParamGrid grid{0.0, 10.0, {4.0}};
    const auto vs = build_vertex_set(grid);
    REQUIRE(vs.size() == 4);
    CHECK(vs[0].piece == 1);
    CHECK(vs[0].v == 0.0);
    CHECK(vs[0].vbar == vec({0.0, 0.0}));
    CHECK(vs[0].vhat == vec({0.0}));
    CHECK(vs[1].v == 4.0);
    CHECK(vs[1].vbar == vec({4.0, 0.0}));
    CHECK(vs[1].vhat == vec({0.0}));
    CHECK(vs[2].piece == 2);
    CHECK(vs[2].v == 4.0);
    CHECK(vs[2].vbar == vec({4.0, 0.0}));
    CHECK(vs[2].vhat == vec({1.0}));
    CHECK(vs[3].v == 10.0);
    CHECK(vs[3].vbar == vec({4.0, 6.0}));
    CHECK(vs[3].vhat == vec({1.0}));
}

TEST_CASE("vertex set without breakpoints and for the constant parameter") {
    ParamGrid plain{-3.0, 5.0, {}};
    const auto vs = build_vertex_set(plain);
    REQUIRE(vs.size() == 2);
    CHECK(vs[0].v == -3.0);
    CHECK(vs[0].vbar == vec({-3.0}));
    CHECK(vs[0].vhat == vec({1.0}));
    CHECK(vs[1].v == 5.0);
    CHECK(vs[1].vbar == vec({5.0}));
    CHECK(vs[1].vhat == vec({1.0}));

    ParamGrid constant{1.0, 1.0, {}};
    const auto cs = build_vertex_set(constant);
    REQUIRE(cs.size() == 2);
    for (const auto& v : cs) {
        CHECK(v.v == 1.0);
        CHECK(v.vbar == vec({1.0}));
        CHECK(v.vhat == vec({1.0}));
    }
    CHECK(build_vertex_set_unique(constant).size() == 1);
}

TEST_CASE("vertex count and lifting identity at vertices") {
    ParamGrid grid{2.0, 110.0, {42.5, 65.0, 87.5}};
    const auto vs = build_vertex_set(grid);
    CHECK(vs.size() == 2u * static_cast<size_t>(grid.r()));
    for (const auto& vx : vs) {
        CHECK(vx.vbar.sum() == doctest::Approx(vx.v));
        // vhat within a piece has piece-1 leading ones
        for (int j = 0; j < vx.vhat.size(); ++j)
            CHECK(vx.vhat(j) == (j < vx.piece - 1 ? 1.0 : 0.0));
    }
}

TEST_CASE("grid validation rejects bad breakpoints") {
    CHECK_THROWS(ParamGrid{0.0, 1.0, {0.5, 0.5}}.validate());
    CHECK_THROWS(ParamGrid{0.0, 1.0, {1.0}}.validate());
    CHECK_THROWS(ParamGrid{0.0, 1.0, {0.0}}.validate());
    CHECK_THROWS(ParamGrid{1.0, 0.0, {}}.validate());
    CHECK_NOTHROW(ParamGrid{0.0, 1.0, {0.25, 0.75}}.validate());
}

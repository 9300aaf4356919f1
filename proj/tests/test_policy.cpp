#include <doctest.h>

#include "ddro/policy.hpp"

using namespace ddro;

namespace {

// Two-stage skeleton with one lifted parameter on [1, 5], breakpoint at 3.
StageStructure example_structure() { return {2, {0, 1, 1}, {0, 0, 2}, {0, 0, 2}, {0, 0, 0}}; }

std::vector<std::vector<ParamGrid>> example_grids() {
    std::vector<std::vector<ParamGrid>> g(3);
    g[1] = {ParamGrid{1.0, 1.0, {}}};
    g[2] = {ParamGrid{1.0, 5.0, {3.0}}};
    return g;
}

// Switching policy: below the breakpoint run line 1 at level xi, above it
// run line 2 at level xi.
PolicyCoefficients switching_policy() {
    const auto s = example_structure();
    PolicyCoefficients c = PolicyCoefficients::zero(s, example_grids(), InfoWindow::full(s));
    auto& blk = c.blocks[2][s.flat(2, 1)];
    blk.Xbar << 1, 0,
                0, 1;
    blk.Xhat << -3,
                 3;
    blk.Ydot(1, 0) = 1.0;   // y2 = step
    blk.Yddot(0, 0) = 1.0;  // y1 = 1 - step
    auto& cst = c.blocks[2][s.flat(1, 1)];
    cst.Ydot(0, 0) = 1.0;   // constant column for y1
    return c;
}

Trajectory traj(double xi) {
    Trajectory out(3);
    out[1] = Eigen::VectorXd::Constant(1, 1.0);
    out[2] = Eigen::VectorXd::Constant(1, xi);
    return out;
}

}  // namespace

TEST_CASE("all-zero coefficients evaluate to zero") {
    const auto s = example_structure();
    const auto c = PolicyCoefficients::zero(s, example_grids(), InfoWindow::full(s));
    const auto dec = evaluate_policy(c, traj(2.0), 2);
    CHECK(dec.x.isZero());
    CHECK(dec.y.isZero());
}

TEST_CASE("constant rule through the stage-one parameter") {
    const auto s = example_structure();
    auto c = PolicyCoefficients::zero(s, example_grids(), InfoWindow::full(s));
    c.blocks[2][s.flat(1, 1)].Xbar << 4.5,
                                      -2.0;
    for (double xi : {1.0, 2.5, 3.0, 5.0}) {
        const auto dec = evaluate_policy(c, traj(xi), 2);
        CHECK(dec.x(0) == doctest::Approx(4.5));
        CHECK(dec.x(1) == doctest::Approx(-2.0));
    }
}

TEST_CASE("switching policy reproduces the discontinuous optimal rule") {
    const auto c = switching_policy();
    auto dec = evaluate_policy(c, traj(2.0), 2);
    CHECK(dec.y(0) == doctest::Approx(1.0));
    CHECK(dec.y(1) == doctest::Approx(0.0));
    CHECK(dec.x(0) == doctest::Approx(2.0));
    CHECK(dec.x(1) == doctest::Approx(0.0));

    dec = evaluate_policy(c, traj(4.0), 2);
    CHECK(dec.y(0) == doctest::Approx(0.0));
    CHECK(dec.y(1) == doctest::Approx(1.0));
    CHECK(dec.x(0) == doctest::Approx(0.0));
    CHECK(dec.x(1) == doctest::Approx(4.0));

    // the step is closed from the left: at the breakpoint the jump is active
    dec = evaluate_policy(c, traj(3.0), 2);
    CHECK(dec.y(1) == doctest::Approx(1.0));
    CHECK(dec.x(1) == doctest::Approx(3.0));
}

TEST_CASE("out-of-support evaluation and missing blocks raise errors") {
    const auto c = switching_policy();
    CHECK_THROWS_AS(evaluate_policy(c, traj(5.5), 2), std::domain_error);
    CHECK_THROWS_AS(evaluate_policy(c, traj(2.0), 3), std::invalid_argument);

    const auto s = example_structure();
    auto restricted = PolicyCoefficients::zero(s, example_grids(), InfoWindow::uniform(s, 0));
    CHECK_NOTHROW(restricted.block(2, 2, 1));
    StageStructure s3{3, {0, 1, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 0}};
    std::vector<std::vector<ParamGrid>> g3(4);
    g3[1] = {ParamGrid{1.0, 1.0, {}}};
    g3[2] = {ParamGrid{0.0, 1.0, {}}};
    g3[3] = {ParamGrid{0.0, 1.0, {}}};
    auto narrow = PolicyCoefficients::zero(s3, g3, InfoWindow::uniform(s3, 0));
    CHECK_THROWS_AS(narrow.block(3, 2, 1), std::out_of_range);
}

TEST_CASE("piecewise structure: affine inside pieces, jumps only at breakpoints") {
    const auto c = switching_policy();
    const double eps = 1e-7;
    // slope within the first piece equals the Xbar column
    auto slope = [&](double xi) -> Eigen::VectorXd {
        const auto hi = evaluate_policy(c, traj(xi + eps), 2);
        const auto lo = evaluate_policy(c, traj(xi - eps), 2);
        return (hi.x - lo.x) / (2 * eps);
    };
    CHECK(slope(2.0)(0) == doctest::Approx(1.0));
    CHECK(slope(2.0)(1) == doctest::Approx(0.0));
    CHECK(slope(4.0)(0) == doctest::Approx(0.0));
    CHECK(slope(4.0)(1) == doctest::Approx(1.0));
    // jump across the breakpoint equals the Xhat column
    const auto before = evaluate_policy(c, traj(3.0 - eps), 2);
    const auto after = evaluate_policy(c, traj(3.0 + eps), 2);
    CHECK((after.x - before.x)(0) == doctest::Approx(-3.0).epsilon(1e-4));
    CHECK((after.x - before.x)(1) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("binary admissibility classifies the documented cases") {
    // the switching policy is admissible
    CHECK(check_binary_admissibility(switching_policy()).empty());

    const auto s = example_structure();
    // a single step entry with no constant column stays within {0,1}
    auto lone = PolicyCoefficients::zero(s, example_grids(), InfoWindow::full(s));
    lone.blocks[2][s.flat(2, 1)].Ydot(0, 0) = 1.0;
    CHECK(check_binary_admissibility(lone).empty());

    // constant column 1 plus step column 1 reaches 2 at the upper vertex
    auto bad = PolicyCoefficients::zero(s, example_grids(), InfoWindow::full(s));
    bad.blocks[2][s.flat(1, 1)].Ydot(0, 0) = 1.0;
    bad.blocks[2][s.flat(2, 1)].Ydot(0, 0) = 1.0;
    const auto issues = check_binary_admissibility(bad);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].t == 2);
    CHECK(issues[0].q == 0);
    CHECK(issues[0].hi == doctest::Approx(2.0));
}

TEST_CASE("full-information window reproduces the unrestricted policy") {
    StageStructure s3{3, {0, 1, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 0}};
    std::vector<std::vector<ParamGrid>> g3(4);
    g3[1] = {ParamGrid{1.0, 1.0, {}}};
    g3[2] = {ParamGrid{0.0, 4.0, {2.0}}};
    g3[3] = {ParamGrid{0.0, 4.0, {2.0}}};
    auto full = PolicyCoefficients::zero(s3, g3, InfoWindow::full(s3));
    auto wide = PolicyCoefficients::zero(s3, g3, InfoWindow::uniform(s3, s3.T));
    full.blocks[3][s3.flat(2, 1)].Xbar << 2.0, -1.0;
    wide.blocks[3][s3.flat(2, 1)].Xbar << 2.0, -1.0;
    Trajectory xi(4);
    xi[1] = Eigen::VectorXd::Constant(1, 1.0);
    xi[2] = Eigen::VectorXd::Constant(1, 3.0);
    xi[3] = Eigen::VectorXd::Constant(1, 1.0);
    CHECK(evaluate_policy(full, xi, 3).x(0) == evaluate_policy(wide, xi, 3).x(0));
}

TEST_CASE("policy file round trip preserves evaluation") {
    const auto c = switching_policy();
    const auto back = policy_from_json(policy_to_json(c));
    for (double xi : {1.0, 2.9, 3.0, 4.2, 5.0}) {
        const auto a = evaluate_policy(c, traj(xi), 2);
        const auto b = evaluate_policy(back, traj(xi), 2);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
    }
}

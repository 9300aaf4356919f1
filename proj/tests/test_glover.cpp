#include <doctest.h>

#include <random>

#include "ddro/reformulate.hpp"

using namespace ddro;

namespace {

// Pins w by an equality row, z by its bounds, then projects the auxiliary
// onto its min and max. Exactness means both equal w * z.
std::pair<double, double> aux_range(double w_val, double M, int z_val) {
    MilpModel m;
    GloverRegistry reg;
    const int w = m.add_continuous("w", 0.0, M);
    const int z = m.add_binary("z");
    const int aux = glover_linearize(m, reg, w, z, M, "aux");
    m.add_row("pin_w", {{w, 1.0}}, 'E', w_val);
    m.add_row("pin_z", {{z, 1.0}}, 'E', static_cast<double>(z_val));
    SolverConfig cfg;
    cfg.gap = 1e-9;
    m.mutable_vars()[aux].obj = 1.0;
    const SolveReport lo = solve(m, cfg);
    m.mutable_vars()[aux].obj = -1.0;
    const SolveReport hi = solve(m, cfg);
    REQUIRE(lo.status == SolveStatus::OptimalWithinGap);
    REQUIRE(hi.status == SolveStatus::OptimalWithinGap);
    return {lo.objective, -hi.objective};
}

}  // namespace

TEST_CASE("product pinned when the binary is one") {
    auto [lo, hi] = aux_range(3.5, 10.0, 1);
    CHECK(lo == doctest::Approx(3.5));
    CHECK(hi == doctest::Approx(3.5));
}

TEST_CASE("product pinned to zero when the binary is zero") {
    auto [lo, hi] = aux_range(3.5, 10.0, 0);
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(0.0));
}

TEST_CASE("batched exactness over random terms and both binary values") {
    // One model with independent product blocks; min and max of the summed
    // auxiliaries must both equal sum(w_i * z_i), which pins every block.
    std::mt19937_64 rng(7);
    for (int flip = 0; flip < 2; ++flip) {
        MilpModel m;
        GloverRegistry reg;
        double expected = 0.0;
        std::vector<int> auxes;
        for (int k = 0; k < 12; ++k) {
            std::uniform_real_distribution<double> um(0.5, 50.0);
            const double M = um(rng);
            std::uniform_real_distribution<double> uw(0.0, M);
            const double w_val = uw(rng);
            const int z_val = (static_cast<int>(rng() % 2) + flip) % 2;
            const std::string tag = "k" + std::to_string(k);
            const int w = m.add_continuous("w_" + tag, 0.0, M);
            const int z = m.add_binary("z_" + tag);
            auxes.push_back(glover_linearize(m, reg, w, z, M, "aux_" + tag));
            m.add_row("pin_w_" + tag, {{w, 1.0}}, 'E', w_val);
            m.add_row("pin_z_" + tag, {{z, 1.0}}, 'E', static_cast<double>(z_val));
            expected += w_val * z_val;
        }
        SolverConfig cfg;
        cfg.gap = 1e-9;
        for (int a : auxes) m.mutable_vars()[a].obj = 1.0;
        const SolveReport lo = solve(m, cfg);
        for (int a : auxes) m.mutable_vars()[a].obj = -1.0;
        const SolveReport hi = solve(m, cfg);
        REQUIRE(lo.status == SolveStatus::OptimalWithinGap);
        REQUIRE(hi.status == SolveStatus::OptimalWithinGap);
        CHECK(lo.objective == doctest::Approx(expected).epsilon(1e-7));
        CHECK(-hi.objective == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("free-variable split covers negative values") {
    MilpModel m;
    GloverRegistry reg;
    const double M = 8.0;
    const int w = m.add_continuous("w", -M, M);
    const int z = m.add_binary("z");
    auto [ap, an] = glover_linearize_free(m, reg, w, z, M, "aux");
    m.add_row("pin_w", {{w, 1.0}}, 'E', -2.25);
    m.add_row("pin_z", {{z, 1.0}}, 'E', 1.0);
    // the product is ap - an; check min == max == -2.25
    SolverConfig cfg;
    cfg.gap = 1e-9;
    m.mutable_vars()[ap].obj = 1.0;
    m.mutable_vars()[an].obj = -1.0;
    const SolveReport lo = solve(m, cfg);
    m.mutable_vars()[ap].obj = -1.0;
    m.mutable_vars()[an].obj = 1.0;
    const SolveReport hi = solve(m, cfg);
    REQUIRE(lo.status == SolveStatus::OptimalWithinGap);
    CHECK(lo.objective == doctest::Approx(-2.25));
    CHECK(-hi.objective == doctest::Approx(-2.25));
}

TEST_CASE("missing bound is rejected") {
    MilpModel m;
    GloverRegistry reg;
    const int w = m.add_continuous("w", 0.0, 1.0);
    const int z = m.add_binary("z");
    CHECK_THROWS_AS(glover_linearize(m, reg, w, z, std::numeric_limits<double>::infinity(), "a"),
                    std::invalid_argument);
    const int w2 = m.add_continuous("w2", 0.0, 1.0);
    CHECK_THROWS_AS(glover_linearize(m, reg, w, w2, 1.0, "b"), std::invalid_argument);
}

TEST_CASE("bound experiment pins zero duals and preserves the optimum") {
    // minimize x with x >= 5 z - aux, aux = w z, w a registered dual.
    MilpModel m;
    GloverRegistry reg;
    const int x = m.add_continuous("x", 0.0, std::numeric_limits<double>::infinity(), 1.0);
    const int w = m.add_continuous("dual_w", 0.0, 100.0);
    reg.dual_bound["dual_w"] = 100.0;
    const int z = m.add_binary("z");
    const int aux = glover_linearize(m, reg, w, z, 100.0, "aux");
    m.add_row("force_z", {{z, 1.0}}, 'E', 1.0);
    m.add_row("cap_w", {{w, 1.0}}, 'L', 2.0);
    m.add_row("link", {{x, 1.0}, {z, -5.0}, {aux, 1.0}}, 'G', 0.0);
    SolveReport first = solve(m);
    REQUIRE(first.status == SolveStatus::OptimalWithinGap);
    CHECK(first.objective == doctest::Approx(3.0));  // w = 2 at the optimum

    SolveReport again = bound_experiment(m, reg, first, BoundRule::Lambda);
    REQUIRE(again.status == SolveStatus::OptimalWithinGap);
    CHECK(again.objective == doctest::Approx(first.objective));
    CHECK(m.vars()[w].ub == doctest::Approx(2.0));

    // all-zero duals with rule Lambda fix the dual to zero
    MilpModel m2;
    GloverRegistry reg2;
    m2.add_continuous("x", 0.0, 10.0, 1.0);
    const int w2 = m2.add_continuous("dual_w", 0.0, 100.0);
    reg2.dual_bound["dual_w"] = 100.0;
    const int z2 = m2.add_binary("z");
    glover_linearize(m2, reg2, w2, z2, 100.0, "aux");
    m2.add_row("r", {{0, 1.0}}, 'G', 1.0);
    SolveReport f2 = solve(m2);
    REQUIRE(f2.status == SolveStatus::OptimalWithinGap);
    SolveReport r2 = bound_experiment(m2, reg2, f2, BoundRule::Lambda);
    CHECK(m2.vars()[w2].ub == doctest::Approx(0.0));
    CHECK(r2.objective == doctest::Approx(f2.objective));
}

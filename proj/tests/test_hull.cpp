#include <doctest.h>

#include <random>

#include "ddro/milp.hpp"
#include "ddro/solver.hpp"
#include "ddro/uncertainty.hpp"

using namespace ddro;

namespace {

// Decision-dependent set with three parameters (constant first) and two
// first-stage binaries; the projection onto (xi2, xi3) collapses to a line
// for y = (1,0) and is empty for y = (0,0).
struct ExampleSet {
    StageStructure s{2, {0, 1, 2}, {0, 1, 0}, {0, 2, 0}, {0, 0, 0}};
    DduSet ddu;
    Breakpoints bp;

    ExampleSet() {
        ddu.resize(s);
        ddu.lo[1] = {1.0};
        ddu.hi[1] = {1.0};
        ddu.lo[2] = {0.0, 0.0};
        ddu.hi[2] = {15.0, 13.0};
        auto& st = ddu.stage[2];
        st.W.resize(8, 3);
        st.W << 0, 1, 0,
                0, 0, 1,
               -8, -1, 2,
              -13, 1, 1,
               25, -4, -7,
               40, -8, -3,
                0, -1, 0,
                0, 0, -1;
        st.U.assign(2, Eigen::MatrixXd::Zero(8, 2));
        st.U[1] << 7, 8,
                   0, 13,
                   0, 15,
                   7, 2,
                  21, 11,
                   0, 0,
                   0, 0,
                   0, 0;
        bp = Breakpoints::none(s);
    }
};

MilpModel hull_lp(const HullSystem& h, const Eigen::VectorXd& y, int objective_col,
                  double sign) {
    MilpModel lp;
    const double inf = std::numeric_limits<double>::infinity();
    for (int c = 0; c < h.cols(); ++c) {
        const bool is_lambda = c >= h.n_xi + h.n_xibar + h.n_xihat;
        lp.add_continuous("c" + std::to_string(c), is_lambda ? 0.0 : -inf, inf,
                          c == objective_col ? sign : 0.0);
    }
    for (const auto& row : h.rows) {
        double rhs = row.rhs;
        for (const auto& yt : row.y) rhs += yt.coef * y(yt.q);
        lp.add_row(row.name, row.lhs, row.sense, rhs);
    }
    return lp;
}

double maximize(const HullSystem& h, const Eigen::VectorXd& y, int col) {
    const SolveReport rep = solve(hull_lp(h, y, col, -1.0));
    REQUIRE(rep.status == SolveStatus::OptimalWithinGap);
    return -rep.objective;
}

double minimize(const HullSystem& h, const Eigen::VectorXd& y, int col) {
    const SolveReport rep = solve(hull_lp(h, y, col, 1.0));
    REQUIRE(rep.status == SolveStatus::OptimalWithinGap);
    return rep.objective;
}

}  // namespace

TEST_CASE("hull system row and variable counts for one lifted parameter") {
    StageStructure s{2, {0, 1, 1}, {0, 1, 0}, {0, 1, 0}, {0, 0, 0}};
    DduSet ddu;
    ddu.resize(s);
    ddu.lo[1] = {1.0};
    ddu.hi[1] = {1.0};
    ddu.lo[2] = {0.0};
    ddu.hi[2] = {10.0};
    ddu.stage[2].W = Eigen::MatrixXd::Zero(0, 2);
    ddu.stage[2].U.assign(2, Eigen::MatrixXd::Zero(0, 1));
    Breakpoints bp = Breakpoints::none(s);
    bp.at(2, 1) = {4.0};  // r = 2

    const HullSystem h = build_hull_system(ddu, bp, s, 2);
    // lifted parameter: 4 lambda; constant parameter: 2 lambda (duplicates kept)
    CHECK(h.n_lambda == 6);
    int simplex = 0, mixing = 0;
    for (const auto& row : h.rows) {
        if (row.name.find("_sum") != std::string::npos) ++simplex;
        if (row.name.find("_xi") != std::string::npos ||
            row.name.find("_bar") != std::string::npos ||
            row.name.find("_hat") != std::string::npos)
            ++mixing;
    }
    CHECK(simplex == 2);           // one per parameter
    CHECK(mixing == 3 + (1 + 2 + 1));  // constant: xi+bar+hat; lifted: xi + r bars + g hats
}

TEST_CASE("decision-dependent projections match the documented set") {
    ExampleSet ex;
    const HullSystem h = build_hull_system(ex.ddu, ex.bp, ex.s, 2);
    const int xi2 = h.xi_col(1), xi3 = h.xi_col(2);

    Eigen::VectorXd y(2);
    y << 1.0, 0.0;  // the line 5 <= xi2 <= 7, xi3 = 0
    CHECK(maximize(h, y, xi2) == doctest::Approx(7.0));
    CHECK(minimize(h, y, xi2) == doctest::Approx(5.0));
    CHECK(maximize(h, y, xi3) == doctest::Approx(0.0).epsilon(1e-7));

    y << 0.0, 0.0;  // empty set
    CHECK(solve(hull_lp(h, y, xi2, 1.0)).status == SolveStatus::Infeasible);

    y << 1.0, 1.0;  // full set is nonempty
    CHECK(solve(hull_lp(h, y, xi2, 1.0)).status == SolveStatus::OptimalWithinGap);
}

TEST_CASE("lifted points of the set satisfy the hull rows pointwise") {
    // One exogenous parameter with a midpoint breakpoint; the realized lift
    // of every feasible point admits the within-piece interpolation
    // weights, so every hull row holds with an explicit witness.
    StageStructure s{2, {0, 1, 1}, {0, 1, 0}, {0, 1, 0}, {0, 0, 0}};
    DduSet ddu;
    ddu.resize(s);
    ddu.lo[1] = {1.0};
    ddu.hi[1] = {1.0};
    ddu.lo[2] = {0.0};
    ddu.hi[2] = {5.0};
    auto& st = ddu.stage[2];
    st.W.resize(2, 2);
    st.W << 0, -1,
           -5, 1;
    st.U.assign(2, Eigen::MatrixXd::Zero(2, 1));
    st.U[1] << 0, -1;  // xi2 <= 5 - y
    Breakpoints bp = Breakpoints::none(s);
    bp.at(2, 1) = {2.5};
    const HullSystem h = build_hull_system(ddu, bp, s, 2);

    std::mt19937_64 rng(99);
    for (double yv : {0.0, 1.0}) {
        Eigen::VectorXd y(1);
        y << yv;
        std::uniform_real_distribution<double> u(0.0, 5.0 - yv);
        for (int trial = 0; trial < 400; ++trial) {
            const double xi = u(rng);
            Eigen::VectorXd point = Eigen::VectorXd::Zero(h.cols());
            point(h.xi_col(0)) = 1.0;
            point(h.xi_col(1)) = xi;
            for (int f = 0; f < 2; ++f) {
                const ParamGrid grid = make_grid(ddu, bp, f == 0 ? 1 : 2, 1);
                const double v = point(h.xi_col(f));
                const auto bar = lift_continuous(v, grid);
                const auto hat = lift_binary(v, grid);
                for (int j = 0; j < bar.size(); ++j) point(h.xibar_col(f, j)) = bar(j);
                for (int j = 0; j < hat.size(); ++j) point(h.xihat_col(f, j)) = hat(j);
                // witness weights live in piece 1 + #{breakpoints <= v},
                // whose interior indicator limit equals the realized lift
                const auto& vs = h.verts[f];
                int piece = 1;
                for (double pt : grid.points) piece += v >= pt ? 1 : 0;
                // locate the two vertices of that piece in the stored order
                int left = -1, right = -1;
                for (size_t k = 0; k < vs.size(); ++k) {
                    if (vs[k].piece != piece) continue;
                    if (left < 0)
                        left = static_cast<int>(k);
                    else
                        right = static_cast<int>(k);
                }
                const double width = vs[right].v - vs[left].v;
                const double theta = width > 0 ? (v - vs[left].v) / width : 0.0;
                point(h.lambda_col(f, left)) = 1.0 - theta;
                point(h.lambda_col(f, right)) = theta;
            }
            for (const auto& row : h.rows) {
                double lhs = 0.0;
                for (const auto& [col, coef] : row.lhs) lhs += coef * point(col);
                double rhs = row.rhs;
                for (const auto& yt : row.y) rhs += yt.coef * y(yt.q);
                if (row.sense == 'E')
                    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9).scale(1.0));
                else
                    CHECK(lhs <= rhs + 1e-9);
            }
        }
    }
}

TEST_CASE("every stored vertex is feasible for its single-parameter hull") {
    ParamGrid grid{0.0, 10.0, {3.0, 7.0}};
    const auto vs = build_vertex_set(grid);
    for (size_t k = 0; k < vs.size(); ++k) {
        // unit lambda on vertex k reproduces (v, vbar, vhat) exactly
        const auto& vx = vs[k];
        CHECK(vx.vbar == lift_continuous(vx.v, grid));
        double sum = 0.0;
        for (int j = 0; j < vx.vhat.size(); ++j) sum += vx.vhat(j);
        CHECK(sum == doctest::Approx(static_cast<double>(vx.piece - 1)));
    }
}

TEST_CASE("affinity of the lift inside pieces makes the witness exact at breakpoints") {
    StageStructure s{2, {0, 1, 1}, {0, 1, 0}, {0, 1, 0}, {0, 0, 0}};
    DduSet ddu;
    ddu.resize(s);
    ddu.lo[1] = {1.0};
    ddu.hi[1] = {1.0};
    ddu.lo[2] = {0.0};
    ddu.hi[2] = {10.0};
    ddu.stage[2].W = Eigen::MatrixXd::Zero(0, 2);
    ddu.stage[2].U.assign(2, Eigen::MatrixXd::Zero(0, 1));
    Breakpoints bp = Breakpoints::none(s);
    bp.at(2, 1) = {4.0};
    const HullSystem h = build_hull_system(ddu, bp, s, 2);
    Eigen::VectorXd y(1);
    y << 0.0;
    // maximizing xihat subject to xi pinned at the breakpoint reaches 1
    MilpModel lp = hull_lp(h, y, h.xihat_col(1, 0), -1.0);
    lp.add_row("pin", {{h.xi_col(1), 1.0}}, 'E', 4.0);
    const SolveReport hi = solve(lp);
    REQUIRE(hi.status == SolveStatus::OptimalWithinGap);
    CHECK(-hi.objective == doctest::Approx(1.0));
    // and minimizing it reaches 0: the hull keeps both one-sided limits
    MilpModel lp2 = hull_lp(h, y, h.xihat_col(1, 0), 1.0);
    lp2.add_row("pin", {{h.xi_col(1), 1.0}}, 'E', 4.0);
    const SolveReport lo = solve(lp2);
    REQUIRE(lo.status == SolveStatus::OptimalWithinGap);
    CHECK(lo.objective == doctest::Approx(0.0).epsilon(1e-7));
}

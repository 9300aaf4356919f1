#include "ddro/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ddro {

double ParamGrid::knot(int j) const {
    if (j == 0) return lo;
    if (j == r()) return hi;
    return points[static_cast<size_t>(j) - 1];
}

void ParamGrid::validate() const {
    if (!(lo <= hi)) throw std::invalid_argument("support bounds out of order");
    for (size_t j = 0; j + 1 < points.size(); ++j)
        if (!(points[j] < points[j + 1]))
            throw std::invalid_argument("breakpoints must be strictly increasing");
    if (!points.empty() && !(lo < points.front() && points.back() < hi))
        throw std::invalid_argument("breakpoints must lie strictly inside the support");
}

namespace {
void check_support(double xi, const ParamGrid& grid) {
    if (!grid.contains(xi))
        throw std::domain_error("value " + std::to_string(xi) + " outside support [" +
                                std::to_string(grid.lo) + ", " + std::to_string(grid.hi) + "]");
}
}  // namespace

Eigen::VectorXd lift_continuous(double xi, const ParamGrid& grid) {
    check_support(xi, grid);
    const int r = grid.r();
    Eigen::VectorXd out(r);
    if (r == 1) {
        out(0) = xi;
        return out;
    }
    for (int j = 1; j <= r; ++j) {
        double val;
        if (j == 1)
            val = std::min(xi, grid.knot(1));
        else if (j < r)
            val = std::max(std::min(xi, grid.knot(j)) - grid.knot(j - 1), 0.0);
        else
            val = std::max(xi - grid.knot(r - 1), 0.0);
        out(j - 1) = val;
    }
    return out;
}

Eigen::VectorXd lift_binary(double xi, const ParamGrid& grid) {
    check_support(xi, grid);
    const int g = grid.g();
    Eigen::VectorXd out(g);
    if (grid.r() == 1) {
        out(0) = 1.0;
        return out;
    }
    for (int j = 1; j <= g; ++j) out(j - 1) = xi >= grid.knot(j) ? 1.0 : 0.0;
    return out;
}

std::vector<LiftedVertex> build_vertex_set(const ParamGrid& grid) {
    grid.validate();
    const int r = grid.r();
    const int g = grid.g();
    std::vector<LiftedVertex> out;
    out.reserve(static_cast<size_t>(2 * r));
    for (int j = 1; j <= r; ++j) {
        // The indicator lift is constant inside piece j: components 1..j-1
        // are 1. With r = 1 the single component is identically 1.
        Eigen::VectorXd vhat = Eigen::VectorXd::Zero(g);
        if (r == 1)
            vhat(0) = 1.0;
        else
            for (int jj = 0; jj < j - 1; ++jj) vhat(jj) = 1.0;
        for (double v : {grid.knot(j - 1), grid.knot(j)}) {
            LiftedVertex vx;
            vx.piece = j;
            vx.v = v;
            vx.vbar = lift_continuous(v, grid);
            vx.vhat = vhat;
            out.push_back(std::move(vx));
        }
    }
    return out;
}

std::vector<LiftedVertex> build_vertex_set_unique(const ParamGrid& grid) {
    auto all = build_vertex_set(grid);
    std::vector<LiftedVertex> out;
    for (auto& vx : all) {
        bool dup = false;
        for (const auto& w : out)
            dup = dup || (w.v == vx.v && w.vbar == vx.vbar && w.vhat == vx.vhat);
        if (!dup) out.push_back(std::move(vx));
    }
    return out;
}

}  // namespace ddro

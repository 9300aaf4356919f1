#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ddro {

/// Marginal support of one uncertain parameter together with the interior
/// breakpoints placed on it. Pieces are numbered 1..r with piece j spanning
/// [p^{j-1}, p^j], where p^0 and p^r are the support bounds. The constant
/// parameter is represented as lo == hi with no breakpoints (r = 1).
struct ParamGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> points;  // strictly increasing, strictly inside (lo, hi)

    int r() const { return static_cast<int>(points.size()) + 1; }
    int g() const { return std::max(1, r() - 1); }

    /// Endpoint p^j of the piece grid, j = 0..r.
    double knot(int j) const;

    /// Throws std::invalid_argument when ordering or interiority is violated.
    void validate() const;

    bool contains(double xi, double tol = 1e-9) const { return xi >= lo - tol && xi <= hi + tol; }
};

/// Piecewise linear lifting: maps xi to the r()-vector whose components sum
/// back to xi. Throws std::domain_error when xi is outside the support.
Eigen::VectorXd lift_continuous(double xi, const ParamGrid& grid);

/// Indicator lifting: component j is 1 when xi >= p^j, as a g()-vector. The
/// r = 1 case yields the all-ones vector of length 1.
Eigen::VectorXd lift_binary(double xi, const ParamGrid& grid);

/// One vertex of the lifted marginal hull: the original value, its
/// continuous lift, and the limit of the indicator lift taken from inside
/// the owning piece.
struct LiftedVertex {
    int piece = 0;  // 1-based piece index
    double v = 0.0;
    Eigen::VectorXd vbar;
    Eigen::VectorXd vhat;
};

/// All 2r vertices of the lifted marginal hull, ordered piece by piece with
/// the left endpoint first. Within a piece both vertices share the same
/// vhat (the indicator lift is constant on the open piece).
std::vector<LiftedVertex> build_vertex_set(const ParamGrid& grid);

/// Vertices with duplicate (v, vbar, vhat) triples removed, preserving
/// order. For the constant parameter this collapses to a single vertex.
std::vector<LiftedVertex> build_vertex_set_unique(const ParamGrid& grid);

}  // namespace ddro

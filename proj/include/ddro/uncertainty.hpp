#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ddro/indexing.hpp"
#include "ddro/lifting.hpp"

namespace ddro {

/// Interior breakpoints per uncertain parameter, addressed by (stage t,
/// component i), both 1-based. Supports live in DduSet; a ParamGrid zips
/// the two together.
struct Breakpoints {
    std::vector<std::vector<std::vector<double>>> pts;  // pts[t][i-1]

    static Breakpoints none(const StageStructure& s) {
        Breakpoints bp;
        bp.pts.resize(static_cast<size_t>(s.T) + 1);
        for (int t = 1; t <= s.T; ++t) bp.pts[static_cast<size_t>(t)].resize(s.K[t]);
        return bp;
    }
    const std::vector<double>& at(int t, int i) const { return pts[t][static_cast<size_t>(i) - 1]; }
    std::vector<double>& at(int t, int i) { return pts[t][static_cast<size_t>(i) - 1]; }
    int total() const {
        int n = 0;
        for (const auto& st : pts)
            for (const auto& p : st) n += static_cast<int>(p.size());
        return n;
    }
};

/// Decision-dependent polyhedral uncertainty description. For each stage
/// t = 2..T the cumulative system W^[t] xi^[t] <= sum_that U^t_that y_that
/// is stored, with W columns in flat parameter order. Box supports are kept
/// per parameter; the constant parameter carries [1, 1].
struct DduSet {
    struct StageSet {
        Eigen::MatrixXd W;                  // M_t x K^[t]
        std::vector<Eigen::MatrixXd> U;     // U[that] is M_t x Q_that, that = 1..t-1
        std::vector<std::string> row_names; // optional, size M_t
        int rows() const { return static_cast<int>(W.rows()); }
    };
    std::vector<StageSet> stage;            // [t] for t = 2..T; slots 0..1 unused
    std::vector<std::vector<double>> lo, hi;  // [t][i-1]

    void resize(const StageStructure& s) {
        stage.assign(static_cast<size_t>(s.T) + 1, {});
        lo.assign(static_cast<size_t>(s.T) + 1, {});
        hi.assign(static_cast<size_t>(s.T) + 1, {});
        for (int t = 1; t <= s.T; ++t) {
            lo[t].assign(s.K[t], 0.0);
            hi[t].assign(s.K[t], 0.0);
        }
    }
    double support_lo(int t, int i) const { return lo[t][static_cast<size_t>(i) - 1]; }
    double support_hi(int t, int i) const { return hi[t][static_cast<size_t>(i) - 1]; }
};

ParamGrid make_grid(const DduSet& ddu, const Breakpoints& bp, int t, int i);

/// Linear description of the lifted-hull set for stage t: per-parameter
/// simplex and mixing rows over (xi, xibar, xihat, lambda), plus the
/// coupling rows W^[t] xi^[t] <= sum U^t_that y_that with the y terms left
/// symbolic for the caller to bind.
struct HullSystem {
    struct YTerm {
        int stage = 0;   // decision stage of the y variable (1-based)
        int q = 0;       // 0-based component
        double coef = 0; // contribution +coef * y_{stage,q} to the row rhs
    };
    struct Row {
        std::string name;
        std::vector<std::pair<int, double>> lhs;  // (column, coefficient)
        char sense = 'L';                          // 'L' <=, 'E' ==, 'G' >=
        double rhs = 0.0;
        std::vector<YTerm> y;                      // symbolic rhs terms
    };

    int t = 0;  // stage whose cumulative set this is
    StageStructure s;

    // column layout: all xi, then all xibar, then all xihat, then all lambda
    int n_xi = 0, n_xibar = 0, n_xihat = 0, n_lambda = 0;
    std::vector<int> xibar_off, xihat_off, lambda_off;  // per flat param
    std::vector<std::vector<LiftedVertex>> verts;       // per flat param (with duplicates removed)

    std::vector<Row> rows;

    int cols() const { return n_xi + n_xibar + n_xihat + n_lambda; }
    int xi_col(int flat) const { return flat; }
    int xibar_col(int flat, int j) const { return n_xi + xibar_off[flat] + j; }          // j 0-based
    int xihat_col(int flat, int j) const { return n_xi + n_xibar + xihat_off[flat] + j; }
    int lambda_col(int flat, int v) const {
        return n_xi + n_xibar + n_xihat + lambda_off[flat] + v;
    }
};

/// Builds the stage-t lifted hull constraint system from the set data and
/// breakpoints. Grids are derived with make_grid; the caller binds the
/// symbolic y terms (fixed values for verification, decision-rule
/// expressions for reformulation).
HullSystem build_hull_system(const DduSet& ddu, const Breakpoints& bp, const StageStructure& s,
                             int t);

}  // namespace ddro

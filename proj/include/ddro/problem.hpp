#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ddro/indexing.hpp"
#include "ddro/uncertainty.hpp"

namespace ddro {

/// Stage-t robust constraint block: coefficient blocks per observed
/// parameter (flat order) acting on the first-stage variables, and recourse
/// blocks per decision stage t'' = 2..t.
struct RobustBlock {
    std::vector<Eigen::MatrixXd> A;  // per flat param: N_t x P_1
    std::vector<Eigen::MatrixXd> D;  // per flat param: N_t x Q_1
    std::vector<Eigen::VectorXd> b;  // per flat param: N_t
    std::vector<Eigen::MatrixXd> Arec;  // [t'']: N_t x P_{t''}, slots 0..1 unused
    std::vector<Eigen::MatrixXd> Drec;  // [t'']: N_t x Q_{t''}
    std::vector<std::string> row_names;
};

/// Location of the epigraph-defining row (the row whose left-hand side is
/// the stage-cost expression minus the objective variable).
struct RowRef {
    int t = 0;
    int n = 0;  // 0-based row within the block
};

/// Canonical in-memory form of the multistage robust instance. Immutable
/// by convention after construction; all transformation modules take it by
/// const reference.
struct MultistageProblem {
    std::string name;
    StageStructure s;

    Eigen::MatrixXd A1, D1;  // first-stage block, N_1 rows
    Eigen::VectorXd b1;
    std::vector<RobustBlock> block;  // [t] for t = 2..T; slots 0..1 unused

    DduSet ddu;
    Breakpoints bp;

    std::vector<std::vector<std::string>> xname, yname;  // per stage, optional
    std::optional<RowRef> epigraph_row;

    // Optional per-parameter zero-forcing mask: when set for (t,i), the
    // decision-rule coefficient blocks sourced from that parameter are
    // pinned to zero in the reformulation.
    std::vector<std::vector<bool>> zero_force;

    ParamGrid grid(int t, int i) const { return make_grid(ddu, bp, t, i); }
    bool zero_forced(int t, int i) const {
        return !zero_force.empty() && zero_force[t][static_cast<size_t>(i) - 1];
    }
    std::string xvar_name(int t, int p) const;  // p 0-based
    std::string yvar_name(int t, int q) const;
};

/// Structural audit: dimension agreement, stage-1 convention, breakpoint
/// placement. Returns human-readable violations; empty means well-formed.
std::vector<std::string> validate_problem(const MultistageProblem& p);

/// Flat per-row view of a T = 2 instance in the two-stage data layout:
/// xi' (A_n x + D_n y) + a_n' xtilde + d_n' ytilde <= xi' b_n.
struct TwoStageView {
    struct Row {
        Eigen::MatrixXd A;   // K x P1
        Eigen::MatrixXd D;   // K x Q1
        Eigen::VectorXd b;   // K
        Eigen::VectorXd at;  // P2 recourse coefficients
        Eigen::VectorXd dt;  // Q2
        std::string name;
    };
    StageStructure s;
    std::vector<Row> rows;
    Eigen::MatrixXd W;  // stage-2 set
    Eigen::MatrixXd U;
};

/// Throws std::invalid_argument when T != 2.
TwoStageView as_two_stage(const MultistageProblem& p);

/// Rebuilds the block form from a two-stage view (round-trip counterpart).
MultistageProblem from_two_stage(const TwoStageView& v, const MultistageProblem& original);

}  // namespace ddro

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ddro/indexing.hpp"
#include "ddro/lifting.hpp"

namespace ddro {

/// Information structure for decision rules: stage-t decisions may depend
/// on the constant parameter (1,1) and on parameters observed in stages
/// lo_source[t]..t. Full information has lo_source[t] = 2 everywhere.
struct InfoWindow {
    std::vector<int> lo_source;  // size T+1, slots 0..1 unused

    static InfoWindow full(const StageStructure& s);
    /// lo_source[t] = max(2, t - delta_t); delta_t < 0 means full information.
    static InfoWindow uniform(const StageStructure& s, int delta_t);
    static InfoWindow per_stage(const StageStructure& s, const std::vector<int>& delta_by_stage);

    bool admits(int t, int tp) const {
        return tp == 1 || (tp >= lo_source[t] && tp <= t);
    }
    bool is_full() const {
        for (size_t t = 2; t < lo_source.size(); ++t)
            if (lo_source[t] != 2) return false;
        return true;
    }
};

/// Coefficients of one decision-rule source block: stage-t decisions as
/// functions of the lifted images of parameter (t', i).
struct PolicyBlock {
    Eigen::MatrixXd Xbar;   // P_t x r
    Eigen::MatrixXd Xhat;   // P_t x g
    Eigen::MatrixXd Ydot;   // Q_t x g, entries in {0,1}
    Eigen::MatrixXd Yddot;  // Q_t x g, entries in {0,1}, Ydot + Yddot <= 1
    bool empty() const { return Xbar.size() == 0 && Ydot.size() == 0; }
    Eigen::MatrixXd yhat() const { return Ydot - Yddot; }
};

/// A realized scenario: per-stage observed parameter values, 1-based by
/// stage; trajectory[1] is the constant stage and must equal (1).
using Trajectory = std::vector<Eigen::VectorXd>;

struct PolicyCoefficients {
    StageStructure s;
    InfoWindow window;
    std::vector<std::vector<ParamGrid>> grids;  // [t][i-1]; carried so evaluation is self-contained

    Eigen::VectorXd x1, y1;                         // first-stage decisions
    std::vector<std::vector<PolicyBlock>> blocks;   // [t][flat param]; empty outside the window

    double objective = 0.0;  // solve metadata, carried into the export
    double gap = 0.0;

    const ParamGrid& grid(int t, int i) const { return grids[t][static_cast<size_t>(i) - 1]; }
    const PolicyBlock& block(int t, int tp, int i) const;  // throws outside the window
    bool has_block(int t, int tp, int i) const;

    static PolicyCoefficients zero(const StageStructure& s,
                                   const std::vector<std::vector<ParamGrid>>& grids,
                                   const InfoWindow& window);
};

/// Evaluates the stage-t decision rules at a realized trajectory. The
/// binary outputs need not be integral for arbitrary coefficients;
/// integrality is a property of admissible policies.
struct StageDecision {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};
StageDecision evaluate_policy(const PolicyCoefficients& c, const Trajectory& xi, int t);

/// Exact box-vertex admissibility check for the additive separable rule
/// class: per component, the achievable value set is the Minkowski sum of
/// per-parameter prefix sums of yhat columns, so min/max over one
/// parameter at a time plus extremes decide membership in {0, 1}.
struct AdmissibilityIssue {
    int t = 0;
    int q = 0;  // 0-based component
    double lo = 0.0, hi = 0.0;
    std::string note;
};
std::vector<AdmissibilityIssue> check_binary_admissibility(const PolicyCoefficients& c);

/// Policy export/import as a structured text document so verification can
/// run as a separate process.
void save_policy(const PolicyCoefficients& c, const std::string& path);
PolicyCoefficients load_policy(const std::string& path);
std::string policy_to_json(const PolicyCoefficients& c);
PolicyCoefficients policy_from_json(const std::string& text);

}  // namespace ddro

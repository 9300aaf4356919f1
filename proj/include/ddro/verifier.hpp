#pragma once

#include <string>
#include <vector>

#include "ddro/policy.hpp"
#include "ddro/problem.hpp"
#include "ddro/solver.hpp"

namespace ddro {

struct DesignData;  // studies.hpp

/// Worst-case slack of one robust constraint row, obtained by maximizing
/// the rule-substituted row over the lifted hull as an explicit LP (never
/// through the dualized rows). A row over an empty set is vacuously
/// satisfied and reported with slack -inf.
struct RowSlack {
    int t = 0;
    int n = 0;
    std::string name;
    double slack = 0.0;
    bool known = true;
    Trajectory argmax;  // xi projection of the binding LP point (empty if none)
};

struct InnerMaxReport {
    std::vector<RowSlack> rows;
    std::vector<std::string> warnings;
    double max_slack() const;
    bool certified(double tol = 1e-6) const;
};

/// Independent robustness certificate: every robust row's inner
/// maximization, with the set's y-dependence bound to the policy exactly as
/// the dualization binds it. Shares the hull construction with the
/// uncertainty module and no code with the reformulation row generator.
InnerMaxReport inner_max_check(const MultistageProblem& p, const PolicyCoefficients& c,
                               const SolverConfig& cfg = {});

struct SimulationResult {
    double cost = 0.0;  // realized through the marked epigraph row
    bool feasible = true;
    std::vector<std::string> violations;
    std::vector<StageDecision> decisions;  // [t] for t = 2..T
};

/// Stage-by-stage evaluation of the policy at a realized trajectory,
/// checking every original constraint block at the realization.
SimulationResult simulate_policy(const MultistageProblem& p, const PolicyCoefficients& c,
                                 const Trajectory& xi);

/// True when the trajectory lies in every stage's uncertainty set given
/// the y-decisions the policy realizes along it.
bool trajectory_in_sets(const MultistageProblem& p, const PolicyCoefficients& c,
                        const Trajectory& xi, double tol = 1e-6);

/// Scenario grid for verifier/optimizer agreement: per-parameter vertex
/// sweeps (others at their lower support), box extremes, the binding
/// points returned by inner_max_check, and uniform box samples filtered by
/// set membership.
std::vector<Trajectory> verification_grid(const MultistageProblem& p,
                                          const PolicyCoefficients& c,
                                          const InnerMaxReport& certificate,
                                          int random_samples = 1000, unsigned seed = 20240815);

enum class CaseBVariant { FixedBudget, DecisionDependent };

/// Closed-form worst-case optimum of the three-unit narrow-demand design
/// case: selects units 2 and 3, computes the worst capacity deviation of
/// unit 2 under the chosen budget variant and prices the worst demand.
double case_b_closed_form(double tau, const DesignData& d, CaseBVariant variant);

/// Worst capacity deviation of unit 2 alone (the min{...} term above).
double case_b_worst_c2(double tau, const DesignData& d, CaseBVariant variant);

}  // namespace ddro

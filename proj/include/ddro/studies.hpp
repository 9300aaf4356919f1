#pragma once

#include <string>
#include <vector>

#include "ddro/policy.hpp"
#include "ddro/problem.hpp"

namespace ddro {

/// Per-unit data of the flexible-production design study. Costs are in the
/// units of the source table (k$ for the 3-unit case, $ for the 8-unit one).
struct DesignUnit {
    double alpha = 0, beta = 0, gamma = 0;
    double c_min = 0, c_max = 0, c_hat_max = 0;
};

enum class DesignVariant {
    PerUnitBound,             // chat_i <= chat_max_i * z_i
    FixedBudget,              // budget over all units, bounds certain
    DecisionDependentBudget,  // budget and bounds both scaled by z
};

struct DesignData {
    std::vector<DesignUnit> units;
    double d_min = 0, d_max = 0;
    double tau = 1.0;
    DesignVariant variant = DesignVariant::PerUnitBound;

    void apply_case_a();  // widest coverable demand range
    void apply_case_b();  // range covered by unit 1 alone
    std::vector<std::string> violations() const;
};

DesignData load_design_data(const std::string& path);

/// Epigraph-reformulated two-stage instance: parameters are the constant,
/// one capacity deviation per unit, and the demand; the demand equality is
/// encoded as paired inequalities.
MultistageProblem build_design_problem(const DesignData& d);

/// Per-unit data of the multiperiod planning study.
struct PlanningUnit {
    double alpha = 0, beta = 0, c_min = 0, c_max = 0;
};

struct PlanningPeriod {
    double eta = 0, theta = 0;
    double d_min = 0, d_max = 0;
    double tau = 0;
    std::vector<double> c_hat_max1, c_hat_max2;  // per unit; upgraded < plain
};

struct PlanningData {
    std::vector<PlanningUnit> units;
    std::vector<PlanningPeriod> periods;  // at least T entries
    std::vector<double> gamma_scale;      // per unit; gamma_i = gamma_bar * scale_i
    double gamma_bar = 100.0;
    double s_max = 5.0;
    int T = 2;

    std::vector<std::string> violations() const;
};

PlanningData load_planning_data(const std::string& path);

/// 2T+1-stage instance following the observation order demand -> operate
/// -> capacity -> produce. The products of first-stage upgrades with
/// operating decisions are pre-linearized with auxiliary binaries carried
/// in the operating stages.
MultistageProblem build_planning_problem(const PlanningData& d);

/// Information restriction used by the planning study: decisions in an
/// operating stage see only that period's demand; production stages also
/// see the period's capacity deviations (plus the constant).
InfoWindow planning_current_period_window(const StageStructure& s);

/// n interior points per non-constant parameter at fractions k/(n+1) of
/// its marginal support.
Breakpoints equidistant_breakpoints(const MultistageProblem& p, int n);

/// Demand breakpoints from unit capacity structure: all c_min_i and all
/// c_max_i - p for p running over each unit's capacity-deviation grid
/// knots, filtered to the open demand range, deduplicated at 1e-9.
/// chat_bp holds interior breakpoints per unit for the deviations (may be
/// empty) and is copied into the result for the deviation parameters.
Breakpoints tailored_breakpoints(const DesignData& d,
                                 const std::vector<std::vector<double>>& chat_bp,
                                 const MultistageProblem& p);

}  // namespace ddro

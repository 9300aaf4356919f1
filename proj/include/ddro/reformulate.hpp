#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddro/milp.hpp"
#include "ddro/policy.hpp"
#include "ddro/problem.hpp"
#include "ddro/solver.hpp"

namespace ddro {

enum class RecourseMode { ContinuousOnly, Mixed };

/// Upper bounds for the nonnegative dual families entering bilinear
/// products. Resolution order: per-variable override, family override,
/// global default.
struct BigMConfig {
    double default_bound = 1e4;
    std::map<std::string, double> family;
    std::map<std::string, double> per_var;
    double bound_for(const std::string& fam, const std::string& var) const {
        if (auto it = per_var.find(var); it != per_var.end()) return it->second;
        if (auto it = family.find(fam); it != family.end()) return it->second;
        return default_bound;
    }
};

struct ReformOptions {
    RecourseMode recourse = RecourseMode::Mixed;
    std::optional<InfoWindow> window;  // absent = full information
    BigMConfig big_m;
};

/// Per-family row counts, the linearization registry, and the variable
/// index tables needed to read a policy back out of a solution vector.
struct ReformulationArtifacts {
    GloverRegistry glover;
    std::map<std::string, int> family_rows;  // audit: rows emitted per family
    std::map<std::string, int> family_vars;

    std::vector<int> x1_idx, y1_idx;
    struct BlockVars {
        bool present = false;
        bool split = true;  // false: Ydot holds a single static binary column
        std::vector<std::vector<int>> Xbar, Xhat;   // [p][j] variable index
        std::vector<std::vector<int>> Ydot, Yddot;  // [q][j]
    };
    std::vector<std::vector<BlockVars>> pol;  // [t][flat param]

    InfoWindow window;
    RecourseMode recourse = RecourseMode::Mixed;
    std::vector<std::vector<ParamGrid>> grids;  // grids the model was built with
};

struct Reformulation {
    MilpModel model;
    ReformulationArtifacts art;
};

/// Deterministic MILP for the T = 2 instance via the two-stage dual
/// families (per-row multipliers and the 0/1 relaxation of the binary
/// recourse rules). Products of duals with first-stage binaries are
/// Glover-linearized against the configured bounds.
Reformulation dualize_two_stage(const MultistageProblem& p, const Breakpoints& bp,
                                const ReformOptions& opt = {});

/// Deterministic MILP for the general multistage instance: per-stage
/// aggregate and vertex dual rows, binary-domain relaxation families, the
/// Ydot - Yddot substitution with symmetry rows, and linearization of every
/// dual-times-binary product. Finite information windows drop coefficient
/// blocks outside them while retaining the constant block.
Reformulation dualize_multistage(const MultistageProblem& p, const Breakpoints& bp,
                                 const ReformOptions& opt = {});

/// Exact linearization of aux = w * z for w in [0, M] and binary z. For a
/// free w in [-M, M], pass split = true to decompose w first. Returns the
/// auxiliary variable index and records the product in the registry.
int glover_linearize(MilpModel& m, GloverRegistry& reg, int w, int z, double M,
                     const std::string& aux_name);

/// Free-variable variant: w in [-M, M] is split into nonnegative parts and
/// both parts are linearized; the returned pair is (pos_product, neg_product)
/// with w*z = pos_product - neg_product.
std::pair<int, int> glover_linearize_free(MilpModel& m, GloverRegistry& reg, int w, int z, double M,
                                          const std::string& aux_name);

/// Reads decision-rule coefficients and first-stage values from a solved
/// model. Reconstructed yhat entries must land in {-1, 0, 1} within 1e-6
/// and are rounded. When tidy is set, rule blocks sourced from parameters
/// that the solved first-stage decision pins to a vanishing lift are zeroed
/// (the zero-forcing for unmaterialized parameters); this never changes the
/// policy on realizable scenarios.
PolicyCoefficients extract_policy(const MultistageProblem& p, const Reformulation& ref,
                                  const SolveReport& report, bool tidy = false,
                                  const SolverConfig& lp_cfg = {});

/// Convenience: solve + flag boundary-active duals.
SolveReport solve_reformulated(const Reformulation& ref, const SolverConfig& cfg);

}  // namespace ddro

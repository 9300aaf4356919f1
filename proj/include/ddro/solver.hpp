#pragma once

#include <map>
#include <string>
#include <vector>

#include "ddro/milp.hpp"

namespace ddro {

enum class SolveStatus { OptimalWithinGap, Infeasible, Unbounded, Limit, BackendError };

std::string to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::BackendError;
    bool has_incumbent = false;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    double wall_s = 0.0;
    std::vector<double> solution;  // aligned with model variable order
    std::vector<std::string> boundary_active;  // duals within 1% of their bound
    std::string message;

    double value(const MilpModel& m, const std::string& name) const;
    int exit_code() const;  // 0 optimal, 2 infeasible, 3 limit, 4 error
};

/// Pluggable backend contract: one command, file-based exchange. The
/// command is invoked as `<cmd> <model> <report> --gap G --time-limit S`
/// where <model> is the JSON dump (an LP file is written alongside it).
struct SolverConfig {
    std::string backend;  // empty = DDRO_SOLVER env, else the bundled script
    double gap = 0.01;
    double time_limit = 1e9;
    bool keep_files = false;
    std::string workdir;  // empty = fresh temp directory
};

/// Resolved backend command line prefix (for diagnostics).
std::string backend_command(const SolverConfig& cfg);

/// Writes the model, invokes the backend, parses the report. Backend
/// failures surface as status BackendError with the message filled in;
/// limit/infeasible/unbounded are regular statuses, not errors.
SolveReport solve(const MilpModel& m, const SolverConfig& cfg = {});

/// Registry of Glover-linearized products and dual-variable bounds, kept
/// alongside a built model so bound updates can rewrite it in place.
struct GloverRegistry {
    struct Product {
        int aux = -1, w = -1, z = -1;
        double big_m = 0.0;
        int row_ub_z = -1;  // aux - M z <= 0
        int row_lb = -1;    // w - aux + M z <= M
    };
    std::vector<Product> products;
    std::map<std::string, double> dual_bound;  // dual variable name -> its big-M
};

enum class BoundRule { Lambda, TwoLambda, TwoLambdaPlusEps };

/// Dual-bound update experiment: rewrites every registered dual's upper
/// bound (and the linearization rows that embed it) from its value in the
/// incumbent solution, then re-solves. The objective is expected to match
/// the original within the solve gap.
SolveReport bound_experiment(MilpModel& m, GloverRegistry& reg, const SolveReport& incumbent,
                             BoundRule rule, const SolverConfig& cfg = {});

/// Fills report.boundary_active with registered duals within 1% of bound.
void flag_boundary_active(const MilpModel& m, const GloverRegistry& reg, SolveReport& report);

}  // namespace ddro

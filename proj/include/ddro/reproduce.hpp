#pragma once

#include <string>
#include <vector>

#include "ddro/reformulate.hpp"
#include "ddro/studies.hpp"
#include "ddro/verifier.hpp"

namespace ddro {

struct RunResult {
    std::string label;
    SolveReport report;
    double expected = 0.0;
    bool expect_infeasible = false;
    double rel_tol = 0.01;
    std::vector<std::string> extra;  // free-form csv columns

    bool ok() const;
    std::string describe() const;
};

struct ReproduceResult {
    std::string name;
    std::vector<RunResult> runs;
    std::vector<std::string> notes;
    bool all_ok() const;
    std::string csv() const;
};

struct ReproduceConfig {
    std::string data_dir = "data";
    SolverConfig solver;
};

ReproduceResult reproduce_table1(const ReproduceConfig& cfg);
ReproduceResult reproduce_table2(const ReproduceConfig& cfg);
ReproduceResult reproduce_fig6(const ReproduceConfig& cfg);
ReproduceResult reproduce_table3(const ReproduceConfig& cfg);
ReproduceResult reproduce_table4(const ReproduceConfig& cfg);

/// Upgrade-cost sweep: for each gamma_bar, solves the T-period planning
/// instance under both recourse modes and reports objective and the
/// upgrade bitmask.
ReproduceResult sweep_gamma(const ReproduceConfig& cfg, const std::vector<double>& gamma_bars,
                            int T);

/// Audit manifest for a built model: per-family row/variable counts and
/// the dual bound registry.
std::string manifest_to_json(const Reformulation& ref);

}  // namespace ddro

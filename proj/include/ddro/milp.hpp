#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace ddro {

enum class VarKind { Continuous, Binary };

struct MilpVar {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = std::numeric_limits<double>::infinity();
    double obj = 0.0;
};

struct MilpRow {
    std::string name;
    std::vector<std::pair<int, double>> coefs;  // (variable index, coefficient)
    char sense = 'L';                            // 'L' <=, 'E' ==, 'G' >=
    double rhs = 0.0;
};

/// Generic deterministic MILP with a minimized linear objective. Variable
/// and row order is insertion order, which makes repeated builds of the
/// same instance byte-identical on export.
class MilpModel {
  public:
    int add_var(const std::string& name, VarKind kind, double lb, double ub, double obj = 0.0);
    int add_continuous(const std::string& name, double lb, double ub, double obj = 0.0) {
        return add_var(name, VarKind::Continuous, lb, ub, obj);
    }
    int add_binary(const std::string& name, double obj = 0.0) {
        return add_var(name, VarKind::Binary, 0.0, 1.0, obj);
    }
    void add_row(MilpRow row);
    void add_row(const std::string& name, std::vector<std::pair<int, double>> coefs, char sense,
                 double rhs) {
        add_row(MilpRow{name, std::move(coefs), sense, rhs});
    }

    int var_index(const std::string& name) const;  // -1 when absent
    const std::vector<MilpVar>& vars() const { return vars_; }
    const std::vector<MilpRow>& rows() const { return rows_; }
    std::vector<MilpVar>& mutable_vars() { return vars_; }
    std::vector<MilpRow>& mutable_rows() { return rows_; }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    int num_binary() const;

    /// Violations of the model invariants (undeclared names are impossible
    /// by construction; checks bounds, binary domains, finite coefficients).
    std::vector<std::string> validate() const;

  private:
    std::vector<MilpVar> vars_;
    std::vector<MilpRow> rows_;
    std::map<std::string, int> index_;
};

/// Shortest-round-trip decimal rendering (used by all exporters so that
/// identical models produce identical bytes).
std::string format_double(double v);

/// Maps arbitrary names to LP-format-safe identifiers. Already-safe names
/// pass through unchanged; the mangled pairs are recorded for the manifest.
class NameMangler {
  public:
    std::string safe(const std::string& name);
    const std::map<std::string, std::string>& renames() const { return renames_; }

  private:
    std::map<std::string, std::string> renames_;
    std::map<std::string, int> used_;
};

/// Writes CPLEX-dialect LP format (minimized objective, Binary section).
void export_lp(const MilpModel& m, std::ostream& os);
void export_lp(const MilpModel& m, const std::string& path);

/// Machine-oriented dump consumed by solver backends (one JSON object with
/// the variable and row arrays in model order).
void export_model_json(const MilpModel& m, const std::string& path);

}  // namespace ddro

#include "ddro/milp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace ddro {

int MilpModel::add_var(const std::string& name, VarKind kind, double lb, double ub, double obj) {
    if (index_.count(name)) throw std::invalid_argument("duplicate variable name: " + name);
    const int id = static_cast<int>(vars_.size());
    vars_.push_back({name, kind, lb, ub, obj});
    index_[name] = id;
    return id;
}

void MilpModel::add_row(MilpRow row) {
    for (const auto& [idx, coef] : row.coefs) {
        if (idx < 0 || idx >= num_vars())
            throw std::out_of_range("row " + row.name + " references unknown variable");
        (void)coef;
    }
    rows_.push_back(std::move(row));
}

int MilpModel::var_index(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int MilpModel::num_binary() const {
    int n = 0;
    for (const auto& v : vars_) n += v.kind == VarKind::Binary ? 1 : 0;
    return n;
}

std::vector<std::string> MilpModel::validate() const {
    std::vector<std::string> out;
    for (const auto& v : vars_) {
        if (v.kind == VarKind::Binary && (v.lb != 0.0 || v.ub != 1.0))
            out.push_back("binary variable " + v.name + " must have bounds [0, 1]");
        if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
            out.push_back("variable " + v.name + " has invalid bounds");
        if (!std::isfinite(v.obj)) out.push_back("variable " + v.name + " has non-finite objective");
    }
    for (const auto& r : rows_) {
        if (!std::isfinite(r.rhs)) out.push_back("row " + r.name + " has non-finite rhs");
        for (const auto& [idx, coef] : r.coefs) {
            (void)idx;
            if (!std::isfinite(coef)) {
                out.push_back("row " + r.name + " has non-finite coefficient");
                break;
            }
        }
        if (r.sense != 'L' && r.sense != 'E' && r.sense != 'G')
            out.push_back("row " + r.name + " has unknown sense");
    }
    return out;
}

std::string format_double(double v) {
    if (v == 0.0) return "0";  // normalize -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string NameMangler::safe(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || (out[0] >= '0' && out[0] <= '9') || out[0] == '.' || out[0] == 'e' ||
        out[0] == 'E')
        out = "v_" + out;
    int& count = used_[out];
    if (count > 0) out += "__" + std::to_string(count);
    ++count;
    if (out != name) renames_[name] = out;
    return out;
}

namespace {

bool write_terms(std::ostream& os, const std::vector<std::string>& names,
                 const std::vector<std::pair<int, double>>& coefs) {
    bool first = true;
    for (const auto& [idx, coef] : coefs) {
        if (coef == 0.0) continue;
        if (first)
            os << (coef < 0 ? "- " : "");
        else
            os << (coef < 0 ? " - " : " + ");
        first = false;
        const double a = std::abs(coef);
        if (a != 1.0) os << format_double(a) << " ";
        os << names[idx];
    }
    return !first;
}

}  // namespace

void export_lp(const MilpModel& m, std::ostream& os) {
    NameMangler mangler;
    std::vector<std::string> names;
    names.reserve(m.vars().size());
    for (const auto& v : m.vars()) names.push_back(mangler.safe(v.name));

    os << "\\ " << m.num_vars() << " variables, " << m.num_rows() << " rows\n";
    os << "Minimize\n obj: ";
    std::vector<std::pair<int, double>> obj;
    for (int i = 0; i < m.num_vars(); ++i)
        if (m.vars()[i].obj != 0.0) obj.emplace_back(i, m.vars()[i].obj);
    if (!write_terms(os, names, obj) && m.num_vars() > 0) os << "0 " << names[0];
    os << "\nSubject To\n";
    NameMangler row_mangler;
    for (const auto& r : m.rows()) {
        os << " " << row_mangler.safe(r.name) << ": ";
        if (!write_terms(os, names, r.coefs) && m.num_vars() > 0) os << "0 " << names[0];
        os << (r.sense == 'L' ? " <= " : r.sense == 'G' ? " >= " : " = ");
        os << format_double(r.rhs) << "\n";
    }
    os << "Bounds\n";
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.num_vars(); ++i) {
        const auto& v = m.vars()[i];
        if (v.kind == VarKind::Binary) continue;
        if (v.lb == -inf && v.ub == inf)
            os << " " << names[i] << " free\n";
        else if (v.lb == -inf)
            os << " -inf <= " << names[i] << " <= " << format_double(v.ub) << "\n";
        else {
            if (v.lb != 0.0) os << " " << format_double(v.lb) << " <= " << names[i] << "\n";
            if (v.ub != inf) os << " " << names[i] << " <= " << format_double(v.ub) << "\n";
        }
    }
    if (m.num_binary() > 0) {
        os << "Binary\n";
        for (int i = 0; i < m.num_vars(); ++i)
            if (m.vars()[i].kind == VarKind::Binary) os << " " << names[i] << "\n";
    }
    os << "End\n";
}

void export_lp(const MilpModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    export_lp(m, os);
}

void export_model_json(const MilpModel& m, const std::string& path) {
    nlohmann::json doc;
    doc["minimize"] = true;
    auto& vars = doc["variables"] = nlohmann::json::array();
    for (const auto& v : m.vars()) {
        nlohmann::json jv;
        jv["name"] = v.name;
        jv["kind"] = v.kind == VarKind::Binary ? "binary" : "continuous";
        if (std::isfinite(v.lb)) jv["lb"] = v.lb;
        if (std::isfinite(v.ub)) jv["ub"] = v.ub;
        if (v.obj != 0.0) jv["obj"] = v.obj;
        vars.push_back(std::move(jv));
    }
    auto& rows = doc["rows"] = nlohmann::json::array();
    for (const auto& r : m.rows()) {
        nlohmann::json jr;
        jr["name"] = r.name;
        jr["sense"] = std::string(1, r.sense);
        jr["rhs"] = r.rhs;
        auto& coefs = jr["coefs"] = nlohmann::json::array();
        for (const auto& [idx, coef] : r.coefs)
            if (coef != 0.0) coefs.push_back({idx, coef});
        rows.push_back(std::move(jr));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << doc.dump();
}

}  // namespace ddro

#include "ddro/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef DDRO_BACKEND_SCRIPT
#define DDRO_BACKEND_SCRIPT "tools/solve_backend.py"
#endif

namespace ddro {

namespace fs = std::filesystem;

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::OptimalWithinGap: return "optimal-within-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Limit: return "limit";
        case SolveStatus::BackendError: return "backend-error";
    }
    return "unknown";
}

double SolveReport::value(const MilpModel& m, const std::string& name) const {
    const int idx = m.var_index(name);
    if (idx < 0 || idx >= static_cast<int>(solution.size()))
        throw std::out_of_range("no solution value for " + name);
    return solution[idx];
}

int SolveReport::exit_code() const {
    switch (status) {
        case SolveStatus::OptimalWithinGap: return 0;
        case SolveStatus::Infeasible: return 2;
        case SolveStatus::Limit: return 3;
        default: return 4;
    }
}

std::string backend_command(const SolverConfig& cfg) {
    if (!cfg.backend.empty()) return cfg.backend;
    if (const char* env = std::getenv("DDRO_SOLVER"); env && *env) return env;
    return std::string("python3 ") + DDRO_BACKEND_SCRIPT;
}

namespace {

fs::path make_workdir(const SolverConfig& cfg) {
    if (!cfg.workdir.empty()) {
        fs::create_directories(cfg.workdir);
        return cfg.workdir;
    }
    static std::mt19937_64 rng{std::random_device{}()};
    const auto base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 32; ++attempt) {
        fs::path dir = base / ("ddro_" + std::to_string(rng()));
        std::error_code ec;
        if (fs::create_directory(dir, ec)) return dir;
    }
    throw std::runtime_error("cannot create solver scratch directory");
}

}  // namespace

SolveReport solve(const MilpModel& m, const SolverConfig& cfg) {
    SolveReport rep;
    if (auto errs = m.validate(); !errs.empty()) {
        rep.message = "model invalid: " + errs.front();
        return rep;
    }
    const fs::path dir = make_workdir(cfg);
    const fs::path model_json = dir / "model.json";
    const fs::path model_lp = dir / "model.lp";
    const fs::path report_json = dir / "report.json";
    export_model_json(m, model_json.string());
    export_lp(m, model_lp.string());

    std::ostringstream cmd;
    cmd << backend_command(cfg) << " " << model_json << " " << report_json << " --gap " << cfg.gap
        << " --time-limit " << cfg.time_limit << " >" << (dir / "backend.log") << " 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.str().c_str());
    rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!fs::exists(report_json)) {
        std::ifstream log(dir / "backend.log");
        std::stringstream buf;
        buf << log.rdbuf();
        rep.message = "backend produced no report (rc=" + std::to_string(rc) +
                      "): " + buf.str().substr(0, 2000);
        if (!cfg.keep_files && cfg.workdir.empty()) fs::remove_all(dir);
        return rep;
    }

    nlohmann::json doc;
    try {
        std::ifstream is(report_json);
        is >> doc;
    } catch (const std::exception& e) {
        rep.message = std::string("unreadable report: ") + e.what();
        if (!cfg.keep_files && cfg.workdir.empty()) fs::remove_all(dir);
        return rep;
    }

    const std::string status = doc.value("status", "error");
    if (status == "optimal")
        rep.status = SolveStatus::OptimalWithinGap;
    else if (status == "infeasible")
        rep.status = SolveStatus::Infeasible;
    else if (status == "unbounded")
        rep.status = SolveStatus::Unbounded;
    else if (status == "limit")
        rep.status = SolveStatus::Limit;
    else
        rep.status = SolveStatus::BackendError;
    rep.message = doc.value("message", "");
    if (doc.contains("wall_time_s")) rep.wall_s = doc["wall_time_s"].get<double>();

    if (doc.contains("objective") && !doc["objective"].is_null()) {
        rep.has_incumbent = true;
        rep.objective = doc["objective"].get<double>();
        rep.bound = doc.value("bound", rep.objective);
        rep.gap = std::abs(rep.objective - rep.bound) / std::max(1.0, std::abs(rep.objective));
        if (doc.contains("solution")) rep.solution = doc["solution"].get<std::vector<double>>();
        if (static_cast<int>(rep.solution.size()) != m.num_vars()) {
            rep.status = SolveStatus::BackendError;
            rep.message = "backend solution length mismatch";
            rep.has_incumbent = false;
        }
    }
    if (!cfg.keep_files && cfg.workdir.empty()) fs::remove_all(dir);
    return rep;
}

void flag_boundary_active(const MilpModel& m, const GloverRegistry& reg, SolveReport& report) {
    report.boundary_active.clear();
    if (!report.has_incumbent) return;
    for (const auto& [name, bound] : reg.dual_bound) {
        if (bound <= 0.0) continue;
        const int idx = m.var_index(name);
        if (idx < 0) continue;
        if (report.solution[idx] >= 0.99 * bound) report.boundary_active.push_back(name);
    }
}

SolveReport bound_experiment(MilpModel& m, GloverRegistry& reg, const SolveReport& incumbent,
                             BoundRule rule, const SolverConfig& cfg) {
    if (!incumbent.has_incumbent) throw std::invalid_argument("bound experiment needs an incumbent");
    auto updated = [&](double lambda) {
        lambda = std::max(lambda, 0.0);
        switch (rule) {
            case BoundRule::Lambda: return lambda;
            case BoundRule::TwoLambda: return 2.0 * lambda;
            case BoundRule::TwoLambdaPlusEps: return 2.0 * lambda + 0.01;
        }
        return lambda;
    };
    std::map<int, double> new_bound;  // var index -> updated M
    for (auto& [name, bound] : reg.dual_bound) {
        const int idx = m.var_index(name);
        if (idx < 0) continue;
        const double nb = updated(incumbent.solution[idx]);
        new_bound[idx] = nb;
        m.mutable_vars()[idx].ub = nb;
        bound = nb;
    }
    // Rewrite the linearization rows that embed the old big-M.
    auto& rows = m.mutable_rows();
    for (auto& prod : reg.products) {
        auto it = new_bound.find(prod.w);
        if (it == new_bound.end()) continue;
        const double M = it->second;
        prod.big_m = M;
        for (auto& [idx, coef] : rows[prod.row_ub_z].coefs)
            if (idx == prod.z) coef = -M;
        for (auto& [idx, coef] : rows[prod.row_lb].coefs)
            if (idx == prod.z) coef = M;
        rows[prod.row_lb].rhs = M;
    }
    SolveReport rep = solve(m, cfg);
    flag_boundary_active(m, reg, rep);
    return rep;
}

}  // namespace ddro

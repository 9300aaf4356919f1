// Command-line surface: instance building, reformulation, solving,
// verification and study reproduction.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ddro/instance_io.hpp"
#include "ddro/reproduce.hpp"

using namespace ddro;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string instance;
    std::string breakpoints = "instance";
    std::string recourse = "mixed";
    std::string delta_t = "full";
    std::string design_data;
    double big_m = 1e4;
    double gap = 0.01;
    double time_limit = 1e9;
    std::string solver;
    std::string data_dir = "data";
};

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--gap", o.gap, "relative MIP gap target (default 0.01)");
    cmd->add_option("--time-limit", o.time_limit, "solver time limit in seconds");
    cmd->add_option("--solver", o.solver, "backend command (default: bundled scipy backend)");
}

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--instance", o.instance, "instance file")->required();
    cmd->add_option("--breakpoints", o.breakpoints,
                    "instance | equidistant:N | tailored | file:PATH");
    cmd->add_option("--recourse", o.recourse, "continuous | mixed (default mixed)");
    cmd->add_option("--delta-t", o.delta_t, "full | current-period | integer window");
    cmd->add_option("--big-m", o.big_m, "default dual bound (default 1e4)");
    cmd->add_option("--design-data", o.design_data, "design data file (for tailored breakpoints)");
}

SolverConfig solver_config(const CommonOpts& o) {
    SolverConfig cfg;
    cfg.backend = o.solver;
    cfg.gap = o.gap;
    cfg.time_limit = o.time_limit;
    return cfg;
}

Breakpoints resolve_breakpoints(const CommonOpts& o, const MultistageProblem& p) {
    if (o.breakpoints == "instance") return p.bp;
    if (o.breakpoints.rfind("equidistant:", 0) == 0)
        return equidistant_breakpoints(p, std::stoi(o.breakpoints.substr(12)));
    if (o.breakpoints == "tailored") {
        if (o.design_data.empty())
            throw std::runtime_error("--breakpoints tailored requires --design-data");
        return tailored_breakpoints(load_design_data(o.design_data), {}, p);
    }
    if (o.breakpoints.rfind("file:", 0) == 0) {
        std::ifstream is(o.breakpoints.substr(5));
        if (!is) throw std::runtime_error("cannot open breakpoints file");
        nlohmann::json doc;
        is >> doc;
        Breakpoints bp = Breakpoints::none(p.s);
        for (const auto& jb : doc)
            bp.at(jb.at("t").get<int>(), jb.at("i").get<int>()) =
                jb.at("points").get<std::vector<double>>();
        return bp;
    }
    throw std::runtime_error("unknown --breakpoints value: " + o.breakpoints);
}

ReformOptions reform_options(const CommonOpts& o, const MultistageProblem& p) {
    ReformOptions opt;
    opt.recourse =
        o.recourse == "continuous" ? RecourseMode::ContinuousOnly : RecourseMode::Mixed;
    if (o.delta_t == "full")
        opt.window = InfoWindow::full(p.s);
    else if (o.delta_t == "current-period")
        opt.window = planning_current_period_window(p.s);
    else
        opt.window = InfoWindow::uniform(p.s, std::stoi(o.delta_t));
    opt.big_m.default_bound = o.big_m;
    return opt;
}

Reformulation build_reformulation(const CommonOpts& o, const MultistageProblem& p,
                                  bool force_two_stage) {
    const Breakpoints bp = resolve_breakpoints(o, p);
    const ReformOptions opt = reform_options(o, p);
    if (force_two_stage && p.s.T == 2) return dualize_two_stage(p, bp, opt);
    return dualize_multistage(p, bp, opt);
}

int cmd_build(const std::string& study, const std::string& case_name, const std::string& variant,
              double tau, double gamma_bar, int periods, const std::string& data_dir,
              const std::string& out) {
    MultistageProblem p;
    if (study == "design3" || study == "design8") {
        DesignData d = load_design_data(data_dir + (study == "design3" ? "/design_3unit.json"
                                                                       : "/design_8unit.json"));
        d.tau = tau;
        if (variant == "perunit")
            d.variant = DesignVariant::PerUnitBound;
        else if (variant == "budget")
            d.variant = DesignVariant::FixedBudget;
        else if (variant == "ddu-budget")
            d.variant = DesignVariant::DecisionDependentBudget;
        else
            throw std::runtime_error("unknown variant " + variant);
        if (case_name == "A")
            d.apply_case_a();
        else if (case_name == "B")
            d.apply_case_b();
        else if (d.d_max <= 0.0)
            throw std::runtime_error("instance needs --case A|B or demand bounds in the data");
        p = build_design_problem(d);
    } else if (study == "planning") {
        PlanningData d = load_planning_data(data_dir + "/planning_3unit.json");
        d.gamma_bar = gamma_bar;
        d.T = periods;
        p = build_planning_problem(d);
    } else {
        throw std::runtime_error("unknown study " + study);
    }
    save_instance(p, out);
    std::cout << "wrote " << out << " (" << p.name << ")\n";
    return 0;
}

int cmd_validate(const CommonOpts& o) {
    const MultistageProblem p = load_instance(o.instance);
    const auto report = validate_problem(p);
    if (report.empty()) {
        std::cout << "instance is well-formed\n";
        return 0;
    }
    for (const auto& line : report) std::cout << line << "\n";
    return 1;
}

int cmd_reformulate(const CommonOpts& o, const std::string& out_dir, bool two_stage) {
    const MultistageProblem p = load_instance(o.instance);
    Reformulation ref = build_reformulation(o, p, two_stage);
    fs::create_directories(out_dir);
    export_lp(ref.model, out_dir + "/model.lp");
    export_model_json(ref.model, out_dir + "/model.json");
    std::ofstream(out_dir + "/manifest.json") << manifest_to_json(ref) << "\n";
    std::cout << "wrote " << out_dir << "/model.lp (" << ref.model.num_rows() << " rows, "
              << ref.model.num_vars() << " vars, " << ref.model.num_binary() << " binary)\n";
    return 0;
}

int cmd_solve(const CommonOpts& o, const std::string& out_dir, bool two_stage, bool tidy) {
    const MultistageProblem p = load_instance(o.instance);
    Reformulation ref = build_reformulation(o, p, two_stage);
    const SolveReport rep = solve_reformulated(ref, solver_config(o));
    std::cout << "status: " << to_string(rep.status) << "\n";
    if (rep.has_incumbent) {
        std::cout << "objective: " << rep.objective << "\nbound: " << rep.bound
                  << "\ngap: " << rep.gap << "\n";
        if (!rep.boundary_active.empty()) {
            std::cout << "duals within 1% of their bound (" << rep.boundary_active.size()
                      << "):\n";
            for (const auto& name : rep.boundary_active) std::cout << "  " << name << "\n";
        }
    }
    std::cout << "wall time: " << rep.wall_s << " s\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        export_lp(ref.model, out_dir + "/model.lp");
        std::ofstream(out_dir + "/manifest.json") << manifest_to_json(ref) << "\n";
        nlohmann::json jr;
        jr["status"] = to_string(rep.status);
        jr["wall_time_s"] = rep.wall_s;
        if (rep.has_incumbent) {
            jr["objective"] = rep.objective;
            jr["bound"] = rep.bound;
            jr["gap"] = rep.gap;
            jr["boundary_active"] = rep.boundary_active;
        }
        std::ofstream(out_dir + "/report.json") << jr.dump(1) << "\n";
        if (rep.has_incumbent) {
            const PolicyCoefficients pol =
                extract_policy(p, ref, rep, tidy, solver_config(o));
            save_policy(pol, out_dir + "/policy.json");
            std::cout << "wrote " << out_dir << "/policy.json\n";
        }
    }
    return rep.exit_code();
}

int cmd_verify(const CommonOpts& o, const std::string& policy_path) {
    const MultistageProblem p = load_instance(o.instance);
    const PolicyCoefficients pol = load_policy(policy_path);
    const auto issues = check_binary_admissibility(pol);
    for (const auto& is : issues)
        std::cout << "admissibility: stage " << is.t << " component " << is.q + 1 << " range ["
                  << is.lo << ", " << is.hi << "] (" << is.note << ")\n";
    const InnerMaxReport report = inner_max_check(p, pol, solver_config(o));
    std::cout << "row, worst-case slack\n";
    for (const auto& row : report.rows)
        std::cout << row.name << ", "
                  << (row.known ? std::to_string(row.slack) : std::string("unknown")) << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    const bool ok = report.certified(1e-6) && issues.empty();
    std::cout << (ok ? "CERTIFIED" : "NOT CERTIFIED") << " (max slack " << report.max_slack()
              << ")\n";
    return ok ? 0 : 1;
}

int cmd_vertices(const CommonOpts& o) {
    const MultistageProblem p = load_instance(o.instance);
    const Breakpoints bp = resolve_breakpoints(o, p);
    std::cout << "param\tpiece\tv\tvbar\tvhat\n";
    for (int t = 1; t <= p.s.T; ++t)
        for (int i = 1; i <= p.s.K[t]; ++i) {
            ParamGrid g = make_grid(p.ddu, bp, t, i);
            for (const auto& vx : build_vertex_set(g)) {
                std::cout << ParamKey{t, i}.str() << "\t" << vx.piece << "\t"
                          << format_double(vx.v) << "\t";
                for (long j = 0; j < vx.vbar.size(); ++j)
                    std::cout << (j ? "," : "") << format_double(vx.vbar(j));
                std::cout << "\t";
                for (long j = 0; j < vx.vhat.size(); ++j)
                    std::cout << (j ? "," : "") << format_double(vx.vhat(j));
                std::cout << "\n";
            }
        }
    return 0;
}

int run_reproduction(const ReproduceResult& res, const std::string& csv_path) {
    for (const auto& r : res.runs) std::cout << r.describe() << "\n";
    for (const auto& n : res.notes) std::cout << n << "\n";
    if (!csv_path.empty()) {
        std::ofstream(csv_path) << res.csv();
        std::cout << "wrote " << csv_path << "\n";
    }
    std::cout << (res.all_ok() ? "ALL OK" : "MISMATCHES PRESENT") << "\n";
    return res.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust multistage MILP reformulation engine"};
    app.require_subcommand(1);
    CommonOpts o;

    auto* build = app.add_subcommand("build", "build a case-study instance file");
    std::string study = "design3", case_name, variant = "perunit", out = "instance.json";
    double tau = 0.5, gamma_bar = 100.0;
    int periods = 2;
    build->add_option("--study", study, "design3 | design8 | planning")->required();
    build->add_option("--case", case_name, "A | B (design studies)");
    build->add_option("--variant", variant, "perunit | budget | ddu-budget");
    build->add_option("--tau", tau, "budget fraction");
    build->add_option("--gamma-bar", gamma_bar, "base upgrade cost (planning)");
    build->add_option("--periods", periods, "number of time periods (planning)");
    build->add_option("--data-dir", o.data_dir, "directory with the study data files");
    build->add_option("--out", out, "output instance file")->required();

    auto* validate = app.add_subcommand("validate", "structural audit of an instance file");
    validate->add_option("--instance", o.instance)->required();

    auto* reform = app.add_subcommand("reformulate", "emit the deterministic MILP");
    std::string out_dir = "reformulated";
    bool two_stage = false, tidy = true;
    add_model_flags(reform, o);
    reform->add_option("--out-dir", out_dir, "output directory");
    reform->add_flag("--two-stage", two_stage, "use the two-stage dual families (T = 2 only)");

    auto* solve_cmd = app.add_subcommand("solve", "reformulate and solve");
    add_model_flags(solve_cmd, o);
    add_solver_flags(solve_cmd, o);
    std::string solve_out;
    solve_cmd->add_option("--out-dir", solve_out, "write model, report and policy here");
    solve_cmd->add_flag("--two-stage", two_stage, "use the two-stage dual families");
    solve_cmd->add_flag("!--no-tidy", tidy, "keep rule blocks of switched-off parameters");

    auto* verify = app.add_subcommand("verify", "certify an exported policy");
    std::string policy_path;
    verify->add_option("--instance", o.instance)->required();
    verify->add_option("--policy", policy_path)->required();
    add_solver_flags(verify, o);

    auto* vertices = app.add_subcommand("vertices", "dump lifted vertex sets");
    vertices->add_option("--instance", o.instance)->required();
    vertices->add_option("--breakpoints", o.breakpoints);

    auto* repro = app.add_subcommand("reproduce", "re-run a study");
    std::string which, csv_path;
    repro->add_option("which", which, "table1 | table2 | table3 | table4 | fig6")->required();
    repro->add_option("--data-dir", o.data_dir);
    repro->add_option("--csv", csv_path, "write results as CSV");
    add_solver_flags(repro, o);

    auto* sweep = app.add_subcommand("sweep-gamma", "upgrade-cost sweep over gamma-bar");
    std::string gammas = "50,100,150,200,300";
    sweep->add_option("--gammas", gammas, "comma-separated gamma-bar values");
    sweep->add_option("--periods", periods, "number of time periods");
    sweep->add_option("--data-dir", o.data_dir);
    sweep->add_option("--csv", csv_path, "write results as CSV");
    add_solver_flags(sweep, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed())
            return cmd_build(study, case_name, variant, tau, gamma_bar, periods, o.data_dir, out);
        if (validate->parsed()) return cmd_validate(o);
        if (reform->parsed()) return cmd_reformulate(o, out_dir, two_stage);
        if (solve_cmd->parsed()) return cmd_solve(o, solve_out, two_stage, tidy);
        if (verify->parsed()) return cmd_verify(o, policy_path);
        if (vertices->parsed()) return cmd_vertices(o);
        if (repro->parsed()) {
            ReproduceConfig cfg;
            cfg.data_dir = o.data_dir;
            cfg.solver = solver_config(o);
            ReproduceResult res;
            if (which == "table1")
                res = reproduce_table1(cfg);
            else if (which == "table2")
                res = reproduce_table2(cfg);
            else if (which == "table3")
                res = reproduce_table3(cfg);
            else if (which == "table4")
                res = reproduce_table4(cfg);
            else if (which == "fig6")
                res = reproduce_fig6(cfg);
            else
                throw std::runtime_error("unknown reproduction target " + which);
            return run_reproduction(res, csv_path);
        }
        if (sweep->parsed()) {
            ReproduceConfig cfg;
            cfg.data_dir = o.data_dir;
            cfg.solver = solver_config(o);
            std::vector<double> gb;
            std::stringstream ss(gammas);
            for (std::string tok; std::getline(ss, tok, ',');) gb.push_back(std::stod(tok));
            return run_reproduction(sweep_gamma(cfg, gb, periods), csv_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

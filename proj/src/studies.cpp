#include "ddro/studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ddro {

using nlohmann::json;

void DesignData::apply_case_a() {
    double lo = units.front().c_min, span = 0.0;
    for (const auto& u : units) {
        lo = std::min(lo, u.c_min);
        span += u.c_max - u.c_hat_max;
    }
    d_min = lo;
    d_max = span;
}

void DesignData::apply_case_b() {
    d_min = units.front().c_min;
    d_max = units.front().c_max - units.front().c_hat_max;
}

std::vector<std::string> DesignData::violations() const {
    std::vector<std::string> out;
    if (units.empty()) out.push_back("design data has no units");
    for (size_t i = 0; i < units.size(); ++i)
        if (units[i].c_min > units[i].c_max - units[i].c_hat_max)
            out.push_back("unit " + std::to_string(i + 1) +
                          ": c_min exceeds the guaranteed capacity c_max - c_hat_max");
    if (d_min > d_max) out.push_back("demand bounds out of order");
    return out;
}

DesignData load_design_data(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open design data " + path);
    json doc;
    is >> doc;
    DesignData d;
    for (const auto& ju : doc.at("units")) {
        DesignUnit u;
        u.alpha = ju.at("alpha").get<double>();
        u.beta = ju.at("beta").get<double>();
        u.gamma = ju.at("gamma").get<double>();
        u.c_min = ju.at("c_min").get<double>();
        u.c_max = ju.at("c_max").get<double>();
        u.c_hat_max = ju.at("c_hat_max").get<double>();
        d.units.push_back(u);
    }
    if (doc.contains("demand")) {
        d.d_min = doc["demand"].at("d_min").get<double>();
        d.d_max = doc["demand"].at("d_max").get<double>();
    }
    return d;
}

MultistageProblem build_design_problem(const DesignData& d) {
    if (auto errs = d.violations(); !errs.empty())
        throw std::invalid_argument("design data invalid: " + errs.front());
    const int I = static_cast<int>(d.units.size());
    const bool budget =
        d.variant == DesignVariant::FixedBudget || d.variant == DesignVariant::DecisionDependentBudget;

    MultistageProblem p;
    p.name = "design_" + std::to_string(I) + "unit";
    p.s = StageStructure(2, {0, 1, I + 1}, {0, 1, I}, {0, I, I}, {0, 0, 3 + 5 * I});
    const auto& s = p.s;
    const int K = s.params_up_to(2);
    const int N = s.N[2];

    p.A1 = Eigen::MatrixXd::Zero(0, 1);
    p.D1 = Eigen::MatrixXd::Zero(0, I);
    p.b1 = Eigen::VectorXd::Zero(0);

    p.block.assign(3, {});
    auto& blk = p.block[2];
    blk.A.assign(K, Eigen::MatrixXd::Zero(N, 1));
    blk.D.assign(K, Eigen::MatrixXd::Zero(N, I));
    blk.b.assign(K, Eigen::VectorXd::Zero(N));
    blk.Arec.assign(3, {});
    blk.Drec.assign(3, {});
    blk.Arec[2] = Eigen::MatrixXd::Zero(N, I);
    blk.Drec[2] = Eigen::MatrixXd::Zero(N, I);

    const int kconst = 0;
    auto kchat = [&](int i) { return 1 + i; };  // i 0-based
    const int kd = 1 + I;

    int n = 0;
    // worst-case cost epigraph
    blk.A[kconst](n, 0) = -1.0;
    for (int i = 0; i < I; ++i) {
        blk.D[kconst](n, i) = d.units[i].alpha;
        blk.Arec[2](n, i) = d.units[i].gamma;
        blk.Drec[2](n, i) = d.units[i].beta;
    }
    blk.row_names.push_back("epigraph");
    p.epigraph_row = RowRef{2, n};
    ++n;
    // demand met exactly (paired inequalities)
    for (int i = 0; i < I; ++i) blk.Arec[2](n, i) = 1.0;
    blk.b[kd](n) = 1.0;
    blk.row_names.push_back("demand_le");
    ++n;
    for (int i = 0; i < I; ++i) blk.Arec[2](n, i) = -1.0;
    blk.b[kd](n) = -1.0;
    blk.row_names.push_back("demand_ge");
    ++n;
    for (int i = 0; i < I; ++i) {
        blk.Drec[2](n, i) = 1.0;
        blk.D[kconst](n, i) = -1.0;
        blk.row_names.push_back("use_built_" + std::to_string(i + 1));
        ++n;
        blk.Arec[2](n, i) = -1.0;
        blk.Drec[2](n, i) = d.units[i].c_min;
        blk.row_names.push_back("run_min_" + std::to_string(i + 1));
        ++n;
        blk.Arec[2](n, i) = 1.0;
        blk.Drec[2](n, i) = -d.units[i].c_max;
        blk.row_names.push_back("run_max_" + std::to_string(i + 1));
        ++n;
        blk.Arec[2](n, i) = 1.0;
        blk.b[kchat(i)](n) = -1.0;
        blk.b[kconst](n) = d.units[i].c_max;
        blk.row_names.push_back("capacity_" + std::to_string(i + 1));
        ++n;
        blk.Arec[2](n, i) = -1.0;
        blk.row_names.push_back("nonneg_" + std::to_string(i + 1));
        ++n;
    }

    // uncertainty set
    p.ddu.resize(s);
    p.ddu.lo[1] = {1.0};
    p.ddu.hi[1] = {1.0};
    p.ddu.lo[2].assign(I + 1, 0.0);
    p.ddu.hi[2].assign(I + 1, 0.0);
    double chat_total = 0.0;
    for (int i = 0; i < I; ++i) chat_total += d.units[i].c_hat_max;
    for (int i = 0; i < I; ++i) {
        double hi = d.units[i].c_hat_max;
        if (budget) hi = std::min(hi, d.tau * chat_total);
        p.ddu.hi[2][i] = hi;
    }
    p.ddu.lo[2][I] = d.d_min;
    p.ddu.hi[2][I] = d.d_max;

    const int M = 2 * I + 2 + (budget ? 1 : 0);
    auto& st = p.ddu.stage[2];
    st.W = Eigen::MatrixXd::Zero(M, K);
    st.U.assign(2, Eigen::MatrixXd::Zero(M, I));
    int m = 0;
    for (int i = 0; i < I; ++i) {  // deviation upper bounds
        st.W(m, kchat(i)) = 1.0;
        if (d.variant == DesignVariant::FixedBudget)
            st.W(m, kconst) = -d.units[i].c_hat_max;
        else
            st.U[1](m, i) = d.units[i].c_hat_max;
        st.row_names.push_back("chat_ub_" + std::to_string(i + 1));
        ++m;
    }
    for (int i = 0; i < I; ++i) {
        st.W(m, kchat(i)) = -1.0;
        st.row_names.push_back("chat_nonneg_" + std::to_string(i + 1));
        ++m;
    }
    if (budget) {
        for (int i = 0; i < I; ++i) {
            st.W(m, kchat(i)) = 1.0;
            if (d.variant == DesignVariant::FixedBudget)
                st.W(m, kconst) -= d.tau * d.units[i].c_hat_max;
            else
                st.U[1](m, i) = d.tau * d.units[i].c_hat_max;
        }
        st.row_names.push_back("chat_budget");
        ++m;
    }
    st.W(m, kd) = 1.0;
    st.W(m, kconst) = -d.d_max;
    st.row_names.push_back("d_ub");
    ++m;
    st.W(m, kd) = -1.0;
    st.W(m, kconst) = d.d_min;
    st.row_names.push_back("d_lb");
    ++m;

    p.bp = Breakpoints::none(s);
    p.xname = {{}, {"cost"}, {}};
    p.yname = {{}, {}, {}};
    p.xname[2].clear();
    for (int i = 0; i < I; ++i) {
        p.yname[1].push_back("z_" + std::to_string(i + 1));
        p.xname[2].push_back("xt_" + std::to_string(i + 1));
        p.yname[2].push_back("yt_" + std::to_string(i + 1));
    }
    return p;
}

std::vector<std::string> PlanningData::violations() const {
    std::vector<std::string> out;
    if (units.empty()) out.push_back("planning data has no units");
    if (T < 1) out.push_back("horizon must be at least 1");
    if (static_cast<int>(periods.size()) < T)
        out.push_back("period table shorter than the horizon");
    if (gamma_scale.size() != units.size()) out.push_back("gamma_scale length mismatch");
    for (int t = 0; t < std::min<int>(T, static_cast<int>(periods.size())); ++t) {
        const auto& per = periods[t];
        if (per.c_hat_max1.size() != units.size() || per.c_hat_max2.size() != units.size()) {
            out.push_back("period " + std::to_string(t + 1) + ": deviation table length mismatch");
            continue;
        }
        for (size_t i = 0; i < units.size(); ++i)
            if (!(per.c_hat_max1[i] < per.c_hat_max2[i]))
                out.push_back("period " + std::to_string(t + 1) + " unit " + std::to_string(i + 1) +
                              ": upgraded deviation bound must be smaller");
        if (per.d_min > per.d_max)
            out.push_back("period " + std::to_string(t + 1) + ": demand bounds out of order");
    }
    return out;
}

PlanningData load_planning_data(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open planning data " + path);
    json doc;
    is >> doc;
    PlanningData d;
    for (const auto& ju : doc.at("units")) {
        PlanningUnit u;
        u.alpha = ju.at("alpha").get<double>();
        u.beta = ju.at("beta").get<double>();
        u.c_min = ju.at("c_min").get<double>();
        u.c_max = ju.at("c_max").get<double>();
        d.units.push_back(u);
    }
    d.gamma_scale = doc.at("gamma_scale").get<std::vector<double>>();
    d.s_max = doc.at("s_max").get<double>();
    for (const auto& jp : doc.at("periods")) {
        PlanningPeriod per;
        per.eta = jp.at("eta").get<double>();
        per.theta = jp.at("theta").get<double>();
        per.d_min = jp.at("d_min").get<double>();
        per.d_max = jp.at("d_max").get<double>();
        per.tau = jp.at("tau").get<double>();
        per.c_hat_max1 = jp.at("c_hat_max1").get<std::vector<double>>();
        per.c_hat_max2 = jp.at("c_hat_max2").get<std::vector<double>>();
        d.periods.push_back(std::move(per));
    }
    return d;
}

MultistageProblem build_planning_problem(const PlanningData& d) {
    if (auto errs = d.violations(); !errs.empty())
        throw std::invalid_argument("planning data invalid: " + errs.front());
    const int I = static_cast<int>(d.units.size());
    const int T = d.T;
    const int S = 2 * T + 1;

    MultistageProblem p;
    p.name = "planning_T" + std::to_string(T);
    StageStructure s;
    s.T = S;
    s.K.assign(S + 1, 0);
    s.P.assign(S + 1, 0);
    s.Q.assign(S + 1, 0);
    s.N.assign(S + 1, 0);
    s.K[1] = 1;
    s.P[1] = 1;
    s.Q[1] = I;
    for (int t = 1; t <= T; ++t) {
        s.K[2 * t] = 1;        // demand
        s.Q[2 * t] = 2 * I;    // operate + linearization binaries
        s.K[2 * t + 1] = I;    // capacity deviations
        s.P[2 * t + 1] = I + 2;  // production, purchase, inventory
        s.N[2 * t] = 3 * I;
        s.N[2 * t + 1] = 4 * I + 5 + (t == T ? 1 : 0);
    }
    p.s = s;

    p.A1 = Eigen::MatrixXd::Zero(0, 1);
    p.D1 = Eigen::MatrixXd::Zero(0, I);
    p.b1 = Eigen::VectorXd::Zero(0);

    // variable layout helpers (0-based within their stage)
    auto x_prod = [&](int i) { return i; };
    const int x_purch = I;
    const int x_inv = I + 1;
    auto y_oper = [&](int i) { return i; };
    auto y_lin = [&](int i) { return I + i; };

    p.block.assign(static_cast<size_t>(S) + 1, {});
    p.ddu.resize(s);
    p.ddu.lo[1] = {1.0};
    p.ddu.hi[1] = {1.0};
    for (int t = 1; t <= T; ++t) {
        const auto& per = d.periods[t - 1];
        p.ddu.lo[2 * t] = {per.d_min};
        p.ddu.hi[2 * t] = {per.d_max};
        p.ddu.lo[2 * t + 1].assign(I, 0.0);
        p.ddu.hi[2 * t + 1].assign(I, 0.0);
        double worst_total = 0.0;
        for (int i = 0; i < I; ++i) worst_total += per.c_hat_max2[i];
        for (int i = 0; i < I; ++i)
            p.ddu.hi[2 * t + 1][i] = std::min(per.c_hat_max2[i], per.tau * worst_total);
    }

    auto zero_block = [&](int t) {
        auto& blk = p.block[t];
        const int K_t = s.params_up_to(t);
        blk.A.assign(K_t, Eigen::MatrixXd::Zero(s.N[t], s.P[1]));
        blk.D.assign(K_t, Eigen::MatrixXd::Zero(s.N[t], s.Q[1]));
        blk.b.assign(K_t, Eigen::VectorXd::Zero(s.N[t]));
        blk.Arec.assign(static_cast<size_t>(t) + 1, {});
        blk.Drec.assign(static_cast<size_t>(t) + 1, {});
        for (int tpp = 2; tpp <= t; ++tpp) {
            blk.Arec[tpp] = Eigen::MatrixXd::Zero(s.N[t], s.P[tpp]);
            blk.Drec[tpp] = Eigen::MatrixXd::Zero(s.N[t], s.Q[tpp]);
        }
    };

    const int kconst = 0;
    auto kdem = [&](int t) { return s.flat(2 * t, 1); };
    auto kdev = [&](int t, int i) { return s.flat(2 * t + 1, i + 1); };

    for (int t = 1; t <= T; ++t) {
        // operating stage: linearization rows u = z * y
        const int ts = 2 * t;
        zero_block(ts);
        auto& blk = p.block[ts];
        int n = 0;
        for (int i = 0; i < I; ++i) {
            blk.Drec[ts](n, y_lin(i)) = 1.0;
            blk.D[kconst](n, i) = -1.0;
            blk.row_names.push_back("lin_u_le_z_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
            blk.Drec[ts](n, y_lin(i)) = 1.0;
            blk.Drec[ts](n, y_oper(i)) = -1.0;
            blk.row_names.push_back("lin_u_le_y_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
            blk.D[kconst](n, i) = 1.0;
            blk.Drec[ts](n, y_oper(i)) = 1.0;
            blk.Drec[ts](n, y_lin(i)) = -1.0;
            blk.b[kconst](n) = 1.0;
            blk.row_names.push_back("lin_u_ge_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
        }

        // production stage
        const int tp = 2 * t + 1;
        zero_block(tp);
        auto& pb = p.block[tp];
        n = 0;
        pb.Arec[tp](n, x_inv) = 1.0;
        if (t >= 2) pb.Arec[tp - 2](n, x_inv) = -1.0;
        for (int i = 0; i < I; ++i) pb.Arec[tp](n, x_prod(i)) = -1.0;
        pb.Arec[tp](n, x_purch) = -1.0;
        pb.b[kdem(t)](n) = -1.0;
        pb.row_names.push_back("inventory_le_" + std::to_string(t));
        ++n;
        pb.Arec[tp](n, x_inv) = -1.0;
        if (t >= 2) pb.Arec[tp - 2](n, x_inv) = 1.0;
        for (int i = 0; i < I; ++i) pb.Arec[tp](n, x_prod(i)) = 1.0;
        pb.Arec[tp](n, x_purch) = 1.0;
        pb.b[kdem(t)](n) = 1.0;
        pb.row_names.push_back("inventory_ge_" + std::to_string(t));
        ++n;
        for (int i = 0; i < I; ++i) {
            pb.Arec[tp](n, x_prod(i)) = 1.0;
            pb.b[kdev(t, i)](n) = -1.0;
            pb.b[kconst](n) = d.units[i].c_max;
            pb.row_names.push_back("capacity_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
            pb.Arec[tp](n, x_prod(i)) = 1.0;
            pb.Drec[ts](n, y_oper(i)) = -d.units[i].c_max;
            pb.row_names.push_back("run_max_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
            pb.Arec[tp](n, x_prod(i)) = -1.0;
            pb.Drec[ts](n, y_oper(i)) = d.units[i].c_min;
            pb.row_names.push_back("run_min_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
            pb.Arec[tp](n, x_prod(i)) = -1.0;
            pb.row_names.push_back("x_nonneg_" + std::to_string(t) + "_" + std::to_string(i + 1));
            ++n;
        }
        pb.Arec[tp](n, x_purch) = -1.0;
        pb.row_names.push_back("p_nonneg_" + std::to_string(t));
        ++n;
        pb.Arec[tp](n, x_inv) = -1.0;
        pb.row_names.push_back("s_nonneg_" + std::to_string(t));
        ++n;
        pb.Arec[tp](n, x_inv) = 1.0;
        pb.b[kconst](n) = d.s_max;
        pb.row_names.push_back("s_cap_" + std::to_string(t));
        ++n;
        if (t == T) {
            pb.A[kconst](n, 0) = -1.0;
            for (int i = 0; i < I; ++i) pb.D[kconst](n, i) = d.gamma_bar * d.gamma_scale[i];
            for (int tq = 1; tq <= T; ++tq) {
                const auto& pq = d.periods[tq - 1];
                for (int i = 0; i < I; ++i) {
                    pb.Arec[2 * tq + 1](n, x_prod(i)) = d.units[i].alpha;
                    pb.Drec[2 * tq](n, y_oper(i)) = d.units[i].beta;
                }
                pb.Arec[2 * tq + 1](n, x_purch) = pq.theta;
                pb.Arec[2 * tq + 1](n, x_inv) = pq.eta;
            }
            pb.row_names.push_back("epigraph");
            p.epigraph_row = RowRef{tp, n};
            ++n;
        }
    }

    // cumulative uncertainty systems
    for (int stage = 2; stage <= S; ++stage) {
        auto& st = p.ddu.stage[stage];
        int M = 0;
        for (int t = 1; t <= T; ++t) {
            if (2 * t <= stage) M += 2;
            if (2 * t + 1 <= stage) M += 2 * I + 1;
        }
        st.W = Eigen::MatrixXd::Zero(M, s.params_up_to(stage));
        st.U.assign(static_cast<size_t>(stage), {});
        for (int that = 1; that < stage; ++that)
            st.U[that] = Eigen::MatrixXd::Zero(M, s.Q[that]);
        int m = 0;
        for (int t = 1; t <= T; ++t) {
            const auto& per = d.periods[t - 1];
            if (2 * t <= stage) {
                st.W(m, kdem(t)) = 1.0;
                st.W(m, kconst) = -per.d_max;
                st.row_names.push_back("d_ub_" + std::to_string(t));
                ++m;
                st.W(m, kdem(t)) = -1.0;
                st.W(m, kconst) = per.d_min;
                st.row_names.push_back("d_lb_" + std::to_string(t));
                ++m;
            }
            if (2 * t + 1 <= stage) {
                for (int i = 0; i < I; ++i) {
                    st.W(m, kdev(t, i)) = 1.0;
                    st.U[2 * t](m, y_oper(i)) = per.c_hat_max2[i];
                    st.U[2 * t](m, y_lin(i)) = per.c_hat_max1[i] - per.c_hat_max2[i];
                    st.row_names.push_back("chat_ub_" + std::to_string(t) + "_" +
                                           std::to_string(i + 1));
                    ++m;
                }
                for (int i = 0; i < I; ++i) {
                    st.W(m, kdev(t, i)) = -1.0;
                    st.row_names.push_back("chat_nonneg_" + std::to_string(t) + "_" +
                                           std::to_string(i + 1));
                    ++m;
                }
                for (int i = 0; i < I; ++i) {  // budget over the period's deviations
                    st.W(m, kdev(t, i)) = 1.0;
                    st.U[2 * t](m, y_oper(i)) = per.tau * per.c_hat_max2[i];
                    st.U[2 * t](m, y_lin(i)) = per.tau * (per.c_hat_max1[i] - per.c_hat_max2[i]);
                }
                st.row_names.push_back("chat_budget_" + std::to_string(t));
                ++m;
            }
        }
    }

    p.bp = Breakpoints::none(s);
    p.xname.assign(static_cast<size_t>(S) + 1, {});
    p.yname.assign(static_cast<size_t>(S) + 1, {});
    p.xname[1] = {"cost"};
    for (int i = 0; i < I; ++i) p.yname[1].push_back("z_" + std::to_string(i + 1));
    for (int t = 1; t <= T; ++t) {
        for (int i = 0; i < I; ++i)
            p.yname[2 * t].push_back("y_" + std::to_string(t) + "_" + std::to_string(i + 1));
        for (int i = 0; i < I; ++i)
            p.yname[2 * t].push_back("u_" + std::to_string(t) + "_" + std::to_string(i + 1));
        for (int i = 0; i < I; ++i)
            p.xname[2 * t + 1].push_back("x_" + std::to_string(t) + "_" + std::to_string(i + 1));
        p.xname[2 * t + 1].push_back("p_" + std::to_string(t));
        p.xname[2 * t + 1].push_back("s_" + std::to_string(t));
    }
    return p;
}

InfoWindow planning_current_period_window(const StageStructure& s) {
    std::vector<int> delta(static_cast<size_t>(s.T) + 1, 0);
    for (int t = 2; t <= s.T; ++t) delta[t] = t % 2 == 0 ? 0 : 1;
    return InfoWindow::per_stage(s, delta);
}

Breakpoints equidistant_breakpoints(const MultistageProblem& p, int n) {
    if (n < 0) throw std::invalid_argument("breakpoint count must be nonnegative");
    Breakpoints bp = Breakpoints::none(p.s);
    for (int t = 1; t <= p.s.T; ++t)
        for (int i = 1; i <= p.s.K[t]; ++i) {
            if (t == 1) continue;
            const double lo = p.ddu.support_lo(t, i), hi = p.ddu.support_hi(t, i);
            if (!(hi > lo)) continue;
            for (int k = 1; k <= n; ++k)
                bp.at(t, i).push_back(lo + (hi - lo) * k / (n + 1));
        }
    return bp;
}

Breakpoints tailored_breakpoints(const DesignData& d,
                                 const std::vector<std::vector<double>>& chat_bp,
                                 const MultistageProblem& p) {
    const int I = static_cast<int>(d.units.size());
    Breakpoints bp = Breakpoints::none(p.s);
    for (int i = 0; i < I; ++i)
        if (i < static_cast<int>(chat_bp.size())) bp.at(2, i + 1) = chat_bp[i];

    std::vector<double> cand;
    for (int i = 0; i < I; ++i) {
        cand.push_back(d.units[i].c_min);
        // knots of the deviation grid, including its support endpoints
        std::vector<double> knots{p.ddu.support_lo(2, i + 1)};
        if (i < static_cast<int>(chat_bp.size()))
            knots.insert(knots.end(), chat_bp[i].begin(), chat_bp[i].end());
        knots.push_back(p.ddu.support_hi(2, i + 1));
        for (double k : knots) cand.push_back(d.units[i].c_max - k);
    }
    std::sort(cand.begin(), cand.end());
    std::vector<double>& out = bp.at(2, I + 1);
    for (double c : cand) {
        if (c <= d.d_min + 1e-9 || c >= d.d_max - 1e-9) continue;
        if (!out.empty() && std::abs(out.back() - c) <= 1e-9) continue;
        out.push_back(c);
    }
    return bp;
}

}  // namespace ddro

#include "ddro/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ddro/studies.hpp"

namespace ddro {

double InnerMaxReport::max_slack() const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
        if (r.known) v = std::max(v, r.slack);
    return v;
}

bool InnerMaxReport::certified(double tol) const {
    for (const auto& r : rows)
        if (!r.known || r.slack > tol) return false;
    return true;
}

namespace {

/// LP over the stage-t lifted hull with the policy's y-expressions bound
/// into the coupling rows. Objective columns are set by the caller.
struct HullLp {
    HullSystem h;
    MilpModel lp;

    HullLp(const MultistageProblem& p, const PolicyCoefficients& c, int t) {
        Breakpoints bp = Breakpoints::none(p.s);
        for (int tt = 1; tt <= p.s.T; ++tt)
            for (int i = 1; i <= p.s.K[tt]; ++i)
                bp.at(tt, i) = c.grid(tt, i).points;
        h = build_hull_system(p.ddu, bp, p.s, t);
        const double inf = std::numeric_limits<double>::infinity();
        for (int col = 0; col < h.cols(); ++col) {
            const bool is_lambda = col >= h.n_xi + h.n_xibar + h.n_xihat;
            lp.add_continuous("c" + std::to_string(col), is_lambda ? 0.0 : -inf, inf);
        }
        for (const auto& row : h.rows) {
            MilpRow r;
            r.name = row.name;
            r.sense = row.sense;
            r.rhs = row.rhs;
            r.coefs = row.lhs;
            for (const auto& yt : row.y) {
                if (yt.stage == 1) {
                    r.rhs += yt.coef * c.y1(yt.q);
                    continue;
                }
                // recourse y: substitute its rule, moving terms to the lhs
                for (int tp = 1; tp <= yt.stage; ++tp) {
                    if (!c.window.admits(yt.stage, tp)) continue;
                    for (int i = 1; i <= p.s.K[tp]; ++i) {
                        const auto& blk = c.blocks[yt.stage][p.s.flat(tp, i)];
                        if (blk.empty() || blk.Ydot.size() == 0) continue;
                        const Eigen::MatrixXd yh = blk.yhat();
                        for (int j = 0; j < yh.cols(); ++j) {
                            const double coef = -yt.coef * yh(yt.q, j);
                            if (coef != 0.0)
                                r.coefs.emplace_back(h.xihat_col(p.s.flat(tp, i), j), coef);
                        }
                    }
                }
            }
            lp.add_row(std::move(r));
        }
    }

    void set_objective(const std::vector<std::pair<int, double>>& maximize_terms) {
        for (auto& v : lp.mutable_vars()) v.obj = 0.0;
        for (const auto& [col, coef] : maximize_terms) lp.mutable_vars()[col].obj -= coef;
    }
};

}  // namespace

InnerMaxReport inner_max_check(const MultistageProblem& p, const PolicyCoefficients& c,
                               const SolverConfig& cfg) {
    InnerMaxReport report;
    SolverConfig lp_cfg = cfg;
    lp_cfg.gap = 1e-9;
    for (int t = 2; t <= p.s.T; ++t) {
        HullLp hull(p, c, t);
        const auto& blk = p.block[t];
        const int Kt = p.s.params_up_to(t);
        bool set_empty = false;
        for (int n = 0; n < p.s.N[t]; ++n) {
            std::vector<std::pair<int, double>> obj;
            for (int f = 0; f < Kt; ++f) {
                const double fhat =
                    blk.A[f].row(n).dot(c.x1) + blk.D[f].row(n).dot(c.y1) - blk.b[f](n);
                if (fhat != 0.0) obj.emplace_back(hull.h.xi_col(f), fhat);
            }
            for (int tpp = 2; tpp <= t; ++tpp) {
                for (int f = 0; f < p.s.params_up_to(tpp); ++f) {
                    const auto key = p.s.key_of_flat(f);
                    if (!c.window.admits(tpp, key.t)) continue;
                    const auto& pol = c.blocks[tpp][f];
                    if (pol.empty()) continue;
                    for (int j = 0; j < pol.Xbar.cols(); ++j) {
                        double coef = 0.0;
                        for (int pp = 0; pp < p.s.P[tpp]; ++pp)
                            coef += blk.Arec[tpp](n, pp) * pol.Xbar(pp, j);
                        if (coef != 0.0) obj.emplace_back(hull.h.xibar_col(f, j), coef);
                    }
                    const Eigen::MatrixXd yh =
                        pol.Ydot.size() > 0 ? pol.yhat() : Eigen::MatrixXd();
                    for (int j = 0; j < pol.Xhat.cols(); ++j) {
                        double coef = 0.0;
                        for (int pp = 0; pp < p.s.P[tpp]; ++pp)
                            coef += blk.Arec[tpp](n, pp) * pol.Xhat(pp, j);
                        if (yh.size() > 0)
                            for (int q = 0; q < p.s.Q[tpp]; ++q)
                                coef += blk.Drec[tpp](n, q) * yh(q, j);
                        if (coef != 0.0) obj.emplace_back(hull.h.xihat_col(f, j), coef);
                    }
                }
            }
            hull.set_objective(obj);
            const SolveReport rep = solve(hull.lp, lp_cfg);
            RowSlack rs;
            rs.t = t;
            rs.n = n;
            rs.name = static_cast<size_t>(n) < blk.row_names.size()
                          ? blk.row_names[n]
                          : ("t" + std::to_string(t) + "_n" + std::to_string(n + 1));
            if (rep.status == SolveStatus::OptimalWithinGap) {
                rs.slack = -rep.objective;
                rs.argmax.assign(static_cast<size_t>(t) + 1, {});
                for (int tp = 1; tp <= t; ++tp) {
                    rs.argmax[tp].resize(p.s.K[tp]);
                    for (int i = 1; i <= p.s.K[tp]; ++i)
                        rs.argmax[tp](i - 1) = rep.solution[hull.h.xi_col(p.s.flat(tp, i))];
                }
            } else if (rep.status == SolveStatus::Infeasible) {
                rs.slack = -std::numeric_limits<double>::infinity();
                set_empty = true;
            } else if (rep.status == SolveStatus::Unbounded) {
                rs.slack = std::numeric_limits<double>::infinity();
            } else {
                rs.known = false;
            }
            report.rows.push_back(std::move(rs));
        }
        if (set_empty)
            report.warnings.push_back(
                "stage " + std::to_string(t) +
                ": uncertainty set is empty under the policy's decisions; rows hold vacuously");
    }
    return report;
}

SimulationResult simulate_policy(const MultistageProblem& p, const PolicyCoefficients& c,
                                 const Trajectory& xi) {
    if (static_cast<int>(xi.size()) != p.s.T + 1)
        throw std::invalid_argument("trajectory must cover stages 1..T");
    if (xi[1].size() != 1 || std::abs(xi[1](0) - 1.0) > 1e-12)
        throw std::invalid_argument("stage-1 observation must be the constant 1");
    for (int t = 1; t <= p.s.T; ++t)
        for (int i = 1; i <= p.s.K[t]; ++i)
            if (!c.grid(t, i).contains(xi[t](i - 1)))
                throw std::domain_error("trajectory component " + ParamKey{t, i}.str() +
                                        " outside its support");

    SimulationResult res;
    res.decisions.assign(static_cast<size_t>(p.s.T) + 1, {});
    for (int t = 2; t <= p.s.T; ++t) res.decisions[t] = evaluate_policy(c, xi, t);

    const double tol = 1e-6;
    for (int t = 2; t <= p.s.T; ++t) {
        const auto& blk = p.block[t];
        for (int n = 0; n < p.s.N[t]; ++n) {
            double lhs = 0.0;
            for (int f = 0; f < p.s.params_up_to(t); ++f) {
                const auto key = p.s.key_of_flat(f);
                const double fhat =
                    blk.A[f].row(n).dot(c.x1) + blk.D[f].row(n).dot(c.y1) - blk.b[f](n);
                lhs += fhat * xi[key.t](key.i - 1);
            }
            for (int tpp = 2; tpp <= t; ++tpp) {
                lhs += blk.Arec[tpp].row(n).dot(res.decisions[tpp].x);
                lhs += blk.Drec[tpp].row(n).dot(res.decisions[tpp].y);
            }
            const bool is_epi = p.epigraph_row && p.epigraph_row->t == t && p.epigraph_row->n == n;
            if (is_epi) res.cost = c.x1(0) + lhs;
            if (lhs > tol) {
                res.feasible = false;
                res.violations.push_back(
                    (static_cast<size_t>(n) < blk.row_names.size()
                         ? blk.row_names[n]
                         : "t" + std::to_string(t) + "_n" + std::to_string(n + 1)) +
                    ": violation " + std::to_string(lhs));
            }
        }
        for (int q = 0; q < p.s.Q[t]; ++q) {
            const double v = res.decisions[t].y(q);
            if (std::abs(v - std::round(v)) > tol) {
                res.feasible = false;
                res.violations.push_back("stage " + std::to_string(t) + " binary " +
                                         std::to_string(q + 1) + " fractional: " +
                                         std::to_string(v));
            }
        }
    }
    if (!p.epigraph_row) res.cost = c.x1.size() > 0 ? c.x1(0) : 0.0;
    return res;
}

bool trajectory_in_sets(const MultistageProblem& p, const PolicyCoefficients& c,
                        const Trajectory& xi, double tol) {
    for (int t = 2; t <= p.s.T; ++t) {
        const auto& st = p.ddu.stage[t];
        if (st.rows() == 0) continue;
        Eigen::VectorXd flat(p.s.params_up_to(t));
        for (int f = 0; f < flat.size(); ++f) {
            const auto key = p.s.key_of_flat(f);
            flat(f) = xi[key.t](key.i - 1);
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(st.rows());
        for (int that = 1; that < t; ++that) {
            if (that >= static_cast<int>(st.U.size()) || st.U[that].size() == 0) continue;
            const Eigen::VectorXd yv =
                that == 1 ? c.y1 : evaluate_policy(c, xi, that).y;
            rhs += st.U[that] * yv;
        }
        const Eigen::VectorXd lhs = st.W * flat;
        for (int m = 0; m < st.rows(); ++m)
            if (lhs(m) > rhs(m) + tol) return false;
    }
    return true;
}

std::vector<Trajectory> verification_grid(const MultistageProblem& p,
                                          const PolicyCoefficients& c,
                                          const InnerMaxReport& certificate, int random_samples,
                                          unsigned seed) {
    std::vector<Trajectory> out;
    Trajectory base(static_cast<size_t>(p.s.T) + 1);
    for (int t = 1; t <= p.s.T; ++t) {
        base[t].resize(p.s.K[t]);
        for (int i = 1; i <= p.s.K[t]; ++i) base[t](i - 1) = p.ddu.support_lo(t, i);
    }
    auto push_member = [&](const Trajectory& xi) {
        if (trajectory_in_sets(p, c, xi)) out.push_back(xi);
    };
    push_member(base);
    Trajectory hi_all = base;
    for (int t = 2; t <= p.s.T; ++t)
        for (int i = 1; i <= p.s.K[t]; ++i) hi_all[t](i - 1) = p.ddu.support_hi(t, i);
    push_member(hi_all);

    for (int t = 2; t <= p.s.T; ++t)
        for (int i = 1; i <= p.s.K[t]; ++i) {
            const auto grid = c.grid(t, i);
            std::vector<double> values{grid.lo, grid.hi};
            for (double pt : grid.points) values.push_back(pt);
            for (double v : values) {
                Trajectory xi = base;
                xi[t](i - 1) = v;
                push_member(xi);
            }
        }

    for (const auto& row : certificate.rows) {
        if (!row.known || row.argmax.empty()) continue;
        Trajectory xi = base;
        bool in_support = true;
        for (int t = 2; t <= p.s.T && t < static_cast<int>(row.argmax.size()); ++t)
            for (int i = 1; i <= p.s.K[t]; ++i) {
                double v = row.argmax[t](i - 1);
                const auto grid = c.grid(t, i);
                v = std::clamp(v, grid.lo, grid.hi);
                xi[t](i - 1) = v;
                in_support = in_support && grid.contains(v);
            }
        if (in_support) push_member(xi);
    }

    std::mt19937_64 rng(seed);
    for (int k = 0; k < random_samples; ++k) {
        Trajectory xi = base;
        for (int t = 2; t <= p.s.T; ++t)
            for (int i = 1; i <= p.s.K[t]; ++i) {
                std::uniform_real_distribution<double> u(p.ddu.support_lo(t, i),
                                                         p.ddu.support_hi(t, i));
                xi[t](i - 1) = u(rng);
            }
        push_member(xi);
    }
    return out;
}

double case_b_worst_c2(double tau, const DesignData& d, CaseBVariant variant) {
    if (d.units.size() < 3) throw std::invalid_argument("closed form needs the 3-unit data");
    const double c2 = d.units[1].c_hat_max;
    double pool = 0.0;
    if (variant == CaseBVariant::FixedBudget)
        pool = d.units[0].c_hat_max + d.units[1].c_hat_max + d.units[2].c_hat_max;
    else
        pool = d.units[1].c_hat_max + d.units[2].c_hat_max;  // only built units count
    return std::min(c2, tau * pool);
}

double case_b_closed_form(double tau, const DesignData& d, CaseBVariant variant) {
    const double chat2 = case_b_worst_c2(tau, d, variant);
    const double d_max = d.units[0].c_max - d.units[0].c_hat_max;
    const auto& u2 = d.units[1];
    const auto& u3 = d.units[2];
    // worst case: demand at its maximum, unit 2 derated by chat2
    const double x2 = u2.c_max - chat2;
    const double x3 = d_max - x2;
    return u2.alpha + u3.alpha + u2.beta + u3.beta + u2.gamma * x2 + u3.gamma * x3;
}

}  // namespace ddro

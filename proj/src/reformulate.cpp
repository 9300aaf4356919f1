#include "ddro/reformulate.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ddro {

namespace {

/// Accumulates row terms with duplicate-index merging; emission order is
/// by variable index, which keeps repeated builds byte-identical.
struct RowAccum {
    std::map<int, double> terms;
    void add(int idx, double c) {
        if (c != 0.0) terms[idx] += c;
    }
    std::vector<std::pair<int, double>> take() const {
        std::vector<std::pair<int, double>> out;
        out.reserve(terms.size());
        for (const auto& [idx, c] : terms)
            if (std::abs(c) > 1e-15) out.emplace_back(idx, c);
        return out;
    }
};

std::string pk(const ParamKey& k) { return std::to_string(k.t) + "_" + std::to_string(k.i); }

struct Builder {
    const MultistageProblem& p;
    const Breakpoints& bp;
    ReformOptions opt;
    Reformulation out;

    std::vector<ParamKey> keys;                       // all params, flat order
    std::vector<ParamGrid> grid_flat;                 // per flat param
    std::vector<std::vector<LiftedVertex>> verts;     // unique vertices per flat param
    std::map<std::pair<int, int>, int> product_cache; // (w, z) -> aux index

    Builder(const MultistageProblem& p_, const Breakpoints& bp_, const ReformOptions& opt_)
        : p(p_), bp(bp_), opt(opt_) {
        if (auto errs = validate_problem(p); !errs.empty())
            throw std::invalid_argument("instance invalid: " + errs.front());
        out.art.window = opt.window ? *opt.window : InfoWindow::full(p.s);
        out.art.recourse = opt.recourse;
        keys = p.s.params_through(p.s.T);
        grid_flat.reserve(keys.size());
        out.art.grids.assign(static_cast<size_t>(p.s.T) + 1, {});
        for (int t = 1; t <= p.s.T; ++t) out.art.grids[t].resize(p.s.K[t]);
        for (const auto& k : keys) {
            ParamGrid g = make_grid(p.ddu, bp, k.t, k.i);
            g.validate();
            out.art.grids[k.t][static_cast<size_t>(k.i) - 1] = g;
            verts.push_back(build_vertex_set_unique(g));
            grid_flat.push_back(std::move(g));
        }
    }

    MilpModel& m() { return out.model; }
    ReformulationArtifacts& art() { return out.art; }
    const InfoWindow& window() const { return out.art.window; }

    bool block_exists(int tpp, const ParamKey& k) const {
        if (p.zero_forced(k.t, k.i) && k.t != 1) return false;
        if (!window().admits(tpp, k.t)) return false;
        if (opt.recourse == RecourseMode::ContinuousOnly) return true;  // X blocks still full
        return true;
    }
    bool ybinary_exists(int tpp, const ParamKey& k) const {
        if (!block_exists(tpp, k)) return false;
        if (opt.recourse == RecourseMode::ContinuousOnly) return k.t == 1;
        return true;
    }

    void count_row(const std::string& fam) { ++art().family_rows[fam]; }
    void count_var(const std::string& fam) { ++art().family_vars[fam]; }

    std::map<int, double> pending_bound;  // nonneg duals not yet used in a product

    int dual_var(const std::string& fam, const std::string& name) {
        // Bounds are only imposed once the dual enters a linearized
        // product; duals outside all products stay unbounded, matching the
        // dual cones of the source reformulation.
        const int idx = m().add_continuous(name, 0.0, std::numeric_limits<double>::infinity());
        pending_bound[idx] = opt.big_m.bound_for(fam, name);
        count_var(fam);
        return idx;
    }
    int free_var(const std::string& fam, const std::string& name) {
        const double inf = std::numeric_limits<double>::infinity();
        count_var(fam);
        return m().add_continuous(name, -inf, inf);
    }

    int product(int w, int z) {
        const auto key = std::make_pair(w, z);
        if (auto it = product_cache.find(key); it != product_cache.end()) return it->second;
        const std::string& wname = m().vars()[w].name;
        const std::string& zname = m().vars()[z].name;
        auto pending = pending_bound.find(w);
        if (pending == pending_bound.end() && !art().glover.dual_bound.count(wname))
            throw std::logic_error("dual " + wname + " lacks a configured bound");
        if (pending != pending_bound.end()) {
            m().mutable_vars()[w].ub = pending->second;
            art().glover.dual_bound[wname] = pending->second;
        }
        const int aux = glover_linearize(m(), art().glover, w, z, art().glover.dual_bound[wname],
                                         "pr__" + wname + "__" + zname);
        product_cache[key] = aux;
        count_var("product");
        return aux;
    }

    void make_first_stage() {
        for (int pp = 0; pp < p.s.P[1]; ++pp) {
            const double inf = std::numeric_limits<double>::infinity();
            art().x1_idx.push_back(
                m().add_continuous(p.xvar_name(1, pp), -inf, inf, pp == 0 ? 1.0 : 0.0));
        }
        for (int q = 0; q < p.s.Q[1]; ++q)
            art().y1_idx.push_back(m().add_binary(p.yvar_name(1, q)));
    }

    void make_policy_vars() {
        art().pol.assign(static_cast<size_t>(p.s.T) + 1, {});
        for (int t = 2; t <= p.s.T; ++t) {
            art().pol[t].assign(keys.size(), {});
            for (size_t f = 0; f < keys.size(); ++f) {
                const auto& k = keys[f];
                if (k.t > t || !block_exists(t, k)) continue;
                const auto& grid = grid_flat[f];
                auto& bv = art().pol[t][f];
                bv.present = true;
                const std::string tag = "t" + std::to_string(t) + "_" + pk(k);
                bv.Xbar.assign(p.s.P[t], std::vector<int>(grid.r(), -1));
                bv.Xhat.assign(p.s.P[t], std::vector<int>(grid.g(), -1));
                for (int pp = 0; pp < p.s.P[t]; ++pp)
                    for (int j = 0; j < grid.r(); ++j) {
                        bv.Xbar[pp][j] = free_var(
                            "Xbar", "Xb_" + tag + "_p" + std::to_string(pp + 1) + "_j" +
                                        std::to_string(j + 1));
                    }
                for (int pp = 0; pp < p.s.P[t]; ++pp)
                    for (int j = 0; j < grid.g(); ++j)
                        bv.Xhat[pp][j] = free_var(
                            "Xhat", "Xh_" + tag + "_p" + std::to_string(pp + 1) + "_j" +
                                        std::to_string(j + 1));
                if (!ybinary_exists(t, k)) continue;
                if (opt.recourse == RecourseMode::ContinuousOnly) {
                    // Static binary recourse: the constant column alone, one
                    // binary per component (no split needed).
                    bv.split = false;
                    bv.Ydot.assign(p.s.Q[t], std::vector<int>(1, -1));
                    for (int q = 0; q < p.s.Q[t]; ++q)
                        bv.Ydot[q][0] = m().add_binary("Ys_" + tag + "_q" + std::to_string(q + 1));
                    art().family_vars["Ystatic"] += p.s.Q[t];
                } else {
                    bv.split = true;
                    bv.Ydot.assign(p.s.Q[t], std::vector<int>(grid.g(), -1));
                    bv.Yddot.assign(p.s.Q[t], std::vector<int>(grid.g(), -1));
                    for (int q = 0; q < p.s.Q[t]; ++q)
                        for (int j = 0; j < grid.g(); ++j) {
                            bv.Ydot[q][j] = m().add_binary("Yd_" + tag + "_q" +
                                                           std::to_string(q + 1) + "_j" +
                                                           std::to_string(j + 1));
                            bv.Yddot[q][j] = m().add_binary("Yn_" + tag + "_q" +
                                                            std::to_string(q + 1) + "_j" +
                                                            std::to_string(j + 1));
                            art().family_vars["Ysplit"] += 2;
                        }
                }
            }
        }
    }

    /// Adds +coef * yhat_{t'', k}[q, j-th indicator component weighted by
    /// vhat] terms to a row; when scale_by is a dual index, each binary is
    /// first multiplied by that dual through the linearization.
    void add_yhat_terms(RowAccum& row, int tpp, size_t f, int q, const Eigen::VectorXd& vhat,
                        double coef, int dual = -1) {
        const auto& bv = art().pol[tpp][f];
        if (!bv.present || bv.Ydot.empty()) return;
        if (!bv.split) {
            // static column: indicator of the constant parameter is 1
            const int yvar = bv.Ydot[q][0];
            if (dual < 0)
                row.add(yvar, coef);
            else
                row.add(product(dual, yvar), coef);
            return;
        }
        for (int j = 0; j < static_cast<int>(bv.Ydot[q].size()); ++j) {
            const double wj = vhat(j) * coef;
            if (wj == 0.0) continue;
            if (dual < 0) {
                row.add(bv.Ydot[q][j], wj);
                row.add(bv.Yddot[q][j], -wj);
            } else {
                row.add(product(dual, bv.Ydot[q][j]), wj);
                row.add(product(dual, bv.Yddot[q][j]), -wj);
            }
        }
    }

    void add_first_stage_rows() {
        for (int n = 0; n < p.s.N[1]; ++n) {
            RowAccum row;
            for (int pp = 0; pp < p.s.P[1]; ++pp) row.add(art().x1_idx[pp], p.A1(n, pp));
            for (int q = 0; q < p.s.Q[1]; ++q) row.add(art().y1_idx[q], p.D1(n, q));
            m().add_row("fs_n" + std::to_string(n + 1), row.take(), 'L', p.b1(n));
            count_row("first_stage");
        }
    }

    void add_symmetry_rows() {
        for (int t = 2; t <= p.s.T; ++t)
            for (size_t f = 0; f < keys.size(); ++f) {
                const auto& bv = art().pol[t][f];
                if (!bv.present || !bv.split || bv.Ydot.empty()) continue;
                for (int q = 0; q < p.s.Q[t]; ++q)
                    for (int j = 0; j < static_cast<int>(bv.Ydot[q].size()); ++j) {
                        m().add_row("sym_t" + std::to_string(t) + "_" + pk(keys[f]) + "_q" +
                                        std::to_string(q + 1) + "_j" + std::to_string(j + 1),
                                    {{bv.Ydot[q][j], 1.0}, {bv.Yddot[q][j], 1.0}}, 'L', 1.0);
                        count_row("symmetry");
                    }
            }
    }
};

}  // namespace

int glover_linearize(MilpModel& m, GloverRegistry& reg, int w, int z, double M,
                     const std::string& aux_name) {
    if (!(M >= 0.0) || !std::isfinite(M))
        throw std::invalid_argument("linearization of " + m.vars()[w].name +
                                    " requires a finite nonnegative bound");
    if (m.vars()[z].kind != VarKind::Binary)
        throw std::invalid_argument("linearization requires a binary second factor");
    const int aux = m.add_continuous(aux_name, 0.0, M);
    GloverRegistry::Product prod;
    prod.aux = aux;
    prod.w = w;
    prod.z = z;
    prod.big_m = M;
    prod.row_ub_z = m.num_rows();
    m.add_row("gl1_" + aux_name, {{aux, 1.0}, {z, -M}}, 'L', 0.0);
    m.add_row("gl2_" + aux_name, {{aux, 1.0}, {w, -1.0}}, 'L', 0.0);
    prod.row_lb = m.num_rows();
    m.add_row("gl3_" + aux_name, {{w, 1.0}, {aux, -1.0}, {z, M}}, 'L', M);
    reg.products.push_back(prod);
    return aux;
}

std::pair<int, int> glover_linearize_free(MilpModel& m, GloverRegistry& reg, int w, int z, double M,
                                          const std::string& aux_name) {
    const std::string wname = m.vars()[w].name;
    const int wp = m.add_continuous(wname + "__pos", 0.0, M);
    const int wn = m.add_continuous(wname + "__neg", 0.0, M);
    m.add_row("split_" + aux_name, {{w, 1.0}, {wp, -1.0}, {wn, 1.0}}, 'E', 0.0);
    reg.dual_bound[wname + "__pos"] = M;
    reg.dual_bound[wname + "__neg"] = M;
    const int ap = glover_linearize(m, reg, wp, z, M, aux_name + "__pos");
    const int an = glover_linearize(m, reg, wn, z, M, aux_name + "__neg");
    return {ap, an};
}

Reformulation dualize_two_stage(const MultistageProblem& p, const Breakpoints& bp,
                                const ReformOptions& opt) {
    if (p.s.T != 2) throw std::invalid_argument("two-stage dualization requires T = 2");
    Builder b(p, bp, opt);
    auto& m = b.m();
    auto& art = b.art();
    const auto& s = p.s;
    const int K = s.params_up_to(2);
    const int N = s.N[2];
    const auto& st = p.ddu.stage[2];
    const int M_rows = st.rows();
    const Eigen::MatrixXd& U = st.U.size() > 1 ? st.U[1] : Eigen::MatrixXd();
    const auto& blk = p.block[2];
    const bool mixed = opt.recourse == RecourseMode::Mixed;

    b.make_first_stage();
    b.make_policy_vars();

    // f_n per constraint row and parameter, then the dual families.
    std::vector<std::vector<int>> fvar(K, std::vector<int>(N, -1));
    for (int f = 0; f < K; ++f)
        for (int n = 0; n < N; ++n)
            fvar[f][n] = b.free_var("f", "f_" + pk(b.keys[f]) + "_n" + std::to_string(n + 1));
    std::vector<std::vector<int>> rho(N, std::vector<int>(K, -1));
    std::vector<std::vector<int>> mu(N, std::vector<int>(M_rows, -1));
    for (int n = 0; n < N; ++n) {
        for (int f = 0; f < K; ++f)
            rho[n][f] = b.free_var("rho", "rho_n" + std::to_string(n + 1) + "_" + pk(b.keys[f]));
        for (int mm = 0; mm < M_rows; ++mm)
            mu[n][mm] =
                b.dual_var("mu", "mu_n" + std::to_string(n + 1) + "_m" + std::to_string(mm + 1));
    }
    std::vector<std::vector<int>> om_lo, om_hi, ps_lo, ps_hi;
    if (mixed) {
        om_lo.assign(s.Q[2], std::vector<int>(K, -1));
        om_hi.assign(s.Q[2], std::vector<int>(K, -1));
        ps_lo.assign(s.Q[2], std::vector<int>(M_rows, -1));
        ps_hi.assign(s.Q[2], std::vector<int>(M_rows, -1));
        for (int q = 0; q < s.Q[2]; ++q) {
            for (int f = 0; f < K; ++f) {
                om_lo[q][f] =
                    b.free_var("Omega", "Oml_q" + std::to_string(q + 1) + "_" + pk(b.keys[f]));
                om_hi[q][f] =
                    b.free_var("Omega", "Omh_q" + std::to_string(q + 1) + "_" + pk(b.keys[f]));
            }
            for (int mm = 0; mm < M_rows; ++mm) {
                ps_lo[q][mm] = b.dual_var(
                    "Psi", "Psl_q" + std::to_string(q + 1) + "_m" + std::to_string(mm + 1));
                ps_hi[q][mm] = b.dual_var(
                    "Psi", "Psh_q" + std::to_string(q + 1) + "_m" + std::to_string(mm + 1));
            }
        }
    }

    b.add_first_stage_rows();

    for (int f = 0; f < K; ++f)
        for (int n = 0; n < N; ++n) {
            RowAccum row;
            row.add(fvar[f][n], 1.0);
            for (int pp = 0; pp < s.P[1]; ++pp) row.add(art.x1_idx[pp], -blk.A[f](n, pp));
            for (int q = 0; q < s.Q[1]; ++q) row.add(art.y1_idx[q], -blk.D[f](n, q));
            m.add_row("fdef_" + pk(b.keys[f]) + "_n" + std::to_string(n + 1), row.take(), 'E',
                      -blk.b[f](n));
            b.count_row("fdef");
        }

    // Aggregate dual rows: e' rho_n + mu_n' U y <= 0.
    for (int n = 0; n < N; ++n) {
        RowAccum row;
        for (int f = 0; f < K; ++f) row.add(rho[n][f], 1.0);
        if (U.size() > 0)
            for (int mm = 0; mm < M_rows; ++mm)
                for (int q = 0; q < s.Q[1]; ++q)
                    if (U(mm, q) != 0.0)
                        row.add(b.product(mu[n][mm], art.y1_idx[q]), U(mm, q));
        m.add_row("agg_n" + std::to_string(n + 1), row.take(), 'L', 0.0);
        b.count_row("aggregate");
    }

    // Vertex rows: one per constraint row, parameter and lifted vertex.
    for (int n = 0; n < N; ++n)
        for (int f = 0; f < K; ++f) {
            const auto& bv = art.pol[2][f];
            int vi = 0;
            for (const auto& vx : b.verts[f]) {
                ++vi;
                RowAccum row;
                row.add(rho[n][f], 1.0);
                for (int mm = 0; mm < M_rows; ++mm) row.add(mu[n][mm], st.W(mm, f) * vx.v);
                row.add(fvar[f][n], -vx.v);
                if (bv.present) {
                    for (int pp = 0; pp < s.P[2]; ++pp) {
                        const double a = blk.Arec[2](n, pp);
                        if (a == 0.0) continue;
                        for (int j = 0; j < vx.vbar.size(); ++j)
                            row.add(bv.Xbar[pp][j], -a * vx.vbar(j));
                        for (int j = 0; j < vx.vhat.size(); ++j)
                            row.add(bv.Xhat[pp][j], -a * vx.vhat(j));
                    }
                    RowAccum ytmp;
                    for (int q = 0; q < s.Q[2]; ++q) {
                        const double d = blk.Drec[2](n, q);
                        if (d != 0.0) b.add_yhat_terms(ytmp, 2, f, q, vx.vhat, -d);
                    }
                    for (const auto& [idx, c] : ytmp.terms) row.add(idx, c);
                }
                m.add_row("vtx_" + pk(b.keys[f]) + "_v" + std::to_string(vi) + "_n" +
                              std::to_string(n + 1),
                          row.take(), 'G', 0.0);
                b.count_row("vertex");
            }
        }

    if (mixed) {
        for (int q = 0; q < s.Q[2]; ++q) {
            RowAccum lo;
            for (int f = 0; f < K; ++f) lo.add(om_lo[q][f], 1.0);
            if (U.size() > 0)
                for (int mm = 0; mm < M_rows; ++mm)
                    for (int q1 = 0; q1 < s.Q[1]; ++q1)
                        if (U(mm, q1) != 0.0)
                            lo.add(b.product(ps_lo[q][mm], art.y1_idx[q1]), -U(mm, q1));
            m.add_row("yloagg_q" + std::to_string(q + 1), lo.take(), 'G', 0.0);
            b.count_row("ylo_aggregate");

            RowAccum hi;
            for (int f = 0; f < K; ++f) hi.add(om_hi[q][f], 1.0);
            if (U.size() > 0)
                for (int mm = 0; mm < M_rows; ++mm)
                    for (int q1 = 0; q1 < s.Q[1]; ++q1)
                        if (U(mm, q1) != 0.0)
                            hi.add(b.product(ps_hi[q][mm], art.y1_idx[q1]), U(mm, q1));
            m.add_row("yhiagg_q" + std::to_string(q + 1), hi.take(), 'L', 1.0);
            b.count_row("yhi_aggregate");
        }
        for (int q = 0; q < s.Q[2]; ++q)
            for (int f = 0; f < K; ++f) {
                int vi = 0;
                for (const auto& vx : b.verts[f]) {
                    ++vi;
                    RowAccum lo;
                    b.add_yhat_terms(lo, 2, f, q, vx.vhat, 1.0);
                    lo.add(om_lo[q][f], -1.0);
                    for (int mm = 0; mm < M_rows; ++mm)
                        lo.add(ps_lo[q][mm], st.W(mm, f) * vx.v);
                    m.add_row("ylovtx_" + pk(b.keys[f]) + "_v" + std::to_string(vi) + "_q" +
                                  std::to_string(q + 1),
                              lo.take(), 'G', 0.0);
                    b.count_row("ylo_vertex");

                    RowAccum hi;
                    b.add_yhat_terms(hi, 2, f, q, vx.vhat, 1.0);
                    hi.add(om_hi[q][f], -1.0);
                    for (int mm = 0; mm < M_rows; ++mm)
                        hi.add(ps_hi[q][mm], -st.W(mm, f) * vx.v);
                    m.add_row("yhivtx_" + pk(b.keys[f]) + "_v" + std::to_string(vi) + "_q" +
                                  std::to_string(q + 1),
                              hi.take(), 'L', 0.0);
                    b.count_row("yhi_vertex");
                }
            }
    }
    b.add_symmetry_rows();
    return std::move(b.out);
}

Reformulation dualize_multistage(const MultistageProblem& p, const Breakpoints& bp,
                                 const ReformOptions& opt) {
    Builder b(p, bp, opt);
    auto& m = b.m();
    auto& art = b.art();
    const auto& s = p.s;
    const bool mixed = opt.recourse == RecourseMode::Mixed;

    b.make_first_stage();
    b.make_policy_vars();

    // Recourse stages t'' in [max(2, t'), t] holding a rule block for k.
    auto existing = [&](const ParamKey& k, int t) {
        std::vector<int> ts;
        for (int tpp = std::max(2, k.t); tpp <= t; ++tpp)
            if (b.block_exists(tpp, k)) ts.push_back(tpp);
        return ts;
    };

    // Variables per stage block.
    std::vector<std::vector<std::vector<int>>> fvar(s.T + 1), phi(s.T + 1), delta(s.T + 1);
    std::vector<std::vector<std::vector<int>>> th_lo(s.T + 1), th_hi(s.T + 1), pi_lo(s.T + 1),
        pi_hi(s.T + 1);
    for (int t = 2; t <= s.T; ++t) {
        const int Kt = s.params_up_to(t);
        const int Mt = p.ddu.stage[t].rows();
        const std::string ts = std::to_string(t);
        fvar[t].assign(Kt, std::vector<int>(s.N[t], -1));
        for (int f = 0; f < Kt; ++f)
            for (int n = 0; n < s.N[t]; ++n)
                fvar[t][f][n] = b.free_var(
                    "f", "f_t" + ts + "_" + pk(b.keys[f]) + "_n" + std::to_string(n + 1));
        phi[t].assign(s.N[t], std::vector<int>(Mt, -1));
        for (int n = 0; n < s.N[t]; ++n)
            for (int mm = 0; mm < Mt; ++mm)
                phi[t][n][mm] = b.dual_var(
                    "Phi", "Phi_t" + ts + "_n" + std::to_string(n + 1) + "_m" +
                               std::to_string(mm + 1));
        delta[t].assign(Kt, std::vector<int>(s.N[t], -1));
        for (int f = 0; f < Kt; ++f)
            for (int n = 0; n < s.N[t]; ++n)
                delta[t][f][n] = b.free_var(
                    "delta", "del_t" + ts + "_" + pk(b.keys[f]) + "_n" + std::to_string(n + 1));
        if (mixed && s.Q[t] > 0) {
            th_lo[t].assign(s.Q[t], std::vector<int>(Mt, -1));
            th_hi[t].assign(s.Q[t], std::vector<int>(Mt, -1));
            pi_lo[t].assign(Kt, std::vector<int>(s.Q[t], -1));
            pi_hi[t].assign(Kt, std::vector<int>(s.Q[t], -1));
            for (int q = 0; q < s.Q[t]; ++q)
                for (int mm = 0; mm < Mt; ++mm) {
                    th_lo[t][q][mm] = b.dual_var("Theta", "Thl_t" + ts + "_q" +
                                                              std::to_string(q + 1) + "_m" +
                                                              std::to_string(mm + 1));
                    th_hi[t][q][mm] = b.dual_var("Theta", "Thh_t" + ts + "_q" +
                                                              std::to_string(q + 1) + "_m" +
                                                              std::to_string(mm + 1));
                }
            for (int f = 0; f < Kt; ++f)
                for (int q = 0; q < s.Q[t]; ++q) {
                    pi_lo[t][f][q] = b.free_var("pi", "pil_t" + ts + "_" + pk(b.keys[f]) + "_q" +
                                                          std::to_string(q + 1));
                    pi_hi[t][f][q] = b.free_var("pi", "pih_t" + ts + "_" + pk(b.keys[f]) + "_q" +
                                                          std::to_string(q + 1));
                }
        }
    }

    b.add_first_stage_rows();

    for (int t = 2; t <= s.T; ++t) {
        const int Kt = s.params_up_to(t);
        const int Mt = p.ddu.stage[t].rows();
        const auto& st = p.ddu.stage[t];
        const auto& blk = p.block[t];
        const std::string ts = std::to_string(t);
        const Eigen::MatrixXd& U1 = st.U.size() > 1 ? st.U[1] : Eigen::MatrixXd();

        for (int f = 0; f < Kt; ++f)
            for (int n = 0; n < s.N[t]; ++n) {
                RowAccum row;
                row.add(fvar[t][f][n], 1.0);
                for (int pp = 0; pp < s.P[1]; ++pp) row.add(art.x1_idx[pp], -blk.A[f](n, pp));
                for (int q = 0; q < s.Q[1]; ++q) row.add(art.y1_idx[q], -blk.D[f](n, q));
                m.add_row("fdef_t" + ts + "_" + pk(b.keys[f]) + "_n" + std::to_string(n + 1),
                          row.take(), 'E', -blk.b[f](n));
                b.count_row("fdef");
            }

        // Aggregate rows: Phi_t U^t_1 y_1 + sum_k delta^t_k <= 0.
        for (int n = 0; n < s.N[t]; ++n) {
            RowAccum row;
            for (int f = 0; f < Kt; ++f) row.add(delta[t][f][n], 1.0);
            if (U1.size() > 0)
                for (int mm = 0; mm < Mt; ++mm)
                    for (int q = 0; q < s.Q[1]; ++q)
                        if (U1(mm, q) != 0.0)
                            row.add(b.product(phi[t][n][mm], art.y1_idx[q]), U1(mm, q));
            m.add_row("agg_t" + ts + "_n" + std::to_string(n + 1), row.take(), 'L', 0.0);
            b.count_row("aggregate");
        }

        // Vertex rows.
        for (int f = 0; f < Kt; ++f) {
            const auto& key = b.keys[f];
            const auto tpps = existing(key, t);
            int vi = 0;
            for (const auto& vx : b.verts[f]) {
                ++vi;
                for (int n = 0; n < s.N[t]; ++n) {
                    RowAccum row;
                    row.add(fvar[t][f][n], vx.v);
                    for (int mm = 0; mm < Mt; ++mm)
                        row.add(phi[t][n][mm], -st.W(mm, f) * vx.v);
                    row.add(delta[t][f][n], -1.0);
                    for (int tpp : tpps) {
                        const auto& bv = art.pol[tpp][f];
                        for (int pp = 0; pp < s.P[tpp]; ++pp) {
                            const double a = blk.Arec[tpp](n, pp);
                            if (a == 0.0) continue;
                            for (int j = 0; j < vx.vbar.size(); ++j)
                                row.add(bv.Xbar[pp][j], a * vx.vbar(j));
                            for (int j = 0; j < vx.vhat.size(); ++j)
                                row.add(bv.Xhat[pp][j], a * vx.vhat(j));
                        }
                        for (int q = 0; q < s.Q[tpp]; ++q) {
                            const double d = blk.Drec[tpp](n, q);
                            if (d != 0.0) b.add_yhat_terms(row, tpp, f, q, vx.vhat, d);
                        }
                        if (tpp < t && tpp < static_cast<int>(st.U.size()) &&
                            st.U[tpp].size() > 0) {
                            const auto& Ut = st.U[tpp];
                            for (int mm = 0; mm < Mt; ++mm)
                                for (int q = 0; q < s.Q[tpp]; ++q)
                                    if (Ut(mm, q) != 0.0)
                                        b.add_yhat_terms(row, tpp, f, q, vx.vhat, Ut(mm, q),
                                                         phi[t][n][mm]);
                        }
                    }
                    m.add_row("vtx_t" + ts + "_" + pk(key) + "_v" + std::to_string(vi) + "_n" +
                                  std::to_string(n + 1),
                              row.take(), 'L', 0.0);
                    b.count_row("vertex");
                }
            }
        }

        if (mixed && s.Q[t] > 0) {
            for (int q = 0; q < s.Q[t]; ++q) {
                RowAccum lo;
                for (int f = 0; f < Kt; ++f) lo.add(pi_lo[t][f][q], 1.0);
                if (U1.size() > 0)
                    for (int mm = 0; mm < Mt; ++mm)
                        for (int q1 = 0; q1 < s.Q[1]; ++q1)
                            if (U1(mm, q1) != 0.0)
                                lo.add(b.product(th_lo[t][q][mm], art.y1_idx[q1]), -U1(mm, q1));
                m.add_row("yloagg_t" + ts + "_q" + std::to_string(q + 1), lo.take(), 'G', 0.0);
                b.count_row("ylo_aggregate");

                RowAccum hi;
                for (int f = 0; f < Kt; ++f) hi.add(pi_hi[t][f][q], 1.0);
                if (U1.size() > 0)
                    for (int mm = 0; mm < Mt; ++mm)
                        for (int q1 = 0; q1 < s.Q[1]; ++q1)
                            if (U1(mm, q1) != 0.0)
                                hi.add(b.product(th_hi[t][q][mm], art.y1_idx[q1]), U1(mm, q1));
                m.add_row("yhiagg_t" + ts + "_q" + std::to_string(q + 1), hi.take(), 'L', 1.0);
                b.count_row("yhi_aggregate");
            }
            for (int f = 0; f < Kt; ++f) {
                const auto& key = b.keys[f];
                const auto tpps = existing(key, t);
                int vi = 0;
                for (const auto& vx : b.verts[f]) {
                    ++vi;
                    for (int q = 0; q < s.Q[t]; ++q) {
                        RowAccum lo;
                        b.add_yhat_terms(lo, t, f, q, vx.vhat, 1.0);
                        lo.add(pi_lo[t][f][q], -1.0);
                        for (int mm = 0; mm < Mt; ++mm)
                            lo.add(th_lo[t][q][mm], st.W(mm, f) * vx.v);
                        for (int tpp : tpps)
                            if (tpp < t && tpp < static_cast<int>(st.U.size()) &&
                                st.U[tpp].size() > 0) {
                                const auto& Ut = st.U[tpp];
                                for (int mm = 0; mm < Mt; ++mm)
                                    for (int q1 = 0; q1 < s.Q[tpp]; ++q1)
                                        if (Ut(mm, q1) != 0.0)
                                            b.add_yhat_terms(lo, tpp, f, q1, vx.vhat,
                                                             -Ut(mm, q1), th_lo[t][q][mm]);
                            }
                        m.add_row("ylovtx_t" + ts + "_" + pk(key) + "_v" + std::to_string(vi) +
                                      "_q" + std::to_string(q + 1),
                                  lo.take(), 'G', 0.0);
                        b.count_row("ylo_vertex");

                        RowAccum hi;
                        b.add_yhat_terms(hi, t, f, q, vx.vhat, 1.0);
                        hi.add(pi_hi[t][f][q], -1.0);
                        for (int mm = 0; mm < Mt; ++mm)
                            hi.add(th_hi[t][q][mm], -st.W(mm, f) * vx.v);
                        for (int tpp : tpps)
                            if (tpp < t && tpp < static_cast<int>(st.U.size()) &&
                                st.U[tpp].size() > 0) {
                                const auto& Ut = st.U[tpp];
                                for (int mm = 0; mm < Mt; ++mm)
                                    for (int q1 = 0; q1 < s.Q[tpp]; ++q1)
                                        if (Ut(mm, q1) != 0.0)
                                            b.add_yhat_terms(hi, tpp, f, q1, vx.vhat,
                                                             Ut(mm, q1), th_hi[t][q][mm]);
                            }
                        m.add_row("yhivtx_t" + ts + "_" + pk(key) + "_v" + std::to_string(vi) +
                                      "_q" + std::to_string(q + 1),
                                  hi.take(), 'L', 0.0);
                        b.count_row("yhi_vertex");
                    }
                }
            }
        }
    }
    b.add_symmetry_rows();
    return std::move(b.out);
}

SolveReport solve_reformulated(const Reformulation& ref, const SolverConfig& cfg) {
    SolveReport rep = solve(ref.model, cfg);
    flag_boundary_active(ref.model, ref.art.glover, rep);
    return rep;
}

namespace {

/// Max of xi_f over the stage-T hull with first-stage y fixed. Used to
/// detect parameters pinned to a vanishing lift by the chosen design.
double max_xi_over_hull(const MultistageProblem& p, const Breakpoints& bp,
                        const Eigen::VectorXd& y1, int flat, const SolverConfig& cfg) {
    const HullSystem h = build_hull_system(p.ddu, bp, p.s, p.s.T);
    MilpModel lp;
    const double inf = std::numeric_limits<double>::infinity();
    for (int c = 0; c < h.cols(); ++c) {
        const bool is_lambda = c >= h.n_xi + h.n_xibar + h.n_xihat;
        lp.add_continuous("c" + std::to_string(c), is_lambda ? 0.0 : -inf, inf,
                          c == h.xi_col(flat) ? -1.0 : 0.0);
    }
    for (const auto& row : h.rows) {
        double rhs = row.rhs;
        for (const auto& yt : row.y) {
            if (yt.stage != 1) continue;  // two-stage pinning only
            rhs += yt.coef * y1(yt.q);
        }
        lp.add_row(row.name, row.lhs, row.sense, rhs);
    }
    SolveReport rep = solve(lp, cfg);
    if (rep.status != SolveStatus::OptimalWithinGap)
        return std::numeric_limits<double>::infinity();
    return -rep.objective;
}

}  // namespace

PolicyCoefficients extract_policy(const MultistageProblem& p, const Reformulation& ref,
                                  const SolveReport& report, bool tidy,
                                  const SolverConfig& lp_cfg) {
    if (!report.has_incumbent)
        throw std::runtime_error("no incumbent available for policy extraction");
    const auto& art = ref.art;
    PolicyCoefficients c = PolicyCoefficients::zero(p.s, art.grids, art.window);
    c.objective = report.objective;
    c.gap = report.gap;
    for (int pp = 0; pp < p.s.P[1]; ++pp) c.x1(pp) = report.solution[art.x1_idx[pp]];
    for (int q = 0; q < p.s.Q[1]; ++q)
        c.y1(q) = std::round(report.solution[art.y1_idx[q]]);

    auto rounded_binary = [&](int idx) {
        const double v = report.solution[idx];
        const double r = std::round(v);
        if (std::abs(v - r) > 1e-5)
            throw std::runtime_error("binary rule coefficient " + ref.model.vars()[idx].name +
                                     " is fractional (" + std::to_string(v) + ")");
        return r;
    };

    for (int t = 2; t <= p.s.T; ++t) {
        for (size_t f = 0; f < art.pol[t].size(); ++f) {
            const auto& bv = art.pol[t][f];
            if (!bv.present) continue;
            const ParamKey key = p.s.key_of_flat(static_cast<int>(f));
            auto& blk = c.blocks[t][f];
            for (int pp = 0; pp < p.s.P[t]; ++pp) {
                for (size_t j = 0; j < bv.Xbar[pp].size(); ++j)
                    blk.Xbar(pp, static_cast<long>(j)) = report.solution[bv.Xbar[pp][j]];
                for (size_t j = 0; j < bv.Xhat[pp].size(); ++j)
                    blk.Xhat(pp, static_cast<long>(j)) = report.solution[bv.Xhat[pp][j]];
            }
            if (!bv.Ydot.empty()) {
                for (int q = 0; q < p.s.Q[t]; ++q) {
                    if (!bv.split) {
                        // static binary recourse: constant indicator column
                        if (key.t == 1) blk.Ydot(q, 0) = rounded_binary(bv.Ydot[q][0]);
                        continue;
                    }
                    for (size_t j = 0; j < bv.Ydot[q].size(); ++j) {
                        blk.Ydot(q, static_cast<long>(j)) = rounded_binary(bv.Ydot[q][j]);
                        blk.Yddot(q, static_cast<long>(j)) = rounded_binary(bv.Yddot[q][j]);
                    }
                }
            }
        }
    }

    if (tidy && p.s.T == 2) {
        for (int f = 1; f < p.s.params_up_to(2); ++f) {
            const ParamKey key = p.s.key_of_flat(f);
            const auto& grid = art.grids[key.t][static_cast<size_t>(key.i) - 1];
            if (grid.lo != 0.0) continue;  // only a pin at zero kills the lift
            Breakpoints bp_used = Breakpoints::none(p.s);
            for (int t = 1; t <= p.s.T; ++t)
                for (int i = 1; i <= p.s.K[t]; ++i)
                    bp_used.at(t, i) = art.grids[t][static_cast<size_t>(i) - 1].points;
            const double hi = max_xi_over_hull(p, bp_used, c.y1, f, lp_cfg);
            if (hi > 1e-7) continue;
            for (int t = 2; t <= p.s.T; ++t) {
                auto& blk = c.blocks[t][f];
                if (blk.Xbar.size() > 0) blk.Xbar.setZero();
                if (grid.r() > 1) {
                    if (blk.Xhat.size() > 0) blk.Xhat.setZero();
                    if (blk.Ydot.size() > 0) blk.Ydot.setZero();
                    if (blk.Yddot.size() > 0) blk.Yddot.setZero();
                }
            }
        }
    }
    return c;
}

}  // namespace ddro

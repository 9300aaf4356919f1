#include "ddro/uncertainty.hpp"

#include <stdexcept>

namespace ddro {

ParamGrid make_grid(const DduSet& ddu, const Breakpoints& bp, int t, int i) {
    ParamGrid grid;
    grid.lo = ddu.support_lo(t, i);
    grid.hi = ddu.support_hi(t, i);
    grid.points = bp.at(t, i);
    return grid;
}

HullSystem build_hull_system(const DduSet& ddu, const Breakpoints& bp, const StageStructure& s,
                             int t) {
    if (t < 2 || t > s.T) throw std::invalid_argument("hull system requires 2 <= t <= T");
    HullSystem h;
    h.t = t;
    h.s = s;
    const auto params = s.params_through(t);
    h.n_xi = static_cast<int>(params.size());
    h.xibar_off.resize(params.size());
    h.xihat_off.resize(params.size());
    h.lambda_off.resize(params.size());
    h.verts.resize(params.size());

    std::vector<ParamGrid> grids;
    grids.reserve(params.size());
    for (size_t f = 0; f < params.size(); ++f) {
        const auto key = params[f];
        ParamGrid grid = make_grid(ddu, bp, key.t, key.i);
        grid.validate();
        h.xibar_off[f] = h.n_xibar;
        h.xihat_off[f] = h.n_xihat;
        h.lambda_off[f] = h.n_lambda;
        h.n_xibar += grid.r();
        h.n_xihat += grid.g();
        h.verts[f] = build_vertex_set(grid);
        h.n_lambda += static_cast<int>(h.verts[f].size());
        grids.push_back(std::move(grid));
    }

    // Per-parameter simplex and mixing rows.
    for (size_t f = 0; f < params.size(); ++f) {
        const auto key = params[f];
        const auto& vs = h.verts[f];
        const auto& grid = grids[f];
        const int nf = static_cast<int>(f);

        HullSystem::Row simplex;
        simplex.name = "hx_" + key.str() + "_sum";
        simplex.sense = 'E';
        simplex.rhs = 1.0;
        for (size_t v = 0; v < vs.size(); ++v)
            simplex.lhs.emplace_back(h.lambda_col(nf, static_cast<int>(v)), 1.0);
        h.rows.push_back(std::move(simplex));

        HullSystem::Row mix_xi;
        mix_xi.name = "hx_" + key.str() + "_xi";
        mix_xi.sense = 'E';
        mix_xi.rhs = 0.0;
        mix_xi.lhs.emplace_back(h.xi_col(nf), 1.0);
        for (size_t v = 0; v < vs.size(); ++v)
            if (vs[v].v != 0.0)
                mix_xi.lhs.emplace_back(h.lambda_col(nf, static_cast<int>(v)), -vs[v].v);
        h.rows.push_back(std::move(mix_xi));

        for (int j = 0; j < grid.r(); ++j) {
            HullSystem::Row row;
            row.name = "hx_" + key.str() + "_bar" + std::to_string(j + 1);
            row.sense = 'E';
            row.rhs = 0.0;
            row.lhs.emplace_back(h.xibar_col(nf, j), 1.0);
            for (size_t v = 0; v < vs.size(); ++v)
                if (vs[v].vbar(j) != 0.0)
                    row.lhs.emplace_back(h.lambda_col(nf, static_cast<int>(v)), -vs[v].vbar(j));
            h.rows.push_back(std::move(row));
        }
        for (int j = 0; j < grid.g(); ++j) {
            HullSystem::Row row;
            row.name = "hx_" + key.str() + "_hat" + std::to_string(j + 1);
            row.sense = 'E';
            row.rhs = 0.0;
            row.lhs.emplace_back(h.xihat_col(nf, j), 1.0);
            for (size_t v = 0; v < vs.size(); ++v)
                if (vs[v].vhat(j) != 0.0)
                    row.lhs.emplace_back(h.lambda_col(nf, static_cast<int>(v)), -vs[v].vhat(j));
            h.rows.push_back(std::move(row));
        }
    }

    // Coupling rows with symbolic y.
    const auto& st = ddu.stage[t];
    if (st.W.size() > 0 && st.W.cols() != h.n_xi)
        throw std::invalid_argument("W^[t] column count does not match K^[t]");
    for (int m = 0; m < st.rows(); ++m) {
        HullSystem::Row row;
        row.name = st.row_names.size() == static_cast<size_t>(st.rows())
                       ? st.row_names[m]
                       : ("set_t" + std::to_string(t) + "_m" + std::to_string(m + 1));
        row.sense = 'L';
        row.rhs = 0.0;
        for (int f = 0; f < h.n_xi; ++f)
            if (st.W(m, f) != 0.0) row.lhs.emplace_back(h.xi_col(f), st.W(m, f));
        for (int that = 1; that < t; ++that) {
            if (that >= static_cast<int>(st.U.size())) continue;
            const auto& U = st.U[that];
            if (U.size() == 0) continue;
            for (int q = 0; q < U.cols(); ++q)
                if (U(m, q) != 0.0) row.y.push_back({that, q, U(m, q)});
        }
        h.rows.push_back(std::move(row));
    }
    return h;
}

}  // namespace ddro

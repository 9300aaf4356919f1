#include "ddro/problem.hpp"

#include <stdexcept>

namespace ddro {

namespace {

void check_dims(std::vector<std::string>& out, const std::string& what, long rows, long cols,
                long want_rows, long want_cols) {
    if (rows != want_rows || cols != want_cols)
        out.push_back(what + ": is " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(want_rows) + "x" + std::to_string(want_cols));
}

}  // namespace

std::string MultistageProblem::xvar_name(int t, int p) const {
    if (t < static_cast<int>(xname.size()) && p < static_cast<int>(xname[t].size()))
        return xname[t][p];
    return "x" + std::to_string(t) + "_" + std::to_string(p + 1);
}

std::string MultistageProblem::yvar_name(int t, int q) const {
    if (t < static_cast<int>(yname.size()) && q < static_cast<int>(yname[t].size()))
        return yname[t][q];
    return "y" + std::to_string(t) + "_" + std::to_string(q + 1);
}

std::vector<std::string> validate_problem(const MultistageProblem& p) {
    std::vector<std::string> out;
    const auto& s = p.s;
    if (s.T < 2) out.push_back("structure: T must be at least 2");
    if (s.T >= 1 && s.K.size() > 1 && s.K[1] != 1)
        out.push_back("structure: K_1 must be 1 (constant parameter convention)");
    for (int t = 1; t <= s.T && t < static_cast<int>(s.K.size()); ++t) {
        if (s.K[t] < 0 || s.P[t] < 0 || s.Q[t] < 0 || s.N[t] < 0)
            out.push_back("structure: negative count in stage " + std::to_string(t));
    }
    if (!out.empty()) return out;  // dimension checks below assume a sane structure

    check_dims(out, "A1", p.A1.rows(), p.A1.cols(), s.N[1], s.P[1]);
    check_dims(out, "D1", p.D1.rows(), p.D1.cols(), s.N[1], s.Q[1]);
    if (p.b1.size() != s.N[1]) out.push_back("b1: wrong length");

    if (p.ddu.lo.size() != static_cast<size_t>(s.T) + 1)
        out.push_back("support: missing per-stage bounds");
    else {
        if (p.ddu.support_lo(1, 1) != 1.0 || p.ddu.support_hi(1, 1) != 1.0)
            out.push_back("support: constant parameter (1,1) must have support [1, 1]");
        for (int t = 1; t <= s.T; ++t)
            for (int i = 1; i <= s.K[t]; ++i)
                if (p.ddu.support_lo(t, i) > p.ddu.support_hi(t, i))
                    out.push_back("support: empty box for parameter " + ParamKey{t, i}.str());
    }

    if (static_cast<int>(p.block.size()) != s.T + 1) {
        out.push_back("blocks: expected entries for stages 2.." + std::to_string(s.T));
        return out;
    }
    for (int t = 2; t <= s.T; ++t) {
        const auto& blk = p.block[t];
        const int K_t = s.params_up_to(t);
        if (static_cast<int>(blk.A.size()) != K_t || static_cast<int>(blk.D.size()) != K_t ||
            static_cast<int>(blk.b.size()) != K_t) {
            out.push_back("block t=" + std::to_string(t) + ": expected " + std::to_string(K_t) +
                          " coefficient blocks");
            continue;
        }
        for (int f = 0; f < K_t; ++f) {
            const auto key = s.key_of_flat(f).str();
            check_dims(out, "A^" + std::to_string(t) + "_" + key, blk.A[f].rows(), blk.A[f].cols(),
                       s.N[t], s.P[1]);
            check_dims(out, "D^" + std::to_string(t) + "_" + key, blk.D[f].rows(), blk.D[f].cols(),
                       s.N[t], s.Q[1]);
            if (blk.b[f].size() != s.N[t])
                out.push_back("b^" + std::to_string(t) + "_" + key + ": wrong length");
        }
        if (static_cast<int>(blk.Arec.size()) != t + 1 || static_cast<int>(blk.Drec.size()) != t + 1)
            out.push_back("block t=" + std::to_string(t) + ": recourse blocks must cover 2..t");
        else
            for (int tpp = 2; tpp <= t; ++tpp) {
                check_dims(out, "Atilde^" + std::to_string(t) + "_" + std::to_string(tpp),
                           blk.Arec[tpp].rows(), blk.Arec[tpp].cols(), s.N[t], s.P[tpp]);
                check_dims(out, "Dtilde^" + std::to_string(t) + "_" + std::to_string(tpp),
                           blk.Drec[tpp].rows(), blk.Drec[tpp].cols(), s.N[t], s.Q[tpp]);
            }

        const auto& st = p.ddu.stage[t];
        if (st.W.size() > 0) {
            if (st.W.cols() != K_t)
                out.push_back("W^[" + std::to_string(t) + "]: expected " + std::to_string(K_t) +
                              " columns");
            for (int that = 1; that < t && that < static_cast<int>(st.U.size()); ++that) {
                const auto& U = st.U[that];
                if (U.size() == 0) continue;
                check_dims(out, "U^" + std::to_string(t) + "_" + std::to_string(that), U.rows(),
                           U.cols(), st.W.rows(), s.Q[that]);
            }
        }
    }

    // Breakpoint placement: strict interiority and ordering per parameter.
    for (int t = 1; t <= s.T; ++t)
        for (int i = 1; i <= s.K[t]; ++i) {
            try {
                p.grid(t, i).validate();
            } catch (const std::exception& e) {
                out.push_back("breakpoints " + ParamKey{t, i}.str() + ": " + e.what());
            }
            if (t == 1 && !p.bp.at(1, 1).empty())
                out.push_back("breakpoints (1,1): constant parameter must have r = 1");
        }
    return out;
}

TwoStageView as_two_stage(const MultistageProblem& p) {
    if (p.s.T != 2) throw std::invalid_argument("not a two-stage instance (T = " +
                                                std::to_string(p.s.T) + ")");
    TwoStageView v;
    v.s = p.s;
    const int K = p.s.params_up_to(2);
    const auto& blk = p.block[2];
    for (int n = 0; n < p.s.N[2]; ++n) {
        TwoStageView::Row row;
        row.A.resize(K, p.s.P[1]);
        row.D.resize(K, p.s.Q[1]);
        row.b.resize(K);
        for (int f = 0; f < K; ++f) {
            row.A.row(f) = blk.A[f].row(n);
            row.D.row(f) = blk.D[f].row(n);
            row.b(f) = blk.b[f](n);
        }
        row.at = blk.Arec[2].row(n).transpose();
        row.dt = blk.Drec[2].row(n).transpose();
        if (static_cast<size_t>(n) < blk.row_names.size()) row.name = blk.row_names[n];
        v.rows.push_back(std::move(row));
    }
    v.W = p.ddu.stage[2].W;
    if (p.ddu.stage[2].U.size() > 1) v.U = p.ddu.stage[2].U[1];
    return v;
}

MultistageProblem from_two_stage(const TwoStageView& v, const MultistageProblem& original) {
    MultistageProblem p = original;
    const int K = v.s.params_up_to(2);
    auto& blk = p.block[2];
    for (int f = 0; f < K; ++f) {
        for (int n = 0; n < v.s.N[2]; ++n) {
            blk.A[f].row(n) = v.rows[n].A.row(f);
            blk.D[f].row(n) = v.rows[n].D.row(f);
            blk.b[f](n) = v.rows[n].b(f);
        }
    }
    for (int n = 0; n < v.s.N[2]; ++n) {
        blk.Arec[2].row(n) = v.rows[n].at.transpose();
        blk.Drec[2].row(n) = v.rows[n].dt.transpose();
    }
    return p;
}

}  // namespace ddro

#include "ddro/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ddro {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (long r = 0; r < v.size(); ++r) out.push_back(v(r));
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, long rows, long cols, const std::string& what) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    if (static_cast<long>(j.size()) != rows && !(j.empty() && rows == 0))
        throw std::runtime_error(what + ": expected " + std::to_string(rows) + " rows, got " +
                                 std::to_string(j.size()));
    for (long r = 0; r < static_cast<long>(j.size()); ++r) {
        const auto& row = j.at(r);
        if (static_cast<long>(row.size()) != cols)
            throw std::runtime_error(what + ": row " + std::to_string(r + 1) + " has " +
                                     std::to_string(row.size()) + " columns, expected " +
                                     std::to_string(cols));
        for (long c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, long n, const std::string& what) {
    if (static_cast<long>(j.size()) != n)
        throw std::runtime_error(what + ": expected length " + std::to_string(n));
    Eigen::VectorXd v(n);
    for (long r = 0; r < n; ++r) v(r) = j.at(r).get<double>();
    return v;
}

}  // namespace

std::string instance_to_json(const MultistageProblem& p) {
    const auto& s = p.s;
    json doc;
    doc["meta"]["name"] = p.name;
    if (p.epigraph_row)
        doc["meta"]["epigraph_row"] = {{"t", p.epigraph_row->t}, {"n", p.epigraph_row->n + 1}};

    json stages;
    stages["T"] = s.T;
    auto counts = [&](const std::vector<int>& v) {
        json arr = json::array();
        for (int t = 1; t <= s.T; ++t) arr.push_back(v[t]);
        return arr;
    };
    stages["K"] = counts(s.K);
    stages["P"] = counts(s.P);
    stages["Q"] = counts(s.Q);
    stages["N"] = counts(s.N);
    doc["stages"] = stages;

    json blocks;
    blocks["first_stage"] = {
        {"A", matrix_to_json(p.A1)}, {"D", matrix_to_json(p.D1)}, {"b", vector_to_json(p.b1)}};
    json robust = json::array();
    for (int t = 2; t <= s.T; ++t) {
        const auto& blk = p.block[t];
        json jb;
        jb["t"] = t;
        json coef = json::array();
        const auto keys = s.params_through(t);
        for (size_t f = 0; f < keys.size(); ++f) {
            coef.push_back({{"tp", keys[f].t},
                            {"i", keys[f].i},
                            {"A", matrix_to_json(blk.A[f])},
                            {"D", matrix_to_json(blk.D[f])},
                            {"b", vector_to_json(blk.b[f])}});
        }
        jb["coef"] = std::move(coef);
        json rec = json::array();
        for (int tpp = 2; tpp <= t; ++tpp)
            rec.push_back({{"tpp", tpp},
                           {"A", matrix_to_json(blk.Arec[tpp])},
                           {"D", matrix_to_json(blk.Drec[tpp])}});
        jb["recourse"] = std::move(rec);
        if (!blk.row_names.empty()) jb["row_names"] = blk.row_names;
        robust.push_back(std::move(jb));
    }
    blocks["robust"] = std::move(robust);
    doc["blocks"] = std::move(blocks);

    json unc;
    json support = json::array();
    for (int t = 1; t <= s.T; ++t)
        support.push_back({{"t", t}, {"lo", p.ddu.lo[t]}, {"hi", p.ddu.hi[t]}});
    unc["support"] = std::move(support);
    json sets = json::array();
    for (int t = 2; t <= s.T; ++t) {
        const auto& st = p.ddu.stage[t];
        json jset;
        jset["t"] = t;
        jset["W"] = matrix_to_json(st.W);
        json us = json::array();
        for (int that = 1; that < t; ++that)
            if (that < static_cast<int>(st.U.size()) && st.U[that].size() > 0 &&
                !st.U[that].isZero(0.0))
                us.push_back({{"that", that}, {"matrix", matrix_to_json(st.U[that])}});
        jset["U"] = std::move(us);
        if (!st.row_names.empty()) jset["row_names"] = st.row_names;
        sets.push_back(std::move(jset));
    }
    unc["sets"] = std::move(sets);
    doc["uncertainty"] = std::move(unc);

    json bps = json::array();
    for (int t = 1; t <= s.T; ++t)
        for (int i = 1; i <= s.K[t]; ++i)
            if (!p.bp.at(t, i).empty())
                bps.push_back({{"t", t}, {"i", i}, {"points", p.bp.at(t, i)}});
    doc["breakpoints"] = std::move(bps);

    if (!p.xname.empty()) doc["names"]["x"] = p.xname;
    if (!p.yname.empty()) doc["names"]["y"] = p.yname;
    if (!p.zero_force.empty()) {
        json zf = json::array();
        for (int t = 1; t <= s.T; ++t)
            for (int i = 1; i <= s.K[t]; ++i)
                if (p.zero_force[t][static_cast<size_t>(i) - 1]) zf.push_back({{"t", t}, {"i", i}});
        doc["zero_force"] = std::move(zf);
    }
    return doc.dump(1);
}

MultistageProblem instance_from_json(const std::string& text) {
    json doc = json::parse(text);
    MultistageProblem p;
    p.name = doc.contains("meta") ? doc["meta"].value("name", "") : "";

    const auto& js = doc.at("stages");
    StageStructure s;
    s.T = js.at("T").get<int>();
    auto read_counts = [&](const char* key) {
        std::vector<int> v(static_cast<size_t>(s.T) + 1, 0);
        const auto& arr = js.at(key);
        if (static_cast<int>(arr.size()) != s.T)
            throw std::runtime_error(std::string("stages.") + key + ": expected T entries");
        for (int t = 1; t <= s.T; ++t) v[t] = arr.at(t - 1).get<int>();
        return v;
    };
    s.K = read_counts("K");
    s.P = read_counts("P");
    s.Q = read_counts("Q");
    s.N = read_counts("N");
    p.s = s;

    const auto& fs = doc.at("blocks").at("first_stage");
    p.A1 = matrix_from_json(fs.at("A"), s.N[1], s.P[1], "first_stage.A");
    p.D1 = matrix_from_json(fs.at("D"), s.N[1], s.Q[1], "first_stage.D");
    p.b1 = vector_from_json(fs.at("b"), s.N[1], "first_stage.b");

    p.block.assign(static_cast<size_t>(s.T) + 1, {});
    for (const auto& jb : doc.at("blocks").at("robust")) {
        const int t = jb.at("t").get<int>();
        if (t < 2 || t > s.T) throw std::runtime_error("blocks.robust: bad stage index");
        auto& blk = p.block[t];
        const int K_t = s.params_up_to(t);
        blk.A.assign(K_t, {});
        blk.D.assign(K_t, {});
        blk.b.assign(K_t, {});
        for (const auto& jc : jb.at("coef")) {
            const ParamKey key{jc.at("tp").get<int>(), jc.at("i").get<int>()};
            const int f = s.flat(key);
            const std::string what = "block t=" + std::to_string(t) + " coef " + key.str();
            blk.A[f] = matrix_from_json(jc.at("A"), s.N[t], s.P[1], what + ".A");
            blk.D[f] = matrix_from_json(jc.at("D"), s.N[t], s.Q[1], what + ".D");
            blk.b[f] = vector_from_json(jc.at("b"), s.N[t], what + ".b");
        }
        for (int f = 0; f < K_t; ++f) {
            if (blk.A[f].size() == 0) blk.A[f] = Eigen::MatrixXd::Zero(s.N[t], s.P[1]);
            if (blk.D[f].size() == 0) blk.D[f] = Eigen::MatrixXd::Zero(s.N[t], s.Q[1]);
            if (blk.b[f].size() == 0) blk.b[f] = Eigen::VectorXd::Zero(s.N[t]);
        }
        blk.Arec.assign(static_cast<size_t>(t) + 1, {});
        blk.Drec.assign(static_cast<size_t>(t) + 1, {});
        for (const auto& jr : jb.at("recourse")) {
            const int tpp = jr.at("tpp").get<int>();
            const std::string what =
                "block t=" + std::to_string(t) + " recourse t''=" + std::to_string(tpp);
            blk.Arec[tpp] = matrix_from_json(jr.at("A"), s.N[t], s.P[tpp], what + ".A");
            blk.Drec[tpp] = matrix_from_json(jr.at("D"), s.N[t], s.Q[tpp], what + ".D");
        }
        for (int tpp = 2; tpp <= t; ++tpp) {
            if (blk.Arec[tpp].size() == 0) blk.Arec[tpp] = Eigen::MatrixXd::Zero(s.N[t], s.P[tpp]);
            if (blk.Drec[tpp].size() == 0) blk.Drec[tpp] = Eigen::MatrixXd::Zero(s.N[t], s.Q[tpp]);
        }
        if (jb.contains("row_names")) blk.row_names = jb["row_names"].get<std::vector<std::string>>();
    }
    for (int t = 2; t <= s.T; ++t)
        if (p.block[t].A.empty() && s.N[t] > 0)
            throw std::runtime_error("blocks.robust: missing stage " + std::to_string(t));

    p.ddu.resize(s);
    for (const auto& jsup : doc.at("uncertainty").at("support")) {
        const int t = jsup.at("t").get<int>();
        p.ddu.lo[t] = jsup.at("lo").get<std::vector<double>>();
        p.ddu.hi[t] = jsup.at("hi").get<std::vector<double>>();
        if (static_cast<int>(p.ddu.lo[t].size()) != s.K[t] ||
            static_cast<int>(p.ddu.hi[t].size()) != s.K[t])
            throw std::runtime_error("uncertainty.support: stage " + std::to_string(t) +
                                     " length mismatch");
    }
    for (const auto& jset : doc.at("uncertainty").at("sets")) {
        const int t = jset.at("t").get<int>();
        auto& st = p.ddu.stage[t];
        const auto& jw = jset.at("W");
        const long m_rows = static_cast<long>(jw.size());
        st.W = matrix_from_json(jw, m_rows, s.params_up_to(t), "W^[" + std::to_string(t) + "]");
        st.U.assign(static_cast<size_t>(t), {});
        for (const auto& ju : jset.at("U")) {
            const int that = ju.at("that").get<int>();
            if (that < 1 || that >= t) throw std::runtime_error("uncertainty.sets: bad that index");
            st.U[that] = matrix_from_json(ju.at("matrix"), m_rows, s.Q[that],
                                          "U^" + std::to_string(t) + "_" + std::to_string(that));
        }
        for (int that = 1; that < t; ++that)
            if (st.U[that].size() == 0) st.U[that] = Eigen::MatrixXd::Zero(m_rows, s.Q[that]);
        if (jset.contains("row_names"))
            st.row_names = jset["row_names"].get<std::vector<std::string>>();
    }
    for (int t = 2; t <= s.T; ++t) {
        auto& st = p.ddu.stage[t];
        if (st.W.size() == 0) {
            st.W = Eigen::MatrixXd::Zero(0, s.params_up_to(t));
            st.U.assign(static_cast<size_t>(t), {});
            for (int that = 1; that < t; ++that) st.U[that] = Eigen::MatrixXd::Zero(0, s.Q[that]);
        }
    }

    p.bp = Breakpoints::none(s);
    if (doc.contains("breakpoints"))
        for (const auto& jb : doc["breakpoints"]) {
            const int t = jb.at("t").get<int>();
            const int i = jb.at("i").get<int>();
            p.bp.at(t, i) = jb.at("points").get<std::vector<double>>();
        }

    if (doc.contains("names")) {
        if (doc["names"].contains("x"))
            p.xname = doc["names"]["x"].get<std::vector<std::vector<std::string>>>();
        if (doc["names"].contains("y"))
            p.yname = doc["names"]["y"].get<std::vector<std::vector<std::string>>>();
    }
    if (doc.contains("meta") && doc["meta"].contains("epigraph_row")) {
        RowRef ref;
        ref.t = doc["meta"]["epigraph_row"].at("t").get<int>();
        ref.n = doc["meta"]["epigraph_row"].at("n").get<int>() - 1;
        p.epigraph_row = ref;
    }
    if (doc.contains("zero_force")) {
        p.zero_force.assign(static_cast<size_t>(s.T) + 1, {});
        for (int t = 1; t <= s.T; ++t) p.zero_force[t].assign(s.K[t], false);
        for (const auto& jz : doc["zero_force"])
            p.zero_force[jz.at("t").get<int>()][jz.at("i").get<size_t>() - 1] = true;
    }
    return p;
}

MultistageProblem load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open instance file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return instance_from_json(buf.str());
}

void save_instance(const MultistageProblem& p, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << instance_to_json(p) << "\n";
}

}  // namespace ddro

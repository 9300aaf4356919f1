#include "ddro/policy.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ddro {

using nlohmann::json;

InfoWindow InfoWindow::full(const StageStructure& s) {
    InfoWindow w;
    w.lo_source.assign(static_cast<size_t>(s.T) + 1, 2);
    return w;
}

InfoWindow InfoWindow::uniform(const StageStructure& s, int delta_t) {
    if (delta_t < 0) return full(s);
    InfoWindow w;
    w.lo_source.assign(static_cast<size_t>(s.T) + 1, 2);
    for (int t = 2; t <= s.T; ++t) w.lo_source[t] = std::max(2, t - delta_t);
    return w;
}

InfoWindow InfoWindow::per_stage(const StageStructure& s, const std::vector<int>& delta_by_stage) {
    if (static_cast<int>(delta_by_stage.size()) != s.T + 1)
        throw std::invalid_argument("per-stage delta vector must have T+1 entries");
    InfoWindow w;
    w.lo_source.assign(static_cast<size_t>(s.T) + 1, 2);
    for (int t = 2; t <= s.T; ++t) {
        const int d = delta_by_stage[t];
        w.lo_source[t] = d < 0 ? 2 : std::max(2, t - d);
    }
    return w;
}

const PolicyBlock& PolicyCoefficients::block(int t, int tp, int i) const {
    if (!window.admits(t, tp))
        throw std::out_of_range("source " + ParamKey{tp, i}.str() + " outside the stage-" +
                                std::to_string(t) + " information window");
    return blocks[t][s.flat(tp, i)];
}

bool PolicyCoefficients::has_block(int t, int tp, int i) const {
    return window.admits(t, tp) && !blocks[t][s.flat(tp, i)].empty();
}

PolicyCoefficients PolicyCoefficients::zero(const StageStructure& s,
                                            const std::vector<std::vector<ParamGrid>>& grids,
                                            const InfoWindow& window) {
    PolicyCoefficients c;
    c.s = s;
    c.window = window;
    c.grids = grids;
    c.x1 = Eigen::VectorXd::Zero(s.P[1]);
    c.y1 = Eigen::VectorXd::Zero(s.Q[1]);
    c.blocks.assign(static_cast<size_t>(s.T) + 1, {});
    for (int t = 2; t <= s.T; ++t) {
        c.blocks[t].assign(s.params_up_to(t), {});
        for (int tp = 1; tp <= t; ++tp) {
            if (!window.admits(t, tp)) continue;
            for (int i = 1; i <= s.K[tp]; ++i) {
                const auto& grid = c.grid(tp, i);
                auto& blk = c.blocks[t][s.flat(tp, i)];
                blk.Xbar = Eigen::MatrixXd::Zero(s.P[t], grid.r());
                blk.Xhat = Eigen::MatrixXd::Zero(s.P[t], grid.g());
                blk.Ydot = Eigen::MatrixXd::Zero(s.Q[t], grid.g());
                blk.Yddot = Eigen::MatrixXd::Zero(s.Q[t], grid.g());
            }
        }
    }
    return c;
}

StageDecision evaluate_policy(const PolicyCoefficients& c, const Trajectory& xi, int t) {
    if (t < 2 || t > c.s.T) throw std::invalid_argument("stage out of range for evaluation");
    if (static_cast<int>(xi.size()) < t + 1)
        throw std::invalid_argument("trajectory too short for stage " + std::to_string(t));
    StageDecision out;
    out.x = Eigen::VectorXd::Zero(c.s.P[t]);
    out.y = Eigen::VectorXd::Zero(c.s.Q[t]);
    for (int tp = 1; tp <= t; ++tp) {
        if (!c.window.admits(t, tp)) continue;
        if (xi[tp].size() != c.s.K[tp])
            throw std::invalid_argument("trajectory stage " + std::to_string(tp) +
                                        " has wrong parameter count");
        for (int i = 1; i <= c.s.K[tp]; ++i) {
            const auto& blk = c.blocks[t][c.s.flat(tp, i)];
            if (blk.empty()) continue;
            const auto& grid = c.grid(tp, i);
            const double v = xi[tp](i - 1);
            const Eigen::VectorXd bar = lift_continuous(v, grid);
            const Eigen::VectorXd hat = lift_binary(v, grid);
            if (blk.Xbar.size() > 0) out.x += blk.Xbar * bar;
            if (blk.Xhat.size() > 0) out.x += blk.Xhat * hat;
            if (blk.Ydot.size() > 0) out.y += blk.yhat() * hat;
        }
    }
    return out;
}

std::vector<AdmissibilityIssue> check_binary_admissibility(const PolicyCoefficients& c) {
    std::vector<AdmissibilityIssue> issues;
    const double tol = 1e-6;
    for (int t = 2; t <= c.s.T; ++t) {
        for (int q = 0; q < c.s.Q[t]; ++q) {
            double lo = 0.0, hi = 0.0;
            bool off_integer = false;
            for (int tp = 1; tp <= t; ++tp) {
                if (!c.window.admits(t, tp)) continue;
                for (int i = 1; i <= c.s.K[tp]; ++i) {
                    const auto& blk = c.blocks[t][c.s.flat(tp, i)];
                    if (blk.empty() || blk.Ydot.size() == 0) continue;
                    const auto& grid = c.grid(tp, i);
                    const Eigen::MatrixXd yh = blk.yhat();
                    for (int jj = 0; jj < yh.cols(); ++jj) {
                        const double e = yh(q, jj);
                        off_integer = off_integer || std::abs(e - std::round(e)) > tol;
                    }
                    // Achievable indicator vectors are prefix-ones; with
                    // r = 1 the single component is pinned to 1.
                    double blk_lo, blk_hi;
                    if (grid.r() == 1) {
                        blk_lo = blk_hi = yh(q, 0);
                    } else {
                        blk_lo = blk_hi = 0.0;
                        double prefix = 0.0;
                        for (int k = 1; k <= grid.g(); ++k) {
                            prefix += yh(q, k - 1);
                            blk_lo = std::min(blk_lo, prefix);
                            blk_hi = std::max(blk_hi, prefix);
                        }
                    }
                    lo += blk_lo;
                    hi += blk_hi;
                }
            }
            if (lo < -tol || hi > 1.0 + tol || off_integer) {
                AdmissibilityIssue issue;
                issue.t = t;
                issue.q = q;
                issue.lo = lo;
                issue.hi = hi;
                issue.note = off_integer ? "coefficient not integral" : "range outside {0,1}";
                issues.push_back(issue);
            }
        }
    }
    return issues;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long col = 0; col < m.cols(); ++col) row.push_back(m(r, col));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, long rows, long cols) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (long r = 0; r < static_cast<long>(j.size()) && r < rows; ++r)
        for (long col = 0; col < static_cast<long>(j.at(r).size()) && col < cols; ++col)
            m(r, col) = j.at(r).at(col).get<double>();
    return m;
}

}  // namespace

std::string policy_to_json(const PolicyCoefficients& c) {
    json doc;
    const auto& s = c.s;
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
    json lo = json::array();
    for (int t = 2; t <= s.T; ++t) lo.push_back(c.window.lo_source[t]);
    doc["window_lo_source"] = std::move(lo);

    json grids = json::array();
    for (int t = 1; t <= s.T; ++t)
        for (int i = 1; i <= s.K[t]; ++i) {
            const auto& g = c.grid(t, i);
            grids.push_back(
                {{"t", t}, {"i", i}, {"lo", g.lo}, {"hi", g.hi}, {"points", g.points}});
        }
    doc["grids"] = std::move(grids);

    doc["x1"] = std::vector<double>(c.x1.data(), c.x1.data() + c.x1.size());
    doc["y1"] = std::vector<double>(c.y1.data(), c.y1.data() + c.y1.size());
    doc["objective"] = c.objective;
    doc["gap"] = c.gap;

    json blocks = json::array();
    for (int t = 2; t <= s.T; ++t)
        for (int tp = 1; tp <= t; ++tp)
            for (int i = 1; i <= s.K[tp]; ++i) {
                if (!c.window.admits(t, tp)) continue;
                const auto& blk = c.blocks[t][s.flat(tp, i)];
                if (blk.empty()) continue;
                blocks.push_back({{"t", t},
                                  {"tp", tp},
                                  {"i", i},
                                  {"Xbar", matrix_to_json(blk.Xbar)},
                                  {"Xhat", matrix_to_json(blk.Xhat)},
                                  {"Ydot", matrix_to_json(blk.Ydot)},
                                  {"Yddot", matrix_to_json(blk.Yddot)}});
            }
    doc["blocks"] = std::move(blocks);
    return doc.dump(1);
}

PolicyCoefficients policy_from_json(const std::string& text) {
    json doc = json::parse(text);
    PolicyCoefficients c;
    const auto& js = doc.at("stages");
    c.s.T = js.at("T").get<int>();
    auto read_counts = [&](const char* key) {
        std::vector<int> v(static_cast<size_t>(c.s.T) + 1, 0);
        for (int t = 1; t <= c.s.T; ++t) v[t] = js.at(key).at(t - 1).get<int>();
        return v;
    };
    c.s.K = read_counts("K");
    c.s.P = read_counts("P");
    c.s.Q = read_counts("Q");
    c.s.N = read_counts("N");

    c.window.lo_source.assign(static_cast<size_t>(c.s.T) + 1, 2);
    for (int t = 2; t <= c.s.T; ++t)
        c.window.lo_source[t] = doc.at("window_lo_source").at(t - 2).get<int>();

    c.grids.assign(static_cast<size_t>(c.s.T) + 1, {});
    for (int t = 1; t <= c.s.T; ++t) c.grids[t].resize(c.s.K[t]);
    for (const auto& jg : doc.at("grids")) {
        ParamGrid g;
        g.lo = jg.at("lo").get<double>();
        g.hi = jg.at("hi").get<double>();
        g.points = jg.at("points").get<std::vector<double>>();
        c.grids[jg.at("t").get<int>()][jg.at("i").get<size_t>() - 1] = g;
    }

    const auto x1 = doc.at("x1").get<std::vector<double>>();
    const auto y1 = doc.at("y1").get<std::vector<double>>();
    c.x1 = Eigen::Map<const Eigen::VectorXd>(x1.data(), static_cast<long>(x1.size()));
    c.y1 = Eigen::Map<const Eigen::VectorXd>(y1.data(), static_cast<long>(y1.size()));
    c.objective = doc.value("objective", 0.0);
    c.gap = doc.value("gap", 0.0);

    c.blocks.assign(static_cast<size_t>(c.s.T) + 1, {});
    for (int t = 2; t <= c.s.T; ++t) c.blocks[t].assign(c.s.params_up_to(t), {});
    for (const auto& jb : doc.at("blocks")) {
        const int t = jb.at("t").get<int>();
        const int tp = jb.at("tp").get<int>();
        const int i = jb.at("i").get<int>();
        const auto& grid = c.grid(tp, i);
        PolicyBlock blk;
        blk.Xbar = matrix_from_json(jb.at("Xbar"), c.s.P[t], grid.r());
        blk.Xhat = matrix_from_json(jb.at("Xhat"), c.s.P[t], grid.g());
        blk.Ydot = matrix_from_json(jb.at("Ydot"), c.s.Q[t], grid.g());
        blk.Yddot = matrix_from_json(jb.at("Yddot"), c.s.Q[t], grid.g());
        c.blocks[t][c.s.flat(tp, i)] = std::move(blk);
    }
    return c;
}

void save_policy(const PolicyCoefficients& c, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << policy_to_json(c) << "\n";
}

PolicyCoefficients load_policy(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open policy file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return policy_from_json(buf.str());
}

}  // namespace ddro

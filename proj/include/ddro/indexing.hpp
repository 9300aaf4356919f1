#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ddro {

/// Identifies the uncertain parameter observed as the i-th component of
/// stage t. Both indices are 1-based; (1,1) is the constant parameter.
struct ParamKey {
    int t = 0;
    int i = 0;
    bool operator==(const ParamKey&) const = default;
    std::string str() const { return "(" + std::to_string(t) + "," + std::to_string(i) + ")"; }
};

/// Stage-indexed dimensions of a multistage instance. All per-stage vectors
/// are sized T+1 and addressed 1-based; slot 0 is unused.
struct StageStructure {
    int T = 0;
    std::vector<int> K;  // uncertain parameters observed in stage t
    std::vector<int> P;  // continuous decision variables in stage t
    std::vector<int> Q;  // binary decision variables in stage t
    std::vector<int> N;  // constraint rows in the stage-t block

    StageStructure() = default;
    StageStructure(int T_, std::vector<int> K_, std::vector<int> P_, std::vector<int> Q_,
                   std::vector<int> N_)
        : T(T_), K(std::move(K_)), P(std::move(P_)), Q(std::move(Q_)), N(std::move(N_)) {}

    /// K^[t]: number of parameters observed up to and including stage t.
    int params_up_to(int t) const {
        int s = 0;
        for (int u = 1; u <= t; ++u) s += K[u];
        return s;
    }

    int total_params() const { return params_up_to(T); }

    /// 0-based position of parameter (t,i) in the flattened vector
    /// (xi_1, xi_2, ..., xi_T).
    int flat(int t, int i) const { return params_up_to(t - 1) + (i - 1); }
    int flat(const ParamKey& k) const { return flat(k.t, k.i); }

    ParamKey key_of_flat(int f) const {
        for (int t = 1; t <= T; ++t) {
            if (f < K[t]) return {t, f + 1};
            f -= K[t];
        }
        throw std::out_of_range("flat parameter index out of range");
    }

    /// All parameter keys observed up to stage t, in flat order.
    std::vector<ParamKey> params_through(int t) const {
        std::vector<ParamKey> out;
        for (int u = 1; u <= t; ++u)
            for (int i = 1; i <= K[u]; ++i) out.push_back({u, i});
        return out;
    }
};

}  // namespace ddro

#include "dpe/contribution.hpp"

#include "dpe/error.hpp"
#include "dpe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dpe {

NormProfile collect_norms(const Tensor3& queries, const Tensor3& keys, NormAveraging averaging) {
    require(queries.same_shape(keys), "queries and keys must share a shape");
    require(queries.length() >= 1, "norm collection needs at least one position");
    require(queries.width() >= 2 && queries.width() % 2 == 0, "head width must be even");

    NormProfile profile;
    profile.heads = queries.heads();
    profile.pairs = static_cast<int>(queries.width() / 2);
    profile.sample_count = queries.length();
    profile.averaging = averaging;
    profile.scores.assign(profile.heads * static_cast<std::size_t>(profile.pairs), 0.0);

    const auto L = queries.length();
    const auto P = static_cast<std::size_t>(profile.pairs);
    parallel_for(profile.heads, default_workers(), [&](std::size_t h) {
        std::vector<double> q_sum(P, 0.0), k_sum(P, 0.0), joint(P, 0.0);
        for (std::size_t m = 0; m < L; ++m) {
            const auto q = queries.row(h, m);
            const auto k = keys.row(h, m);
            for (std::size_t j = 0; j < P; ++j) {
                const double qn = std::hypot(static_cast<double>(q[2 * j]), static_cast<double>(q[2 * j + 1]));
                const double kn = std::hypot(static_cast<double>(k[2 * j]), static_cast<double>(k[2 * j + 1]));
                q_sum[j] += qn;
                k_sum[j] += kn;
                joint[j] += qn * kn;
            }
        }
        const double n = static_cast<double>(L);
        for (std::size_t j = 0; j < P; ++j) {
            profile.scores[h * P + j] =
                averaging == NormAveraging::Factored ? (q_sum[j] / n) * (k_sum[j] / n) : joint[j] / n;
        }
    });
    return profile;
}

std::vector<std::vector<int>> select_key_dims(const NormProfile& profile, int k) {
    require(k >= 0 && k <= profile.pairs,
            "top-k must lie in [0, " + std::to_string(profile.pairs) + "], got " + std::to_string(k));
    std::vector<std::vector<int>> out(profile.heads);
    for (std::size_t h = 0; h < profile.heads; ++h) {
        std::vector<int> order(static_cast<std::size_t>(profile.pairs));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return profile.score(h, a) > profile.score(h, b); });
        out[h].assign(order.begin(), order.begin() + k);
        std::sort(out[h].begin(), out[h].end());
    }
    return out;
}

}  // namespace dpe

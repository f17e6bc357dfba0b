#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Everything here is computed from the defining formulas in long
// double, without touching the library's kernels.

#include "dpe/attention.hpp"
#include "dpe/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using ld = long double;

inline ld theta(int j, int d, ld base) { return std::pow(base, -2.0L * j / d); }

inline std::vector<ld> thetas(int d, ld base) {
    std::vector<ld> t(static_cast<std::size_t>(d / 2));
    for (int j = 0; j < d / 2; ++j) t[static_cast<std::size_t>(j)] = theta(j, d, base);
    return t;
}

inline std::vector<ld> thetas_of(const dpe::FrequencyBasis& basis) {
    std::vector<ld> t;
    for (double v : basis.thetas()) t.push_back(v);
    return t;
}

// Dense 2x2 rotation of every pair.
inline std::vector<ld> rotate(const std::vector<ld>& th, const std::vector<float>& v, const std::vector<std::int64_t>& idx) {
    std::vector<ld> out(v.size());
    for (std::size_t j = 0; j < th.size(); ++j) {
        const ld a = th[j] * static_cast<ld>(idx[j]);
        const ld c = std::cos(a), s = std::sin(a);
        out[2 * j] = c * v[2 * j] - s * v[2 * j + 1];
        out[2 * j + 1] = s * v[2 * j] + c * v[2 * j + 1];
    }
    return out;
}

inline std::vector<ld> rotate(const std::vector<ld>& th, const std::vector<float>& v, std::int64_t pos) {
    return rotate(th, v, std::vector<std::int64_t>(th.size(), pos));
}

inline ld dot(const std::vector<ld>& a, const std::vector<ld>& b) {
    ld s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// sum_j q_j^T R(theta_j, r_j) k_j, term by term.
inline ld relative_score(const std::vector<ld>& th, const float* q, const float* k, const std::vector<std::int64_t>& r) {
    ld total = 0;
    for (std::size_t j = 0; j < th.size(); ++j) {
        const ld a = th[j] * static_cast<ld>(r[j]);
        const ld c = std::cos(a), s = std::sin(a);
        const ld q0 = q[2 * j], q1 = q[2 * j + 1], k0 = k[2 * j], k1 = k[2 * j + 1];
        total += q0 * (c * k0 - s * k1) + q1 * (s * k0 + c * k1);
    }
    return total;
}

// Causal softmax attention with an arbitrary per-pair effective index
// index(h, j, m, n). logit = scale * sum_j k_j^T R(idx) q_j.
using IndexFn = std::function<std::int64_t(std::size_t h, int j, std::int64_t m, std::int64_t n)>;

inline std::vector<ld> attention(const dpe::Tensor3& q, const dpe::Tensor3& k, const dpe::Tensor3& v,
                                 const std::vector<ld>& th, ld scale, const IndexFn& index) {
    const std::size_t H = q.heads(), L = q.length(), d = q.width();
    std::vector<ld> out(H * L * d, 0);
    std::vector<ld> logits(L);
    std::vector<std::int64_t> idx(th.size());
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t m = 0; m < L; ++m) {
            ld mx = -std::numeric_limits<ld>::infinity();
            for (std::size_t n = 0; n <= m; ++n) {
                for (std::size_t j = 0; j < th.size(); ++j) {
                    idx[j] = index(h, static_cast<int>(j), static_cast<std::int64_t>(m), static_cast<std::int64_t>(n));
                }
                // k^T R q = q . R^T k = q . R(-idx) k
                ld s = 0;
                for (std::size_t j = 0; j < th.size(); ++j) {
                    const ld a = th[j] * static_cast<ld>(idx[j]);
                    const ld c = std::cos(a), sn = std::sin(a);
                    const ld q0 = q.at(h, m, 2 * j), q1 = q.at(h, m, 2 * j + 1);
                    const ld k0 = k.at(h, n, 2 * j), k1 = k.at(h, n, 2 * j + 1);
                    s += k0 * (c * q0 - sn * q1) + k1 * (sn * q0 + c * q1);
                }
                logits[n] = scale * s;
                mx = std::max(mx, logits[n]);
            }
            ld z = 0;
            for (std::size_t n = 0; n <= m; ++n) {
                logits[n] = std::exp(logits[n] - mx);
                z += logits[n];
            }
            for (std::size_t n = 0; n <= m; ++n) {
                const ld p = logits[n] / z;
                for (std::size_t c = 0; c < d; ++c) out[(h * L + m) * d + c] += p * v.at(h, n, c);
            }
        }
    }
    return out;
}

// Absolute-position RoPE attention: rotate q by m and k by n, then dot.
inline std::vector<ld> absolute_rope_attention(const dpe::Tensor3& q, const dpe::Tensor3& k, const dpe::Tensor3& v,
                                               const std::vector<ld>& th, ld scale) {
    const std::size_t H = q.heads(), L = q.length(), d = q.width();
    std::vector<ld> out(H * L * d, 0);
    for (std::size_t h = 0; h < H; ++h) {
        std::vector<std::vector<ld>> rq(L), rk(L);
        for (std::size_t p = 0; p < L; ++p) {
            const auto qr = q.row(h, p), kr = k.row(h, p);
            rq[p] = rotate(th, std::vector<float>(qr.begin(), qr.end()), static_cast<std::int64_t>(p));
            rk[p] = rotate(th, std::vector<float>(kr.begin(), kr.end()), static_cast<std::int64_t>(p));
        }
        for (std::size_t m = 0; m < L; ++m) {
            std::vector<ld> w(m + 1);
            ld mx = -std::numeric_limits<ld>::infinity();
            for (std::size_t n = 0; n <= m; ++n) mx = std::max(mx, w[n] = scale * dot(rq[m], rk[n]));
            ld z = 0;
            for (auto& x : w) z += (x = std::exp(x - mx));
            for (std::size_t n = 0; n <= m; ++n) {
                for (std::size_t c = 0; c < d; ++c) out[(h * L + m) * d + c] += w[n] / z * v.at(h, n, c);
            }
        }
    }
    return out;
}

// Integer-arithmetic closed forms of the maps, written without shared helpers.
inline std::int64_t rerope(std::int64_t rel, std::int64_t w) { return rel < w ? rel : w; }
inline std::int64_t self_extend(std::int64_t rel, std::int64_t w, std::int64_t g) {
    if (rel <= w) return rel;
    std::int64_t q = 0, r = rel - w;
    while ((q + 1) * g <= r) ++q;  // floor by repeated comparison
    return q + w;
}
inline std::int64_t detection(std::int64_t rel, std::int64_t t, std::int64_t w, std::int64_t L) {
    if (rel <= w) return rel;
    // exact rational floor in 128-bit
    const __int128 num = static_cast<__int128>(rel - w) * t;
    return static_cast<std::int64_t>(num / L) + w;
}
inline std::int64_t dpe(std::int64_t rel, std::int64_t s, std::int64_t w, std::int64_t e, bool clamp) {
    if (rel <= w) return rel;
    const std::int64_t v = (rel - w) / s + w;
    return clamp ? std::min(v, e) : v;
}

// Top-k by exhaustive sort: descending score, then ascending index.
inline std::vector<int> top_k(const std::vector<double>& scores, int k) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
    });
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline dpe::Tensor3 random_tensor(std::mt19937_64& rng, std::size_t H, std::size_t L, std::size_t d, float scale = 1.0f) {
    dpe::Tensor3 t(H, L, d);
    std::normal_distribution<float> nd(0.0f, scale);
    for (auto& x : t.data()) x = nd(rng);
    return t;
}

inline ld max_rel_err(const dpe::Tensor3& got, const std::vector<ld>& want) {
    ld worst = 0;
    const auto data = got.data();
    for (std::size_t i = 0; i < want.size(); ++i) {
        const ld err = std::fabs(static_cast<ld>(data[i]) - want[i]) / std::max<ld>(1.0L, std::fabs(want[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

inline float max_abs_diff(const dpe::Tensor3& a, const dpe::Tensor3& b) {
    float worst = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
    return worst;
}

}  // namespace oracle

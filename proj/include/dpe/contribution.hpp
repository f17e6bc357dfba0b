#pragma once

// Per-pair 2-norm attention contribution and top-k key-dimension selection.
// |<q_j, k_j>| <= |q_j| |k_j| bounds the share of pair j in a logit, so pairs
// with large mean norms are the ones that steer attention.

#include "dpe/tensor.hpp"

#include <cstddef>
#include <vector>

namespace dpe {

enum class NormAveraging {
    Factored,  // mean_m |q_m^(j)| * mean_n |k_n^(j)|
    Joint,     // mean_m |q_m^(j)| * |k_m^(j)|
};

struct NormProfile {
    std::size_t heads = 0;
    int pairs = 0;
    std::vector<double> scores;  // heads x pairs
    std::size_t sample_count = 0;
    NormAveraging averaging = NormAveraging::Factored;

    double score(std::size_t h, int j) const { return scores[h * static_cast<std::size_t>(pairs) + static_cast<std::size_t>(j)]; }
};

NormProfile collect_norms(const Tensor3& queries, const Tensor3& keys,
                          NormAveraging averaging = NormAveraging::Factored);

// Indices of the k largest scores per head, ascending; ties go to the lower
// pair index.
std::vector<std::vector<int>> select_key_dims(const NormProfile& profile, int k);

}  // namespace dpe

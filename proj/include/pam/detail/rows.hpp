// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "pam/model.hpp"

namespace pam::detail {

/// Calls fn(first_flat_index, row_length) for each contiguous row (along the
/// first coordinate) of the sub-box of radius `inner` centred in `g`.
template <class Fn>
void for_each_row(const BoxGeometry& g, int inner, Fn&& fn)
{
    const int d = g.dim();
    const auto len = static_cast<std::size_t>(2 * inner + 1);
    std::vector<int> x(static_cast<std::size_t>(d), -inner);
    for (;;) {
        fn(g.index(x), len);
        int j = 1;
        for (; j < d; ++j) {
            if (x[static_cast<std::size_t>(j)] < inner) {
                ++x[static_cast<std::size_t>(j)];
                break;
            }
            x[static_cast<std::size_t>(j)] = -inner;
        }
        if (j >= d) return;
    }
}

/// Flat offsets of the jumps of tau inside `g` together with their weights.
struct StencilTerm {
    std::ptrdiff_t offset;
    double weight;
};

inline std::vector<StencilTerm> stencil(const BoxGeometry& g, const StepDistribution& tau)
{
    std::vector<StencilTerm> s;
    for (const auto& j : tau.jumps()) s.push_back({g.offset(j.site), j.probability});
    return s;
}

/// Copies the values of a padded field on the centred sub-box of radius r.
inline std::vector<double> crop(const BoxGeometry& from, const std::vector<double>& values, int r)
{
    BoxGeometry to(from.dim(), r);
    std::vector<double> out(to.size());
    std::size_t k = 0;
    for_each_row(from, r, [&](std::size_t start, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) out[k++] = values[start + i];
    });
    return out;
}

}  // namespace pam::detail

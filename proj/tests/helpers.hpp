#pragma once

#include <cmath>
#include <vector>

#include "wmps/dense.hpp"
#include "wmps/mps.hpp"
#include "wmps/rng.hpp"
#include "wmps/tensor.hpp"

namespace wmps::testing {

inline DenseTensor random_tensor(std::vector<Label> labels, std::vector<std::size_t> dims, Rng &rng) {
    std::size_t n = 1;
    for(auto d : dims) n *= d;
    std::vector<cplx> data(n);
    for(auto &x : data) x = {rng.normal(), rng.normal()};
    return {std::move(labels), std::move(dims), std::move(data)};
}

inline double max_abs_diff(const std::vector<cplx> &a, const std::vector<cplx> &b) {
    double m = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return a.size() == b.size() ? m : INFINITY;
}

inline MpsState random_mps(std::size_t n, Rng &rng) {
    const auto psi = DenseState::random(n, rng);
    return MpsState::from_dense(psi.amplitudes(), n);
}

} // namespace wmps::testing

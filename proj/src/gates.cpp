#include "wmps/gates.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace wmps {

namespace {
    constexpr cplx I{0.0, 1.0};
}

double unitarity_error(const Eigen::MatrixXcd &u) {
    const auto d = u.rows();
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd haar_unitary(std::size_t d, Rng &rng) {
    if(d == 0) throw std::invalid_argument("haar_unitary: dimension must be positive");
    const auto       n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXcd z(n, n);
    // Column-major fill order is part of the determinism contract.
    for(Eigen::Index j = 0; j < n; ++j)
        for(Eigen::Index i = 0; i < n; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            z(i, j)         = cplx{re, im} * (1.0 / std::numbers::sqrt2);
        }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd                       q = qr.householderQ();
    const Eigen::MatrixXcd                &r = qr.matrixQR();
    for(Eigen::Index i = 0; i < n; ++i) {
        const double mag = std::abs(r(i, i));
        if(mag > 0.0) q.col(i) *= r(i, i) / mag;
    }
    return q;
}

Eigen::Matrix4cd weak_measurement_gate(double theta) {
    if(theta < 0.0 || theta > std::numbers::pi / 2)
        fmt::print(stderr, "warning: weak-measurement angle {} outside [0, pi/2]\n", theta);
    const double     c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0)            = c;
    m(0, 1)            = I * s;
    m(1, 0)            = I * s;
    m(1, 1)            = c;
    m(2, 2)            = 1.0;
    m(3, 3)            = 1.0;
    return m;
}

Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd h;
    h << 1.0, 1.0, 1.0, -1.0;
    return h * (1.0 / std::numbers::sqrt2);
}

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd x;
    x << 0.0, 1.0, 1.0, 0.0;
    return x;
}

Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd z;
    z << 1.0, 0.0, 0.0, -1.0;
    return z;
}

Eigen::Matrix2cd z_rotation(double angle) {
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    r(0, 0)            = std::exp(I * angle);
    r(1, 1)            = std::exp(-I * angle);
    return r;
}

Eigen::Matrix4cd zz_rotation(double angle) {
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    r(0, 0)            = std::exp(I * angle);
    r(1, 1)            = std::exp(-I * angle);
    r(2, 2)            = std::exp(-I * angle);
    r(3, 3)            = std::exp(I * angle);
    return r;
}

Eigen::Matrix4cd swap_gate() {
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    s(0, 0)            = 1.0;
    s(1, 2)            = 1.0;
    s(2, 1)            = 1.0;
    s(3, 3)            = 1.0;
    return s;
}

GateSequence native_decomposition(double theta) {
    using namespace qubit;
    return {
        {hadamard(), {ancilla}},
        {z_rotation(theta / 2), {ancilla}},
        {zz_rotation(theta / 2), {ancilla, physical}},
        {hadamard(), {ancilla}},
    };
}

Eigen::MatrixXcd embed(const GateMatrix &gate, std::size_t n_sites) {
    const std::size_t k = gate.sites.size();
    if(k == 0 || k > 2 || gate.dim() != (std::size_t{1} << k))
        throw std::invalid_argument(fmt::format("embed: gate of dim {} on {} sites", gate.dim(), k));
    for(auto s : gate.sites)
        if(s >= n_sites) throw std::out_of_range(fmt::format("embed: site {} outside {} sites", s, n_sites));
    if(k == 2 && gate.sites[0] == gate.sites[1]) throw std::invalid_argument("embed: repeated site");

    const std::size_t dim = std::size_t{1} << n_sites;
    auto              bit = [&](std::size_t x, std::size_t site) { return (x >> (n_sites - 1 - site)) & 1U; };
    std::size_t       mask = 0;
    for(auto s : gate.sites) mask |= std::size_t{1} << (n_sites - 1 - s);

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for(std::size_t row = 0; row < dim; ++row)
        for(std::size_t col = 0; col < dim; ++col) {
            if((row & ~mask) != (col & ~mask)) continue;
            std::size_t r = 0, c = 0;
            for(auto s : gate.sites) {
                r = 2 * r + bit(row, s);
                c = 2 * c + bit(col, s);
            }
            out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                gate.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    return out;
}

Eigen::MatrixXcd sequence_product(const GateSequence &seq, std::size_t n_sites) {
    const auto       dim = static_cast<Eigen::Index>(std::size_t{1} << n_sites);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(dim, dim);
    for(const auto &g : seq) acc = embed(g, n_sites) * acc;
    return acc;
}

DenseTensor gate_tensor(const Eigen::Matrix4cd &gate, const Label &out_left, const Label &out_right,
                        const Label &in_left, const Label &in_right) {
    RowMatrix m = gate;
    return DenseTensor::from_matrix(m, {out_left, out_right, in_left, in_right}, {2, 2, 2, 2});
}

} // namespace wmps

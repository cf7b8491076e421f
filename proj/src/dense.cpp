#include "wmps/dense.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "wmps/gates.hpp"

namespace wmps {

namespace {
    // One qubit of headroom holds the transient ancilla of a weak measurement.
    void check_register(std::size_t n) {
        if(n == 0 || n > k_dense_max_qubits + 1)
            throw std::invalid_argument(fmt::format("dense register of {} qubits outside 1..{}", n, k_dense_max_qubits + 1));
    }

    void check_qubits(std::size_t n) {
        if(n == 0 || n > k_dense_max_qubits)
            throw std::invalid_argument(fmt::format("dense state of {} qubits outside 1..{}", n, k_dense_max_qubits));
    }

    // Append one ancilla in |0> as the least significant qubit.
    DenseState with_ancilla(const DenseState &s) {
        std::vector<cplx> out(s.amplitudes().size() * 2);
        for(std::size_t x = 0; x < s.amplitudes().size(); ++x) out[2 * x] = s.amplitudes()[x];
        return DenseState(std::move(out), s.qubits() + 1);
    }

    // Keep the ancilla component `outcome`, unnormalized, and drop the ancilla.
    DenseState project_ancilla(const DenseState &s, int outcome) {
        std::vector<cplx> out(s.amplitudes().size() / 2);
        for(std::size_t x = 0; x < out.size(); ++x) out[x] = s.amplitudes()[2 * x + static_cast<std::size_t>(outcome)];
        return DenseState(std::move(out), s.qubits() - 1);
    }

    double norm2(const std::vector<cplx> &v) {
        double acc = 0.0;
        for(const auto &x : v) acc += std::norm(x);
        return acc;
    }

    // Couple site j to a new ancilla; returns the extended register.
    DenseState coupled(const DenseState &s, std::size_t site, const Eigen::MatrixXcd &m) {
        auto ext = with_ancilla(s);
        const std::size_t sites[2]{site, s.qubits()};
        dense_apply_gate(ext, m, sites);
        return ext;
    }
} // namespace

DenseState::DenseState(std::size_t n) : n_(n) {
    check_register(n);
    amps_.assign(std::size_t{1} << n, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

DenseState::DenseState(std::vector<cplx> amplitudes, std::size_t n) : n_(n), amps_(std::move(amplitudes)) {
    check_register(n);
    if(amps_.size() != (std::size_t{1} << n))
        throw std::invalid_argument(fmt::format("{} amplitudes for {} qubits", amps_.size(), n));
}

DenseState DenseState::neel(std::size_t n) {
    check_qubits(n);
    DenseState  s(n);
    std::size_t index = 0;
    for(std::size_t q = 0; q < n; ++q) index = 2 * index + (q % 2);
    s.amps_[0]     = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

DenseState DenseState::random(std::size_t n, Rng &rng) {
    check_qubits(n);
    DenseState s(n);
    for(auto &a : s.amps_) {
        const double re = rng.normal();
        const double im = rng.normal();
        a               = {re, im};
    }
    s.normalize();
    return s;
}

double DenseState::norm() const { return std::sqrt(norm2(amps_)); }

void DenseState::normalize() {
    const double nrm = norm();
    if(!(nrm > 0.0)) throw std::runtime_error("cannot normalize a zero state");
    for(auto &a : amps_) a /= nrm;
}

void dense_apply_gate(DenseState &state, const Eigen::MatrixXcd &gate, std::span<const std::size_t> sites) {
    const std::size_t n = state.qubits();
    const std::size_t k = sites.size();
    if(k == 0 || gate.rows() != (Eigen::Index{1} << k) || gate.cols() != gate.rows())
        throw std::invalid_argument(fmt::format("gate of dim {} on {} sites", gate.rows(), k));
    std::vector<std::size_t> bits;
    for(auto s : sites) {
        if(s >= n) throw std::out_of_range(fmt::format("site {} outside register of {}", s, n));
        bits.push_back(n - 1 - s);
    }
    std::size_t mask = 0;
    for(auto b : bits) mask |= std::size_t{1} << b;

    const std::size_t        d = std::size_t{1} << k;
    std::vector<std::size_t> offsets(d);
    for(std::size_t local = 0; local < d; ++local) {
        std::size_t off = 0;
        for(std::size_t j = 0; j < k; ++j)
            if((local >> (k - 1 - j)) & 1U) off |= std::size_t{1} << bits[j];
        offsets[local] = off;
    }
    auto            &amps = state.amplitudes();
    Eigen::VectorXcd in(static_cast<Eigen::Index>(d)), out(static_cast<Eigen::Index>(d));
    for(std::size_t base = 0; base < amps.size(); ++base) {
        if(base & mask) continue;
        for(std::size_t l = 0; l < d; ++l) in(static_cast<Eigen::Index>(l)) = amps[base | offsets[l]];
        out.noalias() = gate * in;
        for(std::size_t l = 0; l < d; ++l) amps[base | offsets[l]] = out(static_cast<Eigen::Index>(l));
    }
}

double dense_weak_measure_layer(DenseState &state, const LayerPlan &plan, std::span<const int> outcomes) {
    if(plan.size() != state.qubits() || outcomes.size() != state.qubits())
        throw std::invalid_argument("dense_weak_measure_layer: plan/outcome length mismatch");
    const Eigen::MatrixXcd m   = weak_measurement_gate(plan.theta);
    DenseState             cur = state;
    for(std::size_t j = 0; j < state.qubits(); ++j) {
        if(!plan.measured[j]) continue;
        if(outcomes[j] != 0 && outcomes[j] != 1)
            throw std::invalid_argument(fmt::format("outcome {} at site {}", outcomes[j], j));
        cur = project_ancilla(coupled(cur, j, m), outcomes[j]);
    }
    const double joint = norm2(cur.amplitudes());
    if(joint < 1e-300) throw std::runtime_error("dense_weak_measure_layer: zero-probability branch");
    cur.normalize();
    state = std::move(cur);
    return joint;
}

double dense_outcome_probability(const DenseState &state, const LayerPlan &plan, std::span<const int> outcomes) {
    DenseState copy = state;
    try {
        return dense_weak_measure_layer(copy, plan, outcomes);
    } catch(const std::runtime_error &) {
        return 0.0;
    }
}

MeasurementRecord dense_sample_weak_layer(DenseState &state, const LayerPlan &plan, Rng &rng) {
    if(plan.size() != state.qubits()) throw std::invalid_argument("dense_sample_weak_layer: plan length mismatch");
    const Eigen::MatrixXcd m = weak_measurement_gate(plan.theta);
    MeasurementRecord      record;
    record.sites.resize(state.qubits());
    DenseState cur = state;
    for(std::size_t j = 0; j < state.qubits(); ++j) {
        if(!plan.measured[j]) continue;
        const auto   ext   = coupled(cur, j, m);
        const double total = norm2(ext.amplitudes());
        auto         zero  = project_ancilla(ext, 0);
        const double p0    = norm2(zero.amplitudes()) / total;
        const int    s     = rng.uniform() < p0 ? 0 : 1;
        cur                = s == 0 ? std::move(zero) : project_ancilla(ext, 1);
        cur.normalize();
        record.sites[j] = {true, s, s == 0 ? p0 : 1.0 - p0};
    }
    state = std::move(cur);
    return record;
}

double dense_marginal_zero(const DenseState &state, std::size_t site) {
    if(site >= state.qubits()) throw std::out_of_range("dense_marginal_zero: site out of range");
    const std::size_t bit = std::size_t{1} << (state.qubits() - 1 - site);
    double            p0 = 0.0, total = 0.0;
    for(std::size_t x = 0; x < state.amplitudes().size(); ++x) {
        const double w = std::norm(state.amplitudes()[x]);
        total += w;
        if(!(x & bit)) p0 += w;
    }
    return p0 / total;
}

double dense_entropy(const DenseState &state, std::size_t cut) {
    if(cut == 0 || cut >= state.qubits())
        throw std::out_of_range(fmt::format("cut {} outside 1..{}", cut, state.qubits() - 1));
    const auto rows = Eigen::Index{1} << cut;
    const auto cols = Eigen::Index{1} << (state.qubits() - cut);
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
        state.amplitudes().data(), rows, cols);
    const Eigen::MatrixXcd                          rho = psi * psi.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
    const double                                    trace   = rho.trace().real();
    double                                          entropy = 0.0;
    for(Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double lambda = eig.eigenvalues()(i) / trace;
        if(lambda >= 1e-14) entropy -= lambda * std::log(lambda);
    }
    return entropy;
}

TrajectoryResult dense_run_trajectory(const CircuitConfig &config, std::uint64_t trajectory) {
    config.validate();
    if(config.n_qubits > k_dense_max_qubits)
        throw std::invalid_argument(fmt::format("dense trajectories are capped at {} qubits", k_dense_max_qubits));
    TrajectoryResult result;
    result.trajectory = trajectory;
    result.seed       = trajectory_seed(config, trajectory);
    TrajectoryRng rng(result.seed);

    const std::size_t n     = config.n_qubits;
    auto              state = DenseState::neel(n);

    auto unitary_layer = [&](bool even) {
        for(std::size_t left = even ? 1 : 0; left + 1 < n; left += 2) {
            const std::size_t sites[2]{left, left + 1};
            dense_apply_gate(state, haar_unitary(4, rng.unitaries), sites);
        }
        if(even && config.periodic) {
            const std::size_t sites[2]{n - 1, 0};
            dense_apply_gate(state, haar_unitary(4, rng.unitaries), sites);
        }
    };
    auto measurement_layer = [&](int layer, std::size_t t) {
        const auto plan = draw_layer_plan(n, config.p, config.theta, rng.masks);
        auto       rec  = dense_sample_weak_layer(state, plan, rng.outcomes);
        result.records.push_back({t, layer, std::move(rec)});
    };

    for(std::size_t t = 1; t <= config.t_max; ++t) {
        if(config.order == LayerOrder::UMUM) {
            unitary_layer(false);
            measurement_layer(0, t);
            unitary_layer(true);
            measurement_layer(1, t);
        } else {
            unitary_layer(false);
            unitary_layer(true);
            measurement_layer(0, t);
            measurement_layer(1, t);
        }
        const double left  = dense_entropy(state, n / 2);
        const double right = dense_entropy(state, n / 2 + 1);
        result.s_left.push_back(left);
        result.s_right.push_back(right);
        result.s_mean.push_back(0.5 * (left + right));
    }
    return result;
}

} // namespace wmps

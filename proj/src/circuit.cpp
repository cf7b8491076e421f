#include "wmps/circuit.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "wmps/gates.hpp"

namespace wmps {

void CircuitConfig::validate() const {
    if(n_qubits < 4 || n_qubits % 2 != 0)
        throw std::invalid_argument(fmt::format("n_qubits must be even and >= 4, got {}", n_qubits));
    if(!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("p must lie in [0, 1], got {}", p));
    if(chi_max == 0) throw std::invalid_argument("chi_max must be positive");
    if(!(cutoff >= 0.0)) throw std::invalid_argument("cutoff must be non-negative");
    if(t_cutoff > t_max) throw std::invalid_argument(fmt::format("t_cutoff {} exceeds t_max {}", t_cutoff, t_max));
    if(n_trajectories == 0) throw std::invalid_argument("n_trajectories must be positive");
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed)
    : unitaries(splitmix64(seed ^ static_cast<std::uint64_t>(Stream::unitaries))),
      masks(splitmix64(seed ^ (static_cast<std::uint64_t>(Stream::masks) << 32U))),
      outcomes(splitmix64(seed ^ (static_cast<std::uint64_t>(Stream::outcomes) << 48U))) {}

std::uint64_t trajectory_seed(const CircuitConfig &config, std::uint64_t trajectory) {
    return derive_seed(config.master_seed, config.seed_group, trajectory, 0);
}

TrajectoryError::TrajectoryError(std::uint64_t trajectory_, std::size_t t_, const std::string &what)
    : std::runtime_error(fmt::format("trajectory {} failed at t={}: {}", trajectory_, t_, what)),
      trajectory(trajectory_), t(t_) {}

namespace {
    Eigen::Matrix4cd next_unitary(TrajectoryRng &rng, const StepOptions &opts) {
        if(opts.unitary_source) return opts.unitary_source();
        return haar_unitary(4, rng.unitaries);
    }

    void unitary_layer(MpsState &state, bool even, TrajectoryRng &rng, const CircuitConfig &config,
                       const StepOptions &opts, StepLog &log) {
        const std::size_t n      = state.size();
        const auto        params = config.truncation();
        for(std::size_t left = even ? 1 : 0; left + 1 < n; left += 2) {
            const auto u = next_unitary(rng, opts);
            state.apply_two_site_gate(u, left, params);
            ++log.unitary_count;
            if(opts.capture_gates) log.gates.push_back({u, left, left + 1});
        }
        if(even && config.periodic) {
            const auto u = next_unitary(rng, opts);
            log.swap_count += state.apply_gate_with_swaps(u, n - 1, 0, params);
            ++log.unitary_count;
            if(opts.capture_gates) log.gates.push_back({u, n - 1, 0});
        }
    }

    void measurement_layer(MpsState &state, TrajectoryRng &rng, const CircuitConfig &config, const StepOptions &opts,
                           StepLog &log) {
        const std::size_t layer = log.plans.size();
        auto              plan  = draw_layer_plan(state.size(), config.p, config.theta, rng.masks);
        MeasurementRecord record;
        if(opts.forced_outcomes) {
            record = force_measurement_layer(state, plan, opts.forced_outcomes->at(layer), config.truncation());
        } else if(plan.measured_count() == 0) {
            record.sites.resize(state.size());
        } else if(config.method == MeasurementMethod::born) {
            record = born_measure_layer(state, plan, rng.outcomes, config.truncation());
        } else {
            record = sample_measurement_layer(state, plan, rng.outcomes, config.truncation());
        }
        log.plans.push_back(std::move(plan));
        log.records.push_back(std::move(record));
    }
} // namespace

StepLog time_step(MpsState &state, std::size_t /*t*/, TrajectoryRng &rng, const CircuitConfig &config,
                  const StepOptions &opts) {
    StepLog log;
    if(config.order == LayerOrder::UMUM) {
        unitary_layer(state, false, rng, config, opts, log);
        measurement_layer(state, rng, config, opts, log);
        unitary_layer(state, true, rng, config, opts, log);
        measurement_layer(state, rng, config, opts, log);
    } else {
        unitary_layer(state, false, rng, config, opts, log);
        unitary_layer(state, true, rng, config, opts, log);
        measurement_layer(state, rng, config, opts, log);
        measurement_layer(state, rng, config, opts, log);
    }
    return log;
}

TrajectoryResult run_trajectory(const CircuitConfig &config, std::uint64_t trajectory) {
    config.validate();
    TrajectoryResult result;
    result.trajectory = trajectory;
    result.seed       = trajectory_seed(config, trajectory);
    TrajectoryRng rng(result.seed);

    auto              state = MpsState::neel(config.n_qubits);
    const std::size_t half  = config.n_qubits / 2;
    for(std::size_t t = 1; t <= config.t_max; ++t) {
        try {
            auto log = time_step(state, t, rng, config);
            for(std::size_t k = 0; k < log.records.size(); ++k)
                result.records.push_back({t, static_cast<int>(k), std::move(log.records[k])});
            result.peak_bond = std::max(result.peak_bond, state.max_bond_dim());
            // Both cuts read the same post-step state.
            const double left  = state.bond_entropy(half);
            const double right = state.bond_entropy(half + 1);
            result.s_left.push_back(left);
            result.s_right.push_back(right);
            result.s_mean.push_back(0.5 * (left + right));
        } catch(const std::exception &e) {
            throw TrajectoryError(trajectory, t, e.what());
        }
    }
    result.truncation_error = state.truncation_error();
    return result;
}

double long_time_entropy(const TrajectoryResult &result, std::size_t t_cutoff) {
    const std::size_t t_max = result.s_mean.size();
    if(t_cutoff == 0 || t_cutoff > t_max)
        throw std::invalid_argument(fmt::format("empty long-time window [{}, {}]", t_cutoff, t_max));
    double acc = 0.0;
    for(std::size_t t = t_cutoff; t <= t_max; ++t) acc += result.s_mean[t - 1];
    return acc / static_cast<double>(t_max - t_cutoff + 1);
}

double long_time_entropy(std::span<const TrajectoryResult> ensemble, std::size_t t_cutoff) {
    if(ensemble.empty()) throw std::invalid_argument("empty ensemble");
    double acc = 0.0;
    for(const auto &r : ensemble) acc += long_time_entropy(r, t_cutoff);
    return acc / static_cast<double>(ensemble.size());
}

std::string to_string(LayerOrder order) { return order == LayerOrder::UMUM ? "UMUM" : "UUMM"; }
std::string to_string(MeasurementMethod method) { return method == MeasurementMethod::markov ? "markov" : "born"; }

LayerOrder parse_layer_order(const std::string &s) {
    if(s == "UMUM") return LayerOrder::UMUM;
    if(s == "UUMM") return LayerOrder::UUMM;
    throw std::invalid_argument(fmt::format("unknown layer order '{}'", s));
}

MeasurementMethod parse_measurement_method(const std::string &s) {
    if(s == "markov") return MeasurementMethod::markov;
    if(s == "born") return MeasurementMethod::born;
    throw std::invalid_argument(fmt::format("unknown measurement method '{}'", s));
}

} // namespace wmps

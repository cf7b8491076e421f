#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wmps/mps.hpp"
#include "wmps/rng.hpp"
#include "wmps/sampler.hpp"

namespace wmps {

enum class LayerOrder { UMUM, UUMM };
enum class MeasurementMethod { markov, born };

struct CircuitConfig {
    std::size_t       n_qubits = 8;
    double            p        = 1.0;
    double            theta    = std::numbers::pi / 4;
    std::string       theta_label; // exact form such as "pi/6", kept for plotting
    std::size_t       chi_max        = 1000;
    double            cutoff         = 1e-6;
    std::size_t       t_max          = 30;
    std::size_t       t_cutoff       = 20;
    std::uint64_t     master_seed    = 0;
    std::size_t       n_trajectories = 1;
    std::uint64_t     seed_group     = 0; // configs sharing a group share trajectory seeds
    LayerOrder        order          = LayerOrder::UMUM;
    MeasurementMethod method         = MeasurementMethod::markov;
    bool              periodic       = true;

    void                           validate() const;
    [[nodiscard]] TruncationParams truncation() const { return {chi_max, cutoff}; }
};

/// The three independent random streams of one trajectory.
struct TrajectoryRng {
    explicit TrajectoryRng(std::uint64_t trajectory_seed);

    Rng unitaries;
    Rng masks;
    Rng outcomes;
};

std::uint64_t trajectory_seed(const CircuitConfig &config, std::uint64_t trajectory);

struct AppliedGate {
    Eigen::Matrix4cd matrix;
    std::size_t      site_a = 0;
    std::size_t      site_b = 0;
};

struct StepOptions {
    bool capture_gates = false;
    /// Imposed ancilla outcomes, one vector per measurement layer of the step.
    const std::vector<std::vector<int>> *forced_outcomes = nullptr;
    /// Replaces Haar sampling when set; called once per brickwall gate.
    std::function<Eigen::Matrix4cd()> unitary_source;
};

struct StepLog {
    std::vector<LayerPlan>         plans;
    std::vector<MeasurementRecord> records;
    std::vector<AppliedGate>       gates;
    std::size_t                    unitary_count = 0;
    std::size_t                    swap_count    = 0;
};

/// One time step: two brickwall layers and two measurement layers.
///
/// UMUM order: gates on (0,1),(2,3),...; measurement; gates on (1,2),...,
/// (N-3,N-2) and, when periodic, (N-1,0) through a swap chain; measurement.
/// UUMM applies both unitary layers before both measurement layers.
StepLog time_step(MpsState &state, std::size_t t, TrajectoryRng &rng, const CircuitConfig &config,
                  const StepOptions &opts = {});

struct LayerRecord {
    std::size_t       t     = 0;
    int               layer = 0; // 0 or 1 within the step
    MeasurementRecord record;
};

struct TrajectoryResult {
    std::uint64_t            trajectory = 0;
    std::uint64_t            seed       = 0;
    std::vector<double>      s_left;  // cut N/2, one entry per step t = 1..t_max
    std::vector<double>      s_right; // cut N/2 + 1
    std::vector<double>      s_mean;
    std::vector<LayerRecord> records;
    std::size_t              peak_bond        = 1;
    double                   truncation_error = 0.0;
};

/// Failure inside a trajectory; carries the step at which it happened.
class TrajectoryError : public std::runtime_error {
  public:
    TrajectoryError(std::uint64_t trajectory, std::size_t t, const std::string &what);
    std::uint64_t trajectory;
    std::size_t   t;
};

TrajectoryResult run_trajectory(const CircuitConfig &config, std::uint64_t trajectory);

/// Mean of the two-cut average over t in [t_cutoff, t_max].
double long_time_entropy(const TrajectoryResult &result, std::size_t t_cutoff);
double long_time_entropy(std::span<const TrajectoryResult> ensemble, std::size_t t_cutoff);

std::string to_string(LayerOrder order);
std::string to_string(MeasurementMethod method);
LayerOrder        parse_layer_order(const std::string &s);
MeasurementMethod parse_measurement_method(const std::string &s);

} // namespace wmps

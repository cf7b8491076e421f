#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmps/circuit.hpp"

namespace wmps {

struct ExperimentSpec {
    std::vector<CircuitConfig> configs;
    std::filesystem::path      output_dir    = "wmps_out";
    unsigned                   threads       = 1;
    bool                       write_records = true;
};

struct TimeStats {
    double                mean = 0.0;
    double                std  = 0.0;
    std::optional<double> sem; // absent for a single trajectory
};

/// Ensemble statistics of one config. The two-cut average is taken per
/// trajectory and time before any ensemble statistic; variances use n - 1.
struct EnsembleStats {
    std::string              config_id;
    CircuitConfig            config;
    std::vector<TimeStats>   per_t; // t = 1..t_max
    double                   s_inf     = 0.0;
    double                   s_inf_std = 0.0; // spread of per-trajectory long-time averages
    std::optional<double>    s_inf_sem;
    std::size_t              n_trajectories = 0; // successful
    std::size_t              n_failed       = 0;
    bool                     failed         = false;
    std::vector<std::string> failures;
    std::size_t              peak_bond    = 1;
    double                   wall_seconds = 0.0;

    bool operator==(const EnsembleStats &) const;
};

bool operator==(const TimeStats &a, const TimeStats &b);
bool operator==(const CircuitConfig &a, const CircuitConfig &b);

/// Stable, filesystem-safe id such as "c003_N12_theta-pi_6_p1_chi256".
std::string config_id(const CircuitConfig &config, std::size_t index);

EnsembleStats compute_stats(const CircuitConfig &config, std::span<const TrajectoryResult> results);

/// Threads to use: an explicit flag wins; otherwise the spec value, capped by
/// the WMPS_THREADS environment variable when set. 0 means all cores.
unsigned resolve_threads(std::optional<unsigned> flag, unsigned spec_threads);

struct EnsembleRun {
    std::vector<TrajectoryResult> results; // successful trajectories, by index
    std::vector<std::string>      failures;
    double                        wall_seconds = 0.0;
};

/// Run every trajectory of every config on a shared pool. Output is
/// independent of the thread count: each trajectory's randomness derives only
/// from (master_seed, seed_group, trajectory index).
std::vector<EnsembleRun> run_ensembles(std::span<const CircuitConfig> configs, unsigned threads);

EnsembleStats stats_from_run(const CircuitConfig &config, const std::string &id, const EnsembleRun &run);

/// Run a spec and write, per config, `<id>.raw.csv`, `<id>.stats.json`, and
/// (optionally) `<id>.records/traj_<k>.txt`. Also writes `manifest.json`.
std::vector<EnsembleStats> run_experiment(const ExperimentSpec &spec, std::ostream *log = nullptr);

// ---- Config and spec files ----

/// Parse "pi/6", "2pi/3", "2*pi/3", "pi", or a plain number.
double parse_angle(const std::string &text);

CircuitConfig  parse_config(const nlohmann::json &j, const CircuitConfig &base = {});
nlohmann::json config_to_json(const CircuitConfig &config);
ExperimentSpec parse_spec(const nlohmann::json &j);
ExperimentSpec load_spec(const std::filesystem::path &path);

// ---- Output files ----

inline constexpr const char *k_raw_header = "config_id,trajectory,t,S_cut_left,S_cut_right,S_mean";

void write_raw(std::ostream &os, const std::string &id, std::span<const TrajectoryResult> results);

struct RawRow {
    std::string   config_id;
    std::uint64_t trajectory = 0;
    std::size_t   t          = 0;
    double        s_left = 0.0, s_right = 0.0, s_mean = 0.0;
};
std::vector<RawRow> read_raw(std::istream &is);

nlohmann::json stats_to_json(const EnsembleStats &stats);
EnsembleStats  stats_from_json(const nlohmann::json &j);
void           write_stats(const std::filesystem::path &path, const EnsembleStats &stats);
EnsembleStats  read_stats(const std::filesystem::path &path);

/// One line per layer: "t<TAB>layer<TAB>m,o,q<TAB>..." with one
/// (measured, outcome, conditional probability) triple per site; outcome is -1
/// for unmeasured sites.
void        write_records(std::ostream &os, const TrajectoryResult &result);
std::string record_line(std::size_t t, int layer, const MeasurementRecord &record);
LayerRecord parse_record_line(const std::string &line);

// ---- Analysis ----

enum class FitModel { log, linear };

struct ScalingPoint {
    double                n     = 0.0;
    double                s_inf = 0.0;
    std::optional<double> sem;
};

struct FitResult {
    double              slope          = 0.0;
    double              intercept      = 0.0;
    double              slope_stderr   = 0.0;
    double              intercept_stderr = 0.0;
    std::vector<double> residuals; // data - model, per point
    double              chi2 = 0.0; // weighted sum of squared residuals
    bool                weighted = false;
};

/// Weighted least squares of S_inf against ln N (log) or N (linear), with
/// weights 1/sem^2 when every point carries a positive sem, else unweighted.
FitResult fit_scaling(std::span<const ScalingPoint> points, FitModel model);

std::string to_string(FitModel model);
FitModel    parse_fit_model(const std::string &s);

struct ChiScanPoint {
    std::size_t           chi   = 0;
    double                s_inf = 0.0;
    std::optional<double> sem;
    std::size_t           peak_bond = 0;
};

/// Rerun one ensemble at each bond dimension with identical trajectory seeds.
std::vector<ChiScanPoint> chi_convergence_scan(const CircuitConfig &config, std::span<const std::size_t> chis,
                                               unsigned threads);

} // namespace wmps

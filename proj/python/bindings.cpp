#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wmps/circuit.hpp"
#include "wmps/dense.hpp"
#include "wmps/gates.hpp"
#include "wmps/harness.hpp"
#include "wmps/mps.hpp"
#include "wmps/oracle_check.hpp"
#include "wmps/sampler.hpp"

namespace py = pybind11;
using namespace wmps;

namespace {
LayerPlan make_plan(const std::vector<bool> &measured, double theta) { return {measured, theta}; }

py::object to_python(const nlohmann::json &j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object &o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}
} // namespace

PYBIND11_MODULE(_wmps, m) {
    m.doc() = "Weak-measurement MPS trajectory simulator";

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", &Rng::uniform)
        .def("normal", &Rng::normal)
        .def("next_u64", &Rng::next_u64);
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("group"), py::arg("trajectory"), py::arg("stream"));

    py::class_<TruncationParams>(m, "TruncationParams")
        .def(py::init<std::size_t, double>(), py::arg("chi_max") = 1000, py::arg("cutoff") = 1e-6)
        .def_readwrite("chi_max", &TruncationParams::chi_max)
        .def_readwrite("cutoff", &TruncationParams::cutoff);
    m.attr("no_truncation") = no_truncation;

    py::enum_<LayerOrder>(m, "LayerOrder").value("UMUM", LayerOrder::UMUM).value("UUMM", LayerOrder::UUMM);
    py::enum_<MeasurementMethod>(m, "MeasurementMethod")
        .value("markov", MeasurementMethod::markov)
        .value("born", MeasurementMethod::born);

    py::class_<CircuitConfig>(m, "CircuitConfig")
        .def(py::init<>())
        .def_readwrite("n_qubits", &CircuitConfig::n_qubits)
        .def_readwrite("p", &CircuitConfig::p)
        .def_readwrite("theta", &CircuitConfig::theta)
        .def_readwrite("theta_label", &CircuitConfig::theta_label)
        .def_readwrite("chi_max", &CircuitConfig::chi_max)
        .def_readwrite("cutoff", &CircuitConfig::cutoff)
        .def_readwrite("t_max", &CircuitConfig::t_max)
        .def_readwrite("t_cutoff", &CircuitConfig::t_cutoff)
        .def_readwrite("master_seed", &CircuitConfig::master_seed)
        .def_readwrite("n_trajectories", &CircuitConfig::n_trajectories)
        .def_readwrite("seed_group", &CircuitConfig::seed_group)
        .def_readwrite("order", &CircuitConfig::order)
        .def_readwrite("method", &CircuitConfig::method)
        .def_readwrite("periodic", &CircuitConfig::periodic)
        .def("validate", &CircuitConfig::validate)
        .def_static("from_dict", [](const py::object &d) { return parse_config(from_python(d)); })
        .def("to_dict", [](const CircuitConfig &c) { return to_python(config_to_json(c)); });

    py::class_<SiteOutcome>(m, "SiteOutcome")
        .def_readonly("measured", &SiteOutcome::measured)
        .def_readonly("outcome", &SiteOutcome::outcome)
        .def_readonly("probability", &SiteOutcome::probability);
    py::class_<MeasurementRecord>(m, "MeasurementRecord")
        .def_readonly("sites", &MeasurementRecord::sites)
        .def("joint_probability", &MeasurementRecord::joint_probability)
        .def("outcomes", &MeasurementRecord::outcomes);

    py::class_<TrajectoryResult>(m, "TrajectoryResult")
        .def_readonly("trajectory", &TrajectoryResult::trajectory)
        .def_readonly("seed", &TrajectoryResult::seed)
        .def_readonly("s_left", &TrajectoryResult::s_left)
        .def_readonly("s_right", &TrajectoryResult::s_right)
        .def_readonly("s_mean", &TrajectoryResult::s_mean)
        .def_readonly("peak_bond", &TrajectoryResult::peak_bond)
        .def_readonly("truncation_error", &TrajectoryResult::truncation_error)
        .def_property_readonly("records", [](const TrajectoryResult &r) {
            std::vector<MeasurementRecord> out;
            for(const auto &lr : r.records) out.push_back(lr.record);
            return out;
        });

    py::class_<MpsState>(m, "MpsState")
        .def_static("neel", &MpsState::neel, py::arg("n"))
        .def_static("from_dense",
                    [](const std::vector<cplx> &amps, std::size_t n) { return MpsState::from_dense(amps, n); },
                    py::arg("amplitudes"), py::arg("n"))
        .def("__len__", &MpsState::size)
        .def_property_readonly("ortho_center", &MpsState::ortho_center)
        .def("to_dense", &MpsState::to_dense)
        .def("canonicalize", &MpsState::canonicalize, py::arg("center"))
        .def("bond_entropy", &MpsState::bond_entropy, py::arg("cut"))
        .def("schmidt_values", &MpsState::schmidt_values, py::arg("cut"))
        .def("bond_dim", &MpsState::bond_dim, py::arg("cut"))
        .def("max_bond_dim", &MpsState::max_bond_dim)
        .def("global_norm", &MpsState::global_norm)
        .def("is_canonical", &MpsState::is_canonical, py::arg("tol") = 1e-8)
        .def("apply_two_site_gate", &MpsState::apply_two_site_gate, py::arg("gate"), py::arg("left"),
             py::arg("params") = TruncationParams{})
        .def("apply_gate_with_swaps", &MpsState::apply_gate_with_swaps, py::arg("gate"), py::arg("site_a"),
             py::arg("site_b"), py::arg("params") = TruncationParams{})
        .def("compress", &MpsState::compress, py::arg("params") = TruncationParams{});

    m.def("haar_unitary", [](std::size_t d, std::uint64_t seed) {
        Rng rng(seed);
        return Eigen::MatrixXcd(haar_unitary(d, rng));
    }, py::arg("d"), py::arg("seed"));
    m.def("weak_measurement_gate", [](double theta) { return Eigen::MatrixXcd(weak_measurement_gate(theta)); },
          py::arg("theta"));
    m.def("native_decomposition_product",
          [](double theta) { return sequence_product(native_decomposition(theta), 2); }, py::arg("theta"));
    m.def("unitarity_error", &unitarity_error);

    m.def("sample_measurement_layer",
          [](MpsState &s, const std::vector<bool> &measured, double theta, std::uint64_t seed,
             const TruncationParams &params) {
              Rng rng(seed);
              return sample_measurement_layer(s, make_plan(measured, theta), rng, params);
          },
          py::arg("state"), py::arg("measured"), py::arg("theta"), py::arg("seed"),
          py::arg("params") = TruncationParams{});
    m.def("force_measurement_layer",
          [](MpsState &s, const std::vector<bool> &measured, double theta, const std::vector<int> &outcomes,
             const TruncationParams &params) {
              return force_measurement_layer(s, make_plan(measured, theta), outcomes, params);
          },
          py::arg("state"), py::arg("measured"), py::arg("theta"), py::arg("outcomes"),
          py::arg("params") = no_truncation);

    m.def("dense_outcome_probability",
          [](const std::vector<cplx> &amps, std::size_t n, const std::vector<bool> &measured, double theta,
             const std::vector<int> &outcomes) {
              return dense_outcome_probability(DenseState(amps, n), make_plan(measured, theta), outcomes);
          },
          py::arg("amplitudes"), py::arg("n"), py::arg("measured"), py::arg("theta"), py::arg("outcomes"));
    m.def("dense_entropy",
          [](const std::vector<cplx> &amps, std::size_t n, std::size_t cut) {
              return dense_entropy(DenseState(amps, n), cut);
          },
          py::arg("amplitudes"), py::arg("n"), py::arg("cut"));

    m.def("run_trajectory", &run_trajectory, py::arg("config"), py::arg("trajectory"),
          py::call_guard<py::gil_scoped_release>());
    m.def("dense_run_trajectory", &dense_run_trajectory, py::arg("config"), py::arg("trajectory"));
    m.def("long_time_entropy", py::overload_cast<const TrajectoryResult &, std::size_t>(&long_time_entropy),
          py::arg("result"), py::arg("t_cutoff"));

    m.def("oracle_check", [](std::size_t cases, std::uint64_t seed, std::size_t max_n) {
        const auto r = run_oracle_check(cases, seed, 2, max_n);
        py::dict   d;
        d["cases"]                  = r.cases.size();
        d["max_probability_error"]  = r.max_probability_error;
        d["min_fidelity"]           = r.min_fidelity;
        d["completeness_checks"]    = r.completeness_checks;
        d["max_completeness_error"] = r.max_completeness_error;
        return d;
    }, py::arg("cases") = 50, py::arg("seed") = 1, py::arg("max_n") = 8);

    m.def("run_experiment",
          [](const py::object &spec, const std::string &output_dir, unsigned threads) {
              auto s       = parse_spec(from_python(spec));
              s.output_dir = output_dir;
              s.threads    = threads;
              std::vector<EnsembleStats> stats;
              {
                  py::gil_scoped_release release;
                  stats = run_experiment(s);
              }
              py::list out;
              for(const auto &st : stats) out.append(to_python(stats_to_json(st)));
              return out;
          },
          py::arg("spec"), py::arg("output_dir"), py::arg("threads") = 1);
    m.def("read_stats", [](const std::string &path) { return to_python(stats_to_json(read_stats(path))); },
          py::arg("path"));

    m.def("fit_scaling",
          [](const std::vector<double> &n, const std::vector<double> &s, const std::optional<std::vector<double>> &sem,
             const std::string &model) {
              if(n.size() != s.size() || (sem && sem->size() != n.size()))
                  throw std::invalid_argument("fit_scaling: input lengths differ");
              std::vector<ScalingPoint> pts;
              for(std::size_t i = 0; i < n.size(); ++i)
                  pts.push_back({n[i], s[i], sem ? std::optional<double>((*sem)[i]) : std::nullopt});
              const auto f = fit_scaling(pts, parse_fit_model(model));
              py::dict   d;
              d["slope"]            = f.slope;
              d["intercept"]        = f.intercept;
              d["slope_stderr"]     = f.slope_stderr;
              d["intercept_stderr"] = f.intercept_stderr;
              d["residuals"]        = f.residuals;
              d["chi2"]             = f.chi2;
              d["weighted"]         = f.weighted;
              return d;
          },
          py::arg("n"), py::arg("s_inf"), py::arg("sem") = py::none(), py::arg("model") = "log");
    m.def("parse_angle", &parse_angle, py::arg("text"));
}

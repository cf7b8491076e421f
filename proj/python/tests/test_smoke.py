import json
import math
import os
import subprocess

import numpy as np
import pytest

import wmps


def test_neel_state_has_zero_entropy():
    s = wmps.MpsState.neel(6)
    assert len(s) == 6
    assert all(s.bond_entropy(c) == 0.0 for c in range(1, 6))
    psi = np.array(s.to_dense())
    assert psi[0b010101] == 1.0


def test_bell_entropy_is_ln2():
    bell = [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)]
    s = wmps.MpsState.from_dense(bell, 2)
    assert abs(s.bond_entropy(1) - math.log(2)) < 1e-12
    assert abs(wmps.dense_entropy(bell, 2, 1) - math.log(2)) < 1e-12


def test_gates_are_unitary_and_decomposition_matches():
    u = wmps.haar_unitary(4, 3)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    theta = 0.7
    g = wmps.weak_measurement_gate(theta)
    d = wmps.native_decomposition_product(theta)
    k = np.unravel_index(np.argmax(abs(g)), g.shape)
    phase = d[k] / g[k]
    assert np.max(abs(d - phase / abs(phase) * g)) < 1e-12


def test_forced_layer_matches_statevector():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    measured = [True, False, True, True]
    outcomes = [1, 0, 0, 1]
    s = wmps.MpsState.from_dense(list(psi), 4)
    rec = wmps.force_measurement_layer(s, measured, 0.6, outcomes)
    ref = wmps.dense_outcome_probability(list(psi), 4, measured, 0.6, outcomes)
    assert abs(rec.joint_probability() - ref) < 1e-12
    assert abs(s.global_norm() - 1) < 1e-12


def test_trajectory_and_dense_oracle_agree():
    c = wmps.CircuitConfig.from_dict({"n_qubits": 6, "theta": "pi/5", "t_max": 4, "t_cutoff": 2,
                                      "chi_max": 4096, "cutoff": 0.0})
    a = wmps.run_trajectory(c, 2)
    b = wmps.dense_run_trajectory(c, 2)
    assert np.allclose(a.s_mean, b.s_mean, atol=1e-8)
    assert wmps.long_time_entropy(a, 2) == pytest.approx(np.mean(a.s_mean[1:]))


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        wmps.CircuitConfig.from_dict({"n_qubits": 6, "thetta": 0.3})


def test_oracle_check():
    r = wmps.oracle_check(20, 5, 6)
    assert r["max_probability_error"] < 1e-10
    assert r["min_fidelity"] > 1 - 1e-10


def test_experiment_files_and_fit(tmp_path):
    spec = {"defaults": {"n_trajectories": 3, "t_max": 4, "t_cutoff": 2},
            "sweep": {"theta": ["pi/3"], "n_qubits": [4, 6, 8]}}
    stats = wmps.run_experiment(spec, str(tmp_path), 1)
    assert len(stats) == 3
    for s in stats:
        raw = (tmp_path / f"{s['config_id']}.raw.csv").read_text().splitlines()
        assert raw[0] == "config_id,trajectory,t,S_cut_left,S_cut_right,S_mean"
        assert len(raw) == 1 + 3 * 4
        back = wmps.read_stats(str(tmp_path / f"{s['config_id']}.stats.json"))
        assert back == s
    fit = wmps.fit_scaling([s["config"]["n_qubits"] for s in stats], [s["s_inf"] for s in stats],
                           [s["s_inf_sem"] for s in stats], "log")
    assert len(fit["residuals"]) == 3


@pytest.mark.skipif("WMPS_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_fit_reads_harness_output(tmp_path):
    cli = os.environ["WMPS_CLI"]
    subprocess.run([cli, "sweep", "--n", "4,6", "--theta", "pi/4", "--trajectories", "2", "--t-max", "3",
                    "--t-cutoff", "2", "--out", str(tmp_path), "--no-records"], check=True, capture_output=True)
    out = subprocess.run([cli, "fit", "--dir", str(tmp_path), "--model", "linear"], check=True,
                         capture_output=True, text=True).stdout
    assert "slope=" in out

import json
import os

import numpy as np
import pytest

from coaglab import harness as H
from coaglab.density import catalog_density, read_density, write_density
from coaglab.errors import ConfigError, MomentMismatchError
from coaglab.kernels import KernelKind


# -- configuration ---------------------------------------------------------

def test_parse_config_text():
    text = """
    # constant kernel run
    kernel = const
    initial_density_1 = exp      # alias of g1
    g2 = gamma(2,2)
    kappa = 1.5, 2.0
    checkpoints = 0 0.5 1
    allow-out-of-range = yes
    eta_n = 120
    """
    values = H.parse_config_text(text)
    assert values == {"kernel": "const", "g1": "exp", "g2": "gamma(2,2)",
                      "kappas": (1.5, 2.0), "taus": (0.0, 0.5, 1.0),
                      "allow_out_of_range": True, "eta_n": 120}


@pytest.mark.parametrize("text", ["kernel const", "colour = blue", "eta_n = many",
                                  "allow_out_of_range = perhaps", "kappas = 1.5, x"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        H.parse_config_text(text)


def test_later_keys_win():
    assert H.parse_config_text("kernel = add\nkernel = mult")["kernel"] == "mult"


def test_layer_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("preset = thm1\nkappas = 1.5\ntau_max = 2\n")
    file_values = H.read_config_file(path)
    cfg = H.make_config(None, file_values, {"kappas": (1.75,), "g2": None})
    assert cfg.kernel is KernelKind.CONSTANT          # from the preset
    assert cfg.kappas == (1.75,)                       # override beats file
    assert cfg.taus == H.tau_grid(2.0)                 # file tau_max expands
    assert cfg.g2 == "gamma(2,2)"                      # None overrides are ignored
    cfg = H.make_config("thm2", {}, {"preset": "thm1"})
    assert cfg.kernel is KernelKind.CONSTANT


def test_explicit_checkpoints_beat_tau_max():
    cfg = H.make_config("thm1", {"tau_max": 3.0}, {"taus": "0,1,2"})
    assert cfg.taus == (0.0, 1.0, 2.0)


def test_presets_cover_each_theorem():
    for name, kernel in (("thm1", "const"), ("thm2", "add"), ("thm3", "mult")):
        cfg = H.make_config(name)
        assert cfg.kernel is KernelKind.parse(kernel)
        assert cfg.profile_mode
        assert all(cfg.kernel.in_theorem_range(k) for k in cfg.kappas)
        assert cfg.checkpoints() == H.DEFAULT_TAUS
    assert H.DEFAULT_TAUS[0] == 0.0 and H.DEFAULT_TAUS[-1] == 5.0 and len(H.DEFAULT_TAUS) == 21


@pytest.mark.parametrize("overrides", [
    {"kernel": "const", "kappas": (0.5,)},            # outside the contraction range
    {"kernel": "const", "kappas": (2.5,)},            # norm not finite
    {"kernel": "add", "kappas": (3.0,)},              # open interval
    {"taus": (0.5, 1.0)},                             # must start at 0
    {"taus": (0.0, 1.0, 1.0)},                        # strictly increasing
    {"kernel": "mult", "t_checkpoints": (0.5, 1.0)},  # t < 1
    {"solver": "euler"},
    {"kernel": "quadratic"},
    {"preset": "thm9"},
    {"tau_max": -1.0},
    {"eta_n": 3},
])
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        H.make_config(None, {}, overrides)


def test_out_of_range_kappa_allowed_on_request():
    cfg = H.make_config(None, {}, {"kernel": "const", "kappas": (0.5,),
                                   "allow_out_of_range": True})
    assert cfg.kappas == (0.5,)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("COAG_THREADS", "1")
    assert H.worker_count() == 1
    monkeypatch.setenv("COAG_THREADS", "lots")
    with pytest.raises(ConfigError):
        H.worker_count()


# -- inputs ----------------------------------------------------------------

def test_load_initial(tmp_path):
    path = tmp_path / "g.csv"
    write_density(path, catalog_density("gamma(2,2)"))
    f = H.load_initial(str(path), "add")
    from coaglab.density import compute_moments
    m = compute_moments(f, orders=(1, 2))
    assert m[1] == pytest.approx(1.0, rel=1e-8) and m[2] == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(ConfigError):
        H.load_initial("no_such_density", "add")
    assert H.load_initial("profile", "mult").law == catalog_density("G_mult").law


def test_unnormalized_pair_is_a_mismatch():
    cfg = H.make_config(None, {}, {"kernel": "add", "g1": "exp", "g2": "gamma(2,2)",
                                   "normalize": False, "kappas": (2.5,)})
    with pytest.raises(MomentMismatchError):
        H.initial_pair(cfg)


def test_physical_times():
    assert H.physical_times("add", [0.0, 2.0]) == [0.0, 1.0]
    t = H.physical_times("mult", [0.0, 2.0])
    assert t[1] == pytest.approx(1 - np.exp(-1.0), rel=1e-15)


# -- contraction runs --------------------------------------------------------

def test_identical_inputs_give_zero_distances(tmp_path):
    cfg = H.make_config(None, {}, {"kernel": "add", "g1": "gamma(2,2)", "g2": "gamma(2,2)",
                                   "tau_max": 2.0, "output_dir": str(tmp_path)})
    report, ok = H.run_contraction(cfg)
    assert ok
    assert all(v == 0.0 for k in report.kappas for v in report.distances[k])
    assert all("identical" in report.warnings[k] for k in report.kappas)
    assert os.path.exists(tmp_path / "contraction.json")
    assert os.path.exists(tmp_path / "contraction.csv")


def test_theorem1_contraction_holds(tmp_path):
    report, ok = H.run_contraction(H.make_config("thm1", {}, {"output_dir": str(tmp_path)}))
    assert ok and report.all_inequalities_hold
    doc = json.loads((tmp_path / "contraction.json").read_text())
    assert doc["extra"]["status"] == "pass"
    assert doc["extra"]["checked_kappas"] == [1.25, 1.5, 1.75, 2.0]
    assert [r["kappa"] for r in doc["results"]] == [1.25, 1.5, 1.75, 2.0]
    # κ = 2 sits on the theorem rate
    assert report.rate_ok(2.0)


def test_out_of_range_kappa_is_reported_not_checked():
    cfg = H.make_config(None, {}, {"kernel": "const", "kappas": (0.75, 1.5),
                                   "allow_out_of_range": True, "tau_max": 2.0})
    report, ok = H.run_contraction(cfg)
    assert report.extra["checked_kappas"] == [1.5]
    assert 0.75 in report.distances


def test_short_runs_skip_the_fit():
    cfg = H.make_config("thm1", {}, {"taus": (0.0, 1.0), "kappas": (1.5,)})
    report, ok = H.run_contraction(cfg)
    assert ok and "fit skipped" in report.warnings[1.5]


def test_ode_fallback_agrees_with_closed_form():
    common = {"tau_max": 2.0, "eta_n": 60, "kappas": (1.5, 2.0)}
    closed, _ = H.run_contraction(H.make_config("thm1", {}, common))
    ode, ok = H.run_contraction(H.make_config("thm1", {}, dict(common,
                                                            solver="transform_ode_fallback")))
    assert ok
    # ODE curves are refined between only 60 nodes by interpolation, while the
    # closed form is evaluated exactly; κ = 2 takes its sup on the grid.
    np.testing.assert_allclose(ode.distances[1.5], closed.distances[1.5], rtol=1e-3)
    np.testing.assert_allclose(ode.distances[2.0], closed.distances[2.0], rtol=1e-9)


def test_physical_solver_contraction():
    common = {"tau_max": 1.0, "kappas": (1.5,)}
    closed, _ = H.run_contraction(H.make_config("thm1", {}, common))
    phys, ok = H.run_contraction(H.make_config("thm1", {}, dict(common, solver="physical")))
    assert ok
    np.testing.assert_allclose(phys.distances[1.5], closed.distances[1.5], rtol=1e-2)
    assert max(phys.extra["lost_mass"]) <= H.TRUNCATION_LIMIT


def _run_bytes(tmp_path, monkeypatch, threads, name):
    monkeypatch.setenv("COAG_THREADS", str(threads))
    out = tmp_path / name
    H.run_contraction(H.make_config("thm2", {}, {"tau_max": 2.0, "output_dir": str(out)}))
    return (out / "contraction.json").read_bytes(), (out / "contraction.csv").read_bytes()


def test_output_is_independent_of_thread_count(tmp_path, monkeypatch):
    assert _run_bytes(tmp_path, monkeypatch, 1, "a") == _run_bytes(tmp_path, monkeypatch, 4, "b")


def test_repeated_runs_are_byte_identical(tmp_path, monkeypatch):
    assert _run_bytes(tmp_path, monkeypatch, 2, "a") == _run_bytes(tmp_path, monkeypatch, 2, "b")


# -- cross validation and gelation rate -----------------------------------------

def test_crossval_at_zero_time_is_interpolation_level():
    for kernel in ("const", "add", "mult"):
        cfg = H.make_config(None, {}, {"kernel": kernel, "taus": (0.0,),
                                       "g1": "gamma(1,3)" if kernel == "mult" else "gamma(2,2)"})
        report = H.run_crossval(cfg)
        assert report.passed and report.worst <= 1e-8


def test_crossval_constant_kernel(tmp_path):
    cfg = H.make_config(None, {}, {"kernel": "const", "g1": "gamma(2,2)",
                                   "taus": (0.0, 0.5, 1.0), "output_dir": str(tmp_path)})
    report = H.run_crossval(cfg)
    assert report.passed and report.worst <= 1e-3
    doc = json.loads((tmp_path / "crossval.json").read_text())
    assert doc["passed"] and len(doc["discrepancies"]) == 3


def test_crossval_reports_failure_against_tight_tolerance():
    cfg = H.make_config(None, {}, {"kernel": "const", "g1": "gamma(2,2)",
                                   "taus": (0.0, 0.5), "tolerance": 1e-12})
    report = H.run_crossval(cfg)
    assert not report.passed and report.worst_tau == 0.5


def test_gel_rate_needs_multiplicative_kernel():
    with pytest.raises(ConfigError):
        H.run_original_time_rate(H.make_config("thm1"))


def test_gel_rate_report_fields(tmp_path):
    cfg = H.make_config("thm3", {}, {"t_checkpoints": "0.2,0.4,0.6,0.8,0.9",
                                     "kappas": (2.5,), "fit_window": (0.0, 10.0),
                                     "output_dir": str(tmp_path)})
    report = H.run_original_time_rate(cfg)
    assert report.times == [0.0, 0.2, 0.4, 0.6, 0.8, 0.9]
    assert report.flow_rate_exponent[2.5] == pytest.approx(0.25)
    assert report.reduced_exponent[2.5] == pytest.approx(0.5)
    # the fitted power in 1 - t is twice the fitted flow-time rate
    doc = json.loads((tmp_path / "gel_rate.json").read_text())
    rec = doc["results"][0]
    assert {"fitted_power", "exponent_flow_rate_in_t", "exponent_reduced_time"} <= set(rec)


# -- one-shot commands -----------------------------------------------------------

def test_run_profile_writes_files(tmp_path):
    g, curve = H.run_profile("add", output_dir=str(tmp_path))
    assert (tmp_path / "profile_add.csv").exists()
    assert (tmp_path / "profile_add_transform.csv").exists()
    np.testing.assert_allclose(read_density(tmp_path / "profile_add.csv").values, g.values,
                               rtol=1e-15)
    eta = curve.etas
    np.testing.assert_allclose(curve.values, 2 * eta / (np.sqrt(1 + 2 * eta) + 1), rtol=1e-13)


def test_run_transform(tmp_path):
    path = tmp_path / "exp.csv"
    write_density(path, catalog_density("exp"))
    curve = H.run_transform(str(path), "const")
    eta = curve.etas
    keep = eta <= 1e3
    np.testing.assert_allclose(curve.values[keep], 1 / (1 + eta[keep]), rtol=1e-8)

"""The ten acceptance criteria at full size.

Each test prints one ``PASS``/``FAIL`` line (also repeated in the pytest
terminal summary) and asserts the verdict and the runtime limit.
"""
import time

import suites

RESULTS = {}


def _record(capsys, key, name, limit, fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    elapsed = time.perf_counter() - t0
    out.detail["seconds"] = round(elapsed, 2)
    in_time = limit is None or elapsed < limit
    line = out.line(f"{key} {name}")
    if not in_time:
        line = f"FAIL {key} {name}: over the {limit}s limit " + line[5:]
    RESULTS[key] = line
    with capsys.disabled():
        print("\n" + line)
    return out, in_time


def test_c01_exact_oracle(capsys):
    out, ok = _record(capsys, "C1", "exact oracle equivalence", 60, suites.exact_oracle)
    assert out.passed and ok


def test_c02_complete_graph_anchor(capsys):
    out, ok = _record(capsys, "C2", "complete-graph anchor", 120, suites.complete_anchor)
    assert out.passed and ok


def test_c03_martingale(capsys):
    out, ok = _record(capsys, "C3", "martingale suite", 120, suites.martingale_suite)
    assert out.passed and ok


def test_c04_assoc(capsys):
    out, ok = _record(capsys, "C4", "association bound suite", 600, suites.assoc_suite)
    assert out.passed and ok


def test_c05_inequalities(capsys):
    out, ok = _record(capsys, "C5", "inequality suites", 300, suites.inequality_suite)
    assert out.passed and ok


def test_c06_tree_partition(capsys):
    out, ok = _record(capsys, "C6", "tree partition", 300, suites.tree_suite)
    assert out.passed and ok


def test_c07_concentration(capsys):
    out, ok = _record(capsys, "C7", "concentration", 180, suites.concentration_suite)
    assert out.passed and ok


def test_c08_mc_exact_agreement(capsys):
    out, ok = _record(capsys, "C8", "MC/exact agreement", 120, suites.mc_agreement)
    assert out.passed and ok


def test_c09_cli_determinism(capsys, tmp_path):
    out, ok = _record(capsys, "C9", "CLI determinism", None, suites.cli_determinism, tmp_path)
    assert out.passed and ok


def test_c10_parameters(capsys):
    out, ok = _record(capsys, "C10", "parameter bookkeeping", 1, suites.params_suite)
    assert out.passed and ok


"""Shared fixtures plus a run-wide record of every synthesized unitary.

Every call to a synthesis routine during the session is intercepted so the
diagonal-in-hull property can be checked over the whole run, and the
acceptance results are printed as one line per criterion at the end.
"""

import numpy as np
import pytest

import diagforge.schurhorn as sh

SYNTH_LOG = []
ACCEPTANCE = {}


def _record(kind, fn):
    def wrapper(N, *args, **kwargs):
        res = fn(N, *args, **kwargs)
        eps = args[1] if len(args) > 1 else kwargs.get("eps")
        SYNTH_LOG.append((kind, N, res, eps))
        return res
    wrapper.__wrapped__ = fn
    return wrapper


def pytest_configure(config):
    for name in ("synth_diagonal_discrete", "synth_diagonal_tracial"):
        fn = getattr(sh, name)
        if not hasattr(fn, "__wrapped__"):
            setattr(sh, name, _record(name, fn))


def necessity_violations():
    """Entries of diag(U^* N U) farther than 1e-8 + eps from conv(spectrum)."""
    bad = []
    for kind, N, res, eps in SYNTH_LOG:
        diag = (np.abs(res.unitary) ** 2).T @ res.normal
        chk = sh.check_necessity(list(diag), N.points(), 1e-8 + eps)
        if not chk:
            bad.append((kind, chk.index, chk.distance))
    return bad


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
    bad = necessity_violations()
    tr.write_line(f"run-wide hull check: {len(SYNTH_LOG)} synthesized unitaries, "
                  f"{len(bad)} violations")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

"""Cross-lane equivalence: the compiled kernels must agree with the pure
NumPy lane to tight tolerances on random and structured inputs."""

import numpy as np
import pytest

from spinphonon import _backends
from spinphonon._backends import pure

compiled = _backends.compiled
needs_compiled = pytest.mark.skipif(compiled is None,
                                    reason="compiled core not built")


def randc(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def herm(rng, n):
    a = randc(rng, n)
    return a + a.conj().T


def term_set(rng, n, k=2):
    cops = [np.ascontiguousarray(randc(rng, n)) for _ in range(k)]
    cdags = [np.ascontiguousarray(c.conj().T) for c in cops]
    cdcs = [np.ascontiguousarray(cd @ c) for cd, c in zip(cdags, cops)]
    rates = np.abs(rng.standard_normal(k))
    return cops, cdags, cdcs, rates


def rand_rho(rng, n):
    a = randc(rng, n)
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho).real)


@needs_compiled
@pytest.mark.parametrize("n", [2, 7, 24, 61])
def test_rhs_agrees(n):
    rng = np.random.default_rng(n)
    rho, h = rand_rho(rng, n), np.ascontiguousarray(herm(rng, n))
    cops, cdags, cdcs, rates = term_set(rng, n)
    a = pure.lindblad_rhs(rho, h, cops, cdags, cdcs, rates)
    b = compiled.lindblad_rhs(rho, h, cops, cdags, cdcs, rates)
    assert np.max(np.abs(a - b)) < 1e-12 * max(np.max(np.abs(a)), 1.0)


@needs_compiled
@pytest.mark.parametrize("timedep", [False, True])
def test_propagate_master_agrees(timedep):
    rng = np.random.default_rng(5)
    n = 12
    rho, h = rand_rho(rng, n), np.ascontiguousarray(herm(rng, n))
    cops, cdags, cdcs, rates = term_set(rng, n)
    ms = [np.ascontiguousarray(randc(rng, n))] if timedep else []
    omegas = [2.7] if timedep else []
    a = pure.propagate_master(rho, h, ms, omegas, cops, cdags, cdcs, rates,
                              1e-3, 0.2, 120)
    b = compiled.propagate_master(rho, h, ms, omegas, cops, cdags, cdcs,
                                  rates, 1e-3, 0.2, 120)
    assert np.max(np.abs(a - b)) < 1e-11


@needs_compiled
@pytest.mark.parametrize("timedep", [False, True])
def test_propagate_pure_agrees(timedep):
    rng = np.random.default_rng(6)
    n = 15
    psi = randc(rng, n, 1).ravel()
    psi /= np.linalg.norm(psi)
    h = np.ascontiguousarray(herm(rng, n))
    ms = [np.ascontiguousarray(randc(rng, n))] if timedep else []
    omegas = [1.3] if timedep else []
    a, da = pure.propagate_pure(psi, h, ms, omegas, 1e-3, 0.0, 200)
    b, db = compiled.propagate_pure(psi, h, ms, omegas, 1e-3, 0.0, 200)
    assert np.max(np.abs(a - b)) < 1e-11
    assert da == pytest.approx(db, abs=1e-13)


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 10, 40, 90])
def test_eigvalsh_agrees_with_lapack(n):
    rng = np.random.default_rng(n + 100)
    h = herm(rng, n)
    a = pure.eigvalsh_ascending(h)
    b = compiled.eigvalsh_ascending(np.ascontiguousarray(h))
    scale = max(np.max(np.abs(a)), 1.0)
    assert np.max(np.abs(a - b)) < 1e-11 * scale


@needs_compiled
def test_eigvalsh_structured_inputs():
    # near-diagonal and degenerate matrices exercise the skip threshold
    d = np.diag(np.arange(6, dtype=float)).astype(complex)
    assert np.allclose(compiled.eigvalsh_ascending(d.copy()), np.arange(6))
    d[0, 1] = d[1, 0] = 1e-18
    assert np.allclose(compiled.eigvalsh_ascending(d), np.arange(6))
    degenerate = np.diag([2.0, 2.0, 2.0]).astype(complex)
    degenerate[0, 2] = degenerate[2, 0] = 0.5
    expected = pure.eigvalsh_ascending(degenerate)
    assert np.allclose(compiled.eigvalsh_ascending(degenerate), expected,
                       atol=1e-12)
    zero = np.zeros((4, 4), dtype=complex)
    assert np.allclose(compiled.eigvalsh_ascending(zero), np.zeros(4))


@needs_compiled
def test_positivity_probe_agrees():
    rng = np.random.default_rng(9)
    for n in (2, 5, 20):
        psd = rand_rho(rng, n)
        ind = np.ascontiguousarray(herm(rng, n))
        for m in (psd, ind):
            for floor in (1e-12, 1e-5, 1.0):
                assert (pure.min_eig_at_least(m, floor)
                        == compiled.min_eig_at_least(m, floor))


@needs_compiled
def test_positivity_probe_threshold_semantics():
    m = np.diag([1.0, -3e-4]).astype(complex)
    for lane in (pure, compiled):
        assert not lane.min_eig_at_least(m, 1e-5)
        assert not lane.min_eig_at_least(m, 1e-4)
        assert lane.min_eig_at_least(m, 1e-3)


def test_backend_selection_reports():
    assert _backends.BACKEND in ("pure", "compiled")
    assert pure.NAME == "pure"

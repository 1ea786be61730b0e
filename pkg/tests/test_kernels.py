"""Backend contract: compiled and fallback kernels agree and are deterministic."""

import numpy as np
import pytest

from dyckmoments import backend
from dyckmoments.oracle import BRIDGE, EXCURSION, LatticePath, statistic
from dyckmoments import costs

BACKENDS = backend.available_backends()
needs_compiled = pytest.mark.skipif(
    "compiled" not in BACKENDS, reason="compiled kernels not built"
)


def random_weights(n, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(-0.5, 2.0, n)


@pytest.mark.parametrize("name", BACKENDS)
class TestPerBackend:
    def test_dp_small_values(self, name):
        b = backend.get_backend(name)
        w = np.arange(16.0) + 0.5
        M, E = b.dp_moments(w, 8, 2)
        assert M[1, 1] == 0.5
        assert M[1, 2] == 1.5
        Mb, Eb = b.dp_moments(w, 8, 2, True, E)
        # bridge zero-order coefficients reproduce binomial counts
        for N, count in enumerate([1, 2, 6, 20, 70]):
            assert Eb[N, 0] * 4.0**N == pytest.approx(count, rel=1e-12)

    def test_sampling_validity(self, name):
        b = backend.get_backend(name)
        for ensemble in (EXCURSION, BRIDGE):
            steps = b.sample_paths(ensemble, 20, 64, 777)
            assert steps.shape == (64, 40)
            totals = steps.sum(axis=1)
            assert np.all(totals == 0)
            if ensemble == EXCURSION:
                assert np.min(np.cumsum(steps, axis=1)) >= 0

    def test_sampling_deterministic(self, name):
        b = backend.get_backend(name)
        a1 = b.sample_paths(EXCURSION, 12, 32, 2024)
        a2 = b.sample_paths(EXCURSION, 12, 32, 2024)
        assert np.array_equal(a1, a2)
        a3 = b.sample_paths(EXCURSION, 12, 32, 2025)
        assert not np.array_equal(a1, a3)

    def test_statistic_matches_pure_python(self, name):
        b = backend.get_backend(name)
        cf = costs.gamma_ratio(1)
        w = np.array([k + 0.5 for k in range(8)])
        paths = [
            (1, -1, 1, -1, 1, 1, -1, -1),
            (1, 1, 1, -1, -1, -1, 1, -1),
            (-1, 1, 1, -1, -1, 1, 1, -1),
            (-1, -1, -1, 1, 1, 1, 1, -1),
        ]
        ensembles = [EXCURSION, EXCURSION, BRIDGE, BRIDGE]
        steps = np.array(paths, dtype=np.int8)
        got = b.batch_statistic(np.ascontiguousarray(steps), w)
        for row, ens, val in zip(paths, ensembles, got):
            expect = float(statistic(LatticePath(row, ens), cf, 0))
            assert val == pytest.approx(expect, abs=1e-12)


@needs_compiled
class TestBackendEquivalence:
    def test_dp_agrees(self):
        w = random_weights(256, seed=3)
        c = backend.get_backend("compiled")
        f = backend.get_backend("fallback")
        Mc, Ec = c.dp_moments(w, 256, 5)
        Mf, Ef = f.dp_moments(w, 256, 5)
        assert np.allclose(Mc, Mf, rtol=1e-12, atol=1e-12)
        Mcb, _ = c.dp_moments(w, 256, 5, True, Ec)
        Mfb, _ = f.dp_moments(w, 256, 5, True, Ef)
        assert np.allclose(Mcb, Mfb, rtol=1e-12, atol=1e-12)

    def test_statistic_agrees_on_sampled_paths(self):
        c = backend.get_backend("compiled")
        f = backend.get_backend("fallback")
        w = random_weights(64, seed=4)
        for ensemble in (EXCURSION, BRIDGE):
            steps = c.sample_paths(ensemble, 64, 512, 99)
            a = c.batch_statistic(steps, w)
            b_ = f.batch_statistic(steps, w)
            assert np.allclose(a, b_, rtol=1e-13, atol=1e-13)

    def test_backend_selector(self):
        assert backend.backend_name() in ("compiled", "fallback")
        with pytest.raises(ValueError):
            backend.get_backend("gpu")

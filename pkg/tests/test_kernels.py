"""Contract tests for both kernel backends plus cross-backend parity.

The numba lane and the pure-numpy lane implement identical arithmetic, so
outputs must match bit for bit.
"""

import numpy as np
import pytest

from adr_split import kernels

BACKENDS = kernels.available_backends()


def fresh_records(kx, ky):
    ny, nx = ky + 1, kx + 1
    return dict(
        hmin_c=np.full((ny, kx), np.inf), hmin_v=np.zeros((ny, kx)),
        hmin_s=np.full((ny, kx), np.inf), hmax_c=np.full((ny, kx), -np.inf),
        hmax_v=np.zeros((ny, kx)), hmax_s=np.full((ny, kx), np.inf),
        vmin_c=np.full((nx, ky), np.inf), vmin_v=np.zeros((nx, ky)),
        vmin_s=np.full((nx, ky), np.inf), vmax_c=np.full((nx, ky), -np.inf),
        vmax_v=np.zeros((nx, ky)), vmax_s=np.full((nx, ky), np.inf))


def random_polylines(rng, n_curves=7, max_nodes=40):
    sizes = rng.integers(2, max_nodes, size=n_curves)
    offsets = np.zeros(n_curves + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    total = int(offsets[-1])
    xs = np.empty(total)
    ys = np.empty(total)
    vals = rng.standard_normal(total)
    for k in range(n_curves):
        lo, hi = offsets[k], offsets[k + 1]
        t = np.sort(rng.random(hi - lo))
        xs[lo:hi] = 0.05 + 0.9 * t
        ys[lo:hi] = np.clip(0.5 + 0.4 * np.sin(6.0 * t + k), 0.0, 1.0)
    seeds = np.sort(rng.random(n_curves))
    return xs, ys, vals, seeds, offsets


@pytest.mark.parametrize("backend", BACKENDS)
class TestThomas:
    def test_identity(self, backend):
        impl = kernels.get_backend(backend)
        out = np.empty(3)
        status = impl.thomas(np.zeros(2), np.ones(3), np.zeros(2),
                             np.array([1.0, 2.0, 3.0]), out)
        assert status == -1
        np.testing.assert_array_equal(out, [1.0, 2.0, 3.0])

    def test_zero_pivot_reported(self, backend):
        impl = kernels.get_backend(backend)
        out = np.empty(2)
        status = impl.thomas(np.array([1.0]), np.array([0.0, 1.0]),
                             np.array([1.0]), np.ones(2), out)
        assert status == 0

    def test_random_systems(self, backend, rng):
        impl = kernels.get_backend(backend)
        for _ in range(10):
            n = int(rng.integers(1, 50))
            lower = rng.standard_normal(max(n - 1, 0))
            upper = rng.standard_normal(max(n - 1, 0))
            diag = rng.standard_normal(n) + 5.0
            rhs = rng.standard_normal(n)
            out = np.empty(n)
            assert impl.thomas(lower, diag, upper, rhs, out) == -1
            full = np.diag(diag)
            if n > 1:
                full += np.diag(lower, -1) + np.diag(upper, 1)
            np.testing.assert_allclose(full @ out, rhs, atol=1e-9)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="numba backend not importable")
class TestParity:
    def run_record(self, backend, rng_seed):
        rng = np.random.default_rng(rng_seed)
        xs, ys, vals, seeds, offsets = random_polylines(rng)
        rec = fresh_records(6, 5)
        impl = kernels.get_backend(backend)
        impl.record_crossings_batch(xs, ys, vals, seeds, offsets,
                                    0.0, 1.0, 0.0, 1.0, 6, 5, *rec.values())
        return rec

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_record_crossings_bitwise_equal(self, seed):
        a = self.run_record("numpy", seed)
        b = self.run_record("numba", seed)
        for key in a:
            np.testing.assert_array_equal(a[key], b[key], err_msg=key)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_grid_node_values_bitwise_equal(self, seed):
        rng = np.random.default_rng(seed)
        xs, ys, vals, seeds, offsets = random_polylines(rng, n_curves=4)
        outs = {}
        for backend in BACKENDS:
            rec = fresh_records(6, 5)
            impl = kernels.get_backend(backend)
            impl.record_crossings_batch(xs, ys, vals, seeds, offsets,
                                        0.0, 1.0, 0.0, 1.0, 6, 5, *rec.values())
            out_vals = np.empty((6, 7))
            out_status = np.empty((6, 7), dtype=np.int8)
            impl.grid_node_values(rec["hmin_c"], rec["hmin_v"], rec["hmax_c"], rec["hmax_v"],
                                  rec["vmin_c"], rec["vmin_v"], rec["vmax_c"], rec["vmax_v"],
                                  0.0, 1.0, 0.0, 1.0, 6, 5, out_vals, out_status)
            outs[backend] = (out_vals, out_status)
        np.testing.assert_array_equal(outs["numpy"][0], outs["numba"][0])
        np.testing.assert_array_equal(outs["numpy"][1], outs["numba"][1])

    def test_bilinear_bitwise_equal(self):
        rng = np.random.default_rng(7)
        values = rng.standard_normal((9, 11))
        px = rng.random(500)
        py = rng.random(500)
        outs = {}
        for backend in BACKENDS:
            out = np.empty(500)
            kernels.get_backend(backend).bilinear_sample(
                values, 0.0, 1.0, 0.0, 1.0, 10, 8, px, py, out)
            outs[backend] = out
        np.testing.assert_array_equal(outs["numpy"], outs["numba"])

    def test_thomas_bitwise_equal(self):
        rng = np.random.default_rng(11)
        n = 64
        lower = rng.standard_normal(n - 1)
        upper = rng.standard_normal(n - 1)
        diag = rng.standard_normal(n) + 4.0
        rhs = rng.standard_normal(n)
        outs = {}
        for backend in BACKENDS:
            out = np.empty(n)
            kernels.get_backend(backend).thomas(lower, diag, upper, rhs, out)
            outs[backend] = out
        np.testing.assert_array_equal(outs["numpy"], outs["numba"])


def test_env_flag_selects_numpy_lane(tmp_path):
    import subprocess, sys
    code = ("import adr_split.kernels as k; print(k.BACKEND)")
    env = dict(**__import__('os').environ, ADR_SPLIT_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"


def test_single_polyline_wrapper_matches_batch(rng):
    xs = np.array([0.1, 0.6, 0.9])
    ys = np.array([0.2, 0.8, 0.4])
    vals = np.array([1.0, 2.0, 3.0])
    rec_a = fresh_records(4, 4)
    rec_b = fresh_records(4, 4)
    kernels.record_crossings(xs, ys, vals, 0.25, 0.0, 1.0, 0.0, 1.0, 4, 4,
                             *rec_a.values())
    kernels.record_crossings_batch(xs, ys, vals, np.array([0.25]),
                                   np.array([0, 3], dtype=np.int64),
                                   0.0, 1.0, 0.0, 1.0, 4, 4, *rec_b.values())
    for key in rec_a:
        np.testing.assert_array_equal(rec_a[key], rec_b[key])

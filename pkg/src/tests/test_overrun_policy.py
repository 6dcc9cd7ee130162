"""
Testes das políticas de morte e do limiar percentil κ.
"""
import numpy as np
import pytest

from src.core.feasibility import danger_zones
from src.core.model import TaskSet
from src.core.overrun_policy import (
    KillPolicy,
    KillPolicyKind,
    kill_times,
    percentile_kappa,
)
from src.tests.conftest import random_menu, random_taskset


def test_at_danger_zone_equals_zones(two_tasks, menu_12):
    zones = danger_zones(two_tasks, menu_12)
    kt = kill_times(KillPolicy.at_danger_zone(), two_tasks, zones, menu_12)
    assert kt.ztilde == zones.z
    assert kt.limit(0) == 7.0


def test_at_deadline_all_deadline(two_tasks, menu_12):
    zones = danger_zones(two_tasks, menu_12)
    kt = kill_times(KillPolicy.at_deadline(), two_tasks, zones, menu_12)
    assert kt.ztilde == (10.0, 10.0, 10.0)


def test_hybrid_interpolates(two_tasks, menu_12):
    zones = danger_zones(two_tasks, menu_12)
    kt = kill_times(KillPolicy.hybrid(0.5, 2), two_tasks, zones, menu_12)
    assert kt.ztilde == pytest.approx((7.5, 8.5, 10.0))


def test_percentile_example(menu_12):
    ts = TaskSet.from_wcecs([4, 6], 10.0, kappa=[2.0, 4.0])
    zones = danger_zones(ts, menu_12)
    kt = kill_times(KillPolicy.percentile(0.1, 2), ts, zones, menu_12)
    assert kt.ztilde[1] == pytest.approx(8.0)
    assert zones.z[1] == 7.0
    assert kt.ztilde[2] == 10.0


def test_percentile_window_uses_wcec_beyond_window(menu_12):
    ts = TaskSet.from_wcecs([4, 6, 2], 12.0, kappa=[2.0, 4.0, 1.0])
    zones = danger_zones(ts, menu_12)
    kt = kill_times(KillPolicy.percentile(0.1, 3, window=1), ts, zones, menu_12)
    # z̃_1 = 12 - (κ_1 + w_2 + w_3)/2 ; z̃_2 = 12 - (κ_2 + w_3)/2 ; z̃_3 = 12 - κ_3/2
    assert kt.ztilde == pytest.approx((7.0, 9.0, 11.5, 12.0))


def test_percentile_missing_kappa(two_tasks, menu_12):
    zones = danger_zones(two_tasks, menu_12)
    with pytest.raises(ValueError, match="Dados percentis ausentes"):
        kill_times(KillPolicy.percentile(0.1, 2), two_tasks, zones, menu_12)


def test_policy_validation():
    with pytest.raises(ValueError, match="delta"):
        KillPolicy.hybrid(1.5, 2)
    with pytest.raises(ValueError, match="epsilon"):
        KillPolicy(KillPolicyKind.PERCENTILE)
    with pytest.raises(ValueError, match="window"):
        KillPolicy.percentile(0.1, 2, window=0)
    with pytest.raises(ValueError, match="esperados 2"):
        KillPolicy.hybrid([0.1, 0.2, 0.3], 2)
    with pytest.raises(ValueError, match="percentile"):
        KillPolicy.percentile(0.1, 2).deltas(2)


def test_policy_family_identities(rng):
    for _ in range(1000):
        menu = random_menu(rng)
        ts = random_taskset(rng, menu)
        zones = danger_zones(ts, menu)
        n = ts.N
        dz = kill_times(KillPolicy.at_danger_zone(), ts, zones, menu).ztilde
        dl = kill_times(KillPolicy.at_deadline(), ts, zones, menu).ztilde
        h0 = kill_times(KillPolicy.hybrid(0.0, n), ts, zones, menu).ztilde
        h1 = kill_times(KillPolicy.hybrid(1.0, n), ts, zones, menu).ztilde
        assert np.allclose(h0, dz, rtol=0, atol=1e-12 * ts.deadline)
        assert np.allclose(h1, dl, rtol=0, atol=1e-12 * ts.deadline)
        with_kappa = TaskSet.from_wcecs(ts.wcecs, ts.deadline, kappa=[float(w) for w in ts.wcecs])
        p0 = kill_times(KillPolicy.percentile(0.0, n), with_kappa, zones, menu).ztilde
        assert np.allclose(p0, dz, rtol=0, atol=1e-9 * ts.deadline)


def test_hybrid_kill_times_increasing(rng):
    for _ in range(200):
        menu = random_menu(rng)
        ts = random_taskset(rng, menu)
        zones = danger_zones(ts, menu)
        z = kill_times(KillPolicy.hybrid(float(rng.uniform(0, 0.99)), ts.N), ts, zones, menu).ztilde
        assert all(b > a for a, b in zip(z, z[1:]))


def test_percentile_kill_times_between_zone_and_deadline(rng):
    for _ in range(200):
        menu = random_menu(rng)
        ts = random_taskset(rng, menu)
        kappas = [float(rng.uniform(1, w)) if w > 1 else 1.0 for w in ts.wcecs]
        ts = TaskSet.from_wcecs(ts.wcecs, ts.deadline, kappa=kappas)
        zones = danger_zones(ts, menu)
        window = int(rng.integers(1, ts.N + 1))
        z = kill_times(KillPolicy.percentile(0.1, ts.N, window=window), ts, zones, menu).ztilde
        for zi, zti in zip(zones.z, z):
            assert zi - 1e-9 <= zti <= ts.deadline + 1e-9


@pytest.mark.parametrize("samples, epsilon, wcec, expected", [
    ([2, 4, 6, 8, 10], 0.2, 10, 10),
    ([2, 4, 6, 8, 10], 0.0, 10, 10),
    ([2, 4, 6, 8, 10], 1.0, 10, 1),
    ([2, 4, 6, 8, 10], 0.4, 10, 8),
    ([5] * 10, 0.5, 20, 20),
])
def test_percentile_kappa(samples, epsilon, wcec, expected):
    assert percentile_kappa(samples, epsilon, wcec) == expected


def test_percentile_kappa_matches_brute_force(rng):
    for _ in range(300):
        wcec = int(rng.integers(1, 60))
        samples = rng.integers(1, wcec + 1, size=int(rng.integers(1, 40)))
        eps = float(rng.uniform(0, 1))
        candidates = sorted({1.0, float(wcec)} | {float(s) for s in samples})
        expected = float(wcec)
        for K in candidates:
            if np.mean(samples < K) >= 1 - eps - 1e-9 / len(samples):
                expected = K
                break
        assert percentile_kappa(samples, eps, wcec) == expected


def test_percentile_kappa_errors():
    with pytest.raises(ValueError, match="vazias"):
        percentile_kappa([], 0.1, 10)
    with pytest.raises(ValueError, match="epsilon"):
        percentile_kappa([1, 2], 1.5, 10)

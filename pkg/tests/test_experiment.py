import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from interlab.errors import CapacityExceeded, IncompleteTable, KindError, LocalityError, SpaceError
from interlab.experiment import (
    ConditionalTable,
    DeviceFamily,
    ExperimentTriple,
    SlitScenario,
    assemble_global_unitary,
    check_locality,
    composite_space,
    configs,
    double_slit,
    evolve,
    example1,
    example2,
    example3,
    example3_mixed,
    fourier,
    multi_slit,
    phase_devices,
    random_devices,
    random_triple,
    simulate,
    simulate_slits,
    slit_table,
)
from interlab.linalg import haar_unitary, random_binary_povm, random_state


def brute_global_unitary(dev, a):
    """Oracle: assemble U(a) entry by entry from the per-device unitaries."""
    n, m, d = dev.n, dev.m, dev.d
    k = d**n
    u = np.zeros((dev.dim, dev.dim), dtype=complex)
    for s, i in enumerate(itertools.product(range(m), repeat=n)):
        for r, c in itertools.product(range(k), repeat=2):
            rd = np.unravel_index(r, (d,) * n) if n else ()
            cd = np.unravel_index(c, (d,) * n) if n else ()
            val = 1.0 + 0j
            for l in range(n):
                val *= dev.unitaries[i[l], a[i[l]]][rd[l], cd[l]]
            u[s * k + r, s * k + c] = val
    return u


def test_configs_are_lexicographic():
    assert configs(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert configs(1, 3) == [(0,), (1,), (2,)]


def test_composite_layout():
    s = composite_space(2, 3, 2)
    assert s.labels == ("s1", "s2", "k1", "k2")
    assert s.total_dim == 36


def test_identity_devices_give_identity():
    u = np.tile(np.eye(2, dtype=complex), (3, 2, 1, 1))
    dev = DeviceFamily(2, u)
    for a in configs(3):
        np.testing.assert_array_equal(assemble_global_unitary(dev, a).entries, np.eye(dev.dim))


def test_example2_phase_flip():
    dev = phase_devices(2)
    np.testing.assert_array_equal(assemble_global_unitary(dev, (1, 0)).entries, np.diag([-1, 1]))


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 2), m=st.integers(1, 3), d=st.integers(1, 2))
def test_evolve_matches_entrywise_assembly(seed, n, m, d):
    r = np.random.default_rng(seed)
    dev = random_devices(n, m, d, r)
    psi = random_state(dev.dim, r)
    for a in configs(m):
        want = brute_global_unitary(dev, a)
        np.testing.assert_allclose(assemble_global_unitary(dev, a).entries, want, atol=1e-12)
        np.testing.assert_allclose(evolve(dev, a, psi), want @ psi, atol=1e-12)


def test_blocks_depend_only_on_local_settings(rng):
    dev = random_devices(2, 3, 2, rng)
    for i in dev.strings():
        for a, b in itertools.combinations(configs(3), 2):
            if all(a[j] == b[j] for j in i):
                np.testing.assert_allclose(dev.block(i, a), dev.block(i, b), atol=1e-10)


def test_device_family_validation(rng):
    with pytest.raises(SpaceError):
        DeviceFamily(1, np.ones((2, 2, 2)))
    bad = np.tile(np.eye(2, dtype=complex), (2, 2, 1, 1))
    bad[0, 1] = [[1, 1], [0, 1]]
    with pytest.raises(KindError):
        DeviceFamily(1, bad)
    with pytest.raises(CapacityExceeded):
        DeviceFamily(3, np.tile(np.eye(4, dtype=complex), (6, 2, 1, 1)))
    u = np.tile(np.eye(2, dtype=complex), (2, 2, 1, 1))
    with pytest.raises(LocalityError):
        DeviceFamily(2, u, {((0, 1), (0, 0)): np.eye(4)})
    with pytest.raises(LocalityError):
        DeviceFamily(2, u, {((0, 0), (0, 1)): np.eye(4)})
    with pytest.raises(KindError):
        DeviceFamily(2, u, {((0, 0), (1, 1)): 2 * np.eye(4)})


def test_collision_override_and_locality(rng):
    u = np.tile(np.eye(2, dtype=complex), (2, 2, 1, 1))
    w = haar_unitary(4, rng)
    dev = DeviceFamily(2, u, {((1, 1), (1, 1)): w})
    np.testing.assert_allclose(dev.block((1, 1), (0, 1)), w)
    np.testing.assert_allclose(dev.block((1, 1), (1, 0)), np.eye(4))
    check_locality(dev)

    def leaky(i, a):
        return w if a[0] else np.eye(4)

    with pytest.raises(LocalityError):
        check_locality(DeviceFamily(2, u, leaky))


def test_triple_validation():
    dev = phase_devices(2)
    with pytest.raises(SpaceError):
        ExperimentTriple(((1.0, np.array([1, 1])),), dev, (np.eye(2), np.zeros((2, 2))))
    with pytest.raises(SpaceError):
        ExperimentTriple(((0.5, np.array([1, 0])),), dev, (np.eye(2), np.zeros((2, 2))))
    with pytest.raises(KindError):
        ExperimentTriple(((1.0, np.array([1, 0])),), dev, (np.eye(2), np.eye(2)))
    with pytest.raises(KindError):
        ExperimentTriple(((1.0, np.array([1, 0])),), dev, (np.diag([2, 1]), np.diag([-1, 0])))
    with pytest.raises(SpaceError):
        ExperimentTriple(((1.0, np.array([1, 0])),), dev, (np.eye(2),))


def test_static_devices_give_identical_rows(rng):
    u = np.tile(np.eye(2, dtype=complex), (3, 2, 1, 1))
    dev = DeviceFamily(1, u)
    t = ExperimentTriple(((1.0, random_state(6, rng)),), dev, random_binary_povm(6, rng))
    p = simulate(t).probs
    np.testing.assert_allclose(p, np.tile(p[0], (8, 1)), atol=1e-15)


@pytest.mark.parametrize("make", [example1, example2, lambda: example3(2)])
def test_parity_examples(make):
    t = make()
    tab = simulate(t)
    for a in tab.configs:
        np.testing.assert_allclose(tab.row(a), np.eye(2)[sum(a) % 2], atol=1e-12)


def test_example3_mixed_is_parity_table():
    tab = simulate(example3_mixed())
    for a in tab.configs:
        np.testing.assert_allclose(tab.row(a), np.eye(2)[sum(a) % 2], atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 2), m=st.integers(1, 3), d=st.integers(1, 2), c=st.integers(1, 3))
def test_rows_sum_to_one(seed, n, m, d, c):
    tab = simulate(random_triple(n, m, d, np.random.default_rng(seed), c))
    np.testing.assert_allclose(tab.probs.sum(axis=1), 1, atol=1e-9)
    assert np.all(tab.probs >= -1e-12)


def test_from_density_reproduces_table(rng):
    t = random_triple(1, 3, 2, rng, components=3)
    again = ExperimentTriple.from_density(t.density(), t.devices, t.povm)
    np.testing.assert_allclose(simulate(again).probs, simulate(t).probs, atol=1e-12)


def test_conditional_table_checks():
    with pytest.raises(IncompleteTable):
        ConditionalTable(2, 2, np.ones((3, 2)) / 2)
    with pytest.raises(IncompleteTable):
        ConditionalTable(1, 2, np.array([[0.5, 0.4], [0.5, 0.5]]))
    ConditionalTable(1, 2, np.array([[0.5, 0.4], [0.5, 0.5]]), lossy=True)
    with pytest.raises(IncompleteTable):
        ConditionalTable.from_rows({(0,): [1, 0]}, 1)
    t = ConditionalTable.from_rows({(0,): [1, 0], (1,): [0.2, 0.8]}, 1)
    np.testing.assert_allclose(t.row((1,)), [0.2, 0.8])


def test_slits_closed_and_single_open():
    for m in (2, 3, 5):
        s = multi_slit(m)
        assert max(simulate_slits(s, (0,) * m).values()) == 0
        for j in range(m):
            a = tuple(int(k == j) for k in range(m))
            assert sum(simulate_slits(s, a).values()) == pytest.approx(1 / m, abs=1e-15)


def test_double_slit_table_by_hand():
    tab = slit_table(double_slit())
    # amplitude at y is sum_j F[y, j] a_j / sqrt(2) with F the 2x2 Fourier matrix
    f = fourier(2)
    for a in configs(2):
        for k, y in enumerate(("y0", "y1")):
            amp = sum(f[k, j] * a[j] for j in range(2)) / np.sqrt(2)
            assert tab[(y, a)] == pytest.approx(abs(amp) ** 2, abs=1e-15)
    assert tab[("y0", (1, 1))] == pytest.approx(1.0)
    assert tab[("y1", (1, 1))] == pytest.approx(0.0, abs=1e-15)


def test_slit_validation():
    with pytest.raises(SpaceError):
        SlitScenario(np.array([1, 1]), np.eye(2))
    with pytest.raises(KindError):
        SlitScenario(np.array([1, 0]), np.array([[1, 1], [0, 1]]))
    with pytest.raises(SpaceError):
        SlitScenario(np.array([1, 0]), np.eye(2), ("only",))
    with pytest.raises(SpaceError):
        simulate_slits(double_slit(), (1, 0, 1))

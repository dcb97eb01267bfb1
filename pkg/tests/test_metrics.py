import numpy as np
import pytest
from hypothesis import given, strategies as st

from interlab.errors import DomainError, IncompleteTable
from interlab.experiment import (
    ConditionalTable,
    configs,
    double_slit,
    example2,
    example3,
    multi_slit,
    qutrit_clock,
    qutrit_two_mode,
    random_triple,
    simulate,
    slit_table,
)
from interlab.linalg import hermitian_eigensystem, random_binary_povm, random_density, trace_norm
from interlab.metrics import (
    device_permuted,
    discrimination_value,
    helstrom,
    helstrom_optimize,
    interference,
    prime_d_interference,
    semi_general_interference,
    slit_interference,
    split_states,
)

tables = st.integers(1, 5).flatmap(
    lambda m: st.lists(st.floats(0, 1), min_size=2**m, max_size=2**m).map(
        lambda ps: ConditionalTable(m, 2, np.array([[p, 1 - p] for p in ps]))
    )
)


def fourier_form(table):
    """Oracle: half the signed average of P(0|a) - P(1|a)."""
    m = table.m
    return 0.5 * sum((-1) ** sum(a) * (table.row(a)[0] - table.row(a)[1]) for a in configs(m)) / 2**m


@given(tables)
def test_semi_general_matches_signed_average(table):
    rep = semi_general_interference(table)
    assert rep.value == pytest.approx(fourier_form(table), abs=1e-12)
    assert abs(rep.value) <= 0.5 + 1e-9


@given(st.integers(1, 6), st.floats(0, 1))
def test_constant_table_has_no_interference(m, p):
    tab = ConditionalTable(m, 2, np.tile([p, 1 - p], (2**m, 1)))
    assert semi_general_interference(tab).value == pytest.approx(0, abs=1e-12)


def test_example_values():
    assert semi_general_interference(simulate(example2())).value == pytest.approx(0.5, abs=1e-12)
    rep = semi_general_interference(simulate(example3(2)))
    assert rep.m == 4 and rep.maximal
    with pytest.raises(DomainError):
        semi_general_interference(ConditionalTable(1, 3, np.eye(3)))


def test_affine_slit_table_is_null():
    c = {"y0": [0.1, 0.2, 0.05], "y1": [0.3, 0.1, 0.2]}
    tab = {(y, a): sum(aj * cj for aj, cj in zip(a, cs)) for y, cs in c.items() for a in configs(3)}
    for v in slit_interference(tab, 3).values():
        assert v == pytest.approx(0, abs=1e-15)
    with pytest.raises(IncompleteTable):
        slit_interference(tab, 2)


def test_double_slit_second_order():
    per_y = slit_interference(slit_table(double_slit()), 2)
    assert per_y["y0"] == pytest.approx(0.5, abs=1e-12)
    assert per_y["y1"] == pytest.approx(-0.5, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1), m=st.integers(3, 5))
def test_single_particle_higher_order_slits_vanish(seed, m):
    per_y = slit_interference(slit_table(multi_slit(m, np.random.default_rng(seed))), m)
    assert max(abs(v) for v in per_y.values()) <= 1e-9


@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3), c=st.integers(1, 3))
def test_single_particle_three_devices_vanish(seed, d, c):
    assert abs(interference(random_triple(1, 3, d, np.random.default_rng(seed), c))) <= 1e-9


@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 2))
def test_two_particles_five_devices_vanish(seed, d):
    assert abs(interference(random_triple(2, 5, d, np.random.default_rng(seed)))) <= 1e-9


def test_prime_d_values():
    clock = simulate(qutrit_clock())
    # oracle: Born rule by hand, each Fourier vector picks out one phase pattern
    w = np.exp(2j * np.pi / 3)
    raw = 0.0
    for (x,) in configs(1, 3):
        psi = np.array([w ** (x * k) for k in range(3)]) / np.sqrt(3)
        f = np.array([w ** (x * k) for k in range(3)]) / np.sqrt(3)
        raw += abs(np.vdot(f, psi)) ** 2 / 3
    rep = prime_d_interference(clock, 3)
    assert rep.raw == pytest.approx(raw, abs=1e-12) and raw == pytest.approx(1.0)
    assert rep.centered == pytest.approx(2 / 3, abs=1e-12)
    two = prime_d_interference(simulate(qutrit_two_mode()), 3)
    assert two.raw == pytest.approx(2 / 3, abs=1e-12)


def test_prime_d_reductions():
    tab = simulate(example2())
    assert prime_d_interference(tab, 2).raw - 0.5 == pytest.approx(semi_general_interference(tab).value)
    for d in (2, 3, 5):
        const = ConditionalTable(2, d, np.tile(np.eye(d)[0], (d**2, 1)))
        assert prime_d_interference(const, d).raw == pytest.approx(1 / d)
    with pytest.raises(DomainError):
        prime_d_interference(tab, 4)
    with pytest.raises(DomainError):
        prime_d_interference(tab, 3)


def test_split_states_of_example2():
    r0, r1 = split_states(example2())
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    np.testing.assert_allclose(r0.entries, np.outer(plus, plus), atol=1e-15)
    np.testing.assert_allclose(r1.entries, np.outer(minus, minus), atol=1e-15)
    vals, _ = hermitian_eigensystem(r1.entries - r0.entries)
    np.testing.assert_allclose(vals, [1, -1], atol=1e-15)
    assert trace_norm(r1.entries - r0.entries) == pytest.approx(2)


def test_split_states_without_dependence(rng):
    t = random_triple(1, 2, 2, rng)
    u = np.tile(np.eye(2, dtype=complex), (2, 2, 1, 1))
    from interlab.experiment import DeviceFamily, ExperimentTriple

    static = ExperimentTriple(t.ensemble, DeviceFamily(1, u), t.povm)
    r0, r1 = split_states(static)
    np.testing.assert_allclose(r0.entries, r1.entries, atol=1e-15)
    assert np.trace(r0.entries).real == pytest.approx(1)


def test_helstrom_limits(rng):
    rho = random_density(3, rng)
    assert helstrom(rho, rho).bound == pytest.approx(0, abs=1e-12)
    e = np.eye(3)
    h = helstrom(np.outer(e[0], e[0]), np.outer(e[2], e[2]))
    assert h.bound == pytest.approx(0.5)
    assert discrimination_value(np.outer(e[0], e[0]), np.outer(e[2], e[2]), h.povm) == pytest.approx(0.5)


@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 8))
def test_helstrom_bound_is_attained_and_never_beaten(seed, dim):
    r = np.random.default_rng(seed)
    r0, r1 = random_density(dim, r), random_density(dim, r, rank=1)
    h = helstrom(r0, r1)
    assert discrimination_value(r0, r1, h.povm) == pytest.approx(h.bound, abs=1e-10)
    for _ in range(20):
        assert discrimination_value(r0, r1, random_binary_povm(dim, r)) <= h.bound + 1e-12


def test_helstrom_optimize_example2(rng):
    t = example2().with_povm(random_binary_povm(2, rng))
    assert interference(helstrom_optimize(t)) == pytest.approx(0.5, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_optimized_interference_equals_bound(seed):
    t = random_triple(1, 2, 2, np.random.default_rng(seed))
    r0, r1 = split_states(t)
    assert interference(helstrom_optimize(t)) == pytest.approx(helstrom(r0, r1).bound, abs=1e-10)


@given(seed=st.integers(0, 2**32 - 1), perm=st.permutations([0, 1, 2, 3]))
def test_relabeling_devices_keeps_interference(seed, perm):
    t = random_triple(2, 4, 1, np.random.default_rng(seed))
    assert interference(device_permuted(t, perm)) == pytest.approx(interference(t), abs=1e-10)
    assert interference(device_permuted(example3(2), perm)) == pytest.approx(0.5, abs=1e-12)

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interlab.completion import (
    NONE,
    all_bipartitions,
    bipartition_label,
    build_completion,
    build_even_completion,
    build_three_support_instance,
    canonicalize,
    compute_G,
    odd_case_i_instance,
    odd_case_ii_instance,
    perturbed,
    position_obstruction,
    random_even_instance,
    single_device_instance,
    summarized_povm,
    three_support_b01,
    verify,
    verify_mediation,
    verify_triple,
)
from interlab.completion.canonical import string_weights
from interlab.errors import ConstraintInfeasible, FormViolation, NotMaximal, ScenarioError
from interlab.experiment import (
    DeviceFamily,
    configs,
    evolve,
    example1,
    example2,
    example3,
    example3_mixed,
    qutrit_clock,
    random_devices,
    simulate,
)
from interlab.linalg import extend_to_unitary, haar_unitary
from interlab.metrics import interference
from interlab.serialize import decode_artifact, dumps, encode_artifact


def grouped_weights(t):
    """Oracle: weight of each balanced split, read off the occupied spatial strings."""
    m = t.m
    out = {}
    for w, psi in t.ensemble:
        for i, p in string_weights(psi, t.devices).items():
            if p < 1e-12:
                continue
            s = tuple(sorted(set(i)))
            c = tuple(sorted(set(range(m)) - set(s)))
            key = (s, c) if s < c else (c, s)
            out[key] = out.get(key, 0.0) + w * p
    return dict(sorted(out.items()))


def parity_delta(n, a):
    return np.array([2.0 ** -(n - 1) if sum(r) % 2 == sum(a) % 2 else 0.0 for r in itertools.product((0, 1), repeat=n)])


def test_bipartitions():
    assert all_bipartitions(2) == [((0,), (1,))]
    assert len(all_bipartitions(4)) == 3
    assert len(all_bipartitions(6)) == 10
    assert bipartition_label(((0, 2), (1, 3))) == "{0,2}|{1,3}"


def test_G_of_trivial_and_phase_families(rng):
    u = np.tile(np.eye(2, dtype=complex), (2, 2, 1, 1))
    np.testing.assert_array_equal(compute_G(DeviceFamily(1, u)).entries, np.eye(4))
    np.testing.assert_array_equal(compute_G(example2().devices).entries, np.eye(2))


def test_G_undoes_setting_zero_on_free_strings(rng):
    dev = random_devices(2, 3, 2, rng)
    g = compute_G(dev).entries
    k = dev.d**dev.n
    for s, i in enumerate(dev.strings()):
        if len(set(i)) < len(i):
            continue
        blk = slice(s * k, (s + 1) * k)
        np.testing.assert_allclose(g[blk, blk].conj().T @ dev.block(i, (0,) * 3), np.eye(k), atol=1e-10)


def test_canonical_form_of_example3():
    t = example3(2)
    cf = canonicalize(t)
    assert cf.bipartitions == pytest.approx(grouped_weights(t))
    assert cf.bipartitions == pytest.approx({((0, 2), (1, 3)): 0.5, ((0, 3), (1, 2)): 0.5})
    psi = t.ensemble[0][1]
    for a in configs(4):
        assert np.linalg.norm(cf.reconstruct(a) - evolve(t.devices, a, psi)) <= 1e-7


def test_canonical_form_of_example2():
    cf = canonicalize(example2())
    assert cf.support_strings == ((0,), (1,))
    assert cf.bipartitions == pytest.approx({((0,), (1,)): 1.0})


def test_canonical_form_gates(rng):
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    p0 = 0.9 * np.outer(plus, plus) + 0.1 * np.outer(minus, minus)
    weak = example2().with_povm((p0, np.eye(2) - p0))
    assert interference(weak) == pytest.approx(0.4)
    with pytest.raises(NotMaximal) as err:
        canonicalize(weak)
    assert err.value.value == pytest.approx(0.4)
    with pytest.raises(FormViolation) as err:
        canonicalize(example1())
    assert err.value.condition == "order"
    with pytest.raises(FormViolation) as err:
        canonicalize(qutrit_clock())
    assert err.value.condition == "alphabet"


def test_canonical_round_trip_on_random_instances():
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(11).spawn(100)]
    for k, r in enumerate(rngs):
        n = 1 + k % 2
        t = random_even_instance(n, 1 + (k // 2) % 2, r, components=1 + k % 3 if n == 2 else 1)
        cf = canonicalize(t)
        assert cf.bipartitions == pytest.approx(grouped_weights(t), abs=1e-9)
        for c, (_, psi) in enumerate(t.ensemble):
            for a in configs(t.m):
                assert np.linalg.norm(cf.reconstruct(a, c) - evolve(t.devices, a, psi)) <= 1e-7


def test_branch_vectors_extend_to_a_unitary(rng):
    t = random_even_instance(2, 2, rng)
    cf = canonicalize(t)
    dim = t.devices.dim
    for br in cf.components[0].branches:
        targets = haar_unitary(dim, rng)[:, :2]
        u = extend_to_unitary([(br.beta0, targets[:, 0]), (br.beta1, targets[:, 1])]).entries
        np.testing.assert_allclose(u.conj().T @ u, np.eye(dim), atol=1e-8)
        np.testing.assert_allclose(u @ br.beta0, targets[:, 0], atol=1e-8)


def test_random_instance_limits(rng):
    with pytest.raises(ConstraintInfeasible):
        random_even_instance(1, 2, rng, components=2)
    with pytest.raises(ConstraintInfeasible):
        random_even_instance(2, 2, rng, components=4)


@pytest.mark.parametrize("seed", range(6))
def test_perturbation_breaks_maximality(seed):
    r = np.random.default_rng(seed)
    base = random_even_instance(1 + seed % 2, 2, r)
    t = perturbed(base, int(r.integers(base.m)), 0.1, r)
    assert interference(t) < 0.5 - 1e-4
    with pytest.raises((NotMaximal, FormViolation)):
        canonicalize(t)


def test_example3_completion():
    art = build_completion(example3(2))
    assert art.kind == "even"
    assert art.transcript.passed, [c for c in art.transcript.checks if not c.passed]
    assert art.expected_weights == pytest.approx({"{0,2}|{1,3}": 0.5, "{0,3}|{1,2}": 0.5})
    for label, rows in art.mediator_table.items():
        for a, row in rows.items():
            np.testing.assert_allclose(row, parity_delta(2, a), atol=1e-9)
    np.testing.assert_allclose(art.final_table.probs, simulate(example3(2)).probs, atol=1e-9)
    names = [c.name for c in art.transcript.checks]
    for want in ("chain", "parity_mediation", "branch_weights", "mediator_given_branch", "mediator_given_inputs", "maximal"):
        assert want in names


def test_example2_single_mediator():
    art = build_completion(example2())
    for a, row in art.mediator_table["all"].items():
        np.testing.assert_allclose(row, np.eye(2)[sum(a) % 2], atol=1e-12)


def test_mixed_example3_uses_one_unitary_per_member():
    t = example3_mixed()
    art = build_completion(t)
    assert art.transcript.passed
    assert all(len(b.unitaries) == 2 for b in art.branches)
    # mix the members by hand and compare with the mediated table
    rows = np.zeros((16, 2))
    for k, a in enumerate(configs(4)):
        for c, (w, psi) in enumerate(t.ensemble):
            phi = evolve(t.devices, a, psi)
            rows[k] += w * np.array([np.vdot(phi, e @ phi).real for e in summarized_povm(art, c)])
    np.testing.assert_allclose(rows, simulate(t).probs, atol=1e-9)
    np.testing.assert_allclose(art.final_table.probs, simulate(t).probs, atol=1e-9)


@pytest.mark.parametrize("seed", range(8))
def test_random_even_completions(seed):
    r = np.random.default_rng(seed)
    n = 1 + seed % 2
    t = random_even_instance(n, 2, r, components=1 + seed % 3 if n == 2 else 1)
    art = build_completion(t)
    assert art.transcript.passed, [c for c in art.transcript.checks if not c.passed]


def test_tampered_branch_unitary_breaks_chain(rng):
    art = build_even_completion(example3(2))
    label = art.branches[0].label
    bad = art.with_unitary(label, 0, haar_unitary(art.G.shape[0], rng))
    tr = verify_mediation(bad)
    assert not tr.get("chain").passed
    assert tr.failures["chain"]
    assert all(len(a) == 4 for a in tr.failures["chain"])


@pytest.mark.parametrize("build, kind", [(odd_case_i_instance, "case-i"), (odd_case_ii_instance, "case-ii")])
def test_odd_cases(build, kind, rng):
    for t in (build(), build(rng=rng)):
        assert t.n == 2 and t.m == 3
        art = build_completion(t)
        assert art.kind == kind
        assert art.transcript.passed, [c for c in art.transcript.checks if not c.passed]
        for a, row in art.mediator_table["all"].items():
            assert sum(p for r, p in zip(itertools.product((0, 1), repeat=2), row) if sum(r) % 2 == sum(a) % 2) == pytest.approx(1, abs=1e-9)


def test_three_support_reference_point():
    assert three_support_b01(0.25, 0.0) == pytest.approx(-0.5)
    t = build_three_support_instance(0.25, 0.25, 0.0)
    assert interference(t) == pytest.approx(0.5, abs=1e-9)
    assert build_completion(t).transcript.passed


def test_three_support_boundary():
    assert three_support_b01(0.5, -1.0) == pytest.approx(1.0)
    t = build_three_support_instance(0.0, 0.5, -1.0)
    assert interference(t) == pytest.approx(0.5, abs=1e-9)
    assert build_completion(t).transcript.passed


@pytest.mark.parametrize("tiny", [1e-14, 1e-12, 1e-10, 1e-8])
def test_three_support_near_degenerate_weights(tiny):
    for p11 in (0.5 - tiny, tiny):
        art = build_completion(build_three_support_instance(p11, 0.5 - p11, 0.0))
        assert art.transcript.passed


def test_three_support_limit_meets_two_support():
    edge = build_completion(build_three_support_instance(0.5, 0.0, 0.3))
    near = build_completion(build_three_support_instance(0.5 - 1e-7, 1e-7, 0.3))
    assert edge.transcript.passed and near.transcript.passed
    np.testing.assert_allclose(near.final_table.probs, edge.final_table.probs, atol=1e-6)


@pytest.mark.parametrize("args", [(0.3, 0.3, 0.0), (-0.1, 0.6, 0.0), (0.25, 0.25, 1.5), (0.25, 0.25, -1.01)])
def test_three_support_infeasible(args):
    with pytest.raises(ConstraintInfeasible):
        build_three_support_instance(*args)


@given(p12=st.floats(0.0, 0.5), a01=st.floats(-1.0, 1.0), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_three_support_family(p12, a01, seed):
    # every admissible (p12, a01) keeps b01 in [-1, 1]
    assert abs(three_support_b01(p12, a01)) <= 1 + 1e-12
    t = build_three_support_instance(0.5 - p12, p12, a01, np.random.default_rng(seed))
    assert interference(t) == pytest.approx(0.5, abs=1e-9)
    assert build_completion(t).transcript.passed


def test_single_device_completion_is_the_original_measurement():
    t = single_device_instance()
    art = build_completion(t)
    assert art.kind == "trivial" and art.transcript.passed
    for got, want in zip(summarized_povm(art), t.povm):
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_bare_experiment_reports_absence():
    tr = verify_triple(example2())
    assert not tr.passed
    assert not tr.get("mediators_present").passed
    assert tr.get("position_obstruction").residual <= 1e-9
    assert verify(example2()).get("position_obstruction").passed
    assert verify(build_completion(example2())).passed


def test_obstruction_value_for_two_particles():
    # with two particles, counting both at one pair of modes already reveals the parity
    worst, modes = position_obstruction(example3(2))
    assert worst == pytest.approx(1.0, abs=1e-9)
    assert len(modes) >= 1


def test_pipeline_records_include_none():
    art = build_completion(odd_case_ii_instance())
    assert NONE == 2
    assert art.transcript.get("leakage").passed


def test_artifact_json_round_trip():
    art = build_completion(odd_case_i_instance(np.random.default_rng(5)))
    data = json.loads(dumps(encode_artifact(art)))
    assert data["format"] == "interlab-completion"
    again = decode_artifact(data)
    assert verify_mediation(again).passed
    with pytest.raises(ScenarioError):
        decode_artifact({"kind": "even"})

"""Construction of mediated experiments from maximal ones."""
from __future__ import annotations

import itertools

import numpy as np

from ..constants import EPS_EQ, EPS_NORM, FORM_TOL, SUPPORT_TOL
from ..errors import FormViolation, GeometryError, UnsupportedSupport
from ..experiment import ExperimentTriple, configs, evolve
from ..linalg import extend_to_unitary
from .canonical import (
    bipartition_label,
    block_indices,
    block_slice,
    canonicalize,
    compute_G,
    require_maximal,
    string_index,
    string_weights,
)
from .pipeline import Branch, CompletionArtifact, idle_effects, mode_pair_effects


def _basis_vector(dim: int, idx: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[idx] = 1
    return v


def _rest_branch(projectors, dim: int, n: int, ncomp: int) -> Branch | None:
    rest = np.eye(dim, dtype=complex) - sum(projectors)
    if np.max(np.abs(rest)) <= EPS_NORM:
        return None
    eye = np.eye(dim, dtype=complex)
    return Branch("rest", rest, (eye,) * ncomp, (idle_effects(n, dim),) * ncomp, (None,) * ncomp)


def build_even_completion(t: ExperimentTriple) -> CompletionArtifact:
    """Mediated version of a maximal experiment with ``m = 2n`` devices.

    Branch ``B`` projects onto the spatial strings whose entry set is one half
    of ``B``; its unitary sends branch vector ``x`` to the sorted string of
    half ``x`` with every particle in internal state 0; particle ``l`` is then
    measured on the mode pair formed by the ``l``-th entries of the two
    sorted halves.
    """
    form = canonicalize(t)
    dev = t.devices
    n, m, d = dev.n, dev.m, dev.d
    k = d ** n
    dim = dev.dim
    keys = sorted({br.halves for comp in form.components for br in comp.branches})
    branches = []
    projectors = []
    for key in keys:
        strings = [i for i in dev.strings() if tuple(sorted(i)) in key and len(set(i)) == n]
        idx = block_indices(strings, m, k)
        proj = np.zeros((dim, dim), dtype=complex)
        proj[idx, idx] = 1
        projectors.append(proj)
        pairs = tuple(zip(key[0], key[1]))
        unitaries = []
        for comp in form.components:
            match = [br for br in comp.branches if br.halves == key]
            if not match:
                unitaries.append(np.eye(dim, dtype=complex))
                continue
            br = match[0]
            targets = [_basis_vector(dim, string_index(h, m) * k) for h in key]
            try:
                h = extend_to_unitary([(br.beta0, targets[0]), (br.beta1, targets[1])], dev.space, within=idx)
            except GeometryError as exc:
                raise GeometryError(f"branch {bipartition_label(key)}: {exc}") from exc
            unitaries.append(h.entries)
        effects = mode_pair_effects(n, m, d, pairs)
        ncomp = len(form.components)
        branches.append(Branch(bipartition_label(key), proj, tuple(unitaries), (effects,) * ncomp, (pairs,) * ncomp))
    rest = _rest_branch(projectors, dim, n, len(form.components))
    if rest is not None:
        branches.append(rest)
    weights = {bipartition_label(k_): q for k_, q in form.bipartitions.items()}
    return CompletionArtifact(t, "even", form.G.entries, tuple(branches), weights)


# odd order


def _sign(vec: np.ndarray, ref: np.ndarray) -> tuple[float, float]:
    """Best real sign s with vec ~ s * ref, and the residual norm."""
    s = 1.0 if np.vdot(ref, vec).real >= 0 else -1.0
    return s, float(np.linalg.norm(vec - s * ref))


def _relabel(k, l) -> tuple[int, ...]:
    """Cheapest reordering of ``l`` that differs from ``k`` in every position."""
    n = len(l)
    best = None
    for perm in itertools.permutations(range(n)):
        cand = tuple(l[p] for p in perm)
        if any(c == kk for c, kk in zip(cand, k)):
            continue
        cost = sum(1 for i, p in enumerate(perm) if i != p)
        if best is None or (cost, cand) < best[0]:
            best = ((cost, cand), cand)
    if best is None:
        raise UnsupportedSupport(f"no reordering of {l} avoids {k} componentwise")
    return best[1]


def _swap_strings(dim: int, a, b, m: int, k: int) -> np.ndarray:
    r = np.eye(dim, dtype=complex)
    if tuple(a) == tuple(b):
        return r
    sa, sb = block_slice(a, m, k), block_slice(b, m, k)
    r[sa, sa] = 0
    r[sb, sb] = 0
    r[sa, sb] = np.eye(k)
    r[sb, sa] = np.eye(k)
    return r


def _odd_component(t: ExperimentTriple, g: np.ndarray, psi: np.ndarray):
    """Unitary and mode pairs for one ensemble member; also returns a case tag."""
    dev = t.devices
    n, m, d = dev.n, dev.m, dev.d
    k = d ** n
    dim = dev.dim
    weights = string_weights(psi, dev)
    support = sorted(i for i, p in weights.items() if p > SUPPORT_TOL)
    # strings below SUPPORT_TOL are ignored; their amplitude widens the vector-level checks
    dropped = sum(p for p in weights.values() if p <= SUPPORT_TOL)
    tol = FORM_TOL + 2 * np.sqrt(dropped)

    def tilde(a):
        return g.conj().T @ evolve(dev, a, psi)

    def part(vec, strings):
        out = np.zeros(dim, dtype=complex)
        idx = block_indices(strings, m, k)
        out[idx] = vec[idx]
        return out

    if len(support) == 1 and n == 1 and m == 1:
        return "trivial", None, None
    if len(support) == 2:
        a_str, b_str = support
        union = set(a_str) | set(b_str)
        if len(union) != 2 * n - 1:
            raise FormViolation("support", float(2 * n - 1 - len(union)), "the two strings must cover every device")
        rep = [s for s in support if len(set(s)) < n]
        if rep:
            kk = rep[0]
            ll = b_str if kk == a_str else a_str
            return ("case-i",) + _direct_branch(dev, tilde, part, weights, kk, ll, tol)
        shared = set(a_str) & set(b_str)
        if len(shared) != 1:
            raise FormViolation("support", float(len(shared)), "strings must share exactly one device")
        return ("case-ii",) + _shared_branch(dev, tilde, part, weights, a_str, [b_str], b_str, shared.pop(), tol)
    if len(support) == 3 and n == 2:
        rep = [s for s in support if len(set(s)) < n]
        if len(rep) == 1:
            u = rep[0][0]
            others = [s for s in support if s != rep[0]]
            with_u = [s for s in others if u in s]
            without = [s for s in others if u not in s]
            if len(with_u) == 1 and len(without) == 1:
                kk, lstar = without[0], with_u[0]
                shared = set(kk) & set(lstar)
                if len(shared) == 1 and set(kk) | {u} == set(range(m)):
                    return ("three-support",) + _shared_branch(
                        dev, tilde, part, weights, kk, [rep[0], lstar], lstar, shared.pop(), tol
                    )
    raise UnsupportedSupport(f"support {support} is neither a two-string nor the three-string family")


def _check_half(weight: float, name: str, tol: float = FORM_TOL):
    if abs(weight - 0.5) > tol:
        raise FormViolation("probs", abs(weight - 0.5), f"{name} carries weight {weight:.6g}, expected 1/2")


def _direct_branch(dev, tilde, part, weights, kk, ll, tol=FORM_TOL):
    n, m, d = dev.n, dev.m, dev.d
    k = d ** n
    dim = dev.dim
    _check_half(weights[kk], f"string {kk}", tol)
    _check_half(weights[ll], f"string {ll}", tol)
    zero = tilde((0,) * m)
    phi_k = part(zero, [kk]) / np.sqrt(weights[kk])
    phi_l = part(zero, [ll]) / np.sqrt(weights[ll])
    for a in configs(m):
        v = tilde(a)
        sk, rk = _sign(part(v, [kk]) * np.sqrt(2), phi_k)
        sl, rl = _sign(part(v, [ll]) * np.sqrt(2), phi_l)
        res = max(rk, rl)
        if res > tol:
            raise FormViolation("units", res, f"devices do not act as signs at {a}")
        if sk * sl != (-1) ** (sum(a) % 2):
            raise FormViolation("signs", 2.0, f"relative sign wrong at {a}")
    targets = [_basis_vector(dim, string_index(s, m) * k) for s in (kk, ll)]
    w = extend_to_unitary([(phi_k, targets[0]), (phi_l, targets[1])], dev.space, within=block_indices([kk, ll], m, k))
    lp = _relabel(kk, ll)
    r = _swap_strings(dim, ll, lp, m, k)
    return r @ w.entries, tuple(zip(kk, lp))


def _shared_branch(dev, tilde, part, weights, kk, lstrings, lstar, c, tol=FORM_TOL):
    """Two branches sharing device ``c``; ``lstrings`` form the branch that is folded onto ``lstar``."""
    n, m, d = dev.n, dev.m, dev.d
    k = d ** n
    dim = dev.dim
    _check_half(weights[kk], f"string {kk}", tol)
    _check_half(sum(weights[s] for s in lstrings), f"strings {lstrings}", tol)
    e_c = tuple(1 if j == c else 0 for j in range(m))
    phi = [part(tilde(x_), [kk]) * np.sqrt(2) for x_ in ((0,) * m, e_c)]
    theta = [part(tilde(x_), lstrings) * np.sqrt(2) for x_ in ((0,) * m, e_c)]
    for a in configs(m):
        v = tilde(a)
        sk, rk = _sign(part(v, [kk]) * np.sqrt(2), phi[a[c]])
        sl, rl = _sign(part(v, lstrings) * np.sqrt(2), theta[a[c]])
        res = max(rk, rl)
        if res > tol:
            raise FormViolation("units", res, f"devices other than {c} do not act as signs at {a}")
        others = sum(a[j] for j in range(m) if j != c) % 2
        if sk * sl != (-1) ** others:
            raise FormViolation("signs", 2.0, f"relative sign wrong at {a}")
    alpha = np.vdot(phi[0], phi[1])
    overlap = abs(alpha + np.vdot(theta[0], theta[1]))
    if overlap > tol:
        raise FormViolation("overlap", float(overlap), "setting overlaps of the two branches must be opposite")
    sk_ = block_slice(kk, m, k)
    zero_int = phi[0][sk_]
    one_int = phi[1][sk_] - alpha * zero_int
    beta = float(np.linalg.norm(one_int))
    one_int = one_int / beta if beta > 1e-9 else None
    ls = block_slice(lstar, m, k)

    def on_lstar(vec_int):
        out = np.zeros(dim, dtype=complex)
        out[ls] = vec_int
        return out

    outs = [on_lstar(zero_int)]
    if one_int is not None:
        outs.append(on_lstar(-alpha * zero_int + beta * one_int))
    ins_on = _gram_schmidt(theta[: len(outs)])
    outs_on = _gram_schmidt(outs)
    mix = extend_to_unitary(list(zip(ins_on, outs_on)), dev.space, within=block_indices(lstrings, m, k)).entries
    flip = np.eye(dim, dtype=complex)
    if one_int is not None:
        proj = np.outer(one_int, one_int.conj())
        flip[ls, ls] -= 2 * proj
    lp = _relabel(kk, lstar)
    r = _swap_strings(dim, lstar, lp, m, k)
    return r @ flip @ mix, tuple(zip(kk, lp))


def _gram_schmidt(vecs):
    out = []
    for v in vecs:
        w = v.astype(complex)
        for _ in range(2):
            for u in out:
                w = w - np.vdot(u, w) * u
        out.append(w / np.linalg.norm(w))
    return out


def build_odd_completion(t: ExperimentTriple) -> CompletionArtifact:
    """Mediated version of a maximal experiment with ``m = 2n - 1`` devices.

    Each ensemble member must sit on two spatial strings (one of them with a
    repeated device, or the two sharing one device), or on the three-string
    family with a repeated device; single-device single-particle experiments
    are passed through with the original readout as the only mediator.
    """
    dev = t.devices
    n, m, d = dev.n, dev.m, dev.d
    if m != 2 * n - 1:
        raise FormViolation("order", float(abs(m - 2 * n + 1)), "device count must be 2n - 1")
    require_maximal(t)
    g = compute_G(dev).entries
    dim = dev.dim
    unitaries, effects, pairs, cases = [], [], [], []
    for w, psi in t.ensemble:
        case, u, pr = _odd_component(t, g, psi)
        cases.append(case)
        if case == "trivial":
            # the original readout is the mediator; parity of one bit is the bit itself
            pi0, pi1 = (g.conj().T @ e @ g for e in t.povm)
            unitaries.append(np.eye(dim, dtype=complex))
            effects.append(((pi0, pi1, np.zeros((dim, dim), dtype=complex)),))
            pairs.append(None)
            continue
        unitaries.append(u)
        effects.append(mode_pair_effects(n, m, d, pr))
        pairs.append(pr)
    branch = Branch("*", np.eye(dim, dtype=complex), tuple(unitaries), tuple(effects), tuple(pairs))
    kind = cases[0] if len(set(cases)) == 1 else "mixed:" + ",".join(cases)
    return CompletionArtifact(t, kind, g, (branch,), {"*": 1.0})

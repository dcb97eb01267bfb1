"""Truncated Fock space: occupation registers, ladder operators, number statistics and superselection.

Basis states are occupation tuples in lexicographic order, first mode most
significant. Fermionic signs follow the Jordan-Wigner convention in
register order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .constants import EPS_EQ, EPS_NORM
from .errors import LabelError, SpaceError, SuperselectionViolation
from .experiment import ConditionalTable, configs
from .linalg import ComplexOperator, IndexSpace


@dataclass(frozen=True)
class ModeRegister:
    modes: tuple[str, ...]
    max_occupation: int = 1
    statistics: str = "boson"
    charge_superselected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.statistics not in ("boson", "fermion"):
            raise ValueError(f"unknown statistics {self.statistics!r}")
        if self.statistics == "fermion":
            object.__setattr__(self, "max_occupation", 1)
        if self.max_occupation < 1:
            raise ValueError("max_occupation must be at least 1")
        if len(set(self.modes)) != len(self.modes):
            raise LabelError("mode labels must be unique")

    @property
    def space(self) -> IndexSpace:
        return IndexSpace(tuple((m, self.max_occupation + 1) for m in self.modes))

    @property
    def dim(self) -> int:
        return (self.max_occupation + 1) ** len(self.modes)

    def index(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise LabelError(f"unknown mode {mode!r}") from None

    def occupations(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.max_occupation + 1), repeat=len(self.modes)))

    def basis_index(self, occ) -> int:
        idx = 0
        for k in occ:
            idx = idx * (self.max_occupation + 1) + int(k)
        return idx


@dataclass(frozen=True)
class FockVector:
    register: ModeRegister
    amplitudes: np.ndarray
    lossy: bool = False

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != self.register.dim:
            raise ValueError(f"expected {self.register.dim} amplitudes, got {amp.shape[0]}")
        nrm = float(np.linalg.norm(amp))
        if not self.lossy and abs(nrm - 1) > EPS_NORM:
            raise ValueError(f"norm {nrm} is not 1")
        if self.register.charge_superselected:
            sectors = {k for k, p in number_distribution_of(self.register, amp).items() if p > EPS_NORM}
            if len(sectors) > 1:
                raise SuperselectionViolation(f"superposition across number sectors {sorted(sectors)}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


def vacuum(register: ModeRegister) -> FockVector:
    amp = np.zeros(register.dim, dtype=complex)
    amp[0] = 1
    return FockVector(register, amp)


def _local(register: ModeRegister, pos: int, op: np.ndarray, string: np.ndarray | None = None) -> np.ndarray:
    d = register.max_occupation + 1
    out = np.eye(1, dtype=complex)
    for j in range(len(register.modes)):
        if j == pos:
            f = op
        elif string is not None and j < pos:
            f = string
        else:
            f = np.eye(d)
        out = np.kron(out, f)
    return out


def creation(register: ModeRegister, mode: str) -> ComplexOperator:
    """Raising operator on ``mode``: sqrt(k+1) truncated at the cap, or a Jordan-Wigner fermion."""
    pos = register.index(mode)
    d = register.max_occupation + 1
    up = np.diag(np.sqrt(np.arange(1, d)), -1).astype(complex)
    string = np.diag([1, -1]).astype(complex) if register.statistics == "fermion" else None
    return ComplexOperator(register.space, _local(register, pos, up, string))


def annihilation(register: ModeRegister, mode: str) -> ComplexOperator:
    return creation(register, mode).adjoint()


def mode_number(register: ModeRegister, mode: str) -> np.ndarray:
    d = register.max_occupation + 1
    return _local(register, register.index(mode), np.diag(np.arange(d)).astype(complex))


def number_operator(register: ModeRegister) -> ComplexOperator:
    total = sum(mode_number(register, m) for m in register.modes)
    return ComplexOperator(register.space, total, "hermitian")


def parity_operator(register: ModeRegister) -> ComplexOperator:
    n = np.diag(number_operator(register).entries).real
    return ComplexOperator(register.space, np.diag((-1.0) ** np.round(n)).astype(complex), "hermitian")


def number_distribution_of(register: ModeRegister, amp: np.ndarray) -> dict[int, float]:
    out: dict[int, float] = {}
    for occ, a in zip(register.occupations(), amp):
        p = float(abs(a) ** 2)
        out[sum(occ)] = out.get(sum(occ), 0.0) + p
    return out


def number_distribution(v: FockVector, tol: float = EPS_EQ) -> dict[int, float]:
    """Probability of each total occupation; sectors below ``tol`` are dropped."""
    dist = number_distribution_of(v.register, v.amplitudes)
    total = sum(dist.values())
    return {k: p / total for k, p in sorted(dist.items()) if p / total > tol}


def apply(op, v: FockVector, lossy: bool = True) -> FockVector:
    entries = op.entries if isinstance(op, ComplexOperator) else np.asarray(op)
    return FockVector(v.register, entries @ v.amplitudes, lossy=lossy)


def normalized(v: FockVector) -> FockVector:
    return FockVector(v.register, v.amplitudes / np.linalg.norm(v.amplitudes))


def create_state(register: ModeRegister, terms) -> np.ndarray:
    """Amplitudes of ``sum_k coef_k * c_{m1}^dag c_{m2}^dag ... |vac>`` for ``terms = [(coef, (m1, m2, ...)), ...]``."""
    vac = vacuum(register).amplitudes
    out = np.zeros(register.dim, dtype=complex)
    for coef, modes in terms:
        v = vac.copy()
        for mode in reversed(modes):
            v = creation(register, mode).entries @ v
        out += coef * v
    return out


def superselection_check(effect, register: ModeRegister) -> bool:
    """Whether ``effect`` respects the register's superselection rule.

    Charge-superselected registers require commuting with the total number;
    other fermionic registers require commuting with the number parity;
    unconstrained bosonic registers accept everything.
    """
    e = effect.entries if isinstance(effect, ComplexOperator) else np.asarray(effect)
    if register.charge_superselected:
        q = number_operator(register).entries
    elif register.statistics == "fermion":
        q = parity_operator(register).entries
    else:
        return True
    return bool(np.max(np.abs(e @ q - q @ e)) <= EPS_NORM)


def _projector(vec: np.ndarray) -> np.ndarray:
    return np.outer(vec, vec.conj())


# photonic mediation


def photon_register(charge_superselected: bool = False) -> ModeRegister:
    return ModeRegister(("1", "2"), max_occupation=2, statistics="boson", charge_superselected=charge_superselected)


def photon_input(register: ModeRegister, a1: int, a2: int) -> FockVector:
    s = (-1) ** ((a1 + a2) % 2)
    return FockVector(register, create_state(register, [(1 / np.sqrt(2), ("1",)), (s / np.sqrt(2), ("2",))]))


def photonic_effects(register: ModeRegister) -> dict[tuple[int, int], np.ndarray]:
    """Product projectors onto ``(1 + (-1)**x c_i^dag)|0>/sqrt(2)`` at each mode."""
    out = {}
    for b1, b2 in itertools.product((0, 1), repeat=2):
        vec = create_state(
            register,
            [(0.5, ()), (0.5 * (-1) ** b1, ("1",)), (0.5 * (-1) ** b2, ("2",)), (0.5 * (-1) ** (b1 + b2), ("1", "2"))],
        )
        out[(b1, b2)] = _projector(vec)
    for eff in out.values():
        if not superselection_check(eff, register):
            raise SuperselectionViolation("vacuum/one-particle superposition effects break charge superselection")
    return out


@dataclass(frozen=True)
class PhotonResult:
    outcomes: dict  # (b1, b2) -> probability
    post_states: dict  # (b1, b2) -> FockVector (normalized, only reachable outcomes)
    input_numbers: dict
    post_numbers: dict  # total number distribution after the measurement, averaged over outcomes


def photon_mediation(a1: int, a2: int, register: ModeRegister | None = None) -> PhotonResult:
    """Intermediate measurement on a delocalized photon that mediates the input parity.

    The effects superpose the vacuum with one photon, so the particle number
    after the measurement is no longer sharp.
    """
    register = register or photon_register()
    if register.statistics != "boson" or len(register.modes) != 2:
        raise SpaceError("the photonic effects need a two-mode bosonic register")
    effects = photonic_effects(register)
    psi = photon_input(register, a1, a2)
    outcomes, posts = {}, {}
    mixed: dict[int, float] = {}
    for rec, eff in effects.items():
        post = eff @ psi.amplitudes
        p = float(np.vdot(post, post).real)
        outcomes[rec] = p
        if p > EPS_EQ:
            v = FockVector(register, post / np.sqrt(p))
            posts[rec] = v
            for k, q in number_distribution(v).items():
                mixed[k] = mixed.get(k, 0.0) + p * q
    return PhotonResult(outcomes, posts, number_distribution(psi), dict(sorted(mixed.items())))


# electronic mediation

ELECTRON_MODES = ("11", "21", "12", "22")


def electron_register() -> ModeRegister:
    return ModeRegister(ELECTRON_MODES, statistics="fermion", charge_superselected=True)


def electron_input(register: ModeRegister, a1: int, a2: int) -> FockVector:
    """Signal electron over (12, 22) carrying the phase, ancilla electron over (11, 21)."""
    s = (-1) ** ((a1 + a2) % 2)
    terms = []
    for anc in ("11", "21"):
        for sig, c in (("12", 1.0), ("22", s)):
            terms.append((0.5 * c, (anc, sig)))
    return FockVector(register, create_state(register, terms))


def sector_projectors(register: ModeRegister) -> tuple[np.ndarray, np.ndarray]:
    """One electron at each Bob, or both electrons at the same Bob."""
    pi1 = _projector(create_state(register, [(1, ("11", "22"))])) + _projector(create_state(register, [(1, ("21", "12"))]))
    pi2 = _projector(create_state(register, [(1, ("11", "12"))])) + _projector(create_state(register, [(1, ("21", "22"))]))
    return pi1, pi2


def _pair_mode_projector(register: ModeRegister, m1: str, m2: str, x: int) -> np.ndarray:
    """Occupation of the mode (c_m1 + (-1)**x c_m2)/sqrt(2); a projector on states with at most one particle there."""
    c = (annihilation(register, m1).entries + (-1) ** x * annihilation(register, m2).entries) / np.sqrt(2)
    return c.conj().T @ c


def interferometric_effects(register: ModeRegister, sector: int, sign_correction: bool = True) -> dict:
    """Sector-conditioned product effects; each factor acts on one Bob's pair of modes.

    In the one-electron-per-Bob sector the anticommutation of the two
    creation operators flips the recorded parity; with ``sign_correction``
    Bob 2 relabels their outcome there so the mediator parity matches the
    input parity.
    """
    if sector == 1:
        pairs = (("11", "12"), ("21", "22"))
    else:
        pairs = (("11", "21"), ("12", "22"))
    out = {}
    for b1, b2 in itertools.product((0, 1), repeat=2):
        x2 = (b2 + 1) % 2 if (sector == 1 and sign_correction) else b2
        out[(b1, b2)] = _pair_mode_projector(register, *pairs[0], b1) @ _pair_mode_projector(register, *pairs[1], x2)
    return out


@dataclass(frozen=True)
class ElectronResult:
    stage1: tuple[float, float]
    stage2: dict  # (b1, b2) -> probability, summed over sectors
    conditional: dict  # sector -> {(b1, b2): P(b1 b2 | sector)}
    numbers: dict  # stage name -> number distribution
    number_check: bool


def electron_mediation(a1: int, a2: int, register: ModeRegister | None = None, sign_correction: bool = True) -> ElectronResult:
    """Two-stage number-preserving mediation with an ancilla electron."""
    register = register or electron_register()
    psi = electron_input(register, a1, a2)
    pi = sector_projectors(register)
    applied = list(pi)
    numbers = {"input": number_distribution(psi)}
    stage1 = []
    stage2: dict = {rec: 0.0 for rec in itertools.product((0, 1), repeat=2)}
    conditional = {}
    for k, proj in enumerate(pi, start=1):
        post = proj @ psi.amplitudes
        p = float(np.vdot(post, post).real)
        stage1.append(p)
        if p <= EPS_EQ:
            continue
        v = FockVector(register, post / np.sqrt(p))
        numbers[f"sector{k}"] = number_distribution(v)
        effects = interferometric_effects(register, k, sign_correction)
        applied.extend(effects.values())
        cond = {}
        for rec, eff in effects.items():
            out = eff @ v.amplitudes
            q = float(np.vdot(out, out).real)
            cond[rec] = q
            stage2[rec] += p * q
            if q > EPS_EQ:
                numbers[f"sector{k}:{rec[0]}{rec[1]}"] = number_distribution(FockVector(register, out / np.sqrt(q)))
        conditional[k] = cond
    check = all(superselection_check(e, register) for e in applied)
    return ElectronResult((stage1[0], stage1[1]), stage2, conditional, numbers, check)


def mediation_table(fn, **kwargs) -> tuple[ConditionalTable, dict]:
    """Conditional table of ``b = b1 xor b2`` over both inputs, and the mediator records per input."""
    rows, records = {}, {}
    for a in configs(2):
        res = fn(*a, **kwargs)
        dist = res.outcomes if isinstance(res, PhotonResult) else res.stage2
        records[a] = dist
        row = np.zeros(2)
        for (b1, b2), p in dist.items():
            row[(b1 + b2) % 2] += p
        rows[a] = row
    return ConditionalTable.from_rows(rows, 2), records


def fock_single_photon_table() -> ConditionalTable:
    """The two-mode phase experiment written with creation operators and read out in the +/- basis."""
    reg = ModeRegister(("1", "2"))
    plus = create_state(reg, [(1 / np.sqrt(2), ("1",)), (1 / np.sqrt(2), ("2",))])
    minus = create_state(reg, [(1 / np.sqrt(2), ("1",)), (-1 / np.sqrt(2), ("2",))])
    rows = {}
    for a in configs(2):
        psi = photon_input(reg, *a).amplitudes
        rows[a] = np.array([abs(np.vdot(plus, psi)) ** 2, abs(np.vdot(minus, psi)) ** 2])
    return ConditionalTable.from_rows(rows, 2)

"""Measurement bases, noise channels, and seeded shot sampling.

The simulated experiment mirrors the physical circuit order: the prepared
state idles (T1/T2 relaxation), suffers gate noise (depolarizing shrink),
is rotated into the measurement basis (optionally with a systematic
over-rotation), and is finally read out through a classical bit-flip
confusion matrix before shots are drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import BlochVector, MeasurementAngles, StateAngles, born_probability, measurement_axis

_AXIS_TOL = 1e-12


@dataclass(frozen=True)
class PvmBasis:
    """A two-outcome measurement identified by its unit axis u.

    The axis is cached alongside the circuit angles (alpha, beta) that
    emulate the measurement on hardware restricted to the computational
    basis.
    """

    id: str
    angles: MeasurementAngles
    axis: BlochVector

    def __post_init__(self):
        expected = measurement_axis(self.angles)
        dx = self.axis.x - expected.x
        dy = self.axis.y - expected.y
        dz = self.axis.z - expected.z
        if math.sqrt(dx * dx + dy * dy + dz * dz) > _AXIS_TOL:
            raise ValueError(f"basis {self.id!r}: cached axis disagrees with its angles")

    @classmethod
    def from_angles(cls, basis_id: str, alpha: float, beta: float) -> "PvmBasis":
        angles = MeasurementAngles(alpha, beta)
        return cls(basis_id, angles, measurement_axis(angles))


@dataclass(frozen=True)
class PvmCatalog:
    """Ordered measurement bases used for one tomography experiment."""

    name: str
    bases: tuple[PvmBasis, ...]

    def __post_init__(self):
        ids = [b.id for b in self.bases]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate basis ids in catalog {self.name!r}")

    def __len__(self) -> int:
        return len(self.bases)

    def basis_by_id(self, basis_id: str) -> PvmBasis:
        for b in self.bases:
            if b.id == basis_id:
                return b
        raise KeyError(f"basis {basis_id!r} not in catalog {self.name!r}")

    def axes_matrix(self) -> np.ndarray:
        """(n_bases, 3) array of measurement axes, in catalog order."""
        return np.array([b.axis.as_tuple() for b in self.bases], dtype=float)


_TETRA_ALPHA = math.acos(-1.0 / 3.0)


def tetrahedral_catalog() -> PvmCatalog:
    """Four bases whose axes form a regular tetrahedron (T0 along +z)."""
    return PvmCatalog(
        "tetrahedral",
        (
            PvmBasis.from_angles("T0", 0.0, 0.0),
            PvmBasis.from_angles("T1", _TETRA_ALPHA, 0.0),
            PvmBasis.from_angles("T2", _TETRA_ALPHA, 2.0 * math.pi / 3.0),
            PvmBasis.from_angles("T3", _TETRA_ALPHA, -2.0 * math.pi / 3.0),
        ),
    )


def pauli_catalog() -> PvmCatalog:
    """Minimal spanning set: the canonical z, x, y axes."""
    return PvmCatalog(
        "pauli",
        (
            PvmBasis.from_angles("Z", 0.0, 0.0),
            PvmBasis.from_angles("X", math.pi / 2.0, 0.0),
            PvmBasis.from_angles("Y", math.pi / 2.0, math.pi / 2.0),
        ),
    )


CATALOGS = {
    "tetrahedral": tetrahedral_catalog,
    "pauli": pauli_catalog,
}


def catalog_by_name(name: str) -> PvmCatalog:
    try:
        return CATALOGS[name]()
    except KeyError:
        raise ValueError(f"unknown catalog {name!r}; choose from {sorted(CATALOGS)}") from None


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of the simulated error mechanisms.

    All fields default to the ideal (no-op) setting.  t1/t2 are expressed
    in the hardware time quantum (dt); +inf disables relaxation.  The
    complete-positivity condition t2 <= 2*t1 is enforced.
    """

    readout_flip_01: float = 0.0
    readout_flip_10: float = 0.0
    depolarizing_p: float = 0.0
    t1: float = math.inf
    t2: float = math.inf
    rot_error_scale: float = 0.0

    def __post_init__(self):
        for name in ("readout_flip_01", "readout_flip_10", "depolarizing_p"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {v}")
        if self.t1 <= 0.0 or self.t2 <= 0.0:
            raise ValueError("t1 and t2 must be positive")
        if self.t2 > 2.0 * self.t1:
            raise ValueError(f"t2 <= 2*t1 required for a physical channel, got t1={self.t1}, t2={self.t2}")

    @classmethod
    def ideal(cls) -> "NoiseSpec":
        return cls()

    def to_dict(self) -> dict:
        return {
            "readout_flip_01": self.readout_flip_01,
            "readout_flip_10": self.readout_flip_10,
            "depolarizing_p": self.depolarizing_p,
            "t1": None if math.isinf(self.t1) else self.t1,
            "t2": None if math.isinf(self.t2) else self.t2,
            "rot_error_scale": self.rot_error_scale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        known = {
            "readout_flip_01", "readout_flip_10", "depolarizing_p",
            "t1", "t2", "rot_error_scale",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("t1", "t2"):
            if kwargs.get(key) is None:
                kwargs.pop(key, None)
        return cls(**kwargs)


@dataclass(frozen=True)
class MeasurementRecord:
    """Shot statistics of one (state, basis) circuit: count successes out of shots."""

    state: StateAngles | None
    basis_id: str
    shots: int
    count: int
    seed: int | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if not 0 <= self.count <= self.shots:
            raise ValueError(f"count must lie in [0, shots], got {self.count}/{self.shots}")

    @property
    def empirical_probability(self) -> float:
        return self.count / self.shots


def apply_delay(a: BlochVector, t: float, spec: NoiseSpec) -> BlochVector:
    """Idle the state for t dt-units of T1/T2 relaxation toward |0> (z -> +1)."""
    if t < 0.0:
        raise ValueError(f"delay must be nonnegative, got {t}")
    if t == 0.0:
        return a
    g2 = math.exp(-t / spec.t2)
    g1 = math.exp(-t / spec.t1)
    return BlochVector(a.x * g2, a.y * g2, 1.0 + (a.z - 1.0) * g1)


def apply_channel_noise(a: BlochVector, spec: NoiseSpec) -> BlochVector:
    """Depolarizing shrink a -> (1 - p) a."""
    return a.scaled(1.0 - spec.depolarizing_p)


def corrupt_basis_rotation(u: BlochVector, a: BlochVector, spec: NoiseSpec) -> BlochVector:
    """Systematic per-basis over-rotation of the measurement axis.

    The basis-change circuit nominally rotates by alpha; the corrupted
    hardware over-rotates by rot_error_scale * alpha about the y-axis, so
    bases farther from the computational axis are perturbed more.  The
    returned axis does not depend on the state a, but the statistics it
    induces do, which is what makes the corruption state-dependent.
    """
    if spec.rot_error_scale == 0.0:
        return u
    alpha = math.acos(max(-1.0, min(1.0, u.z)))
    delta = spec.rot_error_scale * alpha
    c, s = math.cos(delta), math.sin(delta)
    tilted = BlochVector(c * u.x + s * u.z, u.y, -s * u.x + c * u.z)
    return tilted.scaled(1.0 / tilted.norm())


def derive_record_seed(master_seed: int, state_index: int, basis_index: int, trial_index: int = 0) -> int:
    """Collision-resistant 64-bit seed for one (state, basis, trial) record.

    Mixes the four integers through numpy's SeedSequence entropy pool, so
    records can be generated in parallel with no shared RNG state while
    staying bit-reproducible.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    ss = np.random.SeedSequence((master_seed, state_index, basis_index, trial_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _binomial_draw(shots: int, p: float, seed: int) -> int:
    """Exact-distribution binomial count from the counter-based Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    return int(rng.binomial(shots, p))


def readout_flip(p: float, spec: NoiseSpec) -> float:
    """Push a true outcome probability through the classical confusion matrix."""
    return p * (1.0 - spec.readout_flip_10) + (1.0 - p) * spec.readout_flip_01


def sample_record(
    a_prepared: BlochVector,
    basis: PvmBasis,
    shots: int,
    spec: NoiseSpec,
    seed: int,
    state: StateAngles | None = None,
) -> MeasurementRecord:
    """Draw one shot-count record for a prepared state in one basis.

    a_prepared is the state after any delay/depolarizing channels; this
    function applies the remaining mechanisms (basis corruption, readout
    flips) and the binomial draw.  Deterministic for a fixed seed.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    u_eff = corrupt_basis_rotation(basis.axis, a_prepared, spec)
    p = born_probability(a_prepared, u_eff)
    p_eff = readout_flip(p, spec)
    count = _binomial_draw(shots, p_eff, seed)
    return MeasurementRecord(state=state, basis_id=basis.id, shots=shots, count=count, seed=seed)

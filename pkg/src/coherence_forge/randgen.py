"""Seeded random states, channels and named state families.

Randomness comes from numpy's Philox counter-based generator, whose raw
64-bit output is fixed by the algorithm, so a given seed reproduces the same
stream on every platform. Uniforms and Gaussians are derived from that raw
stream here (53-bit mantissa fill, Box-Muller) rather than through numpy's
distribution methods, whose algorithms are not frozen across releases.
"""

from __future__ import annotations

import numpy as np

from .linalg import ValidationError, as_density_matrix
from .symmetry import GroupRep, QuantumChannel

MEASURE_MIXED = "hilbert-schmidt (ginibre, rank d)"
MEASURE_PURE = "haar (normalized complex gaussian)"
FULL_RANK_EIG = 1e-10
MAX_RETRIES = 10


class SeededSource:
    """Deterministic stream of random numbers keyed by ``seed`` and a spawn path.

    ``counter`` is the number of 64-bit words drawn so far.
    """

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._bits = np.random.Philox(ss)
        self.counter = 0

    def __repr__(self) -> str:
        return f"SeededSource(seed={self.seed}, spawn_key={self.spawn_key}, counter={self.counter})"

    def spawn(self, index: int) -> "SeededSource":
        """Independent substream for worker or sample ``index``."""
        return SeededSource(self.seed, self.spawn_key + (int(index),))

    def raw(self, n: int) -> np.ndarray:
        self.counter += n
        return self._bits.random_raw(n).astype(np.uint64)

    def uniform(self, n: int) -> np.ndarray:
        """n doubles in the open interval (0, 1)."""
        return ((self.raw(n) >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        r = np.sqrt(-2.0 * np.log(u[:m]))
        t = 2 * np.pi * u[m:]
        return np.concatenate([r * np.cos(t), r * np.sin(t)])[:n]

    def complex_normal(self, shape) -> np.ndarray:
        """Standard complex Gaussians, E|z|^2 = 1."""
        n = int(np.prod(shape))
        z = self.normal(2 * n)
        return ((z[:n] + 1j * z[n:]) / np.sqrt(2)).reshape(shape)

    def dirichlet(self, k: int, alpha: float = 1.0) -> np.ndarray:
        """Flat Dirichlet (alpha = 1) via normalized exponentials."""
        if alpha != 1.0:
            raise NotImplementedError("only the flat Dirichlet is provided")
        e = -np.log(self.uniform(k))
        return e / e.sum()


def _source(src) -> SeededSource:
    if isinstance(src, SeededSource):
        return src
    return SeededSource(int(src))


def ginibre(d: int, rank: int, src) -> np.ndarray:
    return _source(src).complex_normal((d, rank))


def random_density_matrix(d: int, rank: int | None = None, src=0) -> np.ndarray:
    """G G^H / Tr[G G^H] with G a d x rank complex Gaussian matrix."""
    rank = d if rank is None else int(rank)
    if d < 1 or not 1 <= rank <= d:
        raise ValidationError(f"rank must lie in [1, {d}], got {rank}")
    src = _source(src)
    for _ in range(MAX_RETRIES):
        g = ginibre(d, rank, src)
        rho = g @ g.conj().T
        rho = (rho + rho.conj().T) / (2 * np.trace(rho).real)
        if rank < d or np.linalg.eigvalsh(rho)[0] > FULL_RANK_EIG:
            return rho
    raise RuntimeError("could not draw a full-rank sample")


def random_pure_vector(d: int, src=0) -> np.ndarray:
    v = _source(src).complex_normal(d)
    return v / np.linalg.norm(v)


def random_pure_state(d: int, src=0) -> np.ndarray:
    v = random_pure_vector(d, src)
    return np.outer(v, v.conj())


def random_unitary(d: int, src=0) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with the phases of R's diagonal fixed."""
    q, r = np.linalg.qr(ginibre(d, d, src))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def maximally_coherent_state(d: int) -> np.ndarray:
    if d < 1:
        raise ValidationError("dimension must be positive")
    return np.full((d, d), 1.0 / d, dtype=complex)


def rho_p_family(d: int, p: float) -> np.ndarray:
    """(1+p) 1/d - p psi+, a state for 0 <= p <= 1/(d-1), with RoC = p."""
    if d < 2:
        raise ValidationError("family is defined for d >= 2")
    if not 0 <= p <= 1 / (d - 1) + 1e-12:
        raise ValidationError(f"p must lie in [0, 1/(d-1)] = [0, {1 / (d - 1):.6g}], got {p}")
    return (1 + p) * np.eye(d, dtype=complex) / d - p * maximally_coherent_state(d)


def random_generalized_x_state(d: int, src=0) -> np.ndarray:
    """Random state supported on the diagonal and anti-diagonal.

    Each pair (j, d-1-j) carries a Ginibre 2x2 PSD block; for odd d the
    center index (d-1)/2 gets a nonnegative weight of its own.
    """
    if d < 2:
        raise ValidationError("dimension must be at least 2")
    src = _source(src)
    rho = np.zeros((d, d), dtype=complex)
    for j in range(d // 2):
        g = src.complex_normal((2, 2))
        block = g @ g.conj().T
        idx = [j, d - 1 - j]
        rho[np.ix_(idx, idx)] = block
    if d % 2:
        c = (d - 1) // 2
        rho[c, c] = abs(src.complex_normal(1)[0]) ** 2
    rho = (rho + rho.conj().T) / 2
    return as_density_matrix(rho / np.trace(rho).real)


def _identity_index(rep: GroupRep) -> int:
    eye = np.eye(rep.dim)
    overlaps = [abs(np.trace(u)) for u in rep.unitaries]
    g = int(np.argmax(overlaps))
    u = rep.unitaries[g]
    if abs(overlaps[g] - rep.dim) > 1e-9 or np.linalg.norm(u / (np.trace(u) / rep.dim) - eye) > 1e-9:
        raise ValidationError("rep has no identity element")
    return g


def covariant_mixture(rep: GroupRep, weights, dephasing: float = 0.0) -> QuantumChannel:
    """xi -> sum_g q_g U_g xi U_g^H, then (1-t) id + t twirl with t = ``dephasing``."""
    if not rep.is_abelian:
        raise ValidationError("covariant mixtures are only guaranteed covariant for abelian reps")
    if not 0 <= dephasing <= 1:
        raise ValidationError("dephasing strength must lie in [0, 1]")
    ch = QuantumChannel.mixture(rep, weights)
    if dephasing > 0:
        w = np.full(rep.order, dephasing / rep.order)
        w[_identity_index(rep)] += 1 - dephasing
        ch = ch.then(QuantumChannel.mixture(rep, w / w.sum()))
    return ch


def random_covariant_channel(rep: GroupRep, src=0, dephasing: float | None = None) -> QuantumChannel:
    """Random mixture of group conjugations, optionally followed by partial dephasing.

    With ``dephasing=None`` the strength is itself drawn uniformly from [0, 1).
    """
    if not rep.is_abelian:
        raise ValidationError("random covariant channels need an abelian rep")
    src = _source(src)
    q = src.dirichlet(rep.order)
    t = float(src.uniform(1)[0]) if dephasing is None else dephasing
    return covariant_mixture(rep, q, t)

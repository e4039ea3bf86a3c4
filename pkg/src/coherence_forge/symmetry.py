"""Finite group representations, the group-average (twirl) map, and channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .linalg import ValidationError, as_hermitian, hermitian_basis

UNITARITY_TOL = 1e-9
FIXED_EIG_TOL = 1e-8
PROB_FLOOR = 1e-12


class GroupRep:
    """A finite group given by its unitary matrices ``U_g``.

    Closure is checked projectively (``U_g U_h = phase * U_k``), since the
    conjugation action ignores global phases. A representation whose induced
    group average is not idempotent is rejected.
    """

    def __init__(self, unitaries: Sequence, labels: Sequence | None = None, tol: float = UNITARITY_TOL):
        us = np.array([np.asarray(u, dtype=complex) for u in unitaries])
        if us.ndim != 3 or us.shape[1] != us.shape[2] or len(us) == 0:
            raise ValidationError("expected a non-empty list of square matrices of equal size")
        self.tol = tol
        self.dim = us.shape[1]
        eye = np.eye(self.dim)
        for k, u in enumerate(us):
            err = np.linalg.norm(u @ u.conj().T - eye)
            if err > tol:
                raise ValidationError(f"element {k} is not unitary (||UU^H - 1|| = {err:.2e})")
        self.unitaries = us
        self.unitaries.setflags(write=False)
        self.labels = tuple(labels) if labels is not None else tuple(range(len(us)))
        if len(self.labels) != len(us):
            raise ValidationError("labels and unitaries differ in length")
        self._check_closure()
        self._check_idempotent()

    @property
    def order(self) -> int:
        return len(self.unitaries)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, order={self.order})"

    def _check_closure(self) -> None:
        us = self.unitaries
        for a in range(self.order):
            for b in range(self.order):
                prod = us[a] @ us[b]
                # |Tr(U_k^H P)| = d iff P = phase * U_k for unitary P
                overlaps = np.abs(np.einsum("kji,ji->k", us.conj(), prod))
                k = int(np.argmax(overlaps))
                phase = np.trace(us[k].conj().T @ prod) / self.dim
                phase /= abs(phase)
                if np.linalg.norm(prod - phase * us[k]) > self.tol * self.dim:
                    raise ValidationError(f"set is not closed: U_{a} U_{b} is not an element up to phase")

    def _check_idempotent(self) -> None:
        basis = hermitian_basis(self.dim)
        once = self._twirl_many(basis)
        twice = self._twirl_many(once)
        if np.max(np.linalg.norm(twice - once, axis=(1, 2))) > 10 * self.tol:
            raise ValidationError("induced group average is not idempotent")

    def _twirl_many(self, xs: np.ndarray) -> np.ndarray:
        us = self.unitaries
        return np.einsum("gij,kjl,gml->kim", us, xs, us.conj()) / self.order

    def conjugate(self, g: int, x) -> np.ndarray:
        u = self.unitaries[g]
        return u @ np.asarray(x) @ u.conj().T

    def twirl(self, x) -> np.ndarray:
        """Group average (1/|G|) sum_g U_g X U_g^H."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise ValidationError(f"dimension mismatch: rep is {self.dim}, matrix is {x.shape}")
        return self._twirl_many(x[None])[0]

    @cached_property
    def twirl_matrix(self) -> np.ndarray:
        """Real symmetric matrix of the twirl on the Hermitian basis of ``hermitian_basis``."""
        basis = hermitian_basis(self.dim)
        images = self._twirl_many(basis)
        return np.real(np.einsum("aij,bji->ab", basis, images))

    @cached_property
    def _split_bases(self) -> tuple[np.ndarray, np.ndarray]:
        basis = hermitian_basis(self.dim)
        w, v = np.linalg.eigh(self.twirl_matrix)
        fixed = np.abs(w - 1) <= FIXED_EIG_TOL
        fixed_basis = np.einsum("ak,aij->kij", v[:, fixed], basis)
        rest_basis = np.einsum("ak,aij->kij", v[:, ~fixed], basis)
        return fixed_basis, rest_basis

    @property
    def fixed_point_basis(self) -> np.ndarray:
        """Orthonormal Hermitian basis of {X : twirl(X) = X}, shape (k, d, d)."""
        return self._split_bases[0]

    @property
    def complement_basis(self) -> np.ndarray:
        """Orthonormal Hermitian basis of the twirl's kernel, shape (d*d - k, d, d)."""
        return self._split_bases[1]

    @cached_property
    def is_abelian(self) -> bool:
        us = self.unitaries
        comm = np.einsum("aij,bjk->abik", us, us) - np.einsum("bij,ajk->abik", us, us)
        return bool(np.max(np.abs(comm)) <= self.tol * self.dim) if comm.size else True

    def to_json(self) -> dict:
        return {"unitaries": [_matrix_json(u) for u in self.unitaries]}


class CyclicRep(GroupRep):
    """Z_d generated by the phase flip Z|j> = exp(2 pi i j/d)|j>.

    Its group average is the total dephasing in the reference basis, so
    ``twirl`` returns the diagonal part directly.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValidationError("dimension must be positive")
        phases = np.exp(2j * np.pi * np.arange(d) / d)
        super().__init__([np.diag(phases**k) for k in range(d)], labels=list(range(d)))

    def twirl(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise ValidationError(f"dimension mismatch: rep is {self.dim}, matrix is {x.shape}")
        return np.diag(np.diag(x))

    @cached_property
    def _split_bases(self) -> tuple[np.ndarray, np.ndarray]:
        basis = hermitian_basis(self.dim)
        return basis[: self.dim], basis[self.dim :]

    def to_json(self) -> dict:
        return {"cyclic": self.dim}


def trivial_rep(d: int) -> GroupRep:
    return GroupRep([np.eye(d)])


def parse_rep(spec) -> GroupRep:
    """Build a rep from ``"cyclic:d"``, ``{"cyclic": d}`` or ``{"unitaries": [...]}``."""
    from .io import matrix_from_json

    if isinstance(spec, GroupRep):
        return spec
    if isinstance(spec, str):
        kind, _, arg = spec.partition(":")
        if kind == "cyclic" and arg.isdigit():
            return CyclicRep(int(arg))
        if kind == "trivial" and arg.isdigit():
            return trivial_rep(int(arg))
        raise ValidationError(f"unknown rep shorthand {spec!r}")
    if isinstance(spec, dict):
        if "cyclic" in spec:
            return CyclicRep(int(spec["cyclic"]))
        if "unitaries" in spec:
            return GroupRep([matrix_from_json(m) for m in spec["unitaries"]], labels=spec.get("labels"))
    if isinstance(spec, list):
        return GroupRep([matrix_from_json(m) for m in spec])
    raise ValidationError(f"cannot interpret rep specification {spec!r}")


def _matrix_json(m):
    from .io import matrix_to_json

    return matrix_to_json(m)


def twirl(rep: GroupRep, x) -> np.ndarray:
    return rep.twirl(x)


def is_symmetric(rep: GroupRep, rho, tol: float = 1e-9) -> bool:
    rho = np.asarray(rho, dtype=complex)
    return bool(np.linalg.norm(rep.twirl(rho) - rho) <= tol)


def fixed_point_basis(rep: GroupRep) -> np.ndarray:
    return rep.fixed_point_basis


@dataclass(frozen=True)
class QuantumChannel:
    """Completely positive map in Kraus form.

    With ``trace_preserving=True`` the Kraus operators must satisfy
    sum_l K_l^H K_l = 1; instrument branches set it to False.
    """

    kraus: tuple
    trace_preserving: bool = True
    tol: float = field(default=1e-9, compare=False)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks or any(k.ndim != 2 or k.shape != ks[0].shape or k.shape[0] != k.shape[1] for k in ks):
            raise ValidationError("Kraus operators must be non-empty, square and equally sized")
        object.__setattr__(self, "kraus", ks)
        if self.trace_preserving:
            err = np.linalg.norm(self.kraus_sum() - np.eye(self.dim))
            if err > self.tol:
                raise ValidationError(f"channel is not trace preserving (deviation {err:.2e})")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def kraus_sum(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return sum(k @ x @ k.conj().T for k in self.kraus)

    def adjoint(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=complex)
        return sum(k.conj().T @ m @ k for k in self.kraus)

    def then(self, other: "QuantumChannel") -> "QuantumChannel":
        """Composition: apply ``self`` first, then ``other``."""
        ks = [b @ a for a in self.kraus for b in other.kraus]
        return QuantumChannel(tuple(ks), self.trace_preserving and other.trace_preserving)

    @classmethod
    def unitary(cls, u) -> "QuantumChannel":
        return cls((np.asarray(u, dtype=complex),))

    @classmethod
    def mixture(cls, rep: GroupRep, weights) -> "QuantumChannel":
        """xi -> sum_g q_g U_g xi U_g^H."""
        q = np.asarray(weights, dtype=float)
        if q.shape != (rep.order,) or np.any(q < 0) or abs(q.sum() - 1) > 1e-12:
            raise ValidationError("weights must be a probability vector over the group")
        ks = [np.sqrt(w) * u for w, u in zip(q, rep.unitaries) if w > 0]
        return cls(tuple(ks))

    @classmethod
    def dephasing(cls, d: int) -> "QuantumChannel":
        return cls(tuple(np.diag(np.eye(d)[j]).astype(complex) for j in range(d)))


def is_covariant(rep: GroupRep, channel: QuantumChannel, tol: float = 1e-9) -> bool:
    """Check L(U_g B U_g^H) = U_g L(B) U_g^H on a Hermitian basis for every g."""
    if not channel.trace_preserving:
        raise ValidationError("covariance is defined here for trace-preserving channels")
    if channel.dim != rep.dim:
        raise ValidationError("dimension mismatch between rep and channel")
    for b in hermitian_basis(rep.dim):
        out = channel(b)
        for g in range(rep.order):
            if np.linalg.norm(channel(rep.conjugate(g, b)) - rep.conjugate(g, out)) > tol:
                return False
    return True


def check_instrument(instrument: Sequence[QuantumChannel], tol: float = 1e-9) -> None:
    total = sum(ch.kraus_sum() for ch in instrument)
    dim = instrument[0].dim
    if np.linalg.norm(total - np.eye(dim)) > tol:
        raise ValidationError("instrument branches do not sum to a trace-preserving map")


def apply_instrument(instrument: Sequence[QuantumChannel], rho) -> list[tuple[float, np.ndarray | None]]:
    """Outcome probabilities and normalized post-measurement states.

    Branches with probability at or below ``PROB_FLOOR`` report 0 and ``None``.
    """
    if not instrument:
        raise ValidationError("empty instrument")
    check_instrument(instrument)
    out = []
    for branch in instrument:
        unnorm = branch(rho)
        p = float(np.trace(unnorm).real)
        if p <= PROB_FLOOR:
            out.append((0.0, None))
        else:
            out.append((p, as_hermitian(unnorm / p, tol=1e-8)))
    return out


def preserves_symmetric_states(rep: GroupRep, channel: QuantumChannel, tol: float = 1e-8) -> bool:
    """True if ``channel`` maps the fixed-point space of the twirl into itself."""
    for b in rep.fixed_point_basis:
        out = channel(b)
        if np.linalg.norm(rep.twirl(out) - out) > tol:
            return False
    return True

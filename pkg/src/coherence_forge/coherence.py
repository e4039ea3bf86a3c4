"""Coherence in a fixed reference basis: closed forms and bounds for the robustness.

The robustness of coherence is the robustness of asymmetry under the cyclic
group of phase flips, whose twirl is total dephasing.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .linalg import ValidationError, as_density_matrix
from .robustness import (
    RobustnessCertificate,
    bound_chain_purity,
    certificate_residuals,
    robustness_of_asymmetry,
)
from .sdp import SolverOptions, Status
from .symmetry import CyclicRep

log = logging.getLogger(__name__)

EDGE_TOL = 1e-10
PHASE_TOL = 1e-9
RANK_TOL = 1e-9
RANGE_SLACK = 1e-9


def l1_coherence(rho) -> float:
    """Sum of the magnitudes of the off-diagonal entries (correctly rounded)."""
    a = np.abs(np.asarray(rho))
    return math.fsum(a[~np.eye(a.shape[0], dtype=bool)])


def l1_sandwich(rho) -> tuple[float, float]:
    """(C_l1/(d-1), C_l1), which bracket the robustness of coherence."""
    d = np.asarray(rho).shape[0]
    if d < 2:
        raise ValidationError("the l1 bracket needs d >= 2")
    c = l1_coherence(rho)
    return c / (d - 1), c


def _check_range(c: float, d: int) -> float:
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    if not -RANGE_SLACK <= c <= d - 1 + RANGE_SLACK:
        raise ValueError(f"l1 coherence {c} outside [0, {d - 1}]")
    return min(max(c, 0.0), d - 1.0)


def _disc(c: float, d: int) -> float:
    # D(C, d); clipped at zero since rounding can push it slightly negative at C = d - 1
    return max(0.0, (c + 1) * (d - 1) * (d - 1 - c))


def f_lower_bound(c: float, d: int) -> float:
    """Lower bound on the robustness of coherence from the l1 coherence alone.

    f(C, d) = d C^2 / ((d-1) (-C(d-2) + 2 sqrt(D) + d(d-2) + 2)),
    D = (C+1)(d-1)(d-1-C). Nondecreasing on [0, d-1] with f(d-1, d) = d-1.
    """
    c = _check_range(float(c), int(d))
    if c == d - 1:
        return float(d - 1)
    den = (d - 1) * (-c * (d - 2) + 2 * np.sqrt(_disc(c, d)) + d * (d - 2) + 2)
    return float(d * c * c / den)


def max_diag_entry_bound(c: float, d: int) -> float:
    """Largest diagonal entry compatible with l1 coherence ``c`` in dimension ``d``."""
    c = _check_range(float(c), int(d))
    return float((-c * (d - 2) + 2 * np.sqrt(_disc(c, d)) + d * d - 2 * d + 2) / (d * d))


# ---------------------------------------------------------------------------
# exactly solvable classes


@dataclass
class ExactClass:
    """Result of ``detect_exact_class``.

    ``phases`` holds phi with exp(i(phi_i - phi_j)) rho_ij = |rho_ij| whenever
    the class admits the closed form; ``kind`` is "none" otherwise.
    """

    kind: str
    phases: np.ndarray | None = None

    @property
    def exact(self) -> bool:
        return self.kind != "none"


def align_phases(rho, edge_tol: float = EDGE_TOL, tol: float = PHASE_TOL) -> np.ndarray | None:
    """Phases that make every off-diagonal entry real and nonnegative, or None.

    Breadth-first propagation over the graph of entries with |rho_ij| > edge_tol,
    followed by a check of every edge (which covers all cycle constraints).
    """
    rho = np.asarray(rho)
    d = rho.shape[0]
    mag = np.abs(rho)
    phi = np.full(d, np.nan)
    for root in range(d):
        if not np.isnan(phi[root]):
            continue
        phi[root] = 0.0
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in range(d):
                if j != i and mag[i, j] > edge_tol and np.isnan(phi[j]):
                    # need phi_j = phi_i + arg(rho_ij)
                    phi[j] = phi[i] + np.angle(rho[i, j])
                    queue.append(j)
    u = np.exp(1j * phi)
    aligned = u[:, None] * rho * u.conj()[None, :]
    off = ~np.eye(d, dtype=bool) & (mag > edge_tol)
    if np.any(np.abs(aligned[off] - mag[off]) > tol * max(1.0, mag.max())):
        return None
    return phi


def _x_pattern(rho, tol: float = EDGE_TOL) -> bool:
    d = rho.shape[0]
    i, j = np.indices((d, d))
    outside = (i != j) & (i + j != d - 1)
    return bool(np.all(np.abs(rho[outside]) <= tol))


def detect_exact_class(rho) -> ExactClass:
    """Classify ``rho`` as pure, generalized-X, phase-alignable, or none.

    All three named classes satisfy RoC = C_l1. Every X state is also phase
    alignable; the more specific label is reported, and qubits are reported
    as phase-alignable.
    """
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    phi = align_phases(rho)
    w = np.linalg.eigvalsh(rho)
    if d >= 2 and w[-2] <= RANK_TOL:
        # a rank-one state is always phase-alignable; recompute from the vector if propagation was too strict
        if phi is None:
            psi = np.linalg.eigh(rho)[1][:, -1]
            phi = -np.angle(psi)
        return ExactClass("pure", phi)
    if phi is None:
        return ExactClass("none")
    if d >= 3 and _x_pattern(rho):
        return ExactClass("generalized-X", phi)
    return ExactClass("phase-alignable", phi)


def closed_form_certificate(rho, phases, kind: str = "phase-alignable") -> RobustnessCertificate:
    """Certificate for a phase-alignable state, with RoC = C_l1.

    sigma_ii = (rho_ii + sum_{j != i} |rho_ij|)/(1 + C), and X* = U^H (d psi+) U
    with U = diag(exp(i phi)), so that Tr[X* rho] = 1 + C.
    """
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    rep = CyclicRep(d)
    mag = np.abs(rho)
    c = l1_coherence(rho)
    sigma = np.diag((np.diag(rho).real + mag.sum(axis=1) - np.diag(mag)) / (1 + c)).astype(complex)
    u = np.exp(1j * np.asarray(phases))
    x_star = np.outer(u.conj(), u)
    witness = np.eye(d) - x_star
    tau = ((1 + c) * sigma - rho) / c if c > 1e-8 else None
    cert = RobustnessCertificate(
        value=c,
        rho=rho,
        sigma=sigma,
        witness=witness,
        tau=tau,
        status=Status.OPTIMAL,
        primal_value=c,
        dual_value=float(np.trace(x_star @ rho).real) - 1,
        dual_form="closed-form",
        source=f"closed-form:{kind}",
    )
    cert.residuals = certificate_residuals(rep, rho, c, sigma, witness, tau)
    return cert


def robustness_of_coherence(
    rho,
    options: SolverOptions | None = None,
    closed_form: bool = True,
    verify_sdp: bool = False,
    dual_form: str = "x",
) -> RobustnessCertificate:
    """Robustness of coherence in the reference basis.

    Detected exact classes use the closed form unless ``closed_form`` is off;
    ``verify_sdp`` additionally solves the program and records the comparison
    under ``extras['sdp_value']`` and ``extras['sdp_agreement']``.
    """
    rho = as_density_matrix(rho)
    if closed_form:
        cls = detect_exact_class(rho)
        if cls.exact:
            cert = closed_form_certificate(rho, cls.phases, cls.kind)
            if verify_sdp:
                sdp = robustness_of_asymmetry(CyclicRep(rho.shape[0]), rho, options, dual_form)
                diff = abs(sdp.value - cert.value)
                cert.extras.update(sdp_value=sdp.value, sdp_status=sdp.status.value, sdp_agreement=diff)
                if diff > 1e-6 * (1 + cert.value):
                    log.warning("closed form %.9g disagrees with program value %.9g", cert.value, sdp.value)
            return cert
    return robustness_of_asymmetry(CyclicRep(rho.shape[0]), rho, options, dual_form)


@dataclass
class BoundReport:
    l1_value: float
    l1_lower: float
    l1_upper: float
    purity_chain: tuple[float, float, float]
    f_bound: float
    diag_entry_bound: float
    max_diag_entry: float
    exact_value: float | None = None
    provenance: str | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "l1_value": self.l1_value,
            "l1_lower": self.l1_lower,
            "l1_upper": self.l1_upper,
            "purity_chain": list(self.purity_chain),
            "f_bound": self.f_bound,
            "diag_entry_bound": self.diag_entry_bound,
            "max_diag_entry": self.max_diag_entry,
            "exact_value": self.exact_value,
            "provenance": self.provenance,
            **self.extras,
        }


def bound_report(rho) -> BoundReport:
    """Every closed-form bound on the robustness of coherence of ``rho``."""
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    lower, upper = l1_sandwich(rho)
    chain = bound_chain_purity(CyclicRep(d), rho).values()
    cls = detect_exact_class(rho)
    return BoundReport(
        l1_value=upper,
        l1_lower=lower,
        l1_upper=upper,
        purity_chain=chain,
        f_bound=f_lower_bound(upper, d),
        diag_entry_bound=max_diag_entry_bound(upper, d),
        max_diag_entry=float(np.max(np.diag(rho).real)),
        exact_value=upper if cls.exact else None,
        provenance=cls.kind if cls.exact else None,
    )

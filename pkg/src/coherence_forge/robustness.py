"""Robustness of asymmetry with two-sided certificates, witnesses and property checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import ValidationError, as_density_matrix, as_hermitian, schatten_norm
from .programs import (
    compile_data_consistent_roa,
    compile_roa_dual,
    compile_roa_primal,
    compile_witness_from_data,
    data_consistent_state,
    dual_witness,
    witness_from_data_operator,
)
from .sdp import SdpSolution, SolverOptions, Status, solve
from .symmetry import GroupRep, QuantumChannel, apply_instrument, preserves_symmetric_states

log = logging.getLogger(__name__)

PROPERTY_TOL = 1e-6
TAU_MIN_WEIGHT = 1e-8


@dataclass
class RobustnessCertificate:
    """Value of the robustness together with the objects that prove it.

    ``sigma`` is the optimal symmetric state, ``witness`` the optimal W with
    W <= 1 and twirl(W) >= 0, ``x_star = 1 - witness`` and ``tau`` the
    remainder of the optimal pseudomixture rho = (1+s) sigma - s tau.
    """

    value: float
    rho: np.ndarray
    sigma: np.ndarray
    witness: np.ndarray
    tau: np.ndarray | None
    status: Status
    primal_value: float
    dual_value: float
    dual_form: str
    source: str = "sdp"
    iterations: tuple[int, ...] = ()
    residuals: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def x_star(self) -> np.ndarray:
        return np.eye(self.witness.shape[0]) - self.witness

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def violations(self, rep: GroupRep, tol: float = PROPERTY_TOL) -> list[str]:
        """Names of certificate invariants that fail at tolerance ``tol``."""
        r = self.residuals
        out = []
        scale = 1 + self.value
        if r["domination"] < -tol * scale:
            out.append("domination")
        if r["witness_gap"] > tol * scale:
            out.append("witness_gap")
        if r["witness_bound"] < -tol:
            out.append("witness_bound")
        if r["twirl_witness"] < -tol:
            out.append("twirl_witness")
        if r["sigma_symmetric"] > tol:
            out.append("sigma_symmetric")
        if r["support"] > tol:
            out.append("support")
        if self.tau is not None and (r["pseudomixture"] > tol * scale or r["tau_psd"] < -tol):
            out.append("pseudomixture")
        if not -tol <= self.value <= rep.dim - 1 + tol:
            out.append("range")
        return out

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "status": self.status.value,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "dual_form": self.dual_form,
            "source": self.source,
            "iterations": list(self.iterations),
            "sigma": self.sigma,
            "witness": self.witness,
            "x_star": self.x_star,
            "tau": self.tau,
            "residuals": self.residuals,
            **self.extras,
        }


def _clamp(value: float, options: SolverOptions) -> float:
    if value < -10 * options.gap_tol:
        log.warning("robustness program returned negative value %.3e; clamping to 0", value)
    return max(0.0, value)


def certificate_residuals(rep: GroupRep, rho, value, sigma, witness, tau) -> dict:
    d = rho.shape[0]
    dominated = (1 + value) * sigma - rho
    w_sig, v_sig = np.linalg.eigh(sigma)
    null = v_sig[:, w_sig <= 1e-10]
    res = {
        "domination": float(np.linalg.eigvalsh(as_hermitian(dominated, tol=1e-6))[0]),
        "witness_gap": abs(-float(np.trace(witness @ rho).real) - value),
        "witness_bound": float(np.linalg.eigvalsh(np.eye(d) - witness)[0]),
        "twirl_witness": float(np.linalg.eigvalsh(rep.twirl(witness))[0]),
        "twirl_witness_norm": float(np.linalg.norm(rep.twirl(witness))),
        "sigma_symmetric": float(np.linalg.norm(rep.twirl(sigma) - sigma)),
        "support": float(np.linalg.norm(null.conj().T @ rho @ null)) if null.size else 0.0,
    }
    if tau is not None:
        res["pseudomixture"] = float(np.linalg.norm(rho - ((1 + value) * sigma - value * tau)))
        res["tau_psd"] = float(np.linalg.eigvalsh(tau)[0])
    return res


def robustness_of_asymmetry(
    rep: GroupRep,
    rho,
    options: SolverOptions | None = None,
    dual_form: str = "x",
    cross_check: bool = True,
) -> RobustnessCertificate:
    """Robustness of asymmetry of ``rho`` with respect to ``rep``.

    The primal program gives the value and the optimal symmetric state. With
    ``cross_check`` the dual program is solved separately and supplies the
    witness; otherwise the witness comes from the primal's multiplier.
    """
    opts = options or SolverOptions()
    rho = as_density_matrix(rho)
    if rho.shape[0] != rep.dim:
        raise ValidationError(f"state dimension {rho.shape[0]} does not match rep dimension {rep.dim}")
    d = rep.dim
    primal_problem = compile_roa_primal(rep, rho)
    primal = solve(primal_problem, opts)
    basis = primal_problem.labels["basis"]
    sigma_tilde = np.einsum("k,kij->ij", primal.x, basis)
    iterations = [primal.iterations]
    if cross_check:
        dual_problem = compile_roa_dual(rep, rho, form=dual_form)
        dual = solve(dual_problem, opts)
        witness = dual_witness(dual_problem, dual.x)
        dual_value = dual.primal_value
        iterations.append(dual.iterations)
        status = primal.status if primal.status is not Status.OPTIMAL else dual.status
    else:
        witness = np.eye(d) - primal.duals[0]
        dual_value = primal.dual_value
        status = primal.status
        dual_form = "primal-multiplier"

    raw = primal.primal_value
    value = _clamp(raw, opts) if np.isfinite(raw) else raw
    trace = float(np.trace(sigma_tilde).real)
    sigma = sigma_tilde / trace if trace > 0 else np.eye(d) / d
    tau = None
    if np.isfinite(value) and value > TAU_MIN_WEIGHT:
        tau = ((1 + value) * sigma - rho) / value
    cert = RobustnessCertificate(
        value=value,
        rho=rho,
        sigma=sigma,
        witness=witness,
        tau=tau,
        status=status,
        primal_value=raw,
        dual_value=dual_value,
        dual_form=dual_form,
        iterations=tuple(iterations),
    )
    if np.isfinite(value):
        cert.residuals = certificate_residuals(rep, rho, value, sigma, witness, tau)
    if status is not Status.OPTIMAL:
        log.warning("robustness solve ended with status %s", status.value)
    return cert


def roa_value(rep: GroupRep, rho, options: SolverOptions | None = None) -> float:
    """Primal-only robustness value, for batch checks that need no certificate."""
    opts = options or SolverOptions()
    sol = solve(compile_roa_primal(rep, as_density_matrix(rho)), opts)
    if not sol.optimal:
        raise RuntimeError(f"robustness solve failed: {sol.message}")
    return _clamp(sol.primal_value, opts)


def witness_lower_bound(witness, rho) -> float:
    """max{0, -Tr[W rho]}; a valid lower bound whenever W <= 1 and twirl(W) >= 0."""
    return max(0.0, -float(np.trace(np.asarray(witness) @ np.asarray(rho)).real))


def is_admissible_witness(rep: GroupRep, witness, tol: float = 1e-9) -> bool:
    w = as_hermitian(witness)
    return bool(
        np.linalg.eigvalsh(np.eye(rep.dim) - w)[0] >= -tol and np.linalg.eigvalsh(rep.twirl(w))[0] >= -tol
    )


@dataclass
class PurityChain:
    by_operator_norm: float
    by_hs_norm: float
    bare: float
    witness: np.ndarray

    def values(self) -> tuple[float, float, float]:
        return (self.by_operator_norm, self.by_hs_norm, self.bare)


def bound_chain_purity(rep: GroupRep, rho) -> PurityChain:
    """Lower bounds ||rho - E(rho)||_2^2 divided by ||E(rho)||_inf, ||E(rho)||_2, or 1.

    Also returns the witness (E(rho) - rho)/||E(rho)||_inf that attains the first.
    """
    rho = as_hermitian(rho)
    twirled = rep.twirl(rho)
    diff = rho - twirled
    num = float(np.sum(np.abs(diff) ** 2))
    op = schatten_norm(twirled, np.inf)
    hs = schatten_norm(twirled, 2)
    return PurityChain(num / op, num / hs, num, -diff / op)


@dataclass
class DataEstimate:
    value: float
    status: Status
    solution: SdpSolution
    operator: np.ndarray | None = None
    state: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "status": self.status.value,
            "infeasibility": self.solution.infeasibility,
            "primal_value": self.solution.primal_value,
            "dual_value": self.solution.dual_value,
            "message": self.solution.message,
        }
        if self.operator is not None:
            out["witness"] = self.operator
        if self.state is not None:
            out["state"] = self.state
        return out


def witness_from_data(observables: Sequence, values, rep: GroupRep, options: SolverOptions | None = None) -> DataEstimate:
    """Best lower bound from a witness assembled out of the measured observables."""
    problem = compile_witness_from_data(observables, values, rep)
    sol = solve(problem, options)
    if not sol.optimal:
        return DataEstimate(np.nan, sol.status, sol)
    return DataEstimate(max(0.0, sol.primal_value), sol.status, sol, operator=witness_from_data_operator(problem, sol.x))


def estimate_from_data(observables: Sequence, values, rep: GroupRep, options: SolverOptions | None = None) -> DataEstimate:
    """Smallest robustness over physical states reproducing the data.

    Returns status ``INFEASIBLE`` when no state matches the data.
    """
    problem = compile_data_consistent_roa(observables, values, rep)
    sol = solve(problem, options)
    if not sol.optimal:
        return DataEstimate(np.nan, sol.status, sol)
    _, state = data_consistent_state(problem, sol.x)
    return DataEstimate(max(0.0, sol.primal_value), sol.status, sol, state=state)


# ---------------------------------------------------------------------------
# resource-monotone properties


@dataclass
class MonotonicityReport:
    before: float
    after: float
    outcomes: list[tuple[float, float]]
    holds: bool
    violation: float


def check_monotonicity(
    rep: GroupRep,
    rho,
    instrument: QuantumChannel | Sequence[QuantumChannel],
    tol: float = 1e-7,
    options: SolverOptions | None = None,
) -> MonotonicityReport:
    """Average robustness after an instrument never exceeds the robustness before.

    Every branch must map symmetric states to symmetric states; instruments
    that fail this are rejected with ``ValidationError``.
    """
    branches = [instrument] if isinstance(instrument, QuantumChannel) else list(instrument)
    for k, br in enumerate(branches):
        if not preserves_symmetric_states(rep, br):
            raise ValidationError(f"branch {k} does not map symmetric states to symmetric states")
    before = roa_value(rep, rho, options)
    outcomes = []
    for p, state in apply_instrument(branches, rho):
        outcomes.append((p, roa_value(rep, state, options) if state is not None else 0.0))
    after = sum(p * v for p, v in outcomes)
    return MonotonicityReport(before, after, outcomes, after <= before + tol, max(0.0, after - before))


@dataclass
class ConvexityReport:
    mixed: float
    bound: float
    holds: bool
    violation: float


def check_convexity(rep: GroupRep, rho1, rho2, p: float, tol: float = 1e-7, options: SolverOptions | None = None) -> ConvexityReport:
    if not 0 <= p <= 1:
        raise ValidationError("mixing weight must lie in [0, 1]")
    r1 = roa_value(rep, rho1, options)
    r2 = roa_value(rep, rho2, options)
    mixed = roa_value(rep, p * np.asarray(rho1) + (1 - p) * np.asarray(rho2), options)
    bound = p * r1 + (1 - p) * r2
    return ConvexityReport(mixed, bound, mixed <= bound + tol, max(0.0, mixed - bound))

"""Compilers from the robustness optimization problems to ``SdpProblem``.

Every compiler records how to read its variables back in ``problem.labels``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .linalg import ValidationError, as_hermitian, hermitian_basis
from .sdp import LmiBlock, SdpProblem
from .symmetry import GroupRep


def _tr(basis: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Re Tr[B_k m] for each basis element."""
    return np.real(np.einsum("kij,ji->k", basis, m))


def _check_dim(rep: GroupRep, m: np.ndarray) -> None:
    if m.shape != (rep.dim, rep.dim):
        raise ValidationError(f"dimension mismatch: rep acts on C^{rep.dim}, matrix is {m.shape}")


def compile_roa_primal(rep: GroupRep, rho) -> SdpProblem:
    """min Tr[S] - 1  s.t.  S >= rho,  S symmetric.

    ``S`` is written in the orthonormal fixed-point basis, which removes the
    symmetry equality constraint.
    """
    rho = as_hermitian(rho)
    _check_dim(rep, rho)
    basis = rep.fixed_point_basis
    traces = _tr(basis, np.eye(rep.dim))
    return SdpProblem(
        objective=traces,
        blocks=[LmiBlock(-rho, basis)],
        offset=-1.0,
        x0=2.0 * traces,  # coordinates of 2*identity
        labels={"kind": "roa-primal", "basis": basis},
    )


def compile_roa_dual(rep: GroupRep, rho, form: str = "x") -> SdpProblem:
    """Dual of the robustness program.

    ``form="x"``: max Tr[X rho] - 1 s.t. X >= 0 and twirl(X) = 1, with
    X = 1 + (component in the twirl's kernel).
    ``form="witness"``: max -Tr[W rho] s.t. W <= 1 and twirl(W) >= 0.
    """
    rho = as_hermitian(rho)
    _check_dim(rep, rho)
    d = rep.dim
    if form == "x":
        comp = rep.complement_basis
        return SdpProblem(
            objective=_tr(comp, rho),
            blocks=[LmiBlock(np.eye(d), comp)],
            x0=np.zeros(len(comp)),
            sense="max",
            labels={"kind": "roa-dual", "form": "x", "basis": comp},
        )
    if form == "witness":
        basis = hermitian_basis(d)
        twirled = np.array([rep.twirl(b) for b in basis])
        return SdpProblem(
            objective=-_tr(basis, rho),
            blocks=[LmiBlock(np.eye(d), -basis), LmiBlock(np.zeros((d, d)), twirled)],
            x0=0.5 * _tr(basis, np.eye(d)),
            sense="max",
            labels={"kind": "roa-dual", "form": "witness", "basis": basis},
        )
    raise ValueError(f"unknown dual form {form!r}; use 'x' or 'witness'")


def dual_witness(problem: SdpProblem, x: np.ndarray) -> np.ndarray:
    """Witness W read back from a solved ``compile_roa_dual`` problem."""
    basis = problem.labels["basis"]
    d = problem.blocks[0].dim
    combo = np.einsum("k,kij->ij", x, basis) if len(basis) else np.zeros((d, d), dtype=complex)
    return -combo if problem.labels["form"] == "x" else combo


def _check_observables(observables, values, rep: GroupRep | None = None):
    obs = [as_hermitian(o) for o in observables]
    vals = np.asarray(values, dtype=float).reshape(-1)
    if len(obs) != vals.size:
        raise ValidationError(f"{len(obs)} observables but {vals.size} values")
    if rep is not None:
        for o in obs:
            _check_dim(rep, o)
    return obs, vals


def compile_witness_from_data(observables: Sequence, values, rep: GroupRep) -> SdpProblem:
    """Best witness W = sum_i c_i O_i + m 1 built from measured expectations.

    Variables are (c_1..c_k, m); maximizes -(sum_i c_i o_i + m) subject to
    W <= 1 and twirl(W) >= 0.
    """
    if len(observables) == 0:
        raise ValidationError("at least one observable is required")
    obs, vals = _check_observables(observables, values, rep)
    d = rep.dim
    eye = np.eye(d)
    coeffs = np.array(obs + [eye])
    twirled = np.array([rep.twirl(o) for o in obs] + [eye])
    x0 = np.zeros(len(obs) + 1)
    x0[-1] = 0.5
    return SdpProblem(
        objective=-np.append(vals, 1.0),
        blocks=[LmiBlock(eye, -coeffs), LmiBlock(np.zeros((d, d)), twirled)],
        x0=x0,
        sense="max",
        labels={"kind": "witness-from-data", "observables": coeffs},
    )


def witness_from_data_operator(problem: SdpProblem, x: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", x, problem.labels["observables"])


def compile_data_consistent_roa(observables: Sequence, values, rep: GroupRep) -> SdpProblem:
    """Smallest robustness over all states reproducing the data.

    Variables: symmetric S in fixed-point coordinates, then rho in the full
    Hermitian basis. Blocks S - rho >= 0 and rho >= 0; equalities Tr rho = 1
    and Tr[O_i rho] = o_i.
    """
    obs, vals = _check_observables(observables, values, rep)
    d = rep.dim
    fixed = rep.fixed_point_basis
    herm = hermitian_basis(d)
    k, q = len(fixed), len(herm)
    zeros = np.zeros((d, d))
    block_gap = np.concatenate([fixed, -herm])
    block_rho = np.concatenate([np.zeros((k, d, d)), herm])
    rows = [np.concatenate([np.zeros(k), _tr(herm, np.eye(d))])]
    rows += [np.concatenate([np.zeros(k), _tr(herm, o)]) for o in obs]
    return SdpProblem(
        objective=np.concatenate([_tr(fixed, np.eye(d)), np.zeros(q)]),
        blocks=[LmiBlock(zeros, block_gap), LmiBlock(zeros, block_rho)],
        eq_matrix=np.array(rows),
        eq_rhs=np.concatenate([[1.0], vals]),
        offset=-1.0,
        labels={"kind": "data-consistent-roa", "fixed": fixed, "herm": herm},
    )


def data_consistent_state(problem: SdpProblem, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(S, rho) read back from a solved ``compile_data_consistent_roa`` problem."""
    fixed, herm = problem.labels["fixed"], problem.labels["herm"]
    k = len(fixed)
    return np.einsum("k,kij->ij", x[:k], fixed), np.einsum("k,kij->ij", x[k:], herm)


def compile_discrimination_povm(states: Sequence, priors) -> SdpProblem:
    """max sum_g p_g Tr[rho_g M_g] over POVMs {M_g}."""
    states = [as_hermitian(s) for s in states]
    priors = np.asarray(priors, dtype=float).reshape(-1)
    if len(states) != priors.size or not states:
        raise ValidationError("need one prior per state")
    if np.any(priors < -1e-12) or abs(priors.sum() - 1) > 1e-9:
        raise ValidationError("priors must be a probability vector")
    d = states[0].shape[0]
    if any(s.shape != (d, d) for s in states):
        raise ValidationError("states differ in dimension")
    herm = hermitian_basis(d)
    q, ng = len(herm), len(states)
    n = q * ng
    blocks = []
    for g in range(ng):
        coeff = np.zeros((n, d, d), dtype=complex)
        coeff[g * q : (g + 1) * q] = herm
        blocks.append(LmiBlock(np.zeros((d, d)), coeff))
    objective = np.concatenate([p * _tr(herm, s) for p, s in zip(priors, states)])
    eq = np.tile(np.eye(q), (1, ng))
    ident = _tr(herm, np.eye(d))
    return SdpProblem(
        objective=objective,
        blocks=blocks,
        eq_matrix=eq,
        eq_rhs=ident,
        x0=np.tile(ident / ng, ng),
        sense="max",
        labels={"kind": "povm", "herm": herm, "count": ng},
    )


def povm_elements(problem: SdpProblem, x: np.ndarray) -> list[np.ndarray]:
    herm, ng = problem.labels["herm"], problem.labels["count"]
    q = len(herm)
    return [np.einsum("k,kij->ij", x[g * q : (g + 1) * q], herm) for g in range(ng)]

"""Guessing which group element (or channel) acted on a probe state.

The optimal success probability with an asymmetric probe exceeds the best
symmetric-probe value by at most a factor 1 + RoA, with equality for flat
priors over the group.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import PSD_TOL, ValidationError, as_density_matrix, as_hermitian, hermitian_basis
from .programs import compile_discrimination_povm, povm_elements
from .randgen import SeededSource, random_density_matrix
from .robustness import robustness_of_asymmetry
from .sdp import SolverOptions, Status, solve
from .symmetry import GroupRep, QuantumChannel

log = logging.getLogger(__name__)

PRIOR_TOL = 1e-12
COMPLETENESS_TOL = 1e-8
SDP_COMPLETENESS_TOL = 1e-6
BASELINE_RESTARTS = 10
BASELINE_STOP = 1e-9
BASELINE_MAX_ROUNDS = 200


@dataclass(frozen=True)
class Povm:
    elements: tuple
    tol: float = COMPLETENESS_TOL
    psd_tol: float = PSD_TOL

    def __post_init__(self):
        els = tuple(as_hermitian(m, tol=1e-8) for m in self.elements)
        if not els:
            raise ValidationError("a POVM needs at least one element")
        d = els[0].shape[0]
        if any(m.shape != (d, d) for m in els):
            raise ValidationError("POVM elements differ in dimension")
        for k, m in enumerate(els):
            low = np.linalg.eigvalsh(m)[0]
            if low < -self.psd_tol:
                raise ValidationError(f"element {k} is not PSD (min eigenvalue {low:.2e})")
        err = np.linalg.norm(sum(els) - np.eye(d))
        if err > self.tol:
            raise ValidationError(f"elements do not sum to identity (deviation {err:.2e})")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


def _conjugation(u) -> QuantumChannel:
    return QuantumChannel.unitary(u)


def _same_channel(a: QuantumChannel, b: QuantumChannel, basis) -> bool:
    return all(np.linalg.norm(a(x) - b(x)) <= 1e-9 for x in basis)


@dataclass(frozen=True)
class DiscriminationGame:
    """Probe ``probe`` is sent through channel i with prior ``priors[i]``.

    Without ``channels`` the channels are the conjugations by ``rep``'s
    elements, in order. An explicit channel list must contain each of those
    conjugations.
    """

    rep: GroupRep
    priors: np.ndarray
    probe: np.ndarray
    channels: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float).reshape(-1)
        if np.any(p < 0) or abs(p.sum() - 1) > PRIOR_TOL:
            raise ValidationError("priors must be nonnegative and sum to 1")
        probe = as_density_matrix(self.probe)
        if probe.shape[0] != self.rep.dim:
            raise ValidationError("probe dimension does not match rep")
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "probe", probe)
        if self.channels is None:
            if p.size != self.rep.order:
                raise ValidationError(f"need {self.rep.order} priors for the group game, got {p.size}")
            return
        chans = tuple(self.channels)
        if len(chans) != p.size:
            raise ValidationError("need one prior per channel")
        if any(ch.dim != self.rep.dim for ch in chans):
            raise ValidationError("channel dimension does not match rep")
        basis = hermitian_basis(self.rep.dim)
        for g, u in enumerate(self.rep.unitaries):
            if not any(_same_channel(_conjugation(u), ch, basis) for ch in chans):
                raise ValidationError(f"channel list lacks the conjugation by group element {g}")
        object.__setattr__(self, "channels", chans)

    @property
    def is_group_game(self) -> bool:
        return self.channels is None

    @property
    def size(self) -> int:
        return self.priors.size

    def channel(self, i: int):
        if self.channels is None:
            return lambda x: self.rep.conjugate(i, x)
        return self.channels[i]

    def adjoint(self, i: int, m) -> np.ndarray:
        if self.channels is None:
            u = self.rep.unitaries[i]
            return u.conj().T @ m @ u
        return self.channels[i].adjoint(m)

    def outputs(self, probe=None) -> list[np.ndarray]:
        probe = self.probe if probe is None else probe
        return [self.channel(i)(probe) for i in range(self.size)]

    def with_probe(self, probe) -> "DiscriminationGame":
        return DiscriminationGame(self.rep, self.priors, probe, self.channels)


def success_probability(game: DiscriminationGame, povm: Povm) -> float:
    if povm.dim != game.rep.dim:
        raise ValidationError("POVM dimension does not match the game")
    if len(povm) != game.size:
        raise ValidationError(f"need {game.size} POVM elements, got {len(povm)}")
    outs = game.outputs()
    return float(sum(p * np.trace(o @ m).real for p, o, m in zip(game.priors, outs, povm.elements)))


def _optimal_for_states(states, priors, options) -> tuple[float, Povm]:
    problem = compile_discrimination_povm(states, priors)
    sol = solve(problem, options)
    if sol.status is not Status.OPTIMAL:
        raise RuntimeError(f"POVM program failed: {sol.message}")
    povm = Povm(tuple(povm_elements(problem, sol.x)), tol=SDP_COMPLETENESS_TOL, psd_tol=SDP_COMPLETENESS_TOL)
    return sol.primal_value, povm


def optimal_success_probability(game: DiscriminationGame, options: SolverOptions | None = None) -> tuple[float, Povm]:
    """Best success probability over all POVMs, with a POVM attaining it."""
    return _optimal_for_states(game.outputs(), game.priors, options)


def certificate_povm(rep: GroupRep, x_star, tol: float = 1e-6) -> Povm:
    """M_g = U_g X U_g^H / |G| for X >= 0 with twirl(X) = 1."""
    x = as_hermitian(x_star, tol=1e-8)
    low = np.linalg.eigvalsh(x)[0]
    if low < -tol:
        raise ValidationError(f"X is not PSD (min eigenvalue {low:.2e})")
    dev = np.linalg.norm(rep.twirl(x) - np.eye(rep.dim))
    if dev > tol:
        raise ValidationError(f"twirl(X) differs from identity by {dev:.2e}")
    els = tuple(rep.conjugate(g, x) / rep.order for g in range(rep.order))
    return Povm(els, tol=max(tol, COMPLETENESS_TOL), psd_tol=tol)


def max_prior(game: DiscriminationGame) -> float:
    return float(game.priors.max())


def theorem_bounds(game: DiscriminationGame, roa: float) -> tuple[float, float]:
    """(max{(1+RoA)/|G|, p_max}, (1+RoA) p_max) bracketing the optimal group-game value.

    The certificate POVM scores Tr[X rho]/|G| = (1+RoA)/|G| on every branch,
    whatever the priors, which gives the first lower bound.
    """
    pmax = max_prior(game)
    return max((1 + roa) / game.rep.order, pmax), (1 + roa) * pmax


@dataclass
class Baseline:
    value: float
    probe: np.ndarray
    restarts: int
    rounds: int
    exact: bool


def _best_symmetric_probe(rep: GroupRep, y: np.ndarray) -> tuple[float, np.ndarray]:
    """max Tr[sigma Y] over symmetric states.

    Symmetric operators form the commutant algebra of the group, which holds
    the spectral projectors of twirl(Y); the normalized top eigenprojector is
    therefore symmetric and attains lambda_max(twirl(Y)).
    """
    w, v = np.linalg.eigh(as_hermitian(rep.twirl(y), tol=1e-8))
    top = w >= w[-1] - 1e-10 * max(1.0, abs(w[-1]))
    proj = v[:, top] @ v[:, top].conj().T
    return float(w[-1]), proj / np.trace(proj).real


def symmetric_baseline(
    game: DiscriminationGame,
    restarts: int = BASELINE_RESTARTS,
    src: SeededSource | int = 0,
    options: SolverOptions | None = None,
) -> Baseline:
    """Best success probability over symmetric probes.

    For group games this is max_g p_g exactly. For channel lists the problem
    is bilinear in (probe, POVM); it is attacked by alternating maximization
    from ``restarts`` starting probes and the best value found is returned.
    """
    rep = game.rep
    if game.is_group_game:
        return Baseline(max_prior(game), np.eye(rep.dim) / rep.dim, 0, 0, True)
    src = src if isinstance(src, SeededSource) else SeededSource(int(src))
    best = None
    total_rounds = 0
    for r in range(restarts):
        probe = np.eye(rep.dim, dtype=complex) / rep.dim if r == 0 else rep.twirl(random_density_matrix(rep.dim, None, src))
        value = -np.inf
        for rounds in range(1, BASELINE_MAX_ROUNDS + 1):
            _, povm = _optimal_for_states(game.outputs(probe), game.priors, options)
            y = sum(p * game.adjoint(i, m) for i, (p, m) in enumerate(zip(game.priors, povm.elements)))
            new_value, probe = _best_symmetric_probe(rep, y)
            if abs(new_value - value) < BASELINE_STOP:
                value = new_value
                break
            value = new_value
        total_rounds += rounds
        if best is None or value > best[0]:
            best = (value, probe)
    return Baseline(best[0], best[1], restarts, total_rounds, False)


def advantage_ratio(game: DiscriminationGame, options: SolverOptions | None = None, restarts: int = BASELINE_RESTARTS) -> float:
    value, _ = optimal_success_probability(game, options)
    base = symmetric_baseline(game, restarts=restarts, options=options)
    return value / base.value


def prior_grid(order: int, n: int, src: SeededSource | int = 0, include_uniform: bool = True) -> list[np.ndarray]:
    """Uniform prior followed by ``n`` flat-Dirichlet samples, stratified on the largest weight.

    Sample k is redrawn until its largest weight falls in the k-th of ``n``
    equal slices of [1/order, 1], so the grid covers near-flat to peaked priors.
    """
    if order < 1 or n < 0:
        raise ValidationError("order must be positive and n nonnegative")
    src = src if isinstance(src, SeededSource) else SeededSource(int(src))
    grid = [np.full(order, 1.0 / order)] if include_uniform else []
    lo = 1.0 / order
    for k in range(n):
        a = lo + (1 - lo) * k / n
        b = lo + (1 - lo) * (k + 1) / n
        q = src.dirichlet(order)
        for _ in range(1000):
            if a <= q.max() <= b or order == 1:
                break
            q = src.dirichlet(order)
        grid.append(q)
    return grid


def max_advantage_over_priors(rep: GroupRep, probe, grid: Sequence, options: SolverOptions | None = None) -> float:
    """Largest advantage ratio of ``probe`` over the priors in ``grid``."""
    if len(grid) == 0:
        raise ValidationError("prior grid is empty")
    return max(advantage_ratio(DiscriminationGame(rep, np.asarray(p), probe), options) for p in grid)


@dataclass
class GameRecord:
    p_succ: float
    baseline: float
    ratio: float
    roa: float
    gap: float
    certificate_p_succ: float | None
    lower: float
    upper: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def evaluate_game(game: DiscriminationGame, options: SolverOptions | None = None) -> GameRecord:
    """Optimal value, baseline, ratio, probe RoA and the certificate POVM's value."""
    value, _ = optimal_success_probability(game, options)
    base = symmetric_baseline(game, options=options)
    cert = robustness_of_asymmetry(game.rep, game.probe, options)
    cert_value = None
    if game.is_group_game:
        cert_value = success_probability(game, certificate_povm(game.rep, cert.x_star))
    lower, upper = theorem_bounds(game, cert.value)
    return GameRecord(value, base.value, value / base.value, cert.value, cert.gap, cert_value, lower, upper)

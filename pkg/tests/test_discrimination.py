import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherence_forge.discrimination import (
    DiscriminationGame,
    Povm,
    advantage_ratio,
    certificate_povm,
    evaluate_game,
    max_advantage_over_priors,
    optimal_success_probability,
    prior_grid,
    success_probability,
    symmetric_baseline,
    theorem_bounds,
)
from coherence_forge.linalg import ValidationError
from coherence_forge.randgen import (
    SeededSource,
    maximally_coherent_state,
    random_covariant_channel,
    random_density_matrix,
)
from coherence_forge.robustness import robustness_of_asymmetry
from coherence_forge.symmetry import CyclicRep, QuantumChannel

from conftest import density_matrices, seeds
from oracles import helstrom

PLUS = np.ones((2, 2)) / 2


def uniform(n):
    return np.full(n, 1.0 / n)


def test_game_validation():
    rep = CyclicRep(2)
    with pytest.raises(ValidationError):
        DiscriminationGame(rep, [0.6, 0.6], PLUS)
    with pytest.raises(ValidationError):
        DiscriminationGame(rep, [0.5, 0.5 + 1e-9], PLUS)
    with pytest.raises(ValidationError):
        DiscriminationGame(rep, [1.0], PLUS)
    with pytest.raises(ValidationError):
        # the list lacks conjugation by Z
        DiscriminationGame(rep, [0.5, 0.5], PLUS, channels=(QuantumChannel.unitary(np.eye(2)), QuantumChannel.dephasing(2)))


def test_povm_validation():
    with pytest.raises(ValidationError):
        Povm((np.eye(2), np.eye(2)))
    with pytest.raises(ValidationError):
        Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])))


def test_success_probability_examples():
    rep = CyclicRep(3)
    game = DiscriminationGame(rep, [0.2, 0.5, 0.3], random_density_matrix(3, None, SeededSource(1)))
    guess = Povm(tuple(np.eye(3) if g == 1 else np.zeros((3, 3)) for g in range(3)))
    assert success_probability(game, guess) == pytest.approx(0.5)
    game2 = DiscriminationGame(CyclicRep(2), uniform(2), PLUS)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
    assert success_probability(game2, Povm((PLUS, minus))) == pytest.approx(1)
    with pytest.raises(ValidationError):
        success_probability(game2, Povm((np.eye(2),)))


@given(seeds)
def test_symmetric_probe_is_capped_by_max_prior(seed):
    src = SeededSource(seed)
    rep = CyclicRep(3)
    priors = src.dirichlet(3)
    probe = rep.twirl(random_density_matrix(3, None, src))
    game = DiscriminationGame(rep, priors, probe)
    value, povm = optimal_success_probability(game)
    assert value == pytest.approx(priors.max(), abs=1e-8)
    assert success_probability(game, povm) == pytest.approx(value, abs=1e-8)
    assert advantage_ratio(game) == pytest.approx(1, abs=1e-7)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_maximally_coherent_probe_is_perfect(d):
    rep = CyclicRep(d)
    psi = np.ones(d) / np.sqrt(d)
    outs = [rep.unitaries[g] @ psi for g in range(d)]
    gram = np.array([[abs(np.vdot(a, b)) for b in outs] for a in outs])
    assert np.allclose(gram, np.eye(d), atol=1e-12)
    game = DiscriminationGame(rep, uniform(d), maximally_coherent_state(d))
    value, _ = optimal_success_probability(game)
    assert value == pytest.approx(1, abs=1e-7)
    assert advantage_ratio(game) == pytest.approx(d, abs=1e-6)


@given(density_matrices(d=2))
def test_qubit_game_matches_helstrom(rho):
    rep = CyclicRep(2)
    game = DiscriminationGame(rep, uniform(2), rho)
    value, _ = optimal_success_probability(game)
    assert value == pytest.approx(helstrom(rho, rep.conjugate(1, rho)), abs=1e-7)


def test_certificate_povm_examples():
    rep = CyclicRep(3)
    flat = certificate_povm(rep, np.eye(3))
    assert all(np.allclose(m, np.eye(3) / 3) for m in flat.elements)
    game = DiscriminationGame(CyclicRep(2), uniform(2), PLUS)
    cert = robustness_of_asymmetry(CyclicRep(2), PLUS)
    assert success_probability(game, certificate_povm(CyclicRep(2), cert.x_star)) == pytest.approx(1, abs=1e-6)
    with pytest.raises(ValidationError):
        certificate_povm(rep, 2 * np.eye(3))
    with pytest.raises(ValidationError):
        certificate_povm(rep, np.eye(3) - 2 * np.ones((3, 3)))


@given(seeds, st.booleans())
def test_theorem_sandwich_and_certificate(seed, flat):
    src = SeededSource(seed)
    rep = CyclicRep(3)
    probe = random_density_matrix(3, None, src)
    priors = uniform(3) if flat else src.dirichlet(3)
    game = DiscriminationGame(rep, priors, probe)
    rec = evaluate_game(game)
    tol = 1e-6
    assert rec.lower - tol <= rec.p_succ <= rec.upper + tol
    assert rec.certificate_p_succ == pytest.approx((1 + rec.roa) / 3, abs=1e-6)
    assert rec.ratio <= 1 + rec.roa + 1e-6
    if flat:
        assert rec.ratio == pytest.approx(1 + rec.roa, abs=1e-5)
    cert_povm = certificate_povm(rep, robustness_of_asymmetry(rep, probe).x_star)
    assert np.linalg.norm(sum(cert_povm.elements) - np.eye(3)) <= 1e-8


def test_prior_grid():
    grid = prior_grid(3, 20, SeededSource(4))
    assert len(grid) == 21 and np.allclose(grid[0], 1 / 3)
    assert all(abs(p.sum() - 1) < 1e-12 and np.all(p >= 0) for p in grid)
    maxima = [p.max() for p in grid[1:]]
    assert min(maxima) < 0.45 and max(maxima) > 0.9
    again = prior_grid(3, 20, SeededSource(4))
    assert all(np.array_equal(a, b) for a, b in zip(grid, again))


def test_max_advantage_over_priors():
    src = SeededSource(8)
    rep = CyclicRep(2)
    probe = random_density_matrix(2, None, src)
    roa = robustness_of_asymmetry(rep, probe).value
    assert max_advantage_over_priors(rep, probe, [uniform(2)]) == pytest.approx(1 + roa, abs=1e-6)
    grid = prior_grid(2, 50, src)
    assert max_advantage_over_priors(rep, probe, grid) == pytest.approx(1 + roa, abs=1e-5)
    skew = [np.array([0.9, 0.1])]
    assert max_advantage_over_priors(rep, np.eye(2) / 2, skew) == pytest.approx(1, abs=1e-7)
    with pytest.raises(ValidationError):
        max_advantage_over_priors(rep, probe, [])


def _channel_game(seed):
    src = SeededSource(seed)
    rep = CyclicRep(3)
    chans = [QuantumChannel.unitary(u) for u in rep.unitaries]
    chans += [QuantumChannel.dephasing(3), random_covariant_channel(rep, src)]
    return rep, chans, src


def test_channel_list_ratio_bounded_by_robustness():
    rep, chans, src = _channel_game(3)
    probe = random_density_matrix(3, None, src)
    game = DiscriminationGame(rep, src.dirichlet(5), probe, tuple(chans))
    roa = robustness_of_asymmetry(rep, probe).value
    base = symmetric_baseline(game, src=1)
    assert base.restarts == 10 and not base.exact
    value, _ = optimal_success_probability(game)
    assert value / base.value <= 1 + roa + 1e-6
    # pure group sub-game with flat priors attains the bound
    sub = DiscriminationGame(rep, uniform(3), probe)
    assert advantage_ratio(sub) == pytest.approx(1 + roa, abs=1e-5)


def test_zero_prior_channel_changes_nothing():
    rep, chans, src = _channel_game(5)
    probe = random_density_matrix(3, None, src)
    base = DiscriminationGame(rep, uniform(3), probe)
    extended = DiscriminationGame(rep, np.append(uniform(3), [0.0, 0.0]), probe, tuple(chans))
    a, _ = optimal_success_probability(base)
    b, _ = optimal_success_probability(extended)
    assert a == pytest.approx(b, abs=1e-7)


def test_theorem_bounds_helper():
    game = DiscriminationGame(CyclicRep(2), [0.7, 0.3], np.eye(2) / 2)
    assert theorem_bounds(game, 0.0) == (0.7, 0.7)

import numpy as np
import pytest
from hypothesis import given

from coherence_forge.linalg import ValidationError, hermitian_basis
from coherence_forge.randgen import SeededSource, random_covariant_channel, random_density_matrix
from coherence_forge.symmetry import (
    CyclicRep,
    GroupRep,
    QuantumChannel,
    apply_instrument,
    fixed_point_basis,
    is_covariant,
    is_symmetric,
    parse_rep,
    preserves_symmetric_states,
    trivial_rep,
    twirl,
)

from conftest import density_matrices, hadamard, seeds

X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


def swap(n):
    s = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            s[j * n + i, i * n + j] = 1
    return s


def test_cyclic_rep_elements():
    rep = CyclicRep(3)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(rep.unitaries[1], np.diag([1, w, w**2]))
    assert rep.order == 3 and rep.is_abelian


@given(density_matrices(d=3))
def test_cyclic_twirl_is_dephasing(rho):
    rep = CyclicRep(3)
    generic = GroupRep(rep.unitaries)
    assert np.allclose(twirl(rep, rho), np.diag(np.diag(rho)), atol=1e-14)
    assert np.allclose(generic.twirl(rho), np.diag(np.diag(rho)), atol=1e-12)


def test_twirl_examples():
    plus = np.ones((2, 2)) / 2
    assert np.allclose(CyclicRep(2).twirl(plus), np.eye(2) / 2)
    diag = np.diag([0.2, 0.3, 0.5])
    assert np.allclose(CyclicRep(3).twirl(diag), diag)


def test_rep_validation():
    with pytest.raises(ValidationError):
        GroupRep([np.eye(2), 2 * np.eye(2)])
    with pytest.raises(ValidationError):
        GroupRep([np.eye(2), hadamard() @ np.diag([1, 1j])])  # not closed
    # Paulis close only up to phase; projective closure is accepted
    rep = GroupRep([np.eye(2), X, Y, Z])
    assert np.allclose(rep.twirl(np.array([[0.7, 0.2], [0.2, 0.3]])), np.eye(2) / 2)
    assert GroupRep([np.eye(2), hadamard()]).is_abelian
    assert not GroupRep([np.eye(2), X, Y, Z]).is_abelian


def test_is_symmetric():
    assert is_symmetric(CyclicRep(3), np.eye(3) / 3)
    assert not is_symmetric(CyclicRep(2), np.ones((2, 2)) / 2)
    assert is_symmetric(CyclicRep(3), np.diag([0.2, 0.3, 0.5]))


def test_fixed_point_bases():
    fb = fixed_point_basis(CyclicRep(3))
    assert np.allclose(fb, [np.diag(np.eye(3)[j]) for j in range(3)])
    assert len(fixed_point_basis(trivial_rep(2))) == 4
    rep = GroupRep([np.eye(4), swap(2)])
    basis = rep.fixed_point_basis
    assert len(basis) == 10
    # independent count: rank of (id + swap-conjugation)/2 on the Hermitian space
    herm = hermitian_basis(4)
    s = swap(2)
    m = np.real(np.einsum("aij,bji->ab", herm, [(b + s @ b @ s) / 2 for b in herm]))
    assert np.linalg.matrix_rank(m, tol=1e-9) == 10
    gram = np.real(np.einsum("aij,bji->ab", basis, basis))
    assert np.allclose(gram, np.eye(10), atol=1e-10)
    assert all(np.allclose(rep.twirl(b), b, atol=1e-10) for b in basis)


def test_covariance():
    assert is_covariant(CyclicRep(3), QuantumChannel.dephasing(3))
    q = 0.3
    bit_flip = QuantumChannel((np.sqrt(1 - q) * np.eye(2), np.sqrt(q) * X))
    # X Z X = -Z, so conjugating by Z commutes with the bit flip
    assert is_covariant(CyclicRep(2), bit_flip)
    h = QuantumChannel.unitary(hadamard())
    assert not is_covariant(CyclicRep(2), h)
    zero = np.diag([1.0, 0.0])
    lhs = h(CyclicRep(2).conjugate(1, zero))
    rhs = CyclicRep(2).conjugate(1, h(zero))
    assert not np.allclose(lhs, rhs)


@given(seeds)
def test_random_mixtures_are_covariant(seed):
    rep = CyclicRep(3)
    ch = random_covariant_channel(rep, SeededSource(seed))
    assert is_covariant(rep, ch)
    assert preserves_symmetric_states(rep, ch)


def test_channel_validation_and_adjoint(src):
    with pytest.raises(ValidationError):
        QuantumChannel((np.eye(2), np.eye(2)))
    ch = random_covariant_channel(CyclicRep(3), src, dephasing=0.4)
    a = random_density_matrix(3, None, src)
    b = random_density_matrix(3, None, src)
    assert np.isclose(np.trace(ch(a) @ b), np.trace(a @ ch.adjoint(b)))


def test_instruments(src):
    rho = random_density_matrix(3, None, src)
    [(p, out)] = apply_instrument([QuantumChannel((np.eye(3),))], rho)
    assert p == pytest.approx(1) and np.allclose(out, rho)
    proj = [QuantumChannel((np.diag(np.eye(2)[j]),), trace_preserving=False) for j in range(2)]
    res = apply_instrument(proj, np.ones((2, 2)) / 2)
    assert [r[0] for r in res] == pytest.approx([0.5, 0.5])
    assert np.allclose(res[0][1], np.diag([1, 0])) and np.allclose(res[1][1], np.diag([0, 1]))
    proj3 = [QuantumChannel((np.diag(np.eye(3)[j]),), trace_preserving=False) for j in range(3)]
    assert [r[0] for r in apply_instrument(proj3, rho)] == pytest.approx(np.diag(rho).real)
    with pytest.raises(ValidationError):
        apply_instrument(proj3[:2], rho)
    zero_branch = apply_instrument(proj, np.diag([1.0, 0.0]))
    assert zero_branch[1] == (0.0, None)


def test_parse_rep():
    assert parse_rep("cyclic:4").dim == 4
    assert parse_rep({"cyclic": 2}).order == 2
    assert parse_rep(CyclicRep(3).to_json()).dim == 3
    rep = parse_rep(GroupRep([np.eye(2), X]).to_json())
    assert rep.order == 2
    with pytest.raises(ValidationError):
        parse_rep("dihedral:3")

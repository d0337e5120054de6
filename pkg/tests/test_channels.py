import numpy as np
import pytest
from hypothesis import given, strategies as st

from twirlkit.channels import (
    ChannelError,
    DensityMatrix,
    Superoperator,
    UnitaryEnsemble,
    WernerParams,
    apply_ruo,
    build_superoperator,
    factor_collective,
    flip_operator,
    hs_distance_to_twirl,
    random_density_matrix,
    singlet,
    sym_asym_projectors,
    twirl_project,
    twirl_superoperator,
    unvec,
    vec,
    werner_state,
)
from twirlkit.linalg import haar_unitary, hs_inner
from twirlkit.qubit import fig1_m_set

from conftest import SX, SZ

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def singlet_state():
    s = singlet(2)
    return DensityMatrix(np.outer(s, s.conj()))


def ket_state(*idx, d=2):
    v = np.zeros(d ** len(idx), dtype=complex)
    k = 0
    for i in idx:
        k = k * d + i
    v[k] = 1
    return DensityMatrix(np.outer(v, v))


def test_vec_convention():
    # vec(|i><j|) = |j> (x) |i>
    e01 = np.zeros((2, 2))
    e01[0, 1] = 1
    assert np.array_equal(vec(e01), np.kron([0, 1], [1, 0]))
    x = np.arange(9).reshape(3, 3)
    assert np.array_equal(unvec(vec(x)), x)


def test_density_matrix_validation():
    with pytest.raises(ChannelError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ChannelError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ChannelError, match="negative"):
        DensityMatrix(np.diag([1.5, -0.5]))
    rel = DensityMatrix.relaxed(np.eye(2))
    assert rel.dim == 2


def test_ensemble_validation():
    with pytest.raises(ChannelError):
        UnitaryEnsemble((0.5, 0.6), (np.eye(2), SX))
    with pytest.raises(ChannelError, match="not unitary"):
        UnitaryEnsemble((1.0,), (2 * np.eye(2),))
    with pytest.raises(ChannelError):
        UnitaryEnsemble((), ())
    with pytest.raises(ChannelError):
        UnitaryEnsemble((1.0,), (np.eye(2), SX))
    e = UnitaryEnsemble.uniform([np.eye(2), SX])
    assert e.probs == (0.5, 0.5) and len(e) == 2 and e.dim == 2


def test_apply_ruo_examples():
    rho = random_density_matrix(4, 0)
    assert np.allclose(apply_ruo(UnitaryEnsemble((1.0,), (np.eye(4),)), rho).mat, rho.mat)
    e = UnitaryEnsemble((0.5, 0.5), (np.eye(4), np.kron(SZ, SZ)))
    assert np.allclose(apply_ruo(e, singlet_state()).mat, singlet_state().mat)
    e = UnitaryEnsemble((0.5, 0.5), (np.eye(2), SX))
    out = apply_ruo(e, ket_state(0))
    assert np.allclose(out.mat, np.eye(2) / 2)


def test_apply_ruo_dim_mismatch():
    with pytest.raises(ChannelError):
        apply_ruo(UnitaryEnsemble.uniform([SX]), random_density_matrix(4, 0))


@given(seeds, st.integers(min_value=2, max_value=4), st.integers(min_value=1, max_value=3))
def test_superoperator_matches_direct_sum(seed, d, m):
    r = np.random.default_rng(seed)
    e = UnitaryEnsemble(tuple(r.dirichlet(np.ones(m))), tuple(haar_unitary(d, r) for _ in range(m)))
    s = build_superoperator(e)
    rho = random_density_matrix(d, r)
    out = apply_ruo(e, rho).mat
    assert np.max(np.abs(s.apply(rho) - out)) < 1e-12
    assert np.allclose(out, out.conj().T, atol=1e-12)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.allclose(s.mat @ vec(np.eye(d)), vec(np.eye(d)), atol=1e-10)
    assert abs(np.max(np.abs(np.linalg.eigvals(s.mat))) - 1) < 1e-8


def test_superoperator_identity():
    s = build_superoperator(UnitaryEnsemble((1.0,), (np.eye(3),)))
    assert np.allclose(s.mat, np.eye(9))
    assert s.hdim == 3


def test_superoperator_power_matches_iteration():
    r = np.random.default_rng(5)
    e = UnitaryEnsemble.collective([haar_unitary(2, r), haar_unitary(2, r)], (0.3, 0.7))
    s = build_superoperator(e)
    rho = random_density_matrix(4, r)
    cur = rho
    for _ in range(20):
        cur = apply_ruo(e, cur)
    direct = unvec(np.linalg.matrix_power(s.mat, 20) @ vec(rho.mat), 4)
    assert np.linalg.norm(direct - cur.mat) < 1e-10


def test_flip_examples():
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.array_equal(flip_operator(2), swap)
    for d in (2, 3, 4):
        f = flip_operator(d)
        assert np.trace(f) == d
        assert np.allclose(f @ f, np.eye(d * d))
        assert set(np.round(np.linalg.eigvalsh(f)).astype(int)) == {-1, 1}
    f = flip_operator(3)
    ket12 = np.zeros(9)
    ket12[1 * 3 + 2] = 1
    ket21 = np.zeros(9)
    ket21[2 * 3 + 1] = 1
    assert np.array_equal(f @ ket12, ket21)
    with pytest.raises(ChannelError):
        flip_operator(1)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_projectors(d):
    ps, pa = sym_asym_projectors(d)
    assert np.linalg.matrix_rank(ps) == d * (d + 1) // 2
    assert np.linalg.matrix_rank(pa) == d * (d - 1) // 2
    assert np.allclose(ps + pa, np.eye(d * d))
    assert np.allclose(ps @ ps, ps) and np.allclose(pa @ pa, pa)
    assert np.allclose(ps @ pa, 0)


def test_asym_projector_is_singlet():
    _, pa = sym_asym_projectors(2)
    assert np.allclose(pa, singlet_state().mat)


def test_werner_examples():
    assert np.allclose(werner_state(WernerParams(2, 0.0)).mat, singlet_state().mat)
    assert np.allclose(werner_state(WernerParams(2, 0.75)).mat, np.eye(4) / 4)
    ps, _ = sym_asym_projectors(3)
    assert np.allclose(werner_state(WernerParams(3, 1.0)).mat, ps / 6)
    with pytest.raises(ChannelError):
        WernerParams(1, 0.5)
    with pytest.raises(ChannelError):
        WernerParams(2, 1.5)


def test_werner_collective_invariance():
    r = np.random.default_rng(3)
    for d in (2, 3):
        w = werner_state(WernerParams(d, 0.3)).mat
        for _ in range(100):
            u = haar_unitary(d, r)
            uu = np.kron(u, u)
            assert np.linalg.norm(uu @ w - w @ uu) < 1e-10


def test_twirl_examples():
    rho = singlet_state()
    assert np.allclose(twirl_project(rho).mat, rho.mat)
    ps, _ = sym_asym_projectors(2)
    assert np.allclose(twirl_project(ket_state(0, 0)).mat, ps / 3)
    r = random_density_matrix(9, 1)
    once = twirl_project(r)
    assert np.max(np.abs(twirl_project(once).mat - once.mat)) < 1e-12
    with pytest.raises(ChannelError, match="not bipartite"):
        twirl_project(np.eye(3) / 3)


@given(seeds)
def test_twirl_self_adjoint(seed):
    r = np.random.default_rng(seed)
    x, y = (r.standard_normal((9, 9)) + 1j * r.standard_normal((9, 9)) for _ in range(2))
    assert np.isclose(hs_inner(twirl_project(x), y), hs_inner(x, twirl_project(y)))


def test_twirl_superoperator_matches_projection():
    x = np.random.default_rng(2).standard_normal((9, 9))
    t = twirl_superoperator(3)
    assert np.allclose(unvec(t @ vec(x)), twirl_project(x))


def test_twirl_monte_carlo_d2():
    r = np.random.default_rng(8)
    rho = random_density_matrix(4, r).mat
    n = 20_000
    acc = np.zeros((4, 4), dtype=complex)
    for _ in range(n):
        u = haar_unitary(2, r)
        uu = np.kron(u, u)
        acc += uu @ rho @ uu.conj().T
    assert np.linalg.norm(acc / n - twirl_project(rho)) < 5 / np.sqrt(n)


def test_distance_examples():
    t = twirl_superoperator(2)
    assert hs_distance_to_twirl(Superoperator(t), 3) == 0
    e = UnitaryEnsemble.collective(fig1_m_set()[:2], (0.75, 0.25))
    s = build_superoperator(e)
    d0 = hs_distance_to_twirl(s, 0)
    assert np.isclose(d0, np.linalg.norm(np.eye(16) - t)) and d0 > 0
    assert hs_distance_to_twirl(s, 40) * 10 <= hs_distance_to_twirl(s, 10)
    with pytest.raises(ChannelError):
        hs_distance_to_twirl(s, -1)


def test_distance_stable_form_agrees_with_naive_power():
    e = UnitaryEnsemble.collective(fig1_m_set()[:2], (0.75, 0.25))
    s = build_superoperator(e)
    t = twirl_superoperator(2)
    naive = np.linalg.norm(np.linalg.matrix_power(s.mat, 15) - t)
    assert np.isclose(hs_distance_to_twirl(s, 15), naive, rtol=1e-8)


def test_distance_non_collective_uses_plain_power():
    s = build_superoperator(UnitaryEnsemble((1.0,), (np.kron(SX, np.eye(2)),)))
    t = twirl_superoperator(2)
    assert np.isclose(hs_distance_to_twirl(s, 2), np.linalg.norm(np.eye(16) - t))


def test_factor_collective():
    u = haar_unitary(3, 4)
    f = factor_collective(np.kron(u, u))
    assert f is not None and np.allclose(np.kron(f, f), np.kron(u, u))
    assert factor_collective(np.kron(SX, SZ)) is None
    assert factor_collective(np.eye(3)) is None


def test_random_density_matrix_rank():
    rho = random_density_matrix(4, 0, rank=1)
    assert np.linalg.matrix_rank(rho.mat, tol=1e-10) == 1

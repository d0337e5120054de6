import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twirlkit import io
from twirlkit.channels import UnitaryEnsemble
from twirlkit.linalg import haar_unitary
from twirlkit.qubit import fig1_m_set
from twirlkit.qudit import AParams, ConstructionSpec, Variant

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds, st.sampled_from([2, 3]), st.integers(min_value=1, max_value=3))
def test_ensemble_round_trip(seed, d, m):
    r = np.random.default_rng(seed)
    e = UnitaryEnsemble.collective([haar_unitary(d, r) for _ in range(m)], tuple(r.dirichlet(np.ones(m))))
    back = io.ensemble_from_json(json.loads(json.dumps(io.ensemble_to_json(e))))
    assert len(back) == len(e)
    for a, b in zip(e.unitaries, back.unitaries):
        assert np.max(np.abs(a - b)) <= 1e-15
    assert np.max(np.abs(np.subtract(e.probs, back.probs))) <= 1e-15


def test_singles_are_lifted():
    data = io.singles_to_json(fig1_m_set())
    e = io.ensemble_from_json(data)
    assert e.dim == 4
    assert np.allclose(e.unitaries[0], np.kron(fig1_m_set()[0], fig1_m_set()[0]))


def test_full_operators_not_lifted_again():
    e = UnitaryEnsemble.collective(fig1_m_set())
    back = io.ensemble_from_json(io.ensemble_to_json(e))
    assert back.dim == 4


def test_single_qudit_dim4_lifted():
    # a generic 4x4 unitary is not u (x) u, so the file is read as d = 4 qudit blocks
    data = io.singles_to_json([haar_unitary(4, 1), haar_unitary(4, 2)])
    assert io.ensemble_from_json(data).dim == 16


def test_single_blocks_factor():
    e = UnitaryEnsemble.collective(fig1_m_set())
    probs, blocks = io.single_blocks(io.ensemble_to_json(e))
    for u, b in zip(fig1_m_set(), blocks):
        assert np.allclose(np.kron(b, b), np.kron(u, u))
    singles = io.ensemble_to_json(e, singles=True)
    assert singles["dim"] == 2


@pytest.mark.parametrize("data", [
    {},
    {"items": []},
    {"items": [{"p": 1.0}]},
    {"items": [{"p": 1.0, "u": [[1, 0], [0, 1]]}]},
    {"dim": 3, "items": [{"p": 1.0, "u": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}]},
])
def test_malformed(data):
    with pytest.raises(io.InputError):
        io.ensemble_from_json(data)


def test_invalid_ensemble_is_input_error():
    data = io.singles_to_json(fig1_m_set(), probs=[0.5, 0.5, 0.5])
    with pytest.raises(io.InputError, match="sum"):
        io.ensemble_from_json(data)


def test_spec_round_trip(tmp_path):
    spec = ConstructionSpec(5, A=AParams(0.3, 0.6 + 0.0j, 0.8j), variant=Variant.TWO_OP_ODD_D,
                            v_subspace=(2, 5), probs=(0.4, 0.6))
    path = tmp_path / "spec.json"
    io.save_json(io.spec_to_json(spec), path)
    back = io.spec_from_json(io.load_json(path))
    assert back == spec
    e = io.load_any(path)
    assert e.dim == 25 and e.probs == (0.4, 0.6)


def test_spec_with_words(tmp_path):
    path = tmp_path / "w.json"
    io.save_json({"d": 3, "variant": "custom", "words": ["h", "uv"]}, path)
    assert len(io.load_any(path)) == 2


def test_bad_spec():
    with pytest.raises(io.InputError):
        io.spec_from_json({"d": 1})
    with pytest.raises(io.InputError):
        io.spec_from_json({"variant": "three_op"})


def test_load_errors(tmp_path):
    with pytest.raises(io.InputError, match="no such file"):
        io.load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(io.InputError, match="malformed"):
        io.load_ensemble(bad)

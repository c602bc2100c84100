import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from logspect import (
    AdjacencyMatrix,
    GraphEnsembleSpec,
    GraphParseError,
    ParameterError,
    ShapeError,
    ValidationError,
    generate,
    generate_ba,
    generate_er,
    project_valid,
)
from logspect.graphs import project_valid_array, read_dense_csv, read_graph, write_dense_csv, write_graph
from oracles import project_valid_bruteforce

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_adjacency_invariants():
    g = AdjacencyMatrix(3, [1.0, 0.0, 2.0])
    W = g.W
    assert np.array_equal(W, W.T)
    assert np.all(np.diag(W) == 0)
    assert g.n_edges == 2
    np.testing.assert_array_equal(g.degrees, [1.0, 3.0, 2.0])
    with pytest.raises(ValidationError):
        AdjacencyMatrix(3, [1.0, -1.0, 0.0])
    with pytest.raises(ShapeError):
        AdjacencyMatrix(3, [1.0, 0.0])
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_dense([[0, 1], [2, 0]])
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_dense([[1, 1], [1, 0]])
    sym = AdjacencyMatrix.from_dense([[0, 1], [3, 0]], symmetrize=True)
    assert sym.W[0, 1] == 2.0


def test_er_edge_count_matches_binomial_mean():
    spec = GraphEnsembleSpec("ER", 30, 0.2)
    rng = np.random.default_rng(0)
    counts = [generate_er(spec, rng).n_edges for _ in range(400)]
    mean = 0.2 * 435
    sd = np.sqrt(435 * 0.2 * 0.8 / 400)
    assert abs(np.mean(counts) - mean) < 4 * sd


def test_er_seed_reproducible_and_unit_weights():
    spec = GraphEnsembleSpec("ER", 15, 0.3, seed=7)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.W, b.W)
    assert a.is_binary


def test_ba_is_tree_with_heavy_degree_tail():
    rng = np.random.default_rng(1)
    m = 60
    max_ba, max_er = [], []
    for _ in range(200):
        g = generate_ba(m, rng)
        assert g.n_edges == m - 1 and g.is_connected()
        max_ba.append(g.degrees.max())
        e = generate_er(GraphEnsembleSpec("ER", m, 2.0 / (m - 1)), rng)
        max_er.append(e.degrees.max())
    # preferential attachment concentrates degree on hubs
    assert np.mean(max_ba) > np.mean(max_er) + 2


def test_spec_validation():
    with pytest.raises(ParameterError):
        GraphEnsembleSpec("WS", 10)
    with pytest.raises(ParameterError):
        GraphEnsembleSpec("ER", 1)
    with pytest.raises(ParameterError):
        GraphEnsembleSpec("ER", 5, 1.5)


@given(arrays(float, (5, 5), elements=finite))
def test_project_valid_matches_bruteforce(X):
    P = project_valid(X).W
    np.testing.assert_allclose(P, project_valid_bruteforce(X), atol=1e-8 * (1 + np.abs(X).max()))


@given(arrays(float, (4, 4), elements=finite))
def test_project_valid_idempotent(X):
    P = project_valid_array(X)
    np.testing.assert_array_equal(project_valid_array(P), P)
    np.testing.assert_array_equal(project_valid(X).W, P)


@given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))
def test_project_valid_nonexpansive(X, Y):
    d = np.linalg.norm(project_valid_array(X) - project_valid_array(Y))
    assert d <= np.linalg.norm(X - Y) * (1 + 1e-12) + 1e-9


def test_graph_roundtrip(tmp_path):
    g = AdjacencyMatrix(4, [0.5, 0, 1.25, 0, 0, 3.0])
    write_graph(g, tmp_path / "g.txt")
    assert np.array_equal(read_graph(tmp_path / "g.txt").W, g.W)
    write_dense_csv(g, tmp_path / "g.csv")
    assert np.array_equal(read_dense_csv(tmp_path / "g.csv").W, g.W)


@pytest.mark.parametrize("body, exc, line", [
    ("0 1 1\n", GraphParseError, 1),
    ("# m=3\n0 1\n", GraphParseError, 2),
    ("# m=3\n0 1 x\n", GraphParseError, 2),
    ("# m=3\n0 5 1\n", GraphParseError, 2),
    ("# m=3\n0 1 1\n0 1 2\n", GraphParseError, 3),
])
def test_read_graph_errors_report_lines(tmp_path, body, exc, line):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(exc) as e:
        read_graph(p)
    assert e.value.line == line
    assert f"line {line}" in str(e.value)


def test_read_graph_asymmetric(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("# m=2\n0 1 1\n1 0 3\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_graph(p)
    assert read_graph(p, symmetrize=True).W[0, 1] == 2.0
    p.write_text("# m=2\n0 1 -1\n")
    with pytest.raises(ValidationError, match="negative"):
        read_graph(p)
    p.write_text("# m=2\n0 0 1\n")
    with pytest.raises(ValidationError, match="self-loop"):
        read_graph(p)

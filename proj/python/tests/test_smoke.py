import numpy as np
import pytest

import netreg


def complete(n):
    return np.ones((n, n)) - np.eye(n)


def test_complete_graph_is_not_identified():
    assert netreg.identification_verdict(complete(5)) == "NotIdentified"
    values = netreg.distinct_eigenvalues(complete(5))
    assert [m for _, m in values] == [1, 4]


def test_lee_groups_eigenvalues():
    values = [v for v, _ in netreg.distinct_eigenvalues(netreg.lee_matrix([5, 7]))]
    assert np.allclose(values, [1.0, -1 / 6, -1 / 4], atol=1e-10)


def test_asymmetric_input_rejected():
    W = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        netreg.distinct_eigenvalues(W)


def test_projector_matches_dual_formula():
    rng = np.random.default_rng(0)
    Q = rng.standard_normal((20, 4))
    K = Q @ Q.T / 20
    alpha = 0.05
    dual = K @ np.linalg.solve(K @ K + alpha * np.eye(20), K)
    assert np.allclose(netreg.projector(Q, "T", alpha), dual, atol=1e-10)
    q = netreg.q_weights(Q, "LF", 50)
    assert np.all((q >= 0) & (q <= 1))
    full = netreg.projector(Q, "PC", 4)
    assert np.allclose(full, Q @ np.linalg.pinv(Q), atol=1e-10)


def test_estimate_recovers_noiseless_truth():
    rng = np.random.default_rng(1)
    blocks = []
    for _ in range(20):
        A = (rng.random((10, 10)) < 0.3).astype(float)
        np.fill_diagonal(A, 0.0)
        blocks.append(A)
    W = np.zeros((200, 200))
    for r, b in enumerate(blocks):
        W[10 * r : 10 * r + 10, 10 * r : 10 * r + 10] = b
    x1 = rng.standard_normal((200, 1))
    x2 = rng.standard_normal((200, 1))
    gamma = np.repeat(rng.standard_normal(20), 10)
    lam, b1, b2 = 0.1, 0.2, 0.2
    y = np.linalg.solve(np.eye(200) - lam * W, b1 * x1[:, 0] + b2 * (W @ x2)[:, 0] + gamma)
    out = netreg.estimate(blocks, y, x1, x2, scheme="T", parameter=1e-8)
    assert out["names"] == ["lambda", "x1_1", "W*x2_1"]
    assert np.allclose(out["delta"], [lam, b1, b2], atol=1e-6)


def test_simulate_is_reproducible():
    a = netreg.simulate(groups=6, reps=4, seed=3, threads=1)
    b = netreg.simulate(groups=6, reps=4, seed=3, threads=2)
    assert a["table"] == b["table"]
    assert set(a["estimates"]) == {
        "2SLS (finite iv)", "2SLS (large iv)", "Bias-corrected 2SLS", "T-2SLS", "LF-2SLS", "PC-2SLS",
    }
    assert np.isfinite(a["estimates"]["T-2SLS"][0][0])


def test_estimate_csv_round_trip(tmp_path):
    (tmp_path / "edges.csv").write_text("group_id,src,dst\n" + "".join(
        f"{g},{i},{j}\n" for g in range(8) for i in range(6) for j in range(6) if i != j and (i + j + g) % 3 == 0
    ))
    rng = np.random.default_rng(2)
    rows = ["group_id,node_id,x1,x2,y"]
    for g in range(8):
        for i in range(6):
            a, b, c = rng.standard_normal(3)
            rows.append(f"{g},{i},{a},{b},{c}")
    (tmp_path / "nodes.csv").write_text("\n".join(rows) + "\n")
    out = netreg.estimate_csv(str(tmp_path / "edges.csv"), str(tmp_path / "nodes.csv"), scheme="PC")
    assert np.all(np.isfinite(out["delta"]))
    assert out["curve"] is not None

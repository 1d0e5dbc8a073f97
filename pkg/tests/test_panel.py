"""Panel data model, check-function primitives, CSV ingestion."""

import numpy as np
import pytest

import erfe
from erfe.errors import (
    EmptyInputError,
    RaggedRowError,
    ShapeMismatchError,
    SingletonSubjectError,
)

import oracles


# ---------------------------------------------------------------------
# check_weight
# ---------------------------------------------------------------------

def test_check_weight_positive_residual():
    assert erfe.check_weight(1.5, 0.3) == 0.3


def test_check_weight_negative_residual():
    assert erfe.check_weight(-2.0, 0.3) == 0.7


def test_check_weight_zero_counts_as_nonpositive():
    assert erfe.check_weight(0.0, 0.9) == pytest.approx(0.1, abs=1e-15)


def test_check_weight_vectorized():
    out = erfe.check_weight(np.array([1.0, -1.0, 0.0]), 0.2)
    assert np.allclose(out, [0.2, 0.8, 0.8])


def test_check_weight_bounds():
    rng = np.random.default_rng(0)
    t = rng.standard_normal(100)
    for tau in (0.1, 0.5, 0.9):
        w = erfe.check_weight(t, tau)
        assert np.all(w >= min(tau, 1 - tau)) and np.all(w <= max(tau, 1 - tau))


def test_check_weight_reflection_complement():
    # For t != 0 exactly one of t, -t is positive, so the weights at the
    # same asymmetric point sum to one.
    rng = np.random.default_rng(1)
    t = rng.standard_normal(200)
    t = t[t != 0]
    for tau in (0.2, 0.5, 0.77):
        total = erfe.check_weight(t, tau) + erfe.check_weight(-t, tau)
        assert np.allclose(total, 1.0, atol=1e-15)


def test_tau_validation_rejects_boundaries():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            erfe.validate_tau(bad)
        with pytest.raises(ValueError):
            erfe.check_weight(1.0, bad)
    assert erfe.validate_tau(0.5) == 0.5


# ---------------------------------------------------------------------
# asymmetric_loss
# ---------------------------------------------------------------------

def test_loss_values():
    assert erfe.asymmetric_loss(2.0, 0.5) == pytest.approx(2.0, rel=1e-14)
    assert erfe.asymmetric_loss(-1.0, 0.9) == pytest.approx(0.1, rel=1e-12)
    assert erfe.asymmetric_loss(3.0, 0.1) == pytest.approx(0.9, rel=1e-12)


def test_loss_nonnegative_zero_only_at_origin():
    rng = np.random.default_rng(2)
    t = rng.standard_normal(500)
    vals = erfe.asymmetric_loss(t, 0.3)
    assert np.all(vals >= 0)
    assert np.all(vals[t != 0] > 0)
    assert erfe.asymmetric_loss(0.0, 0.3) == 0.0


def test_loss_derivative_matches_central_difference():
    # d/dt of the loss is 2 psi(t) t; the check weight is constant on each
    # side of zero so a central difference away from the kink is clean.
    rng = np.random.default_rng(3)
    for tau in (0.2, 0.5, 0.8):
        for t in rng.uniform(0.5, 3.0, 20) * rng.choice([-1.0, 1.0], 20):
            h = 1e-6 * abs(t)
            numeric = (erfe.asymmetric_loss(t + h, tau)
                       - erfe.asymmetric_loss(t - h, tau)) / (2 * h)
            analytic = 2.0 * erfe.check_weight(t, tau) * t
            assert numeric == pytest.approx(analytic, rel=1e-6)


# ---------------------------------------------------------------------
# build_panel
# ---------------------------------------------------------------------

def test_build_panel_groups_subjects():
    records = [(1, 1.0, [0.5]), (1, 2.0, [1.5]), (2, 3.0, [2.5]), (2, 4.0, [3.5])]
    panel = erfe.build_panel(records)
    assert panel.n_subjects == 2
    assert panel.n_obs == 4
    assert list(panel.counts) == [2, 2]
    assert panel.column_names == ("x1",)


def test_build_panel_single_subject():
    panel = erfe.build_panel([(1, float(i), [float(i)]) for i in range(3)])
    assert panel.n_subjects == 1
    assert panel.n_obs == 3


def test_build_panel_singleton_subject_rejected():
    with pytest.raises(SingletonSubjectError):
        erfe.build_panel([(7, 1.0, [1.0])])
    with pytest.raises(SingletonSubjectError):
        erfe.build_panel([(1, 1.0, [1.0]), (1, 2.0, [2.0]), (7, 1.0, [1.0])])


def test_build_panel_empty_rejected():
    with pytest.raises(EmptyInputError):
        erfe.build_panel([])


def test_build_panel_ragged_rows_rejected():
    with pytest.raises(RaggedRowError):
        erfe.build_panel([(1, 1.0, [1.0, 2.0]), (1, 2.0, [1.0])])


def test_build_panel_rejects_non_finite():
    with pytest.raises(ValueError):
        erfe.build_panel([(1, np.nan, [1.0]), (1, 2.0, [1.0])])


def test_build_panel_interleaved_subjects():
    records = [(1, 1.0, [1.0]), (2, 2.0, [2.0]), (1, 3.0, [3.0]), (2, 4.0, [4.0])]
    panel = erfe.build_panel(records)
    assert panel.n_subjects == 2
    assert list(panel.codes) == [0, 1, 0, 1]
    groups = panel.groups()
    assert [list(g) for g in groups] == [[0, 2], [1, 3]]


def test_panel_arrays_are_immutable():
    panel = erfe.build_panel([(1, 1.0, [1.0]), (1, 2.0, [2.0])])
    with pytest.raises(ValueError):
        panel.y[0] = 99.0
    with pytest.raises(ValueError):
        panel.X[0, 0] = 99.0


def test_total_observations_sum_of_subject_counts():
    rng = np.random.default_rng(4)
    panel, _, _ = oracles.unbalanced_panel(rng, [2, 5, 3], p=2)
    assert panel.n_obs == int(np.sum(panel.counts))
    assert list(panel.counts) == [2, 5, 3]


# ---------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------

def _write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_read_panel_csv(tmp_path):
    path = _write_csv(tmp_path / "p.csv",
                      "id,y,a,b\n"
                      "s1,1.5,0.25,1\n"
                      "s1,2.5,0.75,2\n"
                      "s2,0.5,-0.5,3\n"
                      "s2,1.0,0.5,4\n")
    panel = erfe.read_panel_csv(path, "id", "y")
    assert panel.n_subjects == 2
    assert panel.column_names == ("a", "b")
    assert np.allclose(panel.y, [1.5, 2.5, 0.5, 1.0])
    assert np.allclose(panel.X[:, 1], [1, 2, 3, 4])
    assert list(panel.subject_labels) == ["s1", "s2"]


def test_read_panel_csv_missing_column(tmp_path):
    path = _write_csv(tmp_path / "p.csv", "id,y\n1,2.0\n1,3.0\n")
    with pytest.raises(ValueError, match="not in header"):
        erfe.read_panel_csv(path, "id", "resp")


def test_read_panel_csv_ragged(tmp_path):
    path = _write_csv(tmp_path / "p.csv", "id,y,a\n1,2.0,1.0\n1,3.0\n")
    with pytest.raises(RaggedRowError):
        erfe.read_panel_csv(path, "id", "y")


def test_read_panel_csv_bad_number(tmp_path):
    path = _write_csv(tmp_path / "p.csv", "id,y,a\n1,2.0,1.0\n1,oops,2.0\n")
    with pytest.raises(ValueError, match="p.csv:3"):
        erfe.read_panel_csv(path, "id", "y")


def test_read_panel_csv_empty_file(tmp_path):
    path = _write_csv(tmp_path / "p.csv", "")
    with pytest.raises(EmptyInputError):
        erfe.read_panel_csv(path, "id", "y")


# ---------------------------------------------------------------------
# Shape checks
# ---------------------------------------------------------------------

def test_assemble_shape_mismatch():
    from erfe.panel import _assemble_panel
    with pytest.raises(ShapeMismatchError):
        _assemble_panel([1, 1], [1.0, 2.0, 3.0], np.ones((2, 1)), None)
    with pytest.raises(ShapeMismatchError):
        _assemble_panel([1, 1], [1.0, 2.0], np.ones((2, 1)), ["a", "b"])

"""Long-format panel data model, check-function primitives and CSV ingestion.

A panel holds one row per (subject, occasion) observation.  Subjects are
identified by an integer code array rather than an N x n incidence matrix:
every projection downstream reduces to grouped sums over the codes, which
keeps all transforms O(N).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    RaggedRowError,
    ShapeMismatchError,
    SingletonSubjectError,
)

__all__ = [
    "PanelData",
    "asymmetric_loss",
    "build_panel",
    "check_weight",
    "read_panel_csv",
    "validate_tau",
]


def validate_tau(tau: float) -> float:
    """Validate an asymmetric point, which must lie strictly inside (0, 1)."""
    t = float(tau)
    if not (0.0 < t < 1.0):
        raise ValueError(
            f"asymmetric point must lie in the open interval (0, 1), got {tau!r}"
        )
    return t


def check_weight(t, tau):
    """Asymmetric weight of a residual: tau if t > 0, else 1 - tau.

    A zero residual counts as non-positive and receives weight 1 - tau.
    Accepts a scalar or an array and returns the matching shape.
    """
    tau = validate_tau(tau)
    arr = np.asarray(t, dtype=float)
    w = np.where(arr > 0.0, tau, 1.0 - tau)
    return float(w) if w.ndim == 0 else w


def asymmetric_loss(t, tau):
    """Asymmetric square loss: the check weight times the squared residual.

    Nonnegative, zero only at t = 0, and continuously differentiable in t.
    """
    arr = np.asarray(t, dtype=float)
    out = check_weight(arr, tau) * arr * arr
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PanelData:
    """Immutable long-format panel.

    Attributes
    ----------
    subject_ids : ndarray, shape (N,)
        Original subject label of each row (integers or strings).
    y : ndarray, shape (N,)
        Response vector.
    X : ndarray, shape (N, p)
        Regressor matrix.
    column_names : tuple of str
        One label per regressor column.
    codes : ndarray, shape (N,)
        Dense subject code per row, 0..n-1 in order of first appearance.
    counts : ndarray, shape (n,)
        Observations per subject; every entry is at least 2.
    subject_labels : ndarray, shape (n,)
        Distinct subject labels in order of first appearance.
    """

    subject_ids: np.ndarray
    y: np.ndarray
    X: np.ndarray
    column_names: tuple[str, ...]
    codes: np.ndarray
    counts: np.ndarray
    subject_labels: np.ndarray

    @property
    def n_obs(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_subjects(self) -> int:
        return int(self.counts.shape[0])

    @property
    def n_regressors(self) -> int:
        return int(self.X.shape[1])

    def groups(self) -> list[np.ndarray]:
        """Row indices of each subject, in subject-code order."""
        order = np.argsort(self.codes, kind="stable")
        bounds = np.cumsum(self.counts)[:-1]
        return np.split(order, bounds)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _assemble_panel(subject_ids, y, X, column_names) -> PanelData:
    subject_ids = np.asarray(subject_ids)
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if y.ndim != 1 or X.ndim != 2 or subject_ids.ndim != 1:
        raise ShapeMismatchError("expected 1-d y/subject_ids and 2-d X")
    n_obs = y.shape[0]
    if n_obs == 0:
        raise EmptyInputError("panel has no observations")
    if subject_ids.shape[0] != n_obs or X.shape[0] != n_obs:
        raise ShapeMismatchError(
            f"row counts differ: subjects={subject_ids.shape[0]}, "
            f"y={n_obs}, X={X.shape[0]}"
        )
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValueError("panel contains missing or non-finite values")

    if column_names is None:
        column_names = tuple(f"x{j + 1}" for j in range(X.shape[1]))
    else:
        column_names = tuple(str(c) for c in column_names)
        if len(column_names) != X.shape[1]:
            raise ShapeMismatchError(
                f"{len(column_names)} column names for {X.shape[1]} regressors"
            )

    code_of: dict = {}
    codes = np.empty(n_obs, dtype=np.int64)
    labels = []
    for i, label in enumerate(subject_ids.tolist()):
        code = code_of.get(label)
        if code is None:
            code = len(labels)
            code_of[label] = code
            labels.append(label)
        codes[i] = code

    counts = np.bincount(codes, minlength=len(labels))
    singles = [labels[i] for i in np.nonzero(counts < 2)[0]]
    if singles:
        raise SingletonSubjectError(
            f"subject(s) with a single observation: {singles!r}"
        )

    return PanelData(
        subject_ids=_freeze(subject_ids.copy()),
        y=_freeze(y.copy()),
        X=_freeze(X.copy()),
        column_names=column_names,
        codes=_freeze(codes),
        counts=_freeze(counts),
        subject_labels=_freeze(np.asarray(labels)),
    )


def build_panel(records, column_names=None) -> PanelData:
    """Build a panel from an iterable of (subject_id, y, x_row) records.

    Within-subject row order is preserved as given; subjects may interleave.
    Raises EmptyInputError on no records, RaggedRowError on inconsistent row
    widths, and SingletonSubjectError when a subject has only one row.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("no records supplied")

    subjects = []
    ys = []
    rows = []
    width = None
    for idx, (sid, yval, xrow) in enumerate(records):
        xrow = tuple(float(v) for v in np.atleast_1d(xrow))
        if width is None:
            width = len(xrow)
        elif len(xrow) != width:
            raise RaggedRowError(
                f"record {idx} has {len(xrow)} regressors, expected {width}"
            )
        subjects.append(sid)
        ys.append(float(yval))
        rows.append(xrow)

    return _assemble_panel(subjects, ys, np.asarray(rows, dtype=float), column_names)


def read_panel_csv(path, subject_col: str, response_col: str) -> PanelData:
    """Read a long-format panel from a CSV file.

    The file must have a header row.  ``subject_col`` holds the subject
    label (string or integer), ``response_col`` the response, and every
    remaining column is parsed as a numeric regressor ('.' decimal
    separator, UTF-8 encoding).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        for required in (subject_col, response_col):
            if required not in header:
                raise ValueError(f"{path}: column {required!r} not in header {header}")
        s_idx = header.index(subject_col)
        y_idx = header.index(response_col)
        x_idx = [i for i in range(len(header)) if i not in (s_idx, y_idx)]
        names = [header[i] for i in x_idx]

        subjects = []
        ys = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RaggedRowError(
                    f"{path}:{lineno}: {len(row)} fields, expected {len(header)}"
                )
            try:
                ys.append(float(row[y_idx]))
                rows.append([float(row[i]) for i in x_idx])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            subjects.append(row[s_idx].strip())

    if not subjects:
        raise EmptyInputError(f"{path}: no data rows")
    return _assemble_panel(subjects, ys, np.asarray(rows, dtype=float), names)

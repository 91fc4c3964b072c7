"""CSV ingestion and bundled synthetic datasets.

Input files are RFC-4180-style CSV with a header row, UTF-8, ``.`` decimal
separator, and all-numeric columns.  The response column is extracted by
name; the remaining columns become the design matrix in file order (no
automatic intercept).

Three synthetic datasets ship with the package, shaped like the data the
experiment protocol targets: ``desk`` (m=60, 8 covariates, pure-noise
response; the default desk-scale benchmark), ``prostate_shaped`` (m=97, 8
covariates, sparse signal) and ``glucose_shaped`` (m=68, 72 covariates).
They are regenerable bit-for-bit with :func:`synthesize`.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "load_dataset",
    "standardize_design",
    "bundled_dataset_path",
    "synthesize",
    "write_dataset",
]


class DataError(ValueError):
    """Malformed or unusable input data (maps to CLI exit code 2)."""


def load_dataset(
    path, response: str, standardize: bool = False
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a CSV into a response vector and design matrix.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row; every column numeric.
    response : str
        Name of the response column.
    standardize : bool
        If true, center and scale the design columns to unit sample
        variance and center the response.

    Returns
    -------
    (y, X, covariate_names)

    Raises
    ------
    DataError
        On missing files, missing response column, or non-numeric cells
        (the error names the offending row and column).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty dataset file: {path}") from None
        header = [h.strip() for h in header]
        if response not in header:
            raise DataError(
                f"response column {response!r} not found; columns: {header}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"row at line {lineno} has {len(row)} cells, "
                    f"expected {len(header)}"
                )
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"non-numeric value {cell!r} at line {lineno}, "
                        f"column {name!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise DataError(f"no data rows in {path}")
    data = np.asarray(rows, dtype=float)
    ridx = header.index(response)
    y = data[:, ridx]
    X = np.delete(data, ridx, axis=1)
    names = [h for h in header if h != response]
    if standardize:
        y, X = standardize_design(y, X, names)
    return y, X, names


def standardize_design(
    y: np.ndarray, X: np.ndarray, names: list[str] | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Center y; center and scale X columns to unit sample variance."""
    sd = np.std(X, axis=0, ddof=1)
    zero = np.nonzero(sd == 0.0)[0]
    if zero.size:
        which = names[zero[0]] if names else f"index {zero[0]}"
        raise DataError(f"zero-variance column under standardization: {which}")
    return y - y.mean(), (X - X.mean(axis=0)) / sd


def bundled_dataset_path(name: str) -> Path:
    """Filesystem path of a bundled dataset (``desk``, ``prostate_shaped``,
    ``glucose_shaped``)."""
    ref = resources.files("bridgemix") / "data" / f"{name}.csv"
    p = Path(str(ref))
    if not p.exists():
        raise DataError(f"no bundled dataset named {name!r}")
    return p


_SHAPES = {
    # name: (m, n2, beta builder, sigma, ar coefficient)
    "desk": (60, 8, lambda n: np.zeros(n), 1.0, 0.3),
    "prostate_shaped": (
        97,
        8,
        lambda n: np.array([0.66, 0.26, -0.14, 0.21, 0.31, 0.0, 0.04, 0.27]),
        0.7,
        0.4,
    ),
    "glucose_shaped": (
        68,
        72,
        lambda n: np.concatenate([[0.5, -0.4, 0.3], np.zeros(n - 3)]),
        1.0,
        0.2,
    ),
}


def synthesize(shape: str, seed: int = 11) -> tuple[np.ndarray, np.ndarray]:
    """Generate one of the bundled synthetic datasets (X, y), bit-exactly.

    Covariates are an AR-correlated Gaussian design, standardized; the
    response is ``X beta + noise``, centered.
    """
    if shape not in _SHAPES:
        raise ValueError(f"unknown shape {shape!r}; options: {sorted(_SHAPES)}")
    m, n2, beta_fn, sigma, rho = _SHAPES[shape]
    beta = beta_fn(n2)
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(m, n2))
    X = np.empty((m, n2))
    X[:, 0] = base[:, 0]
    for j in range(1, n2):
        X[:, j] = rho * X[:, j - 1] + np.sqrt(1.0 - rho * rho) * base[:, j]
    X = (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)
    y = X @ beta + sigma * rng.normal(size=m)
    return X, y - y.mean()


def write_dataset(path, X: np.ndarray, y: np.ndarray) -> None:
    """Write (X, y) as a CSV with columns y, x1..xn."""
    path = Path(path)
    n2 = X.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j + 1}" for j in range(n2)])
        for i in range(X.shape[0]):
            writer.writerow([repr(y[i])] + [repr(v) for v in X[i]])

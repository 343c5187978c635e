"""CSS codes: container, constructions, presets and the logical-failure test."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .gf2 import (
    DimensionError,
    RowSpace,
    SparseBinaryMatrix,
    as_bits,
    load_matrix,
    mat_vec_mod2,
    rank_mod2,
)

PRESET_DIR_ENV = "MBBPLD_PRESET_DIR"


class PresetError(ValueError):
    """A code preset is missing, malformed, or fails its parameter check."""


@dataclass(frozen=True, eq=False)
class CssCode:
    name: str
    hx: SparseBinaryMatrix
    hz: SparseBinaryMatrix
    d_claimed: int | None = None
    k_claimed: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.hx.num_cols != self.hz.num_cols:
            raise DimensionError(
                f"hx has {self.hx.num_cols} columns but hz has {self.hz.num_cols}"
            )

    @property
    def n(self) -> int:
        return self.hx.num_cols

    @cached_property
    def k(self) -> int:
        return self.n - rank_mod2(self.hx) - rank_mod2(self.hz)

    def label(self) -> str:
        d = "" if self.d_claimed is None else f",{self.d_claimed}"
        return f"[[{self.n},{self.k}{d}]]"


@dataclass
class CssReport:
    violations: list[tuple[int, int]]
    k: int
    n: int

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_css(code: CssCode) -> CssReport:
    """List every (hx row, hz row) pair with odd overlap, plus the computed k."""
    hz_cols = code.hz.transpose().rows
    violations = []
    for i, row in enumerate(code.hx.rows):
        counts: dict[int, int] = {}
        for j in row:
            for r in hz_cols[j]:
                counts[r] = counts.get(r, 0) + 1
        violations.extend((i, r) for r, c in sorted(counts.items()) if c & 1)
    return CssReport(violations=violations, k=code.k, n=code.n)


# ---------------------------------------------------------------------------
# Constructions


def build_bivariate_bicycle(
    l: int,
    m: int,
    a_terms: Sequence[Sequence[int]],
    b_terms: Sequence[Sequence[int]],
    name: str | None = None,
    d_claimed: int | None = None,
) -> CssCode:
    """Bivariate bicycle code with ``H_X = [A|B]`` and ``H_Z = [B^T|A^T]``.

    ``A`` and ``B`` are sums of monomials ``x^i y^j`` where ``x = S_l (x) I_m``
    and ``y = I_l (x) S_m`` for cyclic shifts ``S``. Each term is an ``(i, j)``
    exponent pair.
    """
    if l < 1 or m < 1:
        raise ValueError(f"l and m must be positive, got l={l}, m={m}")
    for i, j in list(a_terms) + list(b_terms):
        if not (0 <= i < l and 0 <= j < m):
            raise ValueError(f"monomial exponent ({i}, {j}) outside Z_{l} x Z_{m}")
    lm = l * m

    def block(terms):
        out = np.zeros((lm, lm), dtype=np.uint8)
        for a in range(l):
            for b in range(m):
                for i, j in terms:
                    out[a * m + b, ((a + i) % l) * m + (b + j) % m] ^= 1
        return out

    A, B = block(a_terms), block(b_terms)
    hx = SparseBinaryMatrix.from_dense(np.hstack([A, B]))
    hz = SparseBinaryMatrix.from_dense(np.hstack([B.T, A.T]))
    return CssCode(name or f"bb_{l}x{m}", hx, hz, d_claimed=d_claimed)


def _circulant(lift: int, exponents: Sequence[int]) -> np.ndarray:
    c = np.zeros((lift, lift), dtype=np.uint8)
    for e in exponents:
        c[np.arange(lift), (np.arange(lift) + e) % lift] ^= 1
    return c


def build_lifted_product(
    lift: int,
    a_matrix: Sequence[Sequence[Sequence[int]]],
    b_poly: Sequence[int],
    name: str | None = None,
    d_claimed: int | None = None,
) -> CssCode:
    """Lifted product of a matrix ``A`` over ``F2[x]/(x^lift - 1)`` with a 1x1 ``b``.

    ``a_matrix[r][c]`` lists the exponents of the polynomial at ``(r, c)``
    (empty for zero). ``H_X = [A, b I]`` and ``H_Z = [b* I, A*]`` where ``*``
    is the ring conjugate transpose, i.e. the binary transpose after lifting.
    """
    ma, na = len(a_matrix), len(a_matrix[0])
    if any(len(r) != na for r in a_matrix):
        raise ValueError("a_matrix rows have unequal length")
    A = np.block([[_circulant(lift, entry) for entry in row] for row in a_matrix])
    bI_m = np.kron(np.eye(ma, dtype=np.uint8), _circulant(lift, b_poly))
    bI_n = np.kron(np.eye(na, dtype=np.uint8), _circulant(lift, b_poly))
    hx = SparseBinaryMatrix.from_dense(np.hstack([A, bI_m]))
    hz = SparseBinaryMatrix.from_dense(np.hstack([bI_n.T, A.T]))
    return CssCode(name or f"lp_{lift}", hx, hz, d_claimed=d_claimed)


# ---------------------------------------------------------------------------
# Presets


def _preset_dirs(extra: str | Path | None = None) -> list[Path]:
    dirs = []
    if extra is not None:
        dirs.append(Path(extra))
    env = os.environ.get(PRESET_DIR_ENV)
    if env:
        dirs.append(Path(env))
    dirs.append(Path(str(resources.files("mbbpld") / "presets")))
    return dirs


def available_presets(preset_dir: str | Path | None = None) -> list[str]:
    names = set()
    for d in _preset_dirs(preset_dir):
        if d.is_dir():
            names.update(p.stem for p in d.glob("*.json"))
    return sorted(names)


def code_from_preset(data: dict, base_dir: Path | None = None) -> CssCode:
    """Build a code from a preset document and verify its claimed ``k``.

    Recognised shapes: ``{l, m, a_terms, b_terms}`` (bivariate bicycle),
    ``{lift, a_matrix, b_poly}`` (lifted product) and ``{hx_path, hz_path}``.
    """
    name = data.get("name", "unnamed")
    d = data.get("d")
    try:
        if "a_terms" in data:
            code = build_bivariate_bicycle(
                data["l"], data["m"], data["a_terms"], data["b_terms"], name=name, d_claimed=d
            )
        elif "a_matrix" in data:
            code = build_lifted_product(
                data["lift"], data["a_matrix"], data["b_poly"], name=name, d_claimed=d
            )
        elif "hx_path" in data:
            base = base_dir or Path.cwd()
            hx = load_matrix(base / data["hx_path"])
            hz = load_matrix(base / data["hz_path"])
            code = CssCode(name, hx, hz, d_claimed=d)
        else:
            raise PresetError(f"preset {name!r}: unrecognised construction fields {sorted(data)}")
    except KeyError as exc:
        raise PresetError(f"preset {name!r}: missing field {exc}") from exc

    report = validate_css(code)
    if not report.valid:
        raise PresetError(
            f"preset {name!r}: {len(report.violations)} hx/hz orthogonality violations"
        )
    if "n" in data and data["n"] != code.n:
        raise PresetError(f"preset {name!r}: claims n={data['n']}, construction gives n={code.n}")
    if "k" in data and data["k"] != code.k:
        raise PresetError(f"preset {name!r}: claims k={data['k']}, computed k={code.k}")
    return code


def load_preset(name_or_path: str | Path, preset_dir: str | Path | None = None) -> CssCode:
    """Load a preset by name (searching preset directories) or by JSON path."""
    path = Path(name_or_path)
    if path.suffix != ".json":
        for d in _preset_dirs(preset_dir):
            if (d / f"{name_or_path}.json").is_file():
                path = d / f"{name_or_path}.json"
                break
        else:
            raise PresetError(
                f"unknown preset {name_or_path!r}; available: {', '.join(available_presets(preset_dir))}"
            )
    if not path.is_file():
        raise FileNotFoundError(f"preset file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PresetError(f"{path}: invalid JSON ({exc})") from exc
    return code_from_preset(data, base_dir=path.parent)


# ---------------------------------------------------------------------------
# Logical failures


class FailureTest:
    """Scores decoding trials against a fixed (syndrome, stabilizer) matrix pair.

    For X errors the syndrome comes from ``hz`` and the residual must lie in the
    row space of ``hx``; ``error_type="Z"`` swaps the roles.
    """

    def __init__(self, code: CssCode, error_type: str = "X"):
        if error_type not in ("X", "Z"):
            raise ValueError(f"error_type must be 'X' or 'Z', got {error_type!r}")
        self.code = code
        self.error_type = error_type
        if error_type == "X":
            self.syndrome_matrix, self.stabilizer_matrix = code.hz, code.hx
        else:
            self.syndrome_matrix, self.stabilizer_matrix = code.hx, code.hz
        self._stabilizers = RowSpace(self.stabilizer_matrix)

    def syndrome(self, error) -> np.ndarray:
        return mat_vec_mod2(self.syndrome_matrix, error)

    def __call__(self, true_error, estimate) -> bool:
        n = self.code.n
        e = as_bits(true_error, n)
        est = as_bits(estimate, n)
        if not np.array_equal(mat_vec_mod2(self.syndrome_matrix, est), mat_vec_mod2(self.syndrome_matrix, e)):
            return True
        return not self._stabilizers.contains(e ^ est)


def is_logical_failure(
    code: CssCode,
    true_error,
    estimate,
    syndrome_matrix: SparseBinaryMatrix,
    stabilizer_matrix: SparseBinaryMatrix,
) -> bool:
    n = code.n
    e = as_bits(true_error, n)
    est = as_bits(estimate, n)
    if not np.array_equal(mat_vec_mod2(syndrome_matrix, est), mat_vec_mod2(syndrome_matrix, e)):
        return True
    return not RowSpace(stabilizer_matrix).contains(e ^ est)

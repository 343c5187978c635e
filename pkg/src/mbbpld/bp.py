"""Syndrome-based normalized min-sum belief propagation.

Two schedules share one message layout:

* ``flooding``: all check nodes update from the previous iteration's
  variable-to-check messages, then all variable nodes update.
* ``serial``: nodes update one after another and their fresh messages are
  used immediately within the same pass. With ``serial_mode="check"`` (the
  default) check nodes are swept in a fixed row order, each reading the
  current posteriors. With ``serial_mode="variable"`` variable nodes are swept
  in column order; each recomputes its incoming check messages from the
  current variable-to-check messages and then refreshes its outgoing ones.

Edges are numbered in row-major (CSR) order of the parity-check matrix. The
syndrome enters at the check update: the sign product of check ``c`` is
multiplied by ``(-1)**s[c]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .gf2 import DimensionError, SparseBinaryMatrix, as_bits

SCHEDULES = ("flooding", "serial")


@dataclass(frozen=True)
class BpConfig:
    channel_p: float = 0.05
    max_iterations: int = 100
    alpha: float = 0.875
    schedule: str = "flooding"
    clip: float = 50.0
    # "ascending" or "interleaved" (each duplicated row right after its original);
    # only meaningful for augmented matrices, resolved by the caller.
    serial_order: str = "ascending"
    serial_mode: str = "check"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.channel_p < 0.5:
            raise ValueError(f"channel_p must lie in (0, 0.5), got {self.channel_p}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.clip <= 0:
            raise ValueError(f"clip must be positive, got {self.clip}")
        if self.serial_order not in ("ascending", "interleaved"):
            raise ValueError(f"unknown serial_order {self.serial_order!r}")
        if self.serial_mode not in ("check", "variable"):
            raise ValueError(f"serial_mode must be 'check' or 'variable', got {self.serial_mode!r}")

    @property
    def prior_llr(self) -> float:
        return math.log((1 - self.channel_p) / self.channel_p)


@dataclass
class BpState:
    """Messages and LLRs; edge arrays follow the matrix's CSR edge order."""

    prior: np.ndarray
    check_to_var: np.ndarray
    var_to_check: np.ndarray
    posterior: np.ndarray


@dataclass(frozen=True)
class BpOutcome:
    estimate: np.ndarray
    converged: bool
    iterations_used: int


def init_state(H: SparseBinaryMatrix, cfg: BpConfig) -> BpState:
    prior = np.full(H.num_cols, cfg.prior_llr)
    return BpState(
        prior=prior,
        check_to_var=np.zeros(H.nnz),
        var_to_check=np.zeros(H.nnz),
        posterior=prior.copy(),
    )


# ---------------------------------------------------------------------------
# Kernels


@njit(cache=True, nogil=True)
def _clip(x, lim):
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


@njit(cache=True, nogil=True)
def _check_update(c, row_ptr, q, r, syndrome, alpha, clip):
    """Min-sum update of check ``c``: reads ``q`` over its edges, writes ``r``."""
    start, stop = row_ptr[c], row_ptr[c + 1]
    negative = syndrome[c]
    min1 = np.inf
    min2 = np.inf
    argmin = -1
    for e in range(start, stop):
        x = q[e]
        if x < 0:
            negative ^= 1
            x = -x
        if x < min1:
            min2 = min1
            min1 = x
            argmin = e
        elif x < min2:
            min2 = x
    for e in range(start, stop):
        # a degree-1 check gets min over the empty set (+inf), then clipped
        mag = min2 if e == argmin else min1
        neg = negative ^ (1 if q[e] < 0 else 0)
        val = alpha * mag
        r[e] = _clip(-val if neg else val, clip)


@njit(cache=True, nogil=True)
def _satisfied(row_ptr, edge_var, est, syndrome):
    m = row_ptr.shape[0] - 1
    for c in range(m):
        par = 0
        for e in range(row_ptr[c], row_ptr[c + 1]):
            par ^= est[edge_var[e]]
        if par != syndrome[c]:
            return False
    return True


@njit(cache=True, nogil=True)
def _flooding(row_ptr, edge_var, col_ptr, col_edges, syndrome, prior, alpha, clip,
              max_iter, r, q, posterior, est):
    n = prior.shape[0]
    m = row_ptr.shape[0] - 1
    for e in range(edge_var.shape[0]):
        q[e] = prior[edge_var[e]]
        r[e] = 0.0
    for it in range(1, max_iter + 1):
        for c in range(m):
            _check_update(c, row_ptr, q, r, syndrome, alpha, clip)
        for v in range(n):
            total = prior[v]
            for k in range(col_ptr[v], col_ptr[v + 1]):
                total += r[col_edges[k]]
            posterior[v] = total
            est[v] = 1 if total < 0 else 0
            for k in range(col_ptr[v], col_ptr[v + 1]):
                e = col_edges[k]
                q[e] = _clip(total - r[e], clip)
        if _satisfied(row_ptr, edge_var, est, syndrome):
            return True, it
    return False, max_iter


@njit(cache=True, nogil=True)
def _serial(row_ptr, edge_var, order, syndrome, prior, alpha, clip,
            max_iter, r, q, posterior, est):
    n = prior.shape[0]
    for v in range(n):
        posterior[v] = prior[v]
    for e in range(edge_var.shape[0]):
        r[e] = 0.0
    for it in range(1, max_iter + 1):
        for k in range(order.shape[0]):
            c = order[k]
            for e in range(row_ptr[c], row_ptr[c + 1]):
                q[e] = _clip(posterior[edge_var[e]] - r[e], clip)
            _check_update(c, row_ptr, q, r, syndrome, alpha, clip)
            for e in range(row_ptr[c], row_ptr[c + 1]):
                posterior[edge_var[e]] = q[e] + r[e]
        for v in range(n):
            est[v] = 1 if posterior[v] < 0 else 0
        if _satisfied(row_ptr, edge_var, est, syndrome):
            return True, it
    return False, max_iter


@njit(cache=True, nogil=True)
def _serial_variable(row_ptr, edge_var, edge_row, col_ptr, col_edges, syndrome, prior,
                     alpha, clip, max_iter, r, q, posterior, est):
    n = prior.shape[0]
    for e in range(edge_var.shape[0]):
        q[e] = prior[edge_var[e]]
        r[e] = 0.0
    for it in range(1, max_iter + 1):
        for v in range(n):
            total = prior[v]
            for k in range(col_ptr[v], col_ptr[v + 1]):
                e = col_edges[k]
                c = edge_row[e]
                negative = syndrome[c]
                mag = np.inf
                for f in range(row_ptr[c], row_ptr[c + 1]):
                    if f == e:
                        continue
                    x = q[f]
                    if x < 0:
                        negative ^= 1
                        x = -x
                    if x < mag:
                        mag = x
                val = alpha * mag
                r[e] = _clip(-val if negative else val, clip)
                total += r[e]
            posterior[v] = total
            for k in range(col_ptr[v], col_ptr[v + 1]):
                e = col_edges[k]
                q[e] = _clip(total - r[e], clip)
        for v in range(n):
            est[v] = 1 if posterior[v] < 0 else 0
        if _satisfied(row_ptr, edge_var, est, syndrome):
            return True, it
    return False, max_iter


# ---------------------------------------------------------------------------
# Python surface


class BpDecoder:
    """BP over one fixed matrix; precomputes the edge layout once.

    ``order`` overrides the serial update order (a permutation of the rows).
    """

    def __init__(self, H: SparseBinaryMatrix, cfg: BpConfig, order: Sequence[int] | None = None):
        self.H = H
        self.cfg = cfg
        self.row_ptr, self.edge_var = H.csr
        col_ptr = np.zeros(H.num_cols + 1, dtype=np.int32)
        np.cumsum(np.bincount(self.edge_var, minlength=H.num_cols), out=col_ptr[1:])
        self.col_ptr = col_ptr
        self.col_edges = np.argsort(self.edge_var, kind="stable").astype(np.int32)
        self.edge_row = np.repeat(np.arange(H.num_rows, dtype=np.int32), np.diff(self.row_ptr))
        if order is None:
            order = np.arange(H.num_rows, dtype=np.int32)
        else:
            order = np.asarray(order, dtype=np.int32)
            if sorted(order.tolist()) != list(range(H.num_rows)):
                raise ValueError("serial order must be a permutation of the rows")
        self.order = order
        self.prior = np.full(H.num_cols, cfg.prior_llr)

    def decode(self, syndrome, state: BpState | None = None) -> BpOutcome:
        """Run BP towards ``syndrome``. Pass ``state`` to receive the final messages."""
        s = as_bits(syndrome)
        if s.shape[0] != self.H.num_rows:
            raise DimensionError(f"syndrome length {s.shape[0]} != {self.H.num_rows} checks")
        cfg = self.cfg
        nnz = self.edge_var.shape[0]
        r = np.empty(nnz)
        q = np.empty(nnz)
        posterior = np.empty(self.H.num_cols)
        est = np.zeros(self.H.num_cols, dtype=np.uint8)
        if cfg.schedule == "flooding":
            converged, iters = _flooding(
                self.row_ptr, self.edge_var, self.col_ptr, self.col_edges, s, self.prior,
                cfg.alpha, cfg.clip, cfg.max_iterations, r, q, posterior, est,
            )
        elif cfg.serial_mode == "variable":
            converged, iters = _serial_variable(
                self.row_ptr, self.edge_var, self.edge_row, self.col_ptr, self.col_edges, s,
                self.prior, cfg.alpha, cfg.clip, cfg.max_iterations, r, q, posterior, est,
            )
        else:
            converged, iters = _serial(
                self.row_ptr, self.edge_var, self.order, s, self.prior,
                cfg.alpha, cfg.clip, cfg.max_iterations, r, q, posterior, est,
            )
        if state is not None:
            state.prior = self.prior.copy()
            state.check_to_var, state.var_to_check, state.posterior = r, q, posterior
        return BpOutcome(est, bool(converged), int(iters))


def decode(H: SparseBinaryMatrix, syndrome, cfg: BpConfig) -> BpOutcome:
    return BpDecoder(H, cfg).decode(syndrome)


def decode_serial(H: SparseBinaryMatrix, syndrome, cfg: BpConfig) -> BpOutcome:
    if cfg.schedule != "serial":
        cfg = BpConfig(**{**cfg.__dict__, "schedule": "serial"})
    return BpDecoder(H, cfg).decode(syndrome)

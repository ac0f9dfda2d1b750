"""Per-node scalar signals over prediction iterations and their spectra.

Each embedding is projected to its L2 norm, giving a scalar series f(n) per
node as link prediction iterates.  The discrete Fourier transform

    c_k = (1/N) * sum_{n=0}^{N-1} f(n0 + n) * exp(-i 2 pi k n / N)

is taken over a trailing window once the series settles; the stable signal
alpha is |c_k| for a configurable coefficient index (0 by default, i.e. the
magnitude of the mean).  No filtering or gain is applied to the raw series.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SignalConfig:
    tol: float = 1e-4
    window: int = 10
    coefficient_index: int = 0


@dataclass
class SignalTrace:
    node_id: str
    start_iteration: int = 1
    samples: list[float] = field(default_factory=list)

    def append(self, iteration: int, value: float) -> None:
        expected = self.start_iteration + len(self.samples)
        if iteration != expected:
            raise ValueError(
                f"trace {self.node_id}: expected iteration {expected}, got {iteration}"
            )
        self.samples.append(float(value))

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class StableSignal:
    node_id: str
    value: float
    converged: bool
    converged_at: int | None


def project(embedding: np.ndarray) -> float:
    """Embedding vector -> scalar sample: the L2 norm."""
    return float(np.linalg.norm(np.asarray(embedding, dtype=np.float64)))


def dft(series) -> np.ndarray:
    """Normalized DFT coefficients c_0..c_{N-1} of a real series."""
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("series must be a non-empty 1-D sequence")
    return np.fft.fft(arr) / arr.size


def parseval_gap(series) -> float:
    """| (1/N) sum |f|^2 - sum |c_k|^2 |; zero up to roundoff by Parseval."""
    arr = np.asarray(series, dtype=np.float64)
    coeffs = dft(arr)
    return abs(float(np.mean(arr * arr)) - float(np.sum(np.abs(coeffs) ** 2)))


def _relative_step(prev: float, cur: float, floor: float = 1e-9) -> float:
    return abs(cur - prev) / max(abs(cur), floor)


def _window_ok(trace: SignalTrace, cfg: SignalConfig, t: int) -> bool:
    """True when every relative step across the window ending at iteration t
    stayed below tol.  A step with no predecessor sample is vacuous."""
    s = trace.samples
    n0 = trace.start_iteration
    for it in range(t - cfg.window + 1, t + 1):
        prev_idx = it - 1 - n0
        if prev_idx < 0:
            continue
        if prev_idx + 1 >= len(s):
            return False
        if _relative_step(s[prev_idx], s[prev_idx + 1]) >= cfg.tol:
            return False
    return True


def _first_converged_at(trace: SignalTrace, cfg: SignalConfig) -> int | None:
    s = trace.samples
    n0 = trace.start_iteration
    if len(s) < cfg.window:
        return None
    last = n0 + len(s) - 1
    for t in range(n0 + cfg.window - 1, last + 1):
        if _window_ok(trace, cfg, t):
            return t
    return None


def stable_signal(
    trace: SignalTrace, cfg: SignalConfig = SignalConfig()
) -> StableSignal:
    """Settle a node's series into its stable value.

    Convergence: the first iteration t where every relative step across the
    trailing window stayed below tol.  The stable value is |c_k| of the DFT
    over the window ending at t; if the series never converges the final
    window is used and converged is False.
    """
    if len(trace) < cfg.window:
        raise ValueError(
            f"trace {trace.node_id} has {len(trace)} samples; window is {cfg.window}"
        )
    t = _first_converged_at(trace, cfg)
    converged = t is not None
    end = (t if converged else trace.start_iteration + len(trace) - 1)
    lo = end - cfg.window + 1 - trace.start_iteration
    window = trace.samples[lo : lo + cfg.window]
    coeffs = dft(window)
    value = float(np.abs(coeffs[cfg.coefficient_index % cfg.window]))
    return StableSignal(trace.node_id, value, converged, t)


class SignalMonitor:
    """Records (node, iteration, embedding) callbacks and tracks convergence.

    Usable directly as the iteration hook of link prediction; watched set is
    fixed at construction or grows lazily with the first iteration's calls.
    """

    def __init__(self, cfg: SignalConfig = SignalConfig(), watch: list[str] | None = None):
        self.cfg = cfg
        self.traces: dict[str, SignalTrace] = {}
        self._watch = set(watch) if watch is not None else None
        self._converged_at: dict[str, int] = {}

    def __call__(self, node_id: str, iteration: int, embedding: np.ndarray) -> None:
        trace = self.traces.get(node_id)
        if trace is None:
            trace = SignalTrace(node_id, start_iteration=iteration)
            self.traces[node_id] = trace
        trace.append(iteration, project(embedding))
        if node_id in self._converged_at:
            return
        # Every earlier window was already checked when it was the newest one,
        # so only the window ending at this iteration is new.
        if len(trace) >= self.cfg.window and _window_ok(trace, self.cfg, iteration):
            self._converged_at[node_id] = iteration

    @property
    def watched(self) -> set[str]:
        if self._watch is not None:
            return self._watch
        return set(self.traces)

    def all_converged(self) -> bool:
        watched = self.watched
        return bool(watched) and all(n in self._converged_at for n in watched)

    def stable_signals(self) -> dict[str, StableSignal]:
        return {
            nid: stable_signal(trace, self.cfg)
            for nid, trace in sorted(self.traces.items())
            if len(trace) >= self.cfg.window
        }

    def initial_values(self) -> dict[str, float]:
        return {
            nid: trace.samples[0] for nid, trace in self.traces.items() if trace.samples
        }


def traces_csv(traces: dict[str, SignalTrace]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("node_id", "iteration", "sample"))
    for nid in sorted(traces):
        trace = traces[nid]
        for k, v in enumerate(trace.samples):
            writer.writerow((nid, trace.start_iteration + k, repr(v)))
    return buf.getvalue()

"""Evolution families from the chordal Loewner ODE dw/dt = p(w, t).

The integrator is a vectorized Dormand-Prince 5(4) pair with FSAL and
max-norm error control. Integration is split at the field's breakpoints so
no step straddles a discontinuity in t.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ArgumentError, IntegrationError, StiffnessError
from .herglotz import HerglotzField

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

EXIT_TOL = 1e-9
LATTICE = 1e-6


@dataclass
class SolverStats:
    steps: int = 0
    rejected: int = 0
    evaluations: int = 0


def dopri_integrate(rhs, y0: np.ndarray, t0: float, t1: float, rtol: float, atol: float,
                    max_step: float = math.inf, guard=None, stats: Optional[SolverStats] = None,
                    t_eval_cap: Optional[float] = None):
    """Integrate y' = rhs(t, y) from t0 to t1 (t1 >= t0) with a DP5(4) pair.

    ``t_eval_cap``: stage times are clamped below this value, so a field
    with a jump at t1 is evaluated with its left-hand piece.
    """
    y = np.array(y0, dtype=complex)
    if t1 == t0:
        return y
    cap = t1 if t_eval_cap is None else t_eval_cap
    span = t1 - t0

    def f(t, yy):
        if stats is not None:
            stats.evaluations += 1
        return rhs(min(t, cap), yy)

    k1 = f(t0, y)
    scale0 = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale0)
    d1 = np.max(np.abs(k1) / scale0)
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, span, max_step)
    h = max(h, 1e-12 * max(1.0, abs(t0)))
    t = t0
    ks = [None] * 7
    while t < t1:
        last = t + h >= t1 - 1e-14 * max(1.0, abs(t1))
        if last:
            h = t1 - t
        ks[0] = k1
        for i in range(1, 7):
            acc = y.copy()
            for j, a in enumerate(_A[i]):
                if a != 0.0:
                    acc = acc + h * a * ks[j]
            ks[i] = f(t + _C[i] * h, acc) if i < 6 else None
            if i == 6:
                y_new = acc
                ks[6] = f(t + h, y_new)
        err_vec = h * sum(_E[i] * ks[i] for i in range(7) if _E[i] != 0.0)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / sc)) if y.size else 0.0
        if not np.isfinite(err):
            err = math.inf
        if err <= 1.0:
            t = t1 if last else t + h
            y = y_new
            k1 = ks[6]
            if stats is not None:
                stats.steps += 1
            if guard is not None:
                guard(t, y)
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        else:
            if stats is not None:
                stats.rejected += 1
            fac = max(0.2, 0.9 * err ** (-0.2)) if np.isfinite(err) else 0.2
        h = min(h * fac, max_step)
        if t < t1 and h < 1e-14 * max(1.0, abs(t)):
            raise StiffnessError(f"step size underflow at t={t:.6g}")
    return y


@dataclass(eq=False)
class EvolutionFamily:
    """phi_{s,t} for a Herglotz field, with optional memoization on a time lattice.

    ``cache``: ``"locked"`` (thread-safe), ``"off"``.
    """

    field: HerglotzField
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = math.inf
    cache: str = "locked"
    cache_limit: int = 200_000
    _store: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.cache not in ("locked", "off"):
            raise ArgumentError("cache must be 'locked' or 'off'")

    # -------------------------------------------------------------- internals

    def _segments(self, s, t):
        cuts = [s] + [b for b in self.field.breakpoints if s < b < t] + [t]
        return list(zip(cuts[:-1], cuts[1:]))

    def _run(self, s, t, z, jet):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        w = z.ravel().copy()
        n = w.size
        d = np.ones(n, dtype=complex)
        if t < s:
            raise ArgumentError("evolve needs s <= t")
        if s < 0:
            raise ArgumentError("evolve needs s >= 0")
        if np.any(w.real <= 0):
            from .errors import DomainError
            raise DomainError("initial point outside the right half-plane")
        p = self.field

        def guard(tau, y):
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"non-finite trajectory value at t={tau:.6g}")
            if np.any(y[:n].real < -EXIT_TOL):
                raise IntegrationError(f"trajectory left the half-plane at t={tau:.6g}")

        if jet:
            def rhs(tau, y):
                ww = y[:n]
                return np.concatenate([p.eval(ww, tau), p.derivative_z(ww, tau) * y[n:]])
            y = np.concatenate([w, d])
        else:
            def rhs(tau, y):
                return p.eval(y, tau)
            y = w
        bps = set(p.breakpoints)
        for a, b in self._segments(s, t):
            cap = np.nextafter(b, -math.inf) if b in bps else None
            y = dopri_integrate(rhs, y, a, b, self.rtol, self.atol, self.max_step,
                                guard=guard, t_eval_cap=cap)
        if jet:
            return y[:n].reshape(shape), y[n:].reshape(shape)
        return y.reshape(shape), None

    @staticmethod
    def _on_lattice(x):
        q = round(x / LATTICE)
        return abs(q * LATTICE - x) <= 1e-12 * max(1.0, abs(x)), q

    def _cached(self, s, t, z, jet):
        if self.cache == "off" or np.ndim(z) != 0:
            return None, None
        ok_s, qs = self._on_lattice(s)
        ok_t, qt = self._on_lattice(t)
        if not (ok_s and ok_t):
            return None, None
        key = (qs, qt, complex(z), jet)
        with self._lock:
            return key, self._store.get(key)

    def _remember(self, key, val):
        if key is None:
            return
        with self._lock:
            if len(self._store) >= self.cache_limit:
                self._store.clear()
            self._store[key] = val

    # -------------------------------------------------------------- public API

    def evolve(self, s: float, t: float, z):
        if t == s:
            return np.asarray(z, dtype=complex)[()] if np.ndim(z) == 0 else np.array(z, dtype=complex)
        key, hit = self._cached(s, t, z, False)
        if hit is not None:
            return hit
        w, _ = self._run(float(s), float(t), z, False)
        out = w[()] if w.ndim == 0 else w
        self._remember(key, out)
        return out

    def evolve_jet(self, s: float, t: float, z):
        if t == s:
            z = np.asarray(z, dtype=complex)
            one = np.ones_like(z)
            return (z[()], one[()]) if z.ndim == 0 else (z.copy(), one)
        key, hit = self._cached(s, t, z, True)
        if hit is not None:
            return hit
        w, d = self._run(float(s), float(t), z, True)
        out = (w[()], d[()]) if w.ndim == 0 else (w, d)
        self._remember(key, out)
        return out

    def __call__(self, s, t, z):
        return self.evolve(s, t, z)

    def semigroup_residual(self, s: float, u: float, t: float, z) -> float:
        if not s <= u <= t:
            raise ArgumentError("semigroup residual needs s <= u <= t")
        lhs = self.evolve(u, t, self.evolve(s, u, z))
        return float(np.max(np.abs(lhs - self.evolve(s, t, z))))

    def alpha_diagnostic(self, t: float) -> float:
        """log(|phi'_{0,t}(1)| / Re phi_{0,t}(1))."""
        if t < 0:
            raise ArgumentError("t must be >= 0")
        w, d = self.evolve_jet(0.0, t, 1.0 + 0j)
        return math.log(abs(d) / w.real)

    def alpha_schedule(self, times):
        """alpha(t) along increasing times, integrating once through the schedule."""
        times = [float(x) for x in times]
        if any(b < a for a, b in zip(times[:-1], times[1:])) or (times and times[0] < 0):
            raise ArgumentError("times must be non-negative and increasing")
        out = []
        w, d, prev = 1.0 + 0j, 1.0 + 0j, 0.0
        for tt in times:
            if tt > prev:
                w1, d1 = self.evolve_jet(prev, tt, w)
                w, d = w1, d * d1
                prev = tt
            out.append(math.log(abs(d) / w.real))
        return out

    def trajectory(self, s: float, times, z):
        """Rows (t, w, dw/dz) at the requested increasing times, starting at s."""
        rows = []
        w, d, prev = complex(z), 1.0 + 0j, float(s)
        for tt in times:
            tt = float(tt)
            if tt < prev:
                raise ArgumentError("trajectory times must be increasing and >= s")
            if tt > prev:
                w1, d1 = self.evolve_jet(prev, tt, w)
                w, d = complex(w1), d * complex(d1)
                prev = tt
            rows.append((tt, w, d))
        return rows


def semigroup_residual(E: EvolutionFamily, s, u, t, z) -> float:
    return E.semigroup_residual(s, u, t, z)


def alpha_diagnostic(E: EvolutionFamily, t) -> float:
    return E.alpha_diagnostic(t)


def evolve(E: EvolutionFamily, s, t, z):
    return E.evolve(s, t, z)


def evolve_jet(E: EvolutionFamily, s, t, z):
    return E.evolve_jet(s, t, z)

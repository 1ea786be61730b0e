"""Exact finite-size ground truth: explicit paths, brute-force enumeration,
and the coefficient-level DP for the moments of the slice statistic.

The statistic of a path is sum over matched step pairs of omega(m) - eps,
where m is the slice semi-length (number of up-steps strictly inside the
pair, on the reflected arc for below-axis bridge arcs).  The DP computes

    e_{s,N} = (1/s!) sum_{paths} A^s
            = sum_{m=0}^{N-1} sum_{s1+s2+s3=s} e_{s1,N-1-m} e_{s2,m} (omega(m)-eps)^{s3}/s3!

from the first-return decomposition, with a factor 2 per step for bridges,
and normalizes M_s(N) = s! e_{s,N} / |paths of size N|.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import backend, costs, numerics
from .errors import CapExceeded, DomainError, MalformedPath
from .numerics import _work, catalan, real

EXCURSION = "excursion"
BRIDGE = "bridge"

ENUM_CAP = {EXCURSION: 14, BRIDGE: 12}


@dataclass(frozen=True)
class LatticePath:
    steps: tuple
    ensemble: str

    def __post_init__(self):
        if self.ensemble not in (EXCURSION, BRIDGE):
            raise MalformedPath(f"unknown ensemble {self.ensemble!r}")
        if len(self.steps) % 2:
            raise MalformedPath("odd number of steps")
        if any(s not in (1, -1) for s in self.steps):
            raise MalformedPath("steps must be +1/-1")
        h = 0
        for s in self.steps:
            h += s
            if self.ensemble == EXCURSION and h < 0:
                raise MalformedPath("excursion dips below zero")
        if h != 0:
            raise MalformedPath("path does not return to zero")

    @property
    def size(self) -> int:
        return len(self.steps) // 2

    def heights(self) -> list:
        out, h = [], 0
        for s in self.steps:
            h += s
            out.append(h)
        return out

    def midpoint_area(self) -> Fraction:
        """sum |h| at step midpoints (half-integers); the unsigned area."""
        total, h = Fraction(0), 0
        for s in self.steps:
            total += abs(Fraction(2 * h + s, 2))
            h += s
        return total


@dataclass(frozen=True)
class SliceProfile:
    """Multiset of slice semi-lengths (one per matched pair, sorted)."""

    semilengths: tuple

    def __len__(self):
        return len(self.semilengths)


def slice_semilengths(path: LatticePath) -> SliceProfile:
    """One semi-length per matched pair; bridges are scanned arcwise on the
    reflected arcs."""
    out = []
    stack = []
    h = 0
    sgn = 1
    for t, st in enumerate(path.steps):
        if h == 0:
            sgn = st
        if st == sgn:
            stack.append(t)
        else:
            i = stack.pop()
            out.append((t - i - 1) // 2)
        h += st
    if stack:
        raise MalformedPath("unbalanced steps")
    return SliceProfile(tuple(sorted(out)))


def statistic(path: LatticePath, cost: costs.CostFunction, eps=0, bits: int | None = None) -> mp.mpf:
    """sum over slices of (omega(m) - eps) at working precision."""
    profile = slice_semilengths(path)
    with _work(bits):
        e = real(eps, bits)
        return +mp.fsum(costs.evaluate(cost, m, bits) - e for m in profile.semilengths)


def statistic_exact(path: LatticePath, cost: costs.CostFunction, eps=Fraction(0)) -> Fraction:
    """Exact rational statistic; requires a rational cost family."""
    profile = slice_semilengths(path)
    total = Fraction(0)
    for m in profile.semilengths:
        w = costs.evaluate_exact(cost, m)
        if w is None:
            raise DomainError(f"{cost.describe()} has no exact rational values")
        total += w - Fraction(eps)
    return total


def path_to_tree_hooks(path: LatticePath) -> tuple:
    """Hook sizes (subtree vertex counts) of the non-root vertices of the
    tree in bijection with the excursion; checks l = 2h - 1 against slices."""
    if path.ensemble != EXCURSION:
        raise MalformedPath("the tree bijection applies to excursions")
    hooks = []
    stack = []
    for st in path.steps:
        if st == 1:
            stack.append(1)
        else:
            size = stack.pop()
            hooks.append(size)
            if stack:
                stack[-1] += size
    if stack:
        raise MalformedPath("unbalanced steps")
    hooks = tuple(sorted(hooks))
    slices = slice_semilengths(path).semilengths
    if tuple(2 * h - 1 for h in hooks) != tuple(2 * m + 1 for m in slices):
        raise MalformedPath("hook/slice bijection broken (internal error)")
    return hooks


def enumerate_paths(size: int, ensemble: str):
    """All excursions (C_N) or bridges (binom(2N, N)) of the given size."""
    cap = ENUM_CAP.get(ensemble)
    if cap is None:
        raise DomainError(f"unknown ensemble {ensemble!r}")
    if size > cap:
        raise CapExceeded(f"{ensemble} enumeration capped at N = {cap}")

    def walk(prefix, h, ups, downs):
        if ups == 0 and downs == 0:
            yield LatticePath(tuple(prefix), ensemble)
            return
        if ups > 0:
            prefix.append(1)
            yield from walk(prefix, h + 1, ups - 1, downs)
            prefix.pop()
        if downs > 0 and (ensemble == BRIDGE or h > 0):
            prefix.append(-1)
            yield from walk(prefix, h - 1, ups, downs - 1)
            prefix.pop()

    yield from walk([], 0, size, size)


# ---------------------------------------------------------------------------
# coefficient DP


@dataclass(frozen=True)
class FiniteNTable:
    """M_s(N) for 0 <= N <= n_max, 0 <= s <= s_max, one ensemble and cost."""

    ensemble: str
    cost: costs.CostFunction
    eps: object
    s_max: int
    n_max: int
    values: list  # values[s][N]
    kind: str  # "rat" | "real" | "float"

    def value(self, s: int, N: int):
        return self.values[s][N]

    def to_csv(self, path, p=None) -> None:
        """Columns: ensemble, s, N, M_s(N), rescaled M_s(N)/N^(s(p+1/2))."""
        pv = float(p if p is not None else self.cost.p)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "s", "N", "moment", "rescaled"])
            for s in range(self.s_max + 1):
                for N in range(self.n_max + 1):
                    v = self.values[s][N]
                    resc = "" if N == 0 else float(v) / N ** (s * (pv + 0.5))
                    writer.writerow([self.ensemble, s, N, str(v), resc])


def _dp_generic(weights, n_max: int, s_max: int, bridge: bool, zero, e_exc=None):
    """Exact/mpf DP on the scaled coefficients e~[N][s] (shared shape with
    the float kernels; 4^-N absorbed so rational tables stay small)."""
    S = s_max + 1
    quarter = zero + Fraction(1, 4) if isinstance(zero, Fraction) else zero + mp.mpf(0.25)
    half = quarter * 2
    fac = half if bridge else quarter
    W = [[zero + 1] + [zero] * s_max for _ in range(n_max)]
    for m in range(n_max):
        for s3 in range(1, S):
            W[m][s3] = W[m][s3 - 1] * weights[m] / s3
    E = [[zero] * S for _ in range(n_max + 1)]
    E[0][0] = zero + 1
    base = e_exc if bridge else E
    for N in range(1, n_max + 1):
        acc = [zero] * S
        for m in range(N):
            em = E[N - 1 - m]
            bm = base[m]
            wm = W[m]
            for s2 in range(S):
                b2 = bm[s2]
                if b2 == 0:
                    continue
                for s3 in range(S - s2):
                    g = b2 * wm[s3]
                    if g == 0:
                        continue
                    for s1 in range(S - s2 - s3):
                        acc[s1 + s2 + s3] += em[s1] * g
        for s in range(S):
            E[N][s] = fac * acc[s]
    return E


def exact_moment_dp(ensemble: str, cost: costs.CostFunction, eps=0,
                    n_max: int = 64, s_max: int = 4, mode: str = "float",
                    bits: int | None = None) -> FiniteNTable:
    """Finite-size moment table via the first-return DP.

    mode "rat": exact Fractions (needs a rational family and eps);
    mode "real": mpf at working precision; mode "float": float64 through the
    active kernel backend (the desk-scale default).
    """
    if ensemble not in (EXCURSION, BRIDGE):
        raise DomainError(f"unknown ensemble {ensemble!r}")
    if n_max < 0 or s_max < 0:
        raise DomainError("n_max and s_max must be >= 0")

    if mode == "float":
        with _work(bits):
            wq = [costs.evaluate(cost, m, bits) - real(eps, bits) for m in range(max(n_max, 1))]
        w = np.array([float(x) for x in wq])
        M_exc, E_exc = backend.dp_moments(w, n_max, s_max, False, None)
        if ensemble == BRIDGE:
            M, _ = backend.dp_moments(w, n_max, s_max, True, E_exc)
        else:
            M = M_exc
        values = [[float(M[s, N]) for N in range(n_max + 1)] for s in range(s_max + 1)]
        return FiniteNTable(ensemble, cost, eps, s_max, n_max, values, "float")

    if mode == "rat":
        eps_q = Fraction(eps)
        weights = []
        for m in range(max(n_max, 1)):
            v = costs.evaluate_exact(cost, m)
            if v is None:
                raise DomainError(f"{cost.describe()} has no exact rational values")
            weights.append(v - eps_q)
        zero = Fraction(0)
        E_exc = _dp_generic(weights, n_max, s_max, False, zero)
        E = _dp_generic(weights, n_max, s_max, True, zero, E_exc) if ensemble == BRIDGE else E_exc
        values = []
        for s in range(s_max + 1):
            fact = math.factorial(s)
            row = [Fraction(1) if s == 0 else Fraction(0)]
            for N in range(1, n_max + 1):
                row.append(fact * E[N][s] / E[N][0])
            values.append(row)
        return FiniteNTable(ensemble, cost, eps_q, s_max, n_max, values, "rat")

    if mode == "real":
        with _work(bits):
            weights = [costs.evaluate(cost, m, bits) - real(eps, bits) for m in range(max(n_max, 1))]
            zero = mp.mpf(0)
            E_exc = _dp_generic(weights, n_max, s_max, False, zero)
            E = _dp_generic(weights, n_max, s_max, True, zero, E_exc) if ensemble == BRIDGE else E_exc
            values = []
            for s in range(s_max + 1):
                fact = mp.factorial(s)
                row = [mp.mpf(1) if s == 0 else mp.mpf(0)]
                for N in range(1, n_max + 1):
                    row.append(+(fact * E[N][s] / E[N][0]))
                values.append(row)
            return FiniteNTable(ensemble, cost, eps, s_max, n_max, values, "real")

    raise DomainError(f"unknown DP mode {mode!r}")


def brute_force_moments(ensemble: str, cost: costs.CostFunction, eps=Fraction(0),
                        n_max: int = 8, s_max: int = 4) -> FiniteNTable:
    """Exact moments by full enumeration (the independent oracle for the DP)."""
    eps_q = Fraction(eps)
    wtab = []
    for m in range(n_max):
        v = costs.evaluate_exact(cost, m)
        if v is None:
            raise DomainError(f"{cost.describe()} has no exact rational values")
        wtab.append(v - eps_q)
    values = [[Fraction(1) if s == 0 else Fraction(0) for _ in range(n_max + 1)]
              for s in range(s_max + 1)]
    for N in range(1, n_max + 1):
        sums = [Fraction(0)] * (s_max + 1)
        count = 0
        for path in enumerate_paths(N, ensemble):
            a = sum(wtab[m] for m in slice_semilengths(path).semilengths)
            count += 1
            powv = Fraction(1)
            for s in range(s_max + 1):
                sums[s] += powv
                powv *= a
        for s in range(s_max + 1):
            values[s][N] = sums[s] / count
    return FiniteNTable(ensemble, cost, eps_q, s_max, n_max, values, "rat")


# ---------------------------------------------------------------------------
# convergence toward the limit moments


@dataclass(frozen=True)
class ConvergenceReport:
    ensemble: str
    p: object
    s_max: int
    n_values: np.ndarray
    deviations: list  # per s: array of d_s(N) = M_s(N)/N^(s(p+1/2)) - Mbar_s
    fitted_decay: list  # per s: fitted exponent of |d_s(N)| over the top decade
    limits: list


def rescaled_convergence(table: FiniteNTable, p, bits: int | None = None,
                         limits: list | None = None) -> ConvergenceReport:
    """Deviations of the rescaled finite-size moments from the limit values,
    with a power-law fit of the decay over the top decade of N.

    Meaningful when the table was built with eps = alpha(omega_p), which
    cancels the deterministic linear term.
    """
    from . import moments as mom

    pv = float(p)
    if limits is None:
        mbar = mom.rescaled_moments(table.ensemble, p, table.s_max, bits)
        limits = [float(x) for x in mbar]
    ns = np.arange(1, table.n_max + 1)
    deviations = []
    fitted = []
    for s in range(table.s_max + 1):
        vals = np.array([float(v) for v in table.values[s][1:]])
        d = vals / ns ** (s * (pv + 0.5)) - limits[s]
        deviations.append(d)
        if s == 0 or table.n_max < 32:
            fitted.append(0.0 if s == 0 else float("nan"))
            continue
        mask = ns >= max(8, table.n_max // 10)
        y = np.abs(d[mask])
        good = y > 0
        slope, _ = np.polyfit(np.log(ns[mask][good]), np.log(y[good]), 1)
        fitted.append(-float(slope))
    return ConvergenceReport(table.ensemble, p, table.s_max, ns, deviations, fitted, limits)

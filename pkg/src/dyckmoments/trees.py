"""Rooted planar trees and the diagrammatic expansion of the moment recursion.

The excursion coefficients admit the tree-sum representation

    mu_s = nu(s)/b(s),    nu(s) = sum_{T, s non-root vertices} prod_v b(k_v) a(l_v),

with a(l) = 4^(l-1) Gamma(l-1/2)/(sqrt(pi) Gamma(l+1)) (a(0) = -1/2,
a(l) = C_{l-1} otherwise) and b(k) = Gamma((k+1)(p-1/2)+k)/(2 Gamma(k(p-1/2)+k-1/2)).
The same trees evaluate the p = 1/2 shifted moments through mixed derivatives
of the regularized vertex weights (half_point_diagrams); the per-tree terms
sum to the same limit that limit_half_moments reaches by extrapolation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import mpmath as mp

from . import numerics, series
from .errors import CapExceeded, DerivativeUnstable, DomainError, MismatchError
from .numerics import _work, catalan, constants, real

TREE_CAP = 12  # C_12 = 208012 shapes


@dataclass(frozen=True)
class TreeShape:
    """Rooted planar tree encoded by its preorder child-count sequence.

    Vertex 0 is the root; the s non-root vertices follow in preorder.
    Derived per vertex: out-degree (the sequence itself), descendant count
    k_v, and the set of leaf descendants strictly below v.
    """

    children_counts: tuple

    @property
    def size(self) -> int:
        return len(self.children_counts)

    @property
    def s(self) -> int:
        return self.size - 1

    def structure(self):
        """(children lists, descendant counts, leaves, leaf-descendant sets)."""
        seq = self.children_counts
        n = len(seq)
        children = [[] for _ in range(n)]
        stack, need = [0], [seq[0]]
        for v in range(1, n):
            while need[-1] == 0:
                stack.pop()
                need.pop()
            children[stack[-1]].append(v)
            need[-1] -= 1
            stack.append(v)
            need.append(seq[v])
        desc = [0] * n
        for v in range(n - 1, -1, -1):
            desc[v] = sum(desc[c] + 1 for c in children[v])
        leaves = tuple(v for v in range(n) if seq[v] == 0)
        leafsets = [frozenset() for _ in range(n)]
        for v in range(n - 1, -1, -1):
            below = set()
            for c in children[v]:
                below |= leafsets[c]
                if seq[c] == 0:
                    below.add(c)
            leafsets[v] = frozenset(below)
        return children, desc, leaves, leafsets


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _tree_sequences(n: int):
    """Child-count preorder sequences of all rooted planar trees, n vertices."""
    if n == 1:
        yield (0,)
        return
    for c in range(1, n):
        for sizes in _compositions(n - 1, c):
            for parts in itertools.product(*[tuple(_tree_sequences(m)) for m in sizes]):
                seq = (c,)
                for part in parts:
                    seq += part
                yield seq


def enumerate_trees(s: int):
    """All rooted planar trees with s non-root vertices (C_s shapes), in
    lexicographic order of the child-count sequences (stable goldens)."""
    if s < 0:
        raise DomainError("s must be >= 0")
    if s > TREE_CAP:
        raise CapExceeded(f"tree enumeration capped at s = {TREE_CAP} (C_s grows fast)")
    for seq in sorted(_tree_sequences(s + 1)):
        yield TreeShape(seq)


def weight_a(l: int, bits: int | None = None) -> mp.mpf:
    """a(l) = 4^(l-1) Gamma(l-1/2) / (sqrt(pi) Gamma(l+1))."""
    if l < 0:
        raise DomainError("out-degree must be >= 0")
    with _work(bits):
        return (
            mp.mpf(4) ** (l - 1)
            * numerics.gamma(l - mp.mpf(0.5), bits)
            / (constants(bits).sqrt_pi * mp.factorial(l))
        )


def weight_b(k: int, p, bits: int | None = None) -> mp.mpf:
    """b(k) = Gamma((k+1)(p-1/2)+k) / (2 Gamma(k(p-1/2)+k-1/2))."""
    if k < 0:
        raise DomainError("descendant count must be >= 0")
    with _work(bits):
        pv = real(p, bits)
        half = mp.mpf(0.5)
        return numerics.gamma_quotient(
            [(k + 1) * (pv - half) + k], [k * (pv - half) + k - half], bits
        ) / 2


def nu(s: int, p, bits: int | None = None) -> mp.mpf:
    """Tree sum nu(s) = sum over C_s shapes of prod_v b(k_v) a(l_v)."""
    with _work(bits):
        a_cache = [weight_a(l, bits) for l in range(s + 1)]
        b_cache = [weight_b(k, p, bits) for k in range(s + 1)]
        total = mp.mpf(0)
        for tree in enumerate_trees(s):
            _, desc, _, _ = tree.structure()
            term = mp.mpf(1)
            for v, l in enumerate(tree.children_counts):
                term *= a_cache[l] * b_cache[desc[v]]
            total += term
        return +total


@dataclass(frozen=True)
class TreeCheckReport:
    s_max: int
    p: object
    max_rel_deviation: mp.mpf
    deviations: list


def check_mu_equals_tree_sum(s_max: int, p, bits: int | None = None,
                             tol=None) -> TreeCheckReport:
    """Assert mu^E_s = nu(s)/b(s) for 1 <= s <= s_max."""
    from . import moments

    bits = bits or numerics.working_precision()
    with _work(bits):
        tolv = mp.mpf(tol) if tol is not None else mp.mpf(2) ** (-(bits // 2))
        mu = [real(v, bits) for v in moments.mu_excursion(p, s_max, bits)]
        devs = []
        worst = mp.mpf(0)
        for s in range(1, s_max + 1):
            lhs = mu[s]
            rhs = nu(s, p, bits) / weight_b(s, p, bits)
            dev = abs(lhs - rhs) / max(abs(lhs), mp.mpf(2) ** (-bits))
            devs.append(+dev)
            worst = max(worst, dev)
        if worst > tolv:
            raise MismatchError(
                f"tree sum disagrees with the recursion: max rel dev {mp.nstr(worst, 5)}"
            )
        return TreeCheckReport(s_max, p, +worst, devs)


@dataclass(frozen=True)
class XYReport:
    order: int
    p: object
    max_abs_residual: mp.mpf
    max_abs_composition_residual: mp.mpf


def check_xy_identity(order: int, p, bits: int | None = None, tol=None) -> XYReport:
    """Verify Y = X + Y^2 and Y = A(X) - A(0) with A(z) = -(1/2) sqrt(1-4z),

    where X(z) = sum nu(s-1) z^s and Y(z) = sum (nu(s)/b(s)) z^s.
    """
    bits = bits or numerics.working_precision()
    with _work(bits):
        tolv = mp.mpf(tol) if tol is not None else mp.mpf(2) ** (-(bits // 2))
        nus = [nu(s, p, bits) for s in range(order + 1)]
        x_coeffs = [mp.mpf(0)] + [nus[s - 1] for s in range(1, order + 1)]
        y_coeffs = [mp.mpf(0)] + [nus[s] / weight_b(s, p, bits) for s in range(1, order + 1)]
        X = series.TruncSeries.from_coeffs(x_coeffs, series.REAL)
        Y = series.TruncSeries.from_coeffs(y_coeffs, series.REAL)
        resid = series.sub(Y, series.add(X, series.mul(Y, Y)))
        worst = max(abs(c) for c in resid.coeffs)

        one = series.TruncSeries.constant(mp.mpf(1), order, series.REAL)
        inner = series.sub(one, series.scale(X, mp.mpf(4)))
        a_of_x = series.scale(series.sqrt_unit(inner), mp.mpf(-0.5))
        a_of_0 = series.TruncSeries.constant(mp.mpf(-0.5), order, series.REAL)
        resid2 = series.sub(Y, series.sub(a_of_x, a_of_0))
        worst2 = max(abs(c) for c in resid2.coeffs)
        if worst > tolv or worst2 > tolv:
            raise MismatchError(
                f"X/Y identity fails: residuals {mp.nstr(worst, 5)}, {mp.nstr(worst2, 5)}"
            )
        return XYReport(order, p, +worst, +worst2)


# ---------------------------------------------------------------------------
# p = 1/2 diagrams


DIAGRAM_CAP = 4  # mixed-derivative order <= 4 leaves

_FD_STEPS = ("1e-2", "5e-3", "2.5e-3")


def _b_half(x, bits: int | None = None) -> mp.mpf:
    """b at p = 1/2: Gamma(x)/(2 Gamma(x - 1/2))."""
    return numerics.gamma_quotient([x], [x - mp.mpf(0.5)], bits) / 2


def _diagram_derivative(tree: TreeShape, s: int, h, bits: int) -> mp.mpf:
    """Central mixed difference of the tree's regularized weight product."""
    children, desc, leaves, leafsets = tree.structure()
    xi = 2 * constants(bits).ln2 + constants(bits).euler_gamma
    a_cache = {l: weight_a(l, bits) for l in set(tree.children_counts)}

    def f(offsets):
        y_r = mp.fsum(offsets.values())
        val = mp.e ** (xi * y_r) / numerics.gamma(s - y_r, bits)
        for v, l in enumerate(tree.children_counts):
            if l == 0:
                continue
            y_v = mp.fsum(offsets[u] for u in leafsets[v])
            val *= a_cache[l] * _b_half(desc[v] - y_v, bits)
        return val

    nl = len(leaves)
    acc = mp.mpf(0)
    for signs in itertools.product((1, -1), repeat=nl):
        offsets = {u: sgn * h for u, sgn in zip(leaves, signs)}
        parity = 1
        for sgn in signs:
            parity *= sgn
        acc += parity * f(offsets)
    return acc / (2 * h) ** nl


def half_point_diagram_terms(s: int, fd_steps=None, bits: int | None = None) -> list:
    """Per-tree contributions to the p = 1/2 shifted moment of order s.

    Each term is 8 sqrt(pi) s! (-C)^{|U|} H_U[...] with C = 1/(8 sqrt(pi));
    the mixed derivatives H_U come from central differences over the step
    ladder with two Richardson eliminations (error O(h^6)).
    """
    if not 1 <= s <= DIAGRAM_CAP:
        raise DomainError(f"diagram evaluation supports 1 <= s <= {DIAGRAM_CAP}")
    bits = bits or numerics.working_precision()
    with _work(bits, guard=40):
        steps = [mp.mpf(h) for h in (fd_steps or _FD_STEPS)]
        if len(steps) < 3:
            raise DomainError("need at least three step sizes for Richardson")
        big_c = 1 / (8 * constants(bits).sqrt_pi)
        pref = 8 * constants(bits).sqrt_pi * mp.factorial(s)
        out = []
        for tree in enumerate_trees(s):
            _, _, leaves, _ = tree.structure()
            nl = len(leaves)
            ladder = [_diagram_derivative(tree, s, h, bits) for h in steps]
            # Richardson in h^2 (steps halve: weights 4^m)
            tab = list(ladder)
            n = len(tab)
            corr_hist = []
            for m in range(1, n):
                w = mp.mpf(4) ** m
                new = [(w * tab[i + 1] - tab[i]) / (w - 1) for i in range(n - m)]
                corr_hist.append(abs(new[-1] - tab[-1]))
                tab = new
            deriv = tab[0]
            scale = max(abs(deriv), mp.mpf(1))
            if len(corr_hist) >= 2 and corr_hist[-1] > corr_hist[-2] and corr_hist[-1] > scale * mp.mpf("1e-6"):
                raise DerivativeUnstable(
                    f"finite-difference ladder diverges for tree {tree.children_counts}"
                )
            out.append((tree, +(pref * (-big_c) ** nl * deriv)))
        return out


def half_point_diagrams(s: int, fd_steps=None, bits: int | None = None) -> mp.mpf:
    """Shifted moment of order s at p = 1/2 from the tree diagrams."""
    terms = half_point_diagram_terms(s, fd_steps, bits)
    with _work(bits):
        return +mp.fsum(v for _, v in terms)

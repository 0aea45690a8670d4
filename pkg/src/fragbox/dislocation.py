"""Discrete restricted exchangeable dislocation measures and their splitting rules.

A DiscreteDislocation carries, for each level j = 1..m_cap, a finite list of
(mass partition, weight) atoms, where level m_cap stands for every level
j >= m_cap, plus the delta-atom constants c_j (single-leaf separations) and
k_j (full shatter of the complement).  Level j feeds exactly the cylinder
class P^j of partitions whose restriction to [j+1] is {[j], {j+1}}.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, ModelError, ResourceBudgetError
from .paintbox import kingman_cylinder_prob
from .partitions import (Partition, all_partitions, block_size_multiset,
                         MassPartition)

_EXCLUDED_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDislocation:
    """Finitely supported dislocation data: per-level nu atoms plus c/k constants."""

    levels: tuple          # levels[j-1] = tuple of (MassPartition, weight), j = 1..m_cap
    c: tuple = ()          # c_j, j = 1..len(c); zero beyond
    k: tuple = ()          # k_j likewise
    theorem2_mode: bool = False

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ArgumentError("need at least one level")
        for lv in self.levels:
            for s, w in lv:
                if w <= 0:
                    raise ArgumentError("atom weights must be positive")
                if s.m == 0:
                    raise ArgumentError("atom (0,0,...) excluded")
                if s.m == 1 and s.atoms[0] >= 1 - _EXCLUDED_TOL:
                    raise ArgumentError("atom (1,0,...) excluded")
        if self.theorem2_mode:
            if any(x != 0 for x in self.c) or any(x != 0 for x in self.k):
                raise ArgumentError("theorem-2 mode requires c = k = 0")
            for lv in self.levels:
                for s, _ in lv:
                    if s.s0 > _EXCLUDED_TOL:
                        raise ArgumentError("theorem-2 mode requires conservative atoms")

    @property
    def m_cap(self):
        return len(self.levels)

    @staticmethod
    def from_level_dict(level_atoms, c=(), k=(), theorem2_mode=False):
        """Build from {level: [(atoms_tuple_or_MassPartition, weight), ...]}."""
        m_cap = max(level_atoms) if level_atoms else 1
        levels = []
        for j in range(1, m_cap + 1):
            lv = []
            for s, w in level_atoms.get(j, []):
                if not isinstance(s, MassPartition):
                    s = MassPartition(tuple(s))
                lv.append((s, float(w)))
            levels.append(tuple(lv))
        return DiscreteDislocation(tuple(levels), tuple(c), tuple(k), theorem2_mode)

    def atoms_at(self, j):
        """The nu_j atom list; level m_cap serves every j >= m_cap."""
        if j < 1:
            raise ArgumentError("level must be >= 1")
        return self.levels[min(j, self.m_cap) - 1]

    def c_at(self, j):
        return self.c[j - 1] if 1 <= j <= len(self.c) else 0.0

    def k_at(self, j):
        return self.k[j - 1] if 1 <= j <= len(self.k) else 0.0


def nu_mixture_weight(d, atom):
    """Total nu-weight of one atom: sum_j w_j sum_i s_i^j (1 - s_i).

    The capped level contributes its geometric tail in closed form,
    sum_{j >= m} s^j (1 - s) = s^m.
    """
    if not isinstance(atom, MassPartition):
        atom = MassPartition(tuple(atom))
    total = 0.0
    found = False
    for j in range(1, d.m_cap + 1):
        for s, w in d.levels[j - 1]:
            if s != atom:
                continue
            found = True
            if j < d.m_cap:
                total += w * sum(si ** j * (1 - si) for si in s.atoms)
            else:
                total += w * sum(si ** j for si in s.atoms)
    if not found:
        raise ArgumentError("atom does not appear in the dislocation")
    return total


def _epsilon_restricted(j, n):
    """{{j}, [n] minus {j}} as a partition of [n]; trivial cases return None."""
    if n < 2 or j > n:
        return None
    rest = [x for x in range(1, n + 1) if x != j]
    return Partition.from_blocks(n, [rest, [j]])


def _omega_restricted(j, n):
    """{[j], {j+1}, ..., {n}}; None when trivial."""
    if j >= n:
        return None
    blocks = [list(range(1, j + 1))] + [[x] for x in range(j + 1, n + 1)]
    return Partition.from_blocks(n, blocks)


def kappa_cylinder(d, p):
    """kappa(P^p): delta-atom indicators plus the level-j paintbox cylinder mass."""
    if p.is_trivial():
        raise ArgumentError("trivial partition has no dislocation cylinder")
    n = p.n
    j = p.cylinder_class()
    total = 0.0
    if p == _epsilon_restricted(1, n):
        total += d.c_at(1)
    for jj in range(1, len(d.c) + 1):
        if p == _epsilon_restricted(jj + 1, n):
            total += d.c_at(jj)
    for jj in range(1, len(d.k) + 1):
        if p == _omega_restricted(jj, n):
            total += d.k_at(jj)
    for s, w in d.atoms_at(j):
        total += w * kingman_cylinder_prob(s, p)
    return total


@dataclass
class SplittingRuleTable:
    """Normalized law of the root split of [n]; zero on the trivial partition."""

    n: int
    probs: dict

    def validate(self):
        if abs(sum(self.probs.values()) - 1.0) > 1e-12:
            raise ArgumentError("probabilities must sum to 1")
        for p in self.probs:
            if p.is_trivial():
                raise ArgumentError("trivial partition must carry no mass")

    def to_csv(self):
        lines = ["partition,probability"]
        for p in sorted(self.probs, key=lambda q: q.to_text()):
            lines.append(f"{self.probs_key(p)},{self.probs[p]!r}")
        return "\n".join(lines) + "\n"

    def probs_key(self, p):
        text = p.to_text()
        return f'"{text}"' if "," in text else text

    @staticmethod
    def from_csv(text):
        rows = [r for r in text.strip().split("\n")[1:] if r]
        probs = {}
        n = 0
        for row in rows:
            part_text, prob = row.rsplit(",", 1)
            p = Partition.from_text(part_text.strip('"'))
            n = max(n, p.n)
            probs[p] = float(prob)
        probs = {Partition.from_blocks(n, p.blocks): v for p, v in probs.items()}
        return SplittingRuleTable(n, probs)


@lru_cache(maxsize=4096)
def rate(d, n):
    """lambda_n = kappa(all non-trivial cylinders of P_n); non-decreasing in n."""
    if n < 2:
        raise ArgumentError("rates start at n = 2")
    return sum(kappa_cylinder(d, p) for p in all_partitions(n) if not p.is_trivial())


def rate_closed_form(d, n):
    """lambda_n summed per mixture component instead of per partition.

    Independent route used to cross-check rate(): the level-j component puts
    total mass P(paintbox of [n] lands in class j) on P_n, which is
    1 - sum s_i^2 for j = 1 and sum_i s_i^j (1 - s_i) for j >= 2.
    """
    total = 0.0
    for j in range(1, n):
        for s, w in d.atoms_at(j):
            if j == 1:
                total += w * (1.0 - sum(si ** 2 for si in s.atoms))
            else:
                total += w * sum(si ** j * (1 - si) for si in s.atoms)
        if _epsilon_restricted(j + 1, n) is not None:
            total += d.c_at(j)
        if _omega_restricted(j, n) is not None:
            total += d.k_at(j)
    total += d.c_at(1) if n >= 2 else 0.0
    return total


def splitting_rule(d, n):
    lam = rate(d, n)
    if lam <= 0:
        raise ModelError("zero splitting rate: degenerate dislocation")
    probs = {p: kappa_cylinder(d, p) / lam
             for p in all_partitions(n) if not p.is_trivial()}
    t = SplittingRuleTable(n, probs)
    t.validate()
    return t


def table_to_eppf(table, strict=True, tol=1e-9):
    """Collapse a splitting table to (class j, size vector) -> probability.

    Relies on restricted exchangeability; with strict=True unequal weights
    within a collapse group raise, otherwise the group average is used.
    """
    groups = {}
    for p, w in table.probs.items():
        key = (p.cylinder_class(), tuple(len(b) for b in p.blocks))
        groups.setdefault(key, []).append(w)
    out = {}
    for key, ws in groups.items():
        if strict and max(ws) - min(ws) > tol:
            raise ArgumentError("table is not restricted exchangeable")
        out[key] = sum(ws) / len(ws)
    return out


def eppf_recursion_residual(table_n, table_np1, strict=True):
    """Max residual of the one-step consistency recursion between levels n and n+1.

    p_n^j(n_1..n_k) should equal p_{n+1}^n(n,1) p_n^j(n_1..n_k)
    + sum_i p_{n+1}^j(.., n_i + 1, ..) + p_{n+1}^j(n_1..n_k, 1).
    """
    n = table_n.n
    ep_n = table_to_eppf(table_n, strict=strict)
    ep_np1 = table_to_eppf(table_np1, strict=strict)
    stick = ep_np1.get((n, (n, 1)), 0.0)
    worst = 0.0
    for (j, sizes), p in ep_n.items():
        rhs = stick * p
        k = len(sizes)
        for i in range(k):
            grown = sizes[:i] + (sizes[i] + 1,) + sizes[i + 1:]
            rhs += ep_np1.get((j, grown), 0.0)
        rhs += ep_np1.get((j, sizes + (1,)), 0.0)
        worst = max(worst, abs(p - rhs))
    return worst


def consistency_residual(d, n):
    if n < 2:
        raise ArgumentError("n must be >= 2")
    return eppf_recursion_residual(splitting_rule(d, n), splitting_rule(d, n + 1))


def sample_split(d, b, rng):
    """Draw one root split of a block of size b >= 2, without building P_b tables.

    Picks a mixture component (level atom or delta constant) proportionally to
    its total cylinder mass, then samples the conditioned paintbox directly:
    only the first j+1 paints are constrained by the class-j event.
    """
    if b < 2:
        raise ArgumentError("blocks of size 1 do not split")
    comps = []
    for j in range(1, b):
        for s, w in d.atoms_at(j):
            if j == 1:
                q = 1.0 - sum(si ** 2 for si in s.atoms)
            else:
                q = sum(si ** j * (1 - si) for si in s.atoms)
            if q > 0:
                comps.append((w * q, ("atom", j, s)))
        if d.c_at(j) > 0 and _epsilon_restricted(j + 1, b) is not None:
            comps.append((d.c_at(j), ("fixed", _epsilon_restricted(j + 1, b))))
        if d.k_at(j) > 0 and _omega_restricted(j, b) is not None:
            comps.append((d.k_at(j), ("fixed", _omega_restricted(j, b))))
    if d.c_at(1) > 0:
        comps.append((d.c_at(1), ("fixed", _epsilon_restricted(1, b))))
    weights = np.array([w for w, _ in comps])
    lam = weights.sum()
    if lam <= 0:
        raise ModelError("zero splitting rate: degenerate dislocation")
    _, comp = comps[rng.choice(len(comps), p=weights / lam)]
    if comp[0] == "fixed":
        return comp[1]
    _, j, s = comp
    probs = np.array(list(s.atoms) + [s.s0])
    cum = np.cumsum(probs)
    colours = np.searchsorted(cum, rng.random(b))
    m = len(s.atoms)
    if j == 1:
        # condition on paints 1 and 2 sitting in different blocks
        while colours[0] == colours[1] and colours[0] < m:
            colours[0] = np.searchsorted(cum, rng.random())
            colours[1] = np.searchsorted(cum, rng.random())
    else:
        # paints 1..j share colour i (chosen by size-biasing s_i^j (1-s_i));
        # paint j+1 avoids colour i; the rest stay unconditioned
        ws = np.array([si ** j * (1 - si) for si in s.atoms])
        i = rng.choice(m, p=ws / ws.sum())
        colours[:j] = i
        other = np.delete(probs, i)
        colours[j] = np.searchsorted(np.cumsum(other), rng.random() * other.sum())
        if colours[j] >= i:
            colours[j] += 1
    blocks = {}
    for r in range(1, b + 1):
        ci = colours[r - 1]
        key = int(ci) if ci < m else -r
        blocks.setdefault(key, []).append(r)
    return Partition.from_blocks(b, blocks.values())


# ---------------------------------------------------------------------------
# alpha-gamma model
# ---------------------------------------------------------------------------

def _hierarchy_children(t, B):
    strict = [a for a in t if a < B]
    return [a for a in strict if not any(a < c for c in strict)]


@lru_cache(maxsize=256)
def alphagamma_tree_distribution(alpha, gamma, n):
    """Exact law of the labelled n-leaf tree, by exhausting insertion histories.

    Trees are frozensets of frozenset vertices (the hierarchy without the
    empty set).  Capped at n = 7; beyond that the state space explodes.
    """
    if not (0 <= gamma <= alpha <= 1):
        raise ArgumentError("need 0 <= gamma <= alpha <= 1")
    if n > 7:
        raise ResourceBudgetError("exhaustive growth histories capped at n = 7")
    if n < 1:
        raise ArgumentError("n must be positive")
    if n == 1:
        return {frozenset({frozenset({1})}): 1.0}
    t2 = frozenset({frozenset({1}), frozenset({2}), frozenset({1, 2})})
    dist = {t2: 1.0}
    for m in range(2, n):
        nxt = {}
        denom = m - alpha
        for t, pr in dist.items():
            new = frozenset({m + 1})
            for B in t:
                grown_anc = frozenset(
                    (a | {m + 1}) if B <= a else a for a in t)
                if len(B) == 1:
                    w = (1 - alpha) / denom
                    res = grown_anc | {B, new}
                    nxt[res] = nxt.get(res, 0.0) + pr * w
                else:
                    w_edge = gamma / denom
                    if w_edge > 0:
                        res = grown_anc | {B, new}
                        nxt[res] = nxt.get(res, 0.0) + pr * w_edge
                    kb = len(_hierarchy_children(t, B))
                    w_vert = ((kb - 1) * alpha - gamma) / denom
                    assert w_vert > -1e-12
                    if w_vert > 0:
                        res = grown_anc | {new}
                        nxt[res] = nxt.get(res, 0.0) + pr * w_vert
        dist = nxt
    return dist


def alphagamma_growth_split_oracle(alpha, gamma, n):
    """Exact root-split law of the n-leaf tree (n <= 7), by history enumeration."""
    if n < 2:
        raise ArgumentError("root splits need n >= 2")
    dist = alphagamma_tree_distribution(alpha, gamma, n)
    root = frozenset(range(1, n + 1))
    probs = {}
    for t, pr in dist.items():
        pi = Partition.from_blocks(n, _hierarchy_children(t, root))
        probs[pi] = probs.get(pi, 0.0) + pr
    full = {p: probs.get(p, 0.0) for p in all_partitions(n) if not p.is_trivial()}
    t = SplittingRuleTable(n, full)
    t.validate()
    return t


def alphagamma_eppf(alpha, gamma, sizes, cls):
    """The displayed closed-form EPPF p_n^1 / p_n^2, evaluated verbatim.

    The Gamma ratios are expanded as products so gamma = alpha costs no pole:
    Gamma(k-1-g/a)/Gamma(1-g/a) = prod_{i=1}^{k-2} (i - g/a).
    Known to disagree with the growth-rule oracle by a normalization factor;
    see the EPPF audit test.
    """
    sizes = tuple(int(x) for x in sizes)
    if cls not in (1, 2):
        raise ArgumentError("class must be 1 or 2")
    if len(sizes) < 2 or any(x < 1 for x in sizes) or list(sizes) != sorted(sizes, reverse=True):
        raise ArgumentError("sizes must be a non-increasing vector of >= 2 positive parts")
    if not (0 <= gamma <= alpha <= 1):
        raise ArgumentError("need 0 <= gamma <= alpha <= 1")
    k = len(sizes)
    n = sum(sizes)
    pref = (1 - alpha) if cls == 1 else gamma
    if k > 2 and alpha == 0:
        return 0.0
    term = pref * alpha ** (k - 2)
    for i in range(1, k - 1):
        term *= (i - gamma / alpha)
    for j in range(2, n + 1):
        term /= (j - alpha)
    for ni in sizes:
        for j in range(1, ni):
            term *= (j - alpha)
    return term


# ---------------------------------------------------------------------------
# skewed Poisson-Dirichlet model
# ---------------------------------------------------------------------------

def _check_spd_params(alpha, theta, lam):
    if not (0 < alpha < 1):
        raise ArgumentError("alpha must be in (0,1)")
    if theta < -2 * alpha:
        raise ArgumentError("theta must be >= -2 alpha")
    if not (0 <= lam <= 1):
        raise ArgumentError("lambda must be in [0,1]")


def skewed_pd_ranked_split(alpha, theta, lam, n):
    """Closed-form law of the ranked block sizes of the root split, n in {2,3,4}."""
    _check_spd_params(alpha, theta, lam)
    if n == 2:
        return {(1, 1): 1.0}
    a = alpha
    if n == 3:
        num = {(1, 1, 1): lam * (2 * a + theta),
               (2, 1): (1 + lam) * (1 - a)}
    elif n == 4:
        num = {(1, 1, 1, 1): lam * (3 * a + theta) * (2 * a + theta),
               (2, 1, 1): (1 + 4 * lam) * (2 * a + theta) * (1 - a),
               (2, 2): (1 + lam) * (1 - a) ** 2,
               (3, 1): 2 * (1 - a) * (2 - a)}
    else:
        raise ArgumentError("closed forms available for n = 2, 3, 4 only")
    D = sum(num.values())
    return {r: v / D for r, v in num.items()}


def sampling_consistency_residual(alpha, theta, lam):
    """|P(S3=(1,1,1)) - P(S4=(1,1,1,1)) - P(S4=(2,1,1))/2 - P(S4=(3,1)) P(S3=(1,1,1))/4|."""
    s3 = skewed_pd_ranked_split(alpha, theta, lam, 3)
    s4 = skewed_pd_ranked_split(alpha, theta, lam, 4)
    lhs = s3[(1, 1, 1)]
    rhs = (s4[(1, 1, 1, 1)] + 0.5 * s4[(2, 1, 1)]
           + 0.25 * s4[(3, 1)] * s3[(1, 1, 1)])
    return abs(lhs - rhs)


def skewed_pd_splitting_table(alpha, theta, lam, n):
    """Partition-level splitting table recovered from the ranked-size laws.

    Within a ranked-size class the only asymmetry is the lambda vs 1-lambda
    skew between class 1 and classes j >= 2, because the underlying paintbox
    kernel is exchangeable.
    """
    ranked = skewed_pd_ranked_split(alpha, theta, lam, n)
    probs = {}
    for r, pr in ranked.items():
        members = [p for p in all_partitions(n)
                   if not p.is_trivial() and block_size_multiset(p) == r]
        fac = [lam if p.cylinder_class() == 1 else 1 - lam for p in members]
        z = sum(fac)
        for p, f in zip(members, fac):
            probs[p] = pr * f / z if z > 0 else 0.0
    full = {p: probs.get(p, 0.0) for p in all_partitions(n) if not p.is_trivial()}
    t = SplittingRuleTable(n, full)
    t.validate()
    return t

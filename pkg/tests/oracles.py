"""Reference implementations written directly from the objective's formulas.

They share no code with the package (plain Python, ``math`` only) and are
slow on purpose; tests compare the optimized code paths against them.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

KINDS = ("lb", "rb", "sc", "sl", "lm", "rm", "ol")


def sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


@dataclass
class Problem:
    """A self-contained editing instance in plain Python types."""

    kinds: list[str]
    scores: list[list[float]]  # scores[c][t]
    violations: dict[str, set[str]]
    broll: set[str]
    eps: float = 1.0
    c_sw: float = 1.0
    c_broll: float = 1.0
    l_min: float = 20.0
    l_max: float = 60.0
    lam_e: float = 0.3
    lam_sw: float = 0.4
    lam_b: float = 0.3
    init: tuple[int, int] = (0, 1)
    extra: dict = field(default_factory=dict)

    @property
    def C(self) -> int:
        return len(self.kinds)

    @property
    def T(self) -> int:
        return len(self.scores[0])


def trans(p: Problem, a: int, b: int) -> float:
    if p.kinds[a] == p.kinds[b]:
        return p.eps  # cutting between two shots of one kind, or staying, violates nothing
    return -p.eps if p.kinds[b] in p.violations.get(p.kinds[a], set()) else p.eps


def sw(p: Problem, L: int, switch: bool) -> float:
    if switch:
        return -p.c_sw * sigmoid(p.l_min - L)
    return -p.c_sw * sigmoid(L - p.l_max)


def br(p: Problem, L: int, target: int) -> float:
    mean = (p.l_min + p.l_max) / 2
    return p.c_broll if (L > mean / 2 and p.kinds[target] in p.broll) else 0.0


def step(p: Problem, k: int, c: int, t: int, L: int) -> float:
    return (p.lam_e * trans(p, k, c) * p.scores[c][t]
            + p.lam_b * br(p, L, c)
            + p.lam_sw * sw(p, L, k != c))


def total(p: Problem, seq, start: int = 0) -> float:
    k, L = p.init
    terms = []
    for i, c in enumerate(seq):
        terms.append(step(p, k, c, start + i, L))
        k, L = (c, L + 1) if c == k else (c, 1)
    return math.fsum(terms)


def brute(p: Problem, start: int = 0, horizon: int | None = None) -> tuple[float, tuple[int, ...]]:
    """Best value over all sequences; first (lexicographically smallest) maximizer."""
    H = p.T - start if horizon is None else horizon
    best, arg = -math.inf, None
    for seq in itertools.product(range(p.C), repeat=H):
        v = total(p, seq, start)
        if v > best:
            best, arg = v, seq
    return best, arg


def random_problem(rng: random.Random, C: int, T: int, integer_scores: bool = False) -> Problem:
    kinds = [rng.choice(KINDS) for _ in range(C)]
    if integer_scores:
        scores = [[float(rng.randint(0, 2)) for _ in range(T)] for _ in range(C)]
    else:
        scores = [[round(rng.uniform(0, 2), 3) for _ in range(T)] for _ in range(C)]
    violations = {a: {b for b in KINDS if rng.random() < 0.3} for a in KINDS}
    broll = {k for k in KINDS if rng.random() < 0.4}
    l_min = rng.randint(1, 5)
    l_max = l_min + rng.randint(1, 6)
    return Problem(
        kinds=kinds,
        scores=scores,
        violations=violations,
        broll=broll,
        eps=rng.choice([0.5, 1.0, 2.0]),
        c_sw=rng.choice([0.0, 1.0, 3.0, 10.0]),
        c_broll=rng.choice([0.0, 1.0, 2.0]),
        l_min=float(l_min),
        l_max=float(l_max),
        lam_e=rng.choice([0.0, 0.3, 1.0]),
        lam_sw=rng.choice([0.0, 0.4, 1.0]),
        lam_b=rng.choice([0.0, 0.3, 1.0]),
        init=(rng.randrange(C), rng.randint(1, 12)),
    )


# --- image oracles ------------------------------------------------------------


def grad_loops(img: list[list[float]]) -> tuple[list[list[float]], list[list[float]]]:
    """Central differences with replicated borders, one pixel at a time."""
    R, Cn = len(img), len(img[0])

    def px(r: int, c: int) -> float:
        return img[min(max(r, 0), R - 1)][min(max(c, 0), Cn - 1)]

    gx = [[(px(r, c + 1) - px(r, c - 1)) / 2 for c in range(Cn)] for r in range(R)]
    gy = [[(px(r + 1, c) - px(r - 1, c)) / 2 for c in range(Cn)] for r in range(R)]
    return gx, gy


def grad_diff_loops(a: list[list[list[float]]], b: list[list[list[float]]]) -> float:
    """Channel-averaged L2 norm of the difference of gradient magnitudes (rows x cols x channels)."""
    n_ch = len(a[0][0])
    norms = []
    for ch in range(n_ch):
        ia = [[px[ch] for px in row] for row in a]
        ib = [[px[ch] for px in row] for row in b]
        ax, ay = grad_loops(ia)
        bx, by = grad_loops(ib)
        s = 0.0
        for r in range(len(ia)):
            for c in range(len(ia[0])):
                d = math.hypot(ax[r][c], ay[r][c]) - math.hypot(bx[r][c], by[r][c])
                s += d * d
        norms.append(math.sqrt(s))
    return sum(norms) / n_ch


def entropy_loops(flow: list[list[list[float]]], n_bins: int = 9) -> float:
    """Sum over the two flow channels of the entropy of softmax(HOG)."""
    out = 0.0
    for ch in range(2):
        img = [[px[ch] for px in row] for row in flow]
        gx, gy = grad_loops(img)
        h = [0.0] * n_bins
        for r in range(len(img)):
            for c in range(len(img[0])):
                m = math.hypot(gx[r][c], gy[r][c])
                theta = math.atan2(gy[r][c], gx[r][c]) % math.pi
                b = min(int(theta * n_bins / math.pi), n_bins - 1)
                h[b] += m
        top = max(h)
        e = [math.exp(v - top) for v in h]
        z = sum(e)
        p = [v / z for v in e]
        out -= sum(q * math.log(q) for q in p if q > 0)
    return out

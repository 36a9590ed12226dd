"""Symbolic beta-expansion machinery.

Sequences over {0, 1} are coded as strings.  Infinite sequences are always
eventually periodic (:class:`EPSequence`), which is enough for every
construction used here and gives closed forms for the natural projection

    pi(i) = sum_{n >= 1} i_n * lam**n.

Digit generation for expansions of 1 runs in exact rational arithmetic on the
binary value of ``lam``, so digit strings do not degrade after ~50 places the
way a floating-point orbit does.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import islice
from typing import Iterable, Iterator, Literal

from .errors import (
    DomainError,
    FiniteExpansionAmbiguous,
    NonConvergence,
    PreconditionError,
    RangeError,
)

BitWord = str
Mode = Literal["greedy", "lazy"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TERMINATION_TOL = 1e-12
DEFAULT_DEPTH = 64
BASE_BRACKET = (1.0 + 1e-9, 2.0)

_FLIP = str.maketrans("01", "10")


def check_word(w: str) -> BitWord:
    if not isinstance(w, str) or w.strip("01"):
        raise DomainError(f"not a 0-1 word: {w!r}")
    return w


def flip_word(w: BitWord) -> BitWord:
    return w.translate(_FLIP)


def _primitive_root(w: str) -> str:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


@dataclass(frozen=True)
class EPSequence:
    """Eventually periodic 0-1 sequence ``pre + per + per + ...``.

    The representation is canonical: the period is primitive and the
    preperiod is as short as possible, so equal sequences compare equal.
    """

    pre: BitWord = ""
    per: BitWord = "0"

    def __post_init__(self):
        pre, per = check_word(self.pre), check_word(self.per)
        if not per:
            raise DomainError("period of an eventually periodic sequence must be nonempty")
        per = _primitive_root(per)
        while pre and pre[-1] == per[-1]:
            per = pre[-1] + per[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "per", per)

    @classmethod
    def parse(cls, text: str) -> "EPSequence":
        """Parse the ``PRE|PER`` literal, e.g. ``|10`` or ``1|0``."""
        if text.count("|") != 1:
            raise DomainError(f"sequence literal must look like PRE|PER, got {text!r}")
        pre, per = text.split("|")
        return cls(pre.strip(), per.strip())

    @classmethod
    def from_json(cls, obj: dict) -> "EPSequence":
        return cls(obj.get("pre", ""), obj["per"])

    def to_json(self) -> dict:
        return {"pre": self.pre, "per": self.per}

    def __str__(self):
        return f"{self.pre}|{self.per}"

    def __getitem__(self, n: int) -> int:
        """Digit at 0-based position ``n``."""
        if n < 0:
            raise IndexError(n)
        if n < len(self.pre):
            return int(self.pre[n])
        return int(self.per[(n - len(self.pre)) % len(self.per)])

    @property
    def orbit_size(self) -> int:
        """Number of distinct shifts."""
        return len(self.pre) + len(self.per)

    def prefix(self, n: int) -> BitWord:
        if n <= len(self.pre):
            return self.pre[:n]
        m = n - len(self.pre)
        reps = -(-m // len(self.per))
        return self.pre + (self.per * reps)[:m]

    def iter_digits(self) -> Iterator[int]:
        yield from map(int, self.pre)
        while True:
            yield from map(int, self.per)

    def shift(self, n: int = 1) -> "EPSequence":
        if n <= len(self.pre):
            return EPSequence(self.pre[n:], self.per)
        r = (n - len(self.pre)) % len(self.per)
        return EPSequence("", self.per[r:] + self.per[:r])

    def orbit(self) -> list["EPSequence"]:
        return [self.shift(n) for n in range(self.orbit_size)]

    def flip(self) -> "EPSequence":
        return EPSequence(flip_word(self.pre), flip_word(self.per))

    def count(self, digit: int, n: int) -> int:
        """Occurrences of ``digit`` among the first ``n`` digits."""
        return self.prefix(n).count(str(digit))


def common_prefix_length(a: EPSequence, b: EPSequence) -> float:
    """Length of the longest common initial word; ``inf`` when ``a == b``."""
    if a == b:
        return math.inf
    bound = max(len(a.pre), len(b.pre)) + math.lcm(len(a.per), len(b.per))
    pa, pb = a.prefix(bound), b.prefix(bound)
    for n, (x, y) in enumerate(zip(pa, pb)):
        if x != y:
            return n
    raise AssertionError("distinct eventually periodic sequences must differ early")


@dataclass(frozen=True)
class Params:
    """Contraction ``lam`` and bias ``p`` (probability of digit 0)."""

    lam: float
    p: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.lam / (1.0 - self.lam)

    @property
    def gap(self) -> tuple[float, float]:
        return gap_interval(self.lam)

    def S(self, j: int, x: float) -> float:
        return self.lam * (x + j)


def gap_interval(lam: float) -> tuple[float, float]:
    """The overlap C = [lam, lam**2 / (1 - lam)]; empty (a > b) for lam <= 1/2."""
    return lam, lam * lam / (1.0 - lam)


def pi(seq: EPSequence, lam: float) -> float:
    """Natural projection of an eventually periodic sequence, in closed form."""
    head = math.fsum(lam ** (k + 1) for k, c in enumerate(seq.pre) if c == "1")
    L = len(seq.per)
    cyc = math.fsum(lam ** (k + 1) for k, c in enumerate(seq.per) if c == "1")
    return head + lam ** len(seq.pre) * cyc / (1.0 - lam**L)


def _check_overlap_lambda(lam: float) -> None:
    if not 0.5 < lam < 1.0:
        raise DomainError(f"lambda must lie in (1/2, 1), got {lam}")


def beta_digits(x: float, lam: float, mode: Mode, n: int) -> BitWord:
    """First ``n`` digits of the greedy or lazy expansion of ``x`` in base 1/lam.

    Greedy: digit 0 iff the current orbit point is in [0, lam).
    Lazy: digit 0 iff it is in [0, lam**2 / (1 - lam)].
    """
    _check_overlap_lambda(lam)
    if n < 1:
        raise DomainError("n must be >= 1")
    if mode not in ("greedy", "lazy"):
        raise DomainError(f"mode must be 'greedy' or 'lazy', got {mode!r}")
    lam_q = Fraction(lam)
    top = lam_q / (1 - lam_q)
    y = Fraction(x)
    slack = 1e-12 * float(top)
    if y < -slack or y > top + slack:
        raise DomainError(f"x = {x} is outside the support [0, {float(top)}]")
    y = min(max(y, Fraction(0)), top)
    cut = lam_q if mode == "greedy" else lam_q * lam_q / (1 - lam_q)
    out = []
    for _ in range(n):
        d = 0 if (y < cut if mode == "greedy" else y <= cut) else 1
        out.append("01"[d])
        y = y / lam_q - d
    return "".join(out)


@lru_cache(maxsize=256)
def _greedy_one_raw(lam: float, n: int, tol: float) -> tuple[str, int | None]:
    lam_q = Fraction(lam)
    x = Fraction(1)
    digits = []
    for k in range(1, n + 1):
        y = x / lam_q
        if y >= 1 - tol:
            digits.append("1")
            x = y - 1
            if abs(x) <= tol:
                return "".join(digits), k
        else:
            digits.append("0")
            x = y
    return "".join(digits), None


def greedy_one(lam: float, n: int, quasi: bool = False, tol: float = TERMINATION_TOL) -> BitWord:
    """First ``n`` digits of the greedy expansion of 1 in base 1/lam.

    A residual within ``tol`` of zero counts as termination.  A terminating
    expansion ``d_1 ... d_m`` raises :class:`FiniteExpansionAmbiguous` unless
    ``quasi`` is set, in which case the periodic substitute
    ``(d_1 ... d_{m-1} (d_m - 1))^inf`` is returned.
    """
    _check_overlap_lambda(lam)
    if n < 1:
        raise DomainError("n must be >= 1")
    digits, m = _greedy_one_raw(float(lam), int(n), float(tol))
    if m is None:
        return digits
    if not quasi:
        raise FiniteExpansionAmbiguous(
            f"greedy expansion of 1 in base 1/{lam} terminates after {m} digits: {digits}"
        )
    block = digits[: m - 1] + "0"
    return (block * (-(-n // m)))[:n]


class Status(enum.Enum):
    IN = "In"
    OUT = "Out"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of the lexicographic uniqueness test.

    ``shift`` is the orbit index whose successor tail failed (or tied), and
    ``position`` the 1-based digit of that tail where the comparison was
    decided against the expansion of 1 (``depth`` for a tie).
    """

    status: Status
    shift: int | None = None
    position: int | None = None

    def __bool__(self):
        return self.status is Status.IN

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.shift is not None:
            out["witness"] = {"shift": self.shift, "position": self.position}
        return out


def _compare(word: str, ref: str) -> int:
    """Index of the first difference, or -1 when the prefixes agree."""
    for i, (a, b) in enumerate(zip(word, ref)):
        if a != b:
            return i
    return -1


def _tail_verdicts(tails: Iterable[tuple[int, EPSequence]], d: str, depth: int) -> MembershipVerdict:
    undecided = None
    for shift, tail in tails:
        w = tail.prefix(depth)
        i = _compare(w, d)
        if i < 0:
            if undecided is None:
                undecided = MembershipVerdict(Status.UNDECIDED, shift, depth)
        elif w[i] > d[i]:
            return MembershipVerdict(Status.OUT, shift, i + 1)
    return undecided if undecided is not None else MembershipVerdict(Status.IN)


def membership_U(seq: EPSequence, lam: float, depth: int = DEFAULT_DEPTH) -> MembershipVerdict:
    """Decide whether ``seq`` is the unique expansion of its projection.

    With d the quasi-greedy expansion of 1, the test is: every tail that
    follows a 0 is strictly below d, and the flip of every tail that follows
    a 1 is strictly below d.  Comparisons that tie through ``depth`` digits
    yield ``Undecided``.
    """
    _check_overlap_lambda(lam)
    d = greedy_one(lam, depth, quasi=True)

    def tails():
        for n in range(seq.orbit_size):
            tail = seq.shift(n + 1)
            yield n, (tail if seq[n] == 0 else tail.flip())

    return _tail_verdicts(tails(), d, depth)


def orbit_in_gap(seq: EPSequence, lam: float) -> int | None:
    """Index of the first orbit point whose digit is inconsistent with the
    F-map branches (a point of the gap, or on the wrong side of it)."""
    lo, hi = gap_interval(lam)
    for n, t in enumerate(seq.orbit()):
        x = pi(t, lam)
        if (seq[n] == 0 and not x < lo) or (seq[n] == 1 and not x > hi):
            return n
    return None


def gap_distance(seq: EPSequence, lam: float, depth: int = DEFAULT_DEPTH) -> float:
    """Distance from the orbit {pi(shift^n seq)} to the gap C_lam."""
    verdict = membership_U(seq, lam, depth)
    if not verdict:
        raise PreconditionError(f"{seq} is not certified unique at lambda={lam} ({verdict.status.value})")
    lo, hi = gap_interval(lam)
    dist = []
    for t in seq.orbit():
        x = pi(t, lam)
        dist.append(lo - x if x < lo else x - hi)
    return min(dist)


def guaranteed_gap(lambda1: float, lambda2: float) -> float:
    """Gap constant delta such that U_{lambda2} projects into A~_{lambda1, delta}."""
    if not 0.5 < lambda1 < lambda2 < GOLDEN:
        raise DomainError(f"need 1/2 < lambda1 < lambda2 < g, got {lambda1}, {lambda2}")
    l1, l2 = lambda1, lambda2
    return min((l2 - l1) * (l1 + l2 - 1.0), l1 * (1.0 - l1 - l1 * l1) / (1.0 - l1))


def digit_freq(seq: EPSequence) -> Fraction:
    """Frequency of 0s; the preperiod never matters."""
    return Fraction(seq.per.count("0"), len(seq.per))


OSCILLATES = "oscillates"


def empirical_freq(digits: Iterable[int], n: int, tol: float = 0.02) -> float | str:
    """Running 0-frequency of a digit stream that need not be periodic.

    Compares the running frequency at n/4, n/2 and n; if they spread by more
    than ``tol`` the stream is reported as :data:`OSCILLATES`.
    """
    if n < 4:
        raise DomainError("need at least 4 digits")
    checkpoints = {n // 4, n // 2, n}
    zeros, seen = 0, {}
    for k, c in enumerate(islice(digits, n), start=1):
        zeros += c == 0
        if k in checkpoints:
            seen[k] = zeros / k
    if len(seen) < len(checkpoints):
        raise DomainError("digit stream ended early")
    vals = list(seen.values())
    if max(vals) - min(vals) > tol:
        return OSCILLATES
    return seen[n]


def concatenation_stream(words: list[BitWord], choices: Iterable[int]) -> Iterator[int]:
    """Digits of ``words[c_1] words[c_2] ...`` for an index stream ``choices``."""
    for c in choices:
        yield from map(int, words[c])


# -- constants ---------------------------------------------------------------


def _thue_morse(n: int) -> int:
    return bin(n).count("1") & 1


def _series_sign(coeff, beta: float, tol: float) -> float:
    """Value of sum_{n>=1} coeff(n) beta**-n - 1, truncated once the tail is small."""
    r = 1.0 / beta
    terms, rn, n = [], 1.0, 0
    while True:
        n += 1
        rn *= r
        c = coeff(n)
        if c:
            terms.append(c * rn)
        s = math.fsum(terms)
        if s > 1.0:
            return s - 1.0
        if rn * r / (1.0 - r) < tol * 1e-3:
            return s - 1.0


def _bisect_base(f, tol: float) -> float:
    lo, hi = BASE_BRACKET
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 > fhi):
        raise NonConvergence(f"no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def solve_constant(name: str, tol: float = 1e-12, k: int | None = None) -> float:
    """Special constants on the lambda side, each the reciprocal of a base.

    ``golden``           1 = x + x**2
    ``multinacci``       1 = x + ... + x**k  (``k >= 2``)
    ``beta_one``         1 = 1/b + sum_n b**(-2n)
    ``komornik_loreti``  1 = sum_{n>=1} t_n b**-n, t the Thue-Morse sequence
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if name == "golden":
        name, k = "multinacci", 2
    if name == "multinacci":
        if k is None or k < 2:
            raise DomainError("multinacci needs k >= 2")
        f = lambda b: math.fsum(b ** -i for i in range(1, k + 1)) - 1.0
    elif name == "beta_one":
        f = lambda b: 1.0 / b + 1.0 / (b * b - 1.0) - 1.0
    elif name == "komornik_loreti":
        f = lambda b: _series_sign(_thue_morse, b, tol)
    else:
        raise DomainError(f"unknown constant {name!r}")
    return 1.0 / _bisect_base(f, tol)


def multinacci(k: int) -> float:
    return solve_constant("multinacci", 1e-15, k)


BETA_ONE_INV = solve_constant("beta_one", 1e-15)


# -- frequency constructions ---------------------------------------------------


@dataclass(frozen=True)
class FreqWords:
    k: int
    u0: BitWord
    u1: BitWord
    freq_interval: tuple[Fraction, Fraction]
    certified: MembershipVerdict = field(compare=False)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "u0": self.u0,
            "u1": self.u1,
            "freq_interval": [str(x) for x in self.freq_interval],
            "certified": self.certified.to_json(),
        }


@dataclass(frozen=True)
class MultinacciWords:
    k: int
    v0: BitWord
    v1: BitWord
    freq_interval: tuple[Fraction, Fraction]
    dim_bound: float
    certified: MembershipVerdict = field(compare=False)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "v0": self.v0,
            "v1": self.v1,
            "freq_interval": [str(x) for x in self.freq_interval],
            "dim_bound": self.dim_bound,
            "certified": self.certified.to_json(),
        }


def certify_concatenations(words: list[BitWord], lam: float, depth: int = DEFAULT_DEPTH) -> MembershipVerdict:
    """Decide whether every infinite concatenation of ``words`` is unique.

    The words must share a length.  Then the lexicographically largest
    continuation after any word boundary is ``max(words)`` repeated, and the
    smallest is ``min(words)`` repeated, and both are themselves
    concatenations; so it suffices to test each word suffix followed by the
    extremal continuation.  ``shift`` in a failing verdict indexes
    ``(word, offset)`` pairs in order.
    """
    _check_overlap_lambda(lam)
    words = [check_word(w) for w in words]
    if not words or len({len(w) for w in words}) != 1 or not words[0]:
        raise DomainError("words must be nonempty and of equal length")
    d = greedy_one(lam, depth, quasi=True)
    hi_cont, lo_cont = max(words), min(words)

    def tails():
        idx = 0
        for w in words:
            for j, c in enumerate(w):
                if c == "0":
                    yield idx, EPSequence(w[j + 1 :], hi_cont)
                else:
                    yield idx, EPSequence(flip_word(w[j + 1 :]), flip_word(lo_cont))
                idx += 1

    return _tail_verdicts(tails(), d, depth)


def freq_words(lam: float, depth: int = 400) -> FreqWords:
    """Word pair u0 = 1(10)^(k+1), u1 = 0(01)^(k+1) read off the expansion of 1.

    ``k`` is the smallest index with d_1 ... d_{2k+3} = 1(10)^k 11.  The
    returned ``certified`` verdict records whether all concatenations of the
    pair really are unique expansions at ``lam``; for many parameters they
    are not (a u0 u1 junction produces the block 0001).
    """
    _check_overlap_lambda(lam)
    d = greedy_one(lam, depth, quasi=True)
    ref = ("1" + "10" * depth)[:depth]
    i = _compare(d, ref)
    if i < 0:
        raise RangeError(f"lambda = {lam} is not distinguishable from 1/beta_1 within {depth} digits")
    if d[i] == "0":
        raise RangeError(f"lambda = {lam} >= 1/beta_1 = {BETA_ONE_INV:.9f}: no such k")
    k = (i - 2) // 2
    u0 = "1" + "10" * (k + 1)
    u1 = flip_word(u0)
    interval = (Fraction(k + 1, 2 * k + 3), Fraction(k + 2, 2 * k + 3))
    return FreqWords(k, u0, u1, interval, certify_concatenations([u0, u1], lam))


def multinacci_index(lam: float) -> int:
    """Largest k with lam < g_k (the k-bonacci root in (1/2, 1))."""
    if not 0.5 < lam < GOLDEN:
        raise RangeError(f"need 1/2 < lambda < g, got {lam}")
    k = 2
    while k < 200 and lam < multinacci(k + 1):
        k += 1
    return k


def multinacci_words(lam: float) -> MultinacciWords:
    """Words v0 = 0^(k-1) 1, v1 = 0 1^(k-1) for the largest k with lam < g_k."""
    k = multinacci_index(lam)
    v0 = "0" * (k - 1) + "1"
    v1 = "0" + "1" * (k - 1)
    bound = (k - 2) / k * math.log(2.0) / abs(math.log(lam))
    return MultinacciWords(
        k,
        v0,
        v1,
        (Fraction(1, k), Fraction(k - 1, k)),
        bound,
        certify_concatenations([v0, v1], lam),
    )


def r_lambda(lam: float) -> Fraction:
    """Smallest certified 0-frequency reachable by the word constructions.

    Frequencies in (r, 1 - r) are then realised on sets of positive
    dimension.  Only constructions whose concatenations certify as unique
    contribute.
    """
    if not 0.5 < lam < BETA_ONE_INV:
        raise RangeError(f"need 1/2 < lambda < 1/beta_1, got {lam}")
    cands = []
    fw = freq_words(lam)
    if fw.certified:
        cands.append(fw.freq_interval[0])
    mw = multinacci_words(lam)
    if mw.certified:
        cands.append(mw.freq_interval[0])
    if not cands:
        raise RangeError(f"no certified construction at lambda = {lam}")
    return min(cands)


def local_dim_formula(freq0: float, p: float, lam: float) -> float:
    """(r log p + (1 - r) log(1 - p)) / log lam for 0-frequency r."""
    return (freq0 * math.log(p) + (1.0 - freq0) * math.log(1.0 - p)) / math.log(lam)

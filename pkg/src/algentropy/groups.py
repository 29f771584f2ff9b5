"""Concrete residually finite amenable groups.

Elements are plain integer tuples in a canonical form fixed by each group
kind, so equality of elements is tuple equality and tuples can be used as
dictionary keys directly.  Every group also provides a vectorised law on
``(n, dim)`` integer arrays, which the numerical code relies on.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

Element = Tuple[int, ...]

DEFAULT_BALL_CAP = 2 * 10**6


class GroupError(ValueError):
    """Raised for invalid group data or mismatched descriptors."""


class DescriptorMismatch(GroupError):
    pass


class CapacityError(RuntimeError):
    """An enumeration or matrix would exceed a configured size cap."""

    def __init__(self, message, suggestion=None, best=None):
        super().__init__(message)
        self.suggestion = suggestion
        self.best = best


class ChainTooShort(GroupError):
    pass


class Group:
    """Base class for the group catalog."""

    dim: int = 0
    finite: bool = False

    @property
    def identity(self) -> Element:
        return (0,) * self.dim

    def multiply(self, g: Element, h: Element) -> Element:
        raise NotImplementedError

    def inverse(self, g: Element) -> Element:
        raise NotImplementedError

    def multiply_arrays(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def generators(self) -> Dict[str, Element]:
        raise NotImplementedError

    def check(self, g: Element) -> None:
        if len(g) != self.dim:
            raise DescriptorMismatch(
                f"element {g!r} does not belong to {self!r} (expected {self.dim} coordinates)"
            )

    def _mismatch(self, *elements):
        for g in elements:
            self.check(g)

    def symmetric_generators(self) -> List[Element]:
        gens = []
        for s in self.generators().values():
            for t in (s, self.inverse(s)):
                if t != self.identity and t not in gens:
                    gens.append(t)
        return gens

    def power(self, g: Element, n: int) -> Element:
        base = g if n >= 0 else self.inverse(g)
        out = self.identity
        for _ in range(abs(n)):
            out = self.multiply(out, base)
        return out

    def word(self, letters: Iterable[Tuple[str, int]]) -> Element:
        """Evaluate a word given as ``(generator name, exponent)`` pairs."""
        gens = self.generators()
        out = self.identity
        for name, exp in letters:
            if name not in gens:
                raise GroupError(f"undeclared generator {name!r}; known: {sorted(gens)}")
            out = self.multiply(out, self.power(gens[name], int(exp)))
        return out


@dataclass(frozen=True)
class FreeAbelian(Group):
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise GroupError("FreeAbelian needs d >= 1")

    @property
    def dim(self):
        return self.d

    def multiply(self, g, h):
        if len(g) != self.d or len(h) != self.d:
            self._mismatch(g, h)
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        return tuple(-a for a in g)

    def multiply_arrays(self, A, B):
        return A + B

    def generators(self):
        names = ("x", "y", "z") if self.d <= 3 else tuple(f"x{i + 1}" for i in range(self.d))
        return {names[i]: tuple(int(i == j) for j in range(self.d)) for i in range(self.d)}


@dataclass(frozen=True)
class Heisenberg3(Group):
    """Discrete Heisenberg group in the normal form ``(x, y, z)``.

    The law is ``(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')``, so
    ``a = (1,0,0)`` and ``b = (0,1,0)`` satisfy ``[a, b] = (0,0,1)``.
    """

    @property
    def dim(self):
        return 3

    def multiply(self, g, h):
        if len(g) != 3 or len(h) != 3:
            self._mismatch(g, h)
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def inverse(self, g):
        return (-g[0], -g[1], -g[2] + g[0] * g[1])

    def multiply_arrays(self, A, B):
        out = A + B
        out[:, 2] += A[:, 0] * B[:, 1]
        return out

    def generators(self):
        return {"a": (1, 0, 0), "b": (0, 1, 0), "c": (0, 0, 1)}

    def symmetric_generators(self):
        return [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]


@dataclass(frozen=True)
class FiniteCyclicProduct(Group):
    moduli: Tuple[int, ...] = (1,)

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        if not self.moduli or any(m < 1 for m in self.moduli):
            raise GroupError("moduli must be positive")

    finite = True

    @property
    def dim(self):
        return len(self.moduli)

    def multiply(self, g, h):
        if len(g) != self.dim or len(h) != self.dim:
            self._mismatch(g, h)
        return tuple((a + b) % m for a, b, m in zip(g, h, self.moduli))

    def inverse(self, g):
        return tuple((-a) % m for a, m in zip(g, self.moduli))

    def multiply_arrays(self, A, B):
        return (A + B) % np.asarray(self.moduli)

    def generators(self):
        names = ("x", "y", "z") if self.dim <= 3 else tuple(f"x{i + 1}" for i in range(self.dim))
        return {names[i]: tuple(int(i == j) % self.moduli[j] for j in range(self.dim))
                for i in range(self.dim)}


@dataclass(frozen=True)
class DirectProduct(Group):
    factors: Tuple[Group, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise GroupError("DirectProduct needs at least one factor")

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    @property
    def finite(self):
        return all(f.finite for f in self.factors)

    def _slices(self):
        start = 0
        for f in self.factors:
            yield f, slice(start, start + f.dim)
            start += f.dim

    def multiply(self, g, h):
        if len(g) != self.dim or len(h) != self.dim:
            self._mismatch(g, h)
        out = ()
        for f, sl in self._slices():
            out += f.multiply(g[sl], h[sl])
        return out

    def inverse(self, g):
        out = ()
        for f, sl in self._slices():
            out += f.inverse(g[sl])
        return out

    def multiply_arrays(self, A, B):
        return np.concatenate(
            [f.multiply_arrays(A[:, sl], B[:, sl]) for f, sl in self._slices()], axis=1
        )

    def generators(self):
        gens = {}
        for i, (f, sl) in enumerate(self._slices()):
            for name, s in f.generators().items():
                full = [0] * self.dim
                full[sl] = s
                gens[f"{name}_{i}"] = tuple(full)
        return gens

    def symmetric_generators(self):
        out = []
        for f, sl in self._slices():
            for s in f.symmetric_generators():
                full = [0] * self.dim
                full[sl] = s
                out.append(tuple(full))
        return out


@dataclass(frozen=True)
class QuotientGroup(Group):
    """``parent`` reduced coordinatewise modulo ``radix``.

    Only reductions that are homomorphisms are accepted: any positive
    moduli for free abelian factors, a common modulus on all three
    Heisenberg coordinates, divisors of the existing moduli for finite
    cyclic factors.
    """

    parent: Group = field(default_factory=lambda: FreeAbelian(1))
    radix: Tuple[int, ...] = (1,)

    finite = True

    def __post_init__(self):
        object.__setattr__(self, "radix", tuple(int(m) for m in self.radix))
        _validate_radix(self.parent, self.radix)

    @property
    def dim(self):
        return self.parent.dim

    @property
    def order(self):
        return int(np.prod(self.radix, dtype=object))

    def reduce(self, g):
        return tuple(a % m for a, m in zip(g, self.radix))

    def multiply(self, g, h):
        return self.reduce(self.parent.multiply(g, h))

    def inverse(self, g):
        return self.reduce(self.parent.inverse(g))

    def multiply_arrays(self, A, B):
        return self.parent.multiply_arrays(A, B) % np.asarray(self.radix)

    def generators(self):
        return {k: self.reduce(v) for k, v in self.parent.generators().items()}

    def symmetric_generators(self):
        out = []
        for s in self.parent.symmetric_generators():
            r = self.reduce(s)
            if r not in out and r != self.identity:
                out.append(r)
        return out


def _validate_radix(parent: Group, radix: Sequence[int]) -> None:
    if len(radix) != parent.dim:
        raise GroupError(f"radix {tuple(radix)} has wrong length for {parent!r}")
    if any(m < 1 for m in radix):
        raise GroupError("quotient moduli must be positive")
    if isinstance(parent, Heisenberg3):
        if len(set(radix)) != 1:
            raise GroupError("Heisenberg quotients use one common modulus")
    elif isinstance(parent, FiniteCyclicProduct):
        if any(p % m for p, m in zip(parent.moduli, radix)):
            raise GroupError("quotient moduli must divide the cyclic moduli")
    elif isinstance(parent, DirectProduct):
        start = 0
        for f in parent.factors:
            _validate_radix(f, radix[start:start + f.dim])
            start += f.dim
    elif isinstance(parent, QuotientGroup):
        if any(p % m for p, m in zip(parent.radix, radix)):
            raise GroupError("quotient moduli must divide the parent moduli")
        _validate_radix(parent.parent, radix)


def expand_modulus(group: Group, modulus) -> Tuple[int, ...]:
    """Turn a level modulus (an int or a per-coordinate list) into a radix."""
    if isinstance(modulus, int):
        return (modulus,) * group.dim
    return tuple(int(m) for m in modulus)


# -- finite quotients -----------------------------------------------------


class FiniteQuotient:
    """An enumerated finite quotient ``parent / kernel``.

    Elements are residue tuples listed in lexicographic order, so the
    position of a residue is its mixed-radix value.
    """

    def __init__(self, parent: Group, modulus):
        self.parent = parent
        self.radix = expand_modulus(parent, modulus)
        self.group = QuotientGroup(parent, self.radix)
        self.order = self.group.order
        self._strides = np.array(
            [int(np.prod(self.radix[i + 1:], dtype=np.int64)) for i in range(len(self.radix))],
            dtype=np.int64,
        )
        self._elements = None
        self._tables: Dict[Element, np.ndarray] = {}

    def __repr__(self):
        return f"FiniteQuotient({self.parent!r}, radix={self.radix})"

    def __eq__(self, other):
        return isinstance(other, FiniteQuotient) and (self.parent, self.radix) == (
            other.parent, other.radix)

    def __hash__(self):
        return hash((self.parent, self.radix))

    @property
    def modulus(self):
        return self.radix[0] if len(set(self.radix)) == 1 else self.radix

    @property
    def elements(self) -> List[Element]:
        if self._elements is None:
            self._elements = list(product(*(range(m) for m in self.radix)))
        return self._elements

    def element_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(self.order, self.parent.dim)

    def index(self, residue: Element) -> int:
        return int(sum(r * s for r, s in zip(residue, self._strides)))

    def index_array(self, residues: np.ndarray) -> np.ndarray:
        return residues @ self._strides

    def project(self, g: Element) -> Element:
        self.parent.check(g)
        return self.group.reduce(g)

    def representative(self, residue: Element) -> Element:
        """Centered lift of a residue back to the parent group."""
        return tuple(r - m if 2 * r > m else r for r, m in zip(residue, self.radix))

    def in_kernel(self, g: Element) -> bool:
        return all(v == 0 for v in self.project(g))

    def right_table(self, delta: Element) -> np.ndarray:
        """Positions of ``elements[i] * delta`` for every ``i``."""
        delta = self.group.reduce(delta)
        if delta not in self._tables:
            E = self.element_array()
            D = np.broadcast_to(np.array(delta, dtype=np.int64), E.shape).copy()
            self._tables[delta] = self.index_array(self.group.multiply_arrays(E, D))
        return self._tables[delta]


class QuotientChain:
    """Congruence quotients with strictly increasing, divisible moduli."""

    def __init__(self, parent: Group, moduli: Sequence):
        if not moduli:
            raise GroupError("a quotient chain needs at least one level")
        self.parent = parent
        self.levels = [FiniteQuotient(parent, m) for m in moduli]
        for lo, hi in zip(self.levels, self.levels[1:]):
            if hi.order <= lo.order:
                raise GroupError("chain orders must strictly increase")
            if any(b % a for a, b in zip(lo.radix, hi.radix)):
                raise GroupError(f"modulus {hi.radix} is not a multiple of {lo.radix}")

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


# -- word metric ----------------------------------------------------------


def _symmetrize(group: Group, generators) -> Tuple[Element, ...]:
    if generators is None:
        return tuple(group.symmetric_generators())
    out = []
    for s in generators:
        group.check(s)
        for t in (tuple(s), group.inverse(tuple(s))):
            if t != group.identity and t not in out:
                out.append(t)
    return tuple(out)


@lru_cache(maxsize=32)
def _ball(group: Group, gens: Tuple[Element, ...], radius: int, cap: int):
    dist = {group.identity: 0}
    frontier = deque([group.identity])
    while frontier:
        g = frontier.popleft()
        r = dist[g]
        if r == radius:
            continue
        for s in gens:
            h = group.multiply(g, s)
            if h not in dist:
                dist[h] = r + 1
                if len(dist) > cap:
                    raise CapacityError(
                        f"word ball of radius {radius} exceeds the cap of {cap} elements"
                    )
                frontier.append(h)
    return dist


def word_lengths(group: Group, generators=None, radius: int = 0,
                 cap: int = DEFAULT_BALL_CAP) -> Mapping[Element, int]:
    """Word length of every element of the ball of the given radius.

    The mapping iterates in breadth-first order (shell by shell).
    Treat it as read only: it is cached.
    """
    if radius < 0:
        raise GroupError("radius must be nonnegative")
    return _ball(group, _symmetrize(group, generators), int(radius), int(cap))


def word_ball(group: Group, generators=None, radius: int = 0,
              cap: int = DEFAULT_BALL_CAP) -> frozenset:
    return frozenset(word_lengths(group, generators, radius, cap))


def word_length(group: Group, g: Element, generators=None, max_radius: int = 64) -> int:
    group.check(g)
    radius = 1
    while True:
        lengths = word_lengths(group, generators, radius)
        if g in lengths:
            return lengths[g]
        if radius >= max_radius:
            raise CapacityError(f"{g!r} is farther than {max_radius} from the identity")
        radius = min(2 * radius, max_radius)


def verify_chain_separation(chain: QuotientChain, K: Iterable[Element]) -> int:
    """Least level whose kernel meets ``K^-1 K`` only in the identity."""
    group = chain.parent
    K = list(set(tuple(k) for k in K))
    diffs = {group.multiply(group.inverse(k1), k2) for k1 in K for k2 in K}
    diffs.discard(group.identity)
    for i, q in enumerate(chain.levels):
        if not any(q.in_kernel(g) for g in diffs):
            return i
    raise ChainTooShort(
        f"no level of the chain separates a set of {len(K)} elements; extend the chain"
    )


def parse_group(spec: Mapping) -> Group:
    """Build a group from a JSON-style descriptor."""
    kind = spec.get("kind")
    if kind == "FreeAbelian":
        return FreeAbelian(int(spec.get("d", 1)))
    if kind == "Heisenberg3":
        return Heisenberg3()
    if kind == "FiniteCyclicProduct":
        return FiniteCyclicProduct(tuple(spec["moduli"]))
    if kind == "DirectProduct":
        return DirectProduct(tuple(parse_group(s) for s in spec["factors"]))
    raise GroupError(f"unknown group kind {kind!r}")


def group_to_json(group: Group) -> dict:
    if isinstance(group, FreeAbelian):
        return {"kind": "FreeAbelian", "d": group.d}
    if isinstance(group, Heisenberg3):
        return {"kind": "Heisenberg3"}
    if isinstance(group, FiniteCyclicProduct):
        return {"kind": "FiniteCyclicProduct", "moduli": list(group.moduli)}
    if isinstance(group, DirectProduct):
        return {"kind": "DirectProduct", "factors": [group_to_json(f) for f in group.factors]}
    if isinstance(group, QuotientGroup):
        return {"kind": "Quotient", "parent": group_to_json(group.parent),
                "radix": list(group.radix)}
    raise GroupError(f"cannot serialise {group!r}")

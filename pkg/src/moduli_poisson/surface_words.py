"""Surface group and groupoid presentations, words, bar 2-chains and Fox calculus.

Generators are numbered from 1; a letter is a signed generator index, with
negative letters standing for inverses.  For genus l and n boundary circles:

* x_j = 2j - 1 and y_j = 2j for 1 <= j <= l (both presentations),
* z_k = 2l + k in the group presentation,
* a_k = 2l + k and gamma_k = 2l + n + k in the groupoid presentation.

Groupoid objects are 0 (the base point p0) and k for the k-th boundary
point.  x_j, y_j are loops at 0, a_k is a loop at k and gamma_k is a path
from 0 to k.  Words compose left to right: the target of each letter is the
source of the next.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import MissingGenerator
from .lie_core import LieGroup


@dataclass(frozen=True)
class SurfaceData:
    genus: int
    boundaries: int

    def __post_init__(self):
        if self.genus < 0 or self.boundaries < 0:
            raise ValueError("genus and boundary count must be non-negative")
        if self.genus == 0 and self.boundaries < 3:
            raise ValueError("genus 0 needs at least 3 boundary circles")

    @property
    def n_group_generators(self) -> int:
        return 2 * self.genus + self.boundaries

    @property
    def n_groupoid_generators(self) -> int:
        return 2 * self.genus + 2 * self.boundaries


def x(j: int) -> int:
    return 2 * j - 1


def y(j: int) -> int:
    return 2 * j


def z(s: SurfaceData, k: int) -> int:
    return 2 * s.genus + k


def a(s: SurfaceData, k: int) -> int:
    return 2 * s.genus + k


def gamma(s: SurfaceData, k: int) -> int:
    return 2 * s.genus + s.boundaries + k


def free_reduce(letters) -> tuple:
    out = []
    for c in letters:
        c = int(c)
        if c == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word in signed generator indices."""

    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def gen(cls, g: int) -> "Word":
        return cls((g,))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-c for c in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def substitute(self, table: Mapping[int, "Word"]) -> "Word":
        """Replace each generator g by table[g] (generators not in the table stay)."""
        out = []
        for c in self.letters:
            w = table.get(abs(c))
            if w is None:
                out.append(c)
            else:
                out.extend(w.letters if c > 0 else w.inverse().letters)
        return Word(tuple(out))

    def to_json(self) -> list:
        return list(self.letters)

    @classmethod
    def from_json(cls, data) -> "Word":
        return cls(tuple(int(c) for c in data))

    def __repr__(self):
        return f"Word({list(self.letters)})"


def commutator(u: Word, v: Word) -> Word:
    return u * v * u.inverse() * v.inverse()


@dataclass(frozen=True)
class Presentation:
    """Generators with source/target objects and a single relator."""

    surface: SurfaceData
    kind: str
    names: tuple
    sources: tuple
    targets: tuple
    relator: Word

    @property
    def n_generators(self) -> int:
        return len(self.names)

    @property
    def generators(self) -> range:
        return range(1, len(self.names) + 1)

    def source(self, letter: int) -> int:
        g = abs(letter) - 1
        return self.sources[g] if letter > 0 else self.targets[g]

    def target(self, letter: int) -> int:
        g = abs(letter) - 1
        return self.targets[g] if letter > 0 else self.sources[g]

    def is_composable(self, w: Word) -> bool:
        return all(self.target(p) == self.source(q) for p, q in zip(w.letters, w.letters[1:]))

    def word_source(self, w: Word) -> int:
        return self.source(w.letters[0])

    def word_target(self, w: Word) -> int:
        return self.target(w.letters[-1])

    def name(self, letter: int) -> str:
        s = self.names[abs(letter) - 1]
        return s if letter > 0 else s + "^-1"

    def format(self, w: Word) -> str:
        return " ".join(self.name(c) for c in w.letters) or "e"


def _surface_names(s):
    names = []
    for j in range(1, s.genus + 1):
        names += [f"x{j}", f"y{j}"]
    return names


def group_presentation(s: SurfaceData) -> Presentation:
    names = _surface_names(s) + [f"z{k}" for k in range(1, s.boundaries + 1)]
    zero = (0,) * len(names)
    return Presentation(s, "group", tuple(names), zero, zero, relator(s))


def groupoid_presentation(s: SurfaceData) -> Presentation:
    n = s.boundaries
    names = (_surface_names(s) + [f"a{k}" for k in range(1, n + 1)]
             + [f"gamma{k}" for k in range(1, n + 1)])
    ks = tuple(range(1, n + 1))
    src = (0,) * (2 * s.genus) + ks + (0,) * n
    tgt = (0,) * (2 * s.genus) + ks + ks
    return Presentation(s, "groupoid", tuple(names), src, tgt, relator_tilde(s))


def _commutator_block(s):
    w = Word()
    for j in range(1, s.genus + 1):
        w = w * commutator(Word.gen(x(j)), Word.gen(y(j)))
    return w


def relator(s: SurfaceData) -> Word:
    """prod_j [x_j, y_j] z_1 ... z_n."""
    w = _commutator_block(s)
    for k in range(1, s.boundaries + 1):
        w = w * Word.gen(z(s, k))
    return w


def relator_tilde(s: SurfaceData) -> Word:
    """prod_j [x_j, y_j] prod_k gamma_k a_k gamma_k^-1."""
    w = _commutator_block(s)
    for k in range(1, s.boundaries + 1):
        gk = Word.gen(gamma(s, k))
        w = w * gk * Word.gen(a(s, k)) * gk.inverse()
    return w


def iota_table(s: SurfaceData) -> dict:
    """Substitution z_k -> gamma_k a_k gamma_k^-1 (x, y unchanged)."""
    return {z(s, k): Word((gamma(s, k), a(s, k), -gamma(s, k))) for k in range(1, s.boundaries + 1)}


# -- assignments -----------------------------------------------------------


def evaluate(w: Word, phi: Mapping[int, np.ndarray], identity=None) -> np.ndarray:
    """Product of generator images along w (inverse = conjugate transpose)."""
    if identity is None:
        first = next(iter(phi.values()))
        identity = np.eye(np.asarray(first).shape[0], dtype=np.asarray(first).dtype)
    out = identity
    for c in w.letters:
        try:
            m = phi[abs(c)]
        except KeyError:
            raise MissingGenerator(abs(c)) from None
        out = out @ (m if c > 0 else np.asarray(m).conj().T)
    return out


def restrict(phi_t: Mapping[int, np.ndarray], s: SurfaceData) -> dict:
    """i^*: groupoid assignment -> group assignment, z_k -> gamma_k a_k gamma_k^-1."""
    out = {g: phi_t[g] for g in range(1, 2 * s.genus + 1)}
    for k in range(1, s.boundaries + 1):
        gk = phi_t[gamma(s, k)]
        out[z(s, k)] = gk @ phi_t[a(s, k)] @ gk.conj().T
    return out


def corestrict(phi: Mapping[int, np.ndarray], s: SurfaceData) -> dict:
    """rho^*: group assignment -> groupoid assignment with gamma_k -> Id."""
    out = {g: phi[g] for g in range(1, 2 * s.genus + 1)}
    for k in range(1, s.boundaries + 1):
        zk = phi[z(s, k)]
        out[a(s, k)] = zk
        out[gamma(s, k)] = np.eye(zk.shape[0], dtype=zk.dtype)
    return out


def restrict_corestrict(phi: Mapping[int, np.ndarray], s: SurfaceData, kind: str) -> dict:
    """Dispatch to restrict ('groupoid' input) or corestrict ('group' input)."""
    if kind == "groupoid":
        return restrict(phi, s)
    if kind == "group":
        return corestrict(phi, s)
    raise ValueError(kind)


def act(thetas, phi_t: Mapping[int, np.ndarray], pres: Presentation) -> dict:
    """Action of (theta_0, ..., theta_n) on a groupoid assignment.

    Each generator image is replaced by theta[source] phi theta[target]^-1.
    """
    return {g: thetas[pres.sources[g - 1]] @ m @ thetas[pres.targets[g - 1]].conj().T
            for g, m in phi_t.items()}


# -- bar 2-chains -------------------------------------------------------------


class Chain1:
    """Integer combination of 1-cells [w] (w nontrivial)."""

    def __init__(self, terms=None):
        self.terms = defaultdict(int)
        for w, m in (terms or {}).items():
            self.add(w, m)

    def add(self, w, m):
        w = w if isinstance(w, Word) else Word(w)
        if not w or m == 0:
            return
        key = w.letters
        self.terms[key] += m
        if self.terms[key] == 0:
            del self.terms[key]

    def __eq__(self, other):
        return dict(self.terms) == dict(other.terms)

    def __repr__(self):
        return f"Chain1({dict(self.terms)})"


class BarChain2:
    """Integer combination of cells [u|v] of the normalised bar resolution.

    Cells with an empty word are zero and are dropped.
    """

    def __init__(self, terms=None):
        self.terms = defaultdict(int)
        for (u, v), m in (terms or {}).items():
            self.add(u, v, m)

    def add(self, u, v, m=1):
        u = u if isinstance(u, Word) else Word(u)
        v = v if isinstance(v, Word) else Word(v)
        if not u or not v or m == 0:
            return self
        key = (u.letters, v.letters)
        self.terms[key] += m
        if self.terms[key] == 0:
            del self.terms[key]
        return self

    def cells(self):
        """Sorted (coefficient, Word u, Word v) triples."""
        return [(m, Word(u), Word(v)) for (u, v), m in sorted(self.terms.items())]

    def __add__(self, other):
        out = BarChain2(dict(self.terms))
        for (u, v), m in other.terms.items():
            out.add(u, v, m)
        return out

    def __neg__(self):
        return BarChain2({k: -m for k, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return dict(self.terms) == dict(other.terms)

    def __len__(self):
        return len(self.terms)

    def substitute(self, table) -> "BarChain2":
        out = BarChain2()
        for m, u, v in self.cells():
            out.add(u.substitute(table), v.substitute(table), m)
        return out

    def boundary(self) -> Chain1:
        """d[u|v] = [v] - [uv] + [u], with [e] = 0."""
        out = Chain1()
        for m, u, v in self.cells():
            out.add(v, m)
            out.add(u * v, -m)
            out.add(u, m)
        return out

    def to_json(self) -> list:
        return [[m, list(u), list(v)] for (u, v), m in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data) -> "BarChain2":
        out = cls()
        for m, u, v in data:
            out.add(Word.from_json(u), Word.from_json(v), int(m))
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self):
        return f"BarChain2({self.to_json()})"


def _fill_left(letters):
    """-sum_i [g_1...g_{i-1} | g_i]: boundary [w] - sum_i [g_i]."""
    out = BarChain2()
    for i in range(1, len(letters)):
        out.add(Word(letters[:i]), Word(letters[i:i + 1]), -1)
    return out


def _fill_right(letters):
    """-sum_i [g_i | g_{i+1}...g_m]: boundary [w] - sum_i [g_i]."""
    out = BarChain2()
    for i in range(len(letters) - 1):
        out.add(Word(letters[i:i + 1]), Word(letters[i + 1:]), -1)
    return out


def _cancel_inverse_letters(letters, order):
    """Cells removing the single-letter terms -[g^-1] for inverse letters.

    With order 'left' we add [g|g^-1] (boundary [g^-1] + [g]); with 'right'
    we use [g^-1|g] instead.  Either leaves -[g] where -[g^-1] was, and for
    the relator every x_j, y_j appears once with each sign, so the net
    contribution is zero on x, y letters.
    """
    out = BarChain2()
    for c in letters:
        if c < 0:
            if order == "left":
                out.add(Word((-c,)), Word((c,)), 1)
            else:
                out.add(Word((c,)), Word((-c,)), 1)
    return out


def build_chain_c(s: SurfaceData, order: str = "left") -> BarChain2:
    """A 2-chain c with boundary [r] - [z_1] - ... - [z_n].

    The relator word is filled by telescoping cells (left to right for
    order='left', right to left for 'right').  The telescoping leaves
    -[g] for every letter of r; the letters x_j^-1, y_j^-1 are traded for
    x_j, y_j by cancellation cells and then all x, y terms cancel.
    """
    letters = relator(s).letters
    if order == "left":
        c = _fill_left(letters)
    elif order == "right":
        c = _fill_right(letters)
    else:
        raise ValueError(order)
    # after filling: d c = [r] - sum over letters [g]; the x_j, y_j letters
    # appear once positively and once inverted
    return c + _cancel_inverse_letters(letters, order)


def build_chain_c_tilde(c: BarChain2, s: SurfaceData) -> BarChain2:
    """iota(c) + sum_k ([gamma_k^-1 | gamma_k a_k] - [gamma_k a_k | gamma_k^-1])."""
    out = c.substitute(iota_table(s))
    for k in range(1, s.boundaries + 1):
        g, ak = gamma(s, k), a(s, k)
        out.add(Word((-g,)), Word((g, ak)), 1)
        out.add(Word((g, ak)), Word((-g,)), -1)
    return out


def expected_boundary_c(s: SurfaceData) -> Chain1:
    out = Chain1()
    out.add(relator(s), 1)
    for k in range(1, s.boundaries + 1):
        out.add(Word.gen(z(s, k)), -1)
    return out


def expected_boundary_c_tilde(s: SurfaceData) -> Chain1:
    out = Chain1()
    out.add(relator_tilde(s), 1)
    for k in range(1, s.boundaries + 1):
        out.add(Word.gen(a(s, k)), -1)
    return out


# -- Fox calculus ------------------------------------------------------------


def fox_jacobian(G: LieGroup, w: Word, phi: Mapping[int, np.ndarray], generators) -> np.ndarray:
    """Right-trivialised derivative of the evaluation of w.

    Returns a (dim_g, len(generators) * dim_g) matrix J: perturbing each
    generator g as exp(t u_g) phi(g) moves the value of w to first order by
    exp(t J u) evaluate(w).  Block g of J is the Fox derivative dw/dg taken
    through Ad o phi.
    """
    col = {g: i for i, g in enumerate(generators)}
    d = G.dim
    J = np.zeros((d, len(col) * d))
    P = np.eye(G.size, dtype=complex)
    for c in w.letters:
        g = abs(c)
        try:
            m = phi[g]
        except KeyError:
            raise MissingGenerator(g) from None
        if c > 0:
            if g in col:
                J[:, col[g] * d:(col[g] + 1) * d] += G.Ad_matrix(P)
            P = P @ m
        else:
            P = P @ np.asarray(m).conj().T
            if g in col:
                J[:, col[g] * d:(col[g] + 1) * d] -= G.Ad_matrix(P)
    return J


def fox_matrix(G: LieGroup, w: Word, g: int, phi: Mapping[int, np.ndarray]) -> np.ndarray:
    """The Fox derivative dw/dg evaluated through Ad o phi, as a dim_g matrix."""
    if g not in phi:
        raise MissingGenerator(g)
    return fox_jacobian(G, w, phi, [g])


def random_assignment(G: LieGroup, pres: Presentation, rng) -> dict:
    rng = np.random.default_rng(rng)
    return {g: G.random_element(rng) for g in pres.generators}

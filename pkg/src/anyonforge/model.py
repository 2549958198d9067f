"""SU(2)_k anyon models: fusion algebra, F/R symbols, consistency checks.

Charges are twice-spin integers.  The model at level k has k+1 charges
0, 1, ..., k (twice-spin), i.e. spins 0, 1/2, ..., k/2.  Charge 0 is the
vacuum.  Fusion is the level-truncated angular momentum rule: a x b contains
every c with |a-b| <= c <= min(a+b, 2k-a-b) and c = a+b (mod 2).

Conventions (fixed once, everything downstream depends on them):

- F-move.  ``f_symbol(a, b, c, d)`` returns the unitary change of basis

      |((ab)^e c)^d>  =  sum_f  F[e, f] |(a (bc)^f)^d>

  with rows indexed by the (ab) channel e and columns by the (bc) channel f,
  both in ascending charge order.  For SU(2)_k the matrix is real orthogonal.

- R-move.  Counterclockwise exchange of a and b in definite channel c
  multiplies the state by

      r_symbol(a, b, c) = (-1)^((a+b-c)/2)
                          * exp(i*pi*(c(c+2) - a(a+2) - b(b+2)) / (4(k+2)))

  (twice-spin form).  Exchanging two spin-1/2 charges at k=3 gives
  exp(-4i*pi/5) in the vacuum channel and exp(3i*pi/5) in the charge-1
  channel.

Both structures are built from q-deformed Racah 6j symbols with q-integers
[n] = sin(n*pi/(k+2)) / sin(pi/(k+2)) and are validated against the pentagon
and hexagon identities by ``verify_pentagon`` / ``verify_hexagon``.
"""

from __future__ import annotations

import gzip
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DEFAULT_TOLERANCE",
    "DEFAULT_PHASE_TOLERANCE",
    "CACHE_ENV_VAR",
    "ConsistencyError",
    "FMatrix",
    "SymbolCache",
    "AnyonModel",
]

# Default tolerances: consistency identities vs. exact-phase checks.
DEFAULT_TOLERANCE = 1e-9
DEFAULT_PHASE_TOLERANCE = 1e-12

CACHE_ENV_VAR = "ANYONFORGE_CACHE_DIR"
_CACHE_FORMAT = 1


class ConsistencyError(Exception):
    """A consistency identity (pentagon, hexagon, unitarity) failed."""


@dataclass(frozen=True)
class FMatrix:
    """One F-move block: change of basis between the two fusion orders of
    three charges a, b, c with total d.

    ``rows`` lists the admissible (ab) channels e, ``cols`` the admissible
    (bc) channels f; ``matrix[i, j]`` is the coefficient for (rows[i],
    cols[j]).
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    matrix: np.ndarray

    def entry(self, e: int, f: int) -> float:
        """Coefficient for (ab) channel e and (bc) channel f (0 if absent)."""
        if e not in self.rows or f not in self.cols:
            return 0.0
        return float(self.matrix[self.rows.index(e), self.cols.index(f)])


class SymbolCache:
    """Memoized F and R symbols for one level k.

    Built lazily; optionally persisted under $ANYONFORGE_CACHE_DIR (one
    gzipped JSON file per level, versioned, safe to delete at any time).
    """

    def __init__(self, k: int):
        self.k = k
        self.f_symbols: dict[tuple[int, int, int, int], FMatrix] = {}
        self.r_symbols: dict[tuple[int, int, int], complex] = {}

    def corrupt_entry(self, a: int, b: int, c: int, d: int, delta: float = 1e-2) -> None:
        """Deliberately damage one cached F block (diagnostic aid).

        Used by the ``check --debug-corrupt`` path and the negative-control
        tests: a corrupted entry must make the pentagon residual blow up.
        """
        block = self.f_symbols[(a, b, c, d)]
        damaged = block.matrix.copy()
        damaged[0, 0] += delta
        self.f_symbols[(a, b, c, d)] = FMatrix(block.rows, block.cols, damaged)

    # -- persistence ----------------------------------------------------

    def _cache_path(self) -> Path | None:
        root = os.environ.get(CACHE_ENV_VAR)
        if not root:
            return None
        return Path(root) / f"su2k-{self.k}-v{_CACHE_FORMAT}.json.gz"

    def save(self) -> None:
        path = self._cache_path()
        if path is None:
            return
        payload = {
            "format": _CACHE_FORMAT,
            "k": self.k,
            "f": {
                ",".join(map(str, key)): {
                    "rows": list(block.rows),
                    "cols": list(block.cols),
                    "matrix": [[float(x) for x in row] for row in block.matrix],
                }
                for key, block in sorted(self.f_symbols.items())
            },
            "r": {
                ",".join(map(str, key)): [value.real, value.imag]
                for key, value in sorted(self.r_symbols.items())
            },
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(gzip.compress(json.dumps(payload).encode()))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def load(self) -> bool:
        path = self._cache_path()
        if path is None or not path.exists():
            return False
        try:
            payload = json.loads(gzip.decompress(path.read_bytes()))
        except (OSError, ValueError):
            return False
        if payload.get("format") != _CACHE_FORMAT or payload.get("k") != self.k:
            return False
        for key, block in payload["f"].items():
            a, b, c, d = map(int, key.split(","))
            matrix = np.array(block["matrix"], dtype=np.float64)
            matrix.setflags(write=False)
            self.f_symbols[(a, b, c, d)] = FMatrix(
                tuple(block["rows"]), tuple(block["cols"]), matrix
            )
        for key, (re, im) in payload["r"].items():
            a, b, c = map(int, key.split(","))
            self.r_symbols[(a, b, c)] = complex(re, im)
        return True


class AnyonModel:
    """The SU(2)_k anyon model at integer level k >= 2."""

    def __init__(self, k: int):
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            raise ValueError(f"level must be an integer >= 2, got {k!r}")
        if k < 2:
            raise ValueError(f"level must be an integer >= 2, got {k}")
        self.k = int(k)
        self.symbols = SymbolCache(self.k)
        self.symbols.load()
        # q-integers [n] for n = 0 .. 2k+2, with exact zeros at n = 0 mod k+2
        # so that level-truncated Racah terms vanish identically.
        denom = math.sin(math.pi / (self.k + 2))
        self._qint = [
            0.0 if n % (self.k + 2) == 0 else math.sin(n * math.pi / (self.k + 2)) / denom
            for n in range(2 * self.k + 3)
        ]
        self._qfact = [1.0]
        for n in range(1, len(self._qint)):
            self._qfact.append(self._qfact[-1] * self._qint[n])
        self._fbig: np.ndarray | None = None

    # -- identity -------------------------------------------------------

    def __repr__(self) -> str:
        return f"AnyonModel(k={self.k})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AnyonModel) and other.k == self.k

    def __hash__(self) -> int:
        return hash(("su2k", self.k))

    # -- fusion algebra ---------------------------------------------------

    @property
    def charges(self) -> tuple[int, ...]:
        """All twice-spin charge labels, vacuum first."""
        return tuple(range(self.k + 1))

    @property
    def deformation_angle(self) -> float:
        """pi / (k+2), the angle entering every q-integer."""
        return math.pi / (self.k + 2)

    def check_charge(self, a: int) -> int:
        if not isinstance(a, (int, np.integer)) or isinstance(a, bool):
            raise ValueError(f"charge must be a twice-spin integer, got {a!r}")
        if not 0 <= a <= self.k:
            raise ValueError(f"charge {a} outside 0..{self.k} (twice-spin) at k={self.k}")
        return int(a)

    def fuse(self, a: int, b: int) -> tuple[int, ...]:
        """Admissible fusion channels of a x b, ascending."""
        a = self.check_charge(a)
        b = self.check_charge(b)
        top = min(a + b, 2 * self.k - a - b)
        return tuple(range(abs(a - b), top + 1, 2))

    def can_fuse(self, a: int, b: int, c: int) -> bool:
        """True when c is an admissible channel of a x b."""
        a, b = self.check_charge(a), self.check_charge(b)
        c = self.check_charge(c)
        return (
            (a + b + c) % 2 == 0
            and abs(a - b) <= c <= a + b
            and a + b + c <= 2 * self.k
        )

    def qdim(self, a: int) -> float:
        """Quantum dimension [a+1]."""
        return self._qint[self.check_charge(a) + 1]

    # -- q-deformed Racah machinery ---------------------------------------

    def _triangle(self, a: int, b: int, c: int) -> float:
        fact = self._qfact
        num = (
            fact[(-a + b + c) // 2]
            * fact[(a - b + c) // 2]
            * fact[(a + b - c) // 2]
        )
        return math.sqrt(num / fact[(a + b + c) // 2 + 1])

    def _six_j(self, a: int, b: int, e: int, c: int, d: int, f: int) -> float:
        """q-deformed {a/2 b/2 e/2; c/2 d/2 f/2}, twice-spin arguments."""
        if not (
            self.can_fuse(a, b, e)
            and self.can_fuse(a, d, f)
            and self.can_fuse(c, b, f)
            and self.can_fuse(c, d, e)
        ):
            return 0.0
        triads = [(a + b + e) // 2, (a + d + f) // 2, (c + b + f) // 2, (c + d + e) // 2]
        quads = [(a + b + c + d) // 2, (a + e + c + f) // 2, (b + e + d + f) // 2]
        fact = self._qfact
        total = 0.0
        for z in range(max(triads), min(quads) + 1):
            term = fact[z + 1]
            if term == 0.0:
                continue
            for t in triads:
                term /= fact[z - t]
            for q in quads:
                term /= fact[q - z]
            total += -term if z % 2 else term
        return (
            total
            * self._triangle(a, b, e)
            * self._triangle(a, d, f)
            * self._triangle(c, b, f)
            * self._triangle(c, d, e)
        )

    # -- F and R symbols ---------------------------------------------------

    def f_symbol(self, a: int, b: int, c: int, d: int) -> FMatrix:
        """F-move block for charges a, b, c with total d (see module doc)."""
        key = (self.check_charge(a), self.check_charge(b),
               self.check_charge(c), self.check_charge(d))
        cached = self.symbols.f_symbols.get(key)
        if cached is not None:
            return cached
        a, b, c, d = key
        rows = tuple(e for e in self.fuse(a, b) if self.can_fuse(e, c, d))
        cols = tuple(f for f in self.fuse(b, c) if self.can_fuse(a, f, d))
        if not rows or not cols:
            raise ValueError(
                f"no admissible channels for F(a={a}, b={b}, c={c}, d={d}) at k={self.k}"
            )
        sign = -1.0 if ((a + b + c + d) // 2) % 2 else 1.0
        matrix = np.empty((len(rows), len(cols)), dtype=np.float64)
        for i, e in enumerate(rows):
            for j, f in enumerate(cols):
                scale = math.sqrt(self._qint[e + 1] * self._qint[f + 1])
                matrix[i, j] = sign * scale * self._six_j(a, b, e, c, d, f)
        matrix.setflags(write=False)
        block = FMatrix(rows, cols, matrix)
        self.symbols.f_symbols[key] = block
        return block

    def r_symbol(self, a: int, b: int, c: int) -> complex:
        """Counterclockwise exchange phase of a and b in channel c."""
        key = (self.check_charge(a), self.check_charge(b), self.check_charge(c))
        cached = self.symbols.r_symbols.get(key)
        if cached is not None:
            return cached
        a, b, c = key
        if not self.can_fuse(a, b, c):
            raise ValueError(f"channel {c} not in fuse({a}, {b}) at k={self.k}")
        sign = -1.0 if ((a + b - c) // 2) % 2 else 1.0
        angle = math.pi * (c * (c + 2) - a * (a + 2) - b * (b + 2)) / (4 * (self.k + 2))
        value = sign * complex(math.cos(angle), math.sin(angle))
        self.symbols.r_symbols[key] = value
        return value

    def corrupt_f_symbol(self, a: int, b: int, c: int, d: int, delta: float = 1e-2) -> None:
        """Damage one F block and drop derived tables (diagnostic aid)."""
        self.f_symbol(a, b, c, d)
        self.symbols.corrupt_entry(a, b, c, d, delta)
        self._fbig = None

    # -- bulk tables -------------------------------------------------------

    def precompute(self) -> None:
        """Build every F and R symbol, then persist if a cache dir is set."""
        self._f_table()
        for a in self.charges:
            for b in self.charges:
                for c in self.fuse(a, b):
                    self.r_symbol(a, b, c)
        self.symbols.save()

    def _f_table(self) -> np.ndarray:
        """Dense zero-padded table T[a,b,c,d,e,f] of F coefficients."""
        if self._fbig is not None:
            return self._fbig
        n = self.k + 1
        table = np.zeros((n, n, n, n, n, n), dtype=np.float64)
        for a in self.charges:
            for b in self.charges:
                for e in self.fuse(a, b):
                    for c in self.charges:
                        for d in self.fuse(e, c):
                            block = self.f_symbol(a, b, c, d)
                            for i, ee in enumerate(block.rows):
                                for j, ff in enumerate(block.cols):
                                    table[a, b, c, d, ee, ff] = block.matrix[i, j]
        self._fbig = table
        return table

    def _r_table(self) -> np.ndarray:
        n = self.k + 1
        table = np.zeros((n, n, n), dtype=np.complex128)
        for a in self.charges:
            for b in self.charges:
                for c in self.fuse(a, b):
                    table[a, b, c] = self.r_symbol(a, b, c)
        return table

    # -- consistency checks -------------------------------------------------

    def verify_pentagon(self, tolerance: float | None = None) -> float:
        """Max pentagon residual over all admissible label tuples.

        The identity checked, for four charges a, b, c, d with total t:

            F(x,c,d,t)[y,z] * F(a,b,z,t)[x,u]
              = sum_w F(a,b,c,y)[x,w] * F(a,w,d,t)[y,u] * F(b,c,d,u)[w,z]

        If ``tolerance`` is given and exceeded, raises ConsistencyError.
        """
        table = self._f_table()
        worst = 0.0
        for a in self.charges:
            for b in self.charges:
                ab = table[a, b]
                lhs = np.einsum("xcdtyz,ztxu->cdtxyzu", table, ab, optimize=True)
                rhs = np.einsum(
                    "cyxw,wdtyu,cduwz->cdtxyzu", ab, table[a], table[b], optimize=True
                )
                worst = max(worst, float(np.abs(lhs - rhs).max()))
        if tolerance is not None and worst > tolerance:
            raise ConsistencyError(f"pentagon residual {worst:.3e} > {tolerance:.3e}")
        return worst

    def verify_hexagon(self, tolerance: float | None = None) -> float:
        """Max hexagon residual (both chiralities) over all label tuples.

        Checked for charges a, b braided with c, total d:

            r(c,a,e) F(a,c,b,d)[e,g] r(c,b,g)
              = sum_f F(c,a,b,d)[e,f] r(c,f,d) F(a,b,c,d)[f,g]

        and the same with every r conjugated (clockwise exchange).
        """
        ftab = self._f_table().astype(np.complex128)
        rtab = self._r_table()
        worst = 0.0
        for rr in (rtab, np.conj(rtab)):
            lhs = np.einsum("cae,acbdeg,cbg->abcdeg", rr, ftab, rr, optimize=True)
            rhs = np.einsum("cabdef,cfd,abcdfg->abcdeg", ftab, rr, ftab, optimize=True)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        if tolerance is not None and worst > tolerance:
            raise ConsistencyError(f"hexagon residual {worst:.3e} > {tolerance:.3e}")
        return worst

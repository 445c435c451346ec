"""
Linear differential operators built from composition chains.

A scalar operator is a sum of chains; each chain is a composition of the
primitives ``D`` (spectral d/dx), ``mul:f`` (multiplication by a grid
function) and scalar constants, applied right to left.  Systems are square
block matrices of scalar operators.

    >>> D = DiffOperator.d(grid)
    >>> k = GridFunction.from_function(grid, np.cos)
    >>> kdv2 = D @ D @ D + 2 * mul(k, "k") @ D + mul(derivative(k), "k'")
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, ShapeMismatchError
from .numerics import (
    GridFunction,
    PeriodicGrid,
    differentiation_matrix,
    inner,
    spectral_derivative,
)


@dataclass(frozen=True, eq=False)
class Primitive:
    kind: str  # "D", "mul" or "const"
    coef: object = None
    label: str = ""

    def token(self) -> str:
        if self.kind == "D":
            return "D"
        if self.kind == "mul":
            return f"mul:{self.label}"
        return repr(complex(self.coef).real if np.isreal(self.coef) else complex(self.coef))

    def same_as(self, other: "Primitive") -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "D":
            return True
        return bool(np.array_equal(np.asarray(self.coef), np.asarray(other.coef)))


_D = Primitive("D")


def _simplify_chain(chain):
    """Fold constants to the front; drop unit constants."""
    c = 1.0
    rest = []
    for p in chain:
        if p.kind == "const":
            c = c * p.coef
        else:
            rest.append(p)
    if c == 0:
        return None
    if c != 1.0 or not rest:
        rest.insert(0, Primitive("const", c))
    return tuple(rest)


class DiffOperator:
    """Block matrix of sums of composition chains on a periodic grid."""

    def __init__(self, grid: PeriodicGrid, entries):
        self.grid = grid
        clean = []
        for row in entries:
            if len(row) != len(entries):
                raise ShapeMismatchError("operator block structure must be square")
            clean_row = []
            for chains in row:
                kept = [c for c in (_simplify_chain(ch) for ch in chains) if c is not None]
                clean_row.append(tuple(kept))
            clean.append(tuple(clean_row))
        self.entries = tuple(clean)

    # -- construction -------------------------------------------------------
    @classmethod
    def d(cls, grid):
        return cls(grid, [[[(_D,)]]])

    @classmethod
    def identity(cls, grid):
        return cls(grid, [[[(Primitive("const", 1.0),)]]])

    @classmethod
    def zero(cls, grid):
        return cls(grid, [[[]]])

    @classmethod
    def block(cls, rows):
        """Assemble a system from scalar operators (``0`` marks an empty entry)."""
        grid = next(op.grid for row in rows for op in row if isinstance(op, DiffOperator))
        entries = []
        for row in rows:
            erow = []
            for op in row:
                if isinstance(op, DiffOperator):
                    if op.nblocks != 1:
                        raise ShapeMismatchError("block entries must be scalar operators")
                    if op.grid != grid:
                        raise ShapeMismatchError("block entries live on different grids")
                    erow.append(op.entries[0][0])
                elif op == 0:
                    erow.append(())
                else:
                    erow.append(((Primitive("const", op),),))
            entries.append(erow)
        return cls(grid, entries)

    @property
    def nblocks(self) -> int:
        return len(self.entries)

    def entry(self, i, j) -> "DiffOperator":
        return DiffOperator(self.grid, [[self.entries[i][j]]])

    # -- algebra ------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DiffOperator):
            raise TypeError("expected a DiffOperator")
        if other.grid != self.grid or other.nblocks != self.nblocks:
            raise ShapeMismatchError("operators differ in grid or block structure")

    def __add__(self, other):
        if other == 0:
            return self
        self._check(other)
        b = self.nblocks
        return DiffOperator(self.grid, [[self.entries[i][j] + other.entries[i][j]
                                         for j in range(b)] for i in range(b)])

    __radd__ = __add__

    def __neg__(self):
        return (-1.0) * self

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, DiffOperator):
            return NotImplemented
        scal = Primitive("const", c)
        return DiffOperator(self.grid, [[tuple((scal,) + ch for ch in e) for e in row]
                                        for row in self.entries])

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Composition ``self o other``."""
        self._check(other)
        b = self.nblocks
        out = []
        for i in range(b):
            row = []
            for j in range(b):
                chains = []
                for m in range(b):
                    for left in self.entries[i][m]:
                        for right in other.entries[m][j]:
                            chains.append(left + right)
                row.append(tuple(chains))
            out.append(row)
        return DiffOperator(self.grid, out)

    def adjoint(self) -> "DiffOperator":
        """Formal L2 adjoint: ``D* = -D``, multiplications self-adjoint, blocks transposed."""
        def chain_adj(ch):
            out = []
            for p in reversed(ch):
                if p.kind == "D":
                    out.extend([Primitive("const", -1.0), _D])
                elif p.kind == "mul":
                    out.append(Primitive("mul", np.conj(p.coef), p.label))
                else:
                    out.append(Primitive("const", np.conj(p.coef)))
            return tuple(out)

        b = self.nblocks
        return DiffOperator(self.grid, [[tuple(chain_adj(c) for c in self.entries[j][i])
                                         for j in range(b)] for i in range(b)])

    # -- evaluation ---------------------------------------------------------
    def _apply_chain(self, chain, v):
        for p in reversed(chain):
            if p.kind == "D":
                v = spectral_derivative(v, self.grid.length, 1)
            elif p.kind == "mul":
                v = p.coef * v
            else:
                v = p.coef * v
        return v

    def apply(self, f):
        """Apply to a GridFunction (scalar operator) or a sequence of them (system)."""
        single = isinstance(f, GridFunction)
        parts = [f] if single else list(f)
        if len(parts) != self.nblocks:
            raise ShapeMismatchError(
                f"operator has {self.nblocks} blocks but input has {len(parts)} components")
        arrays = []
        for p in parts:
            if isinstance(p, GridFunction):
                if p.grid != self.grid:
                    raise ShapeMismatchError("input lives on a different grid")
                if p.has_slope:
                    raise InvalidInputError("operators act on periodic functions only")
                arrays.append(p.values)
            else:
                a = np.asarray(p)
                if a.shape != (self.grid.n,):
                    raise ShapeMismatchError(f"expected {self.grid.n} samples, got {a.shape}")
                arrays.append(a)
        out = []
        for row in self.entries:
            acc = np.zeros(self.grid.n, dtype=np.result_type(*arrays, float))
            for j, chains in enumerate(row):
                for ch in chains:
                    acc = acc + self._apply_chain(ch, arrays[j])
            out.append(GridFunction(self.grid, acc))
        return out[0] if single else out

    def __call__(self, f):
        return self.apply(f)

    def matrix(self) -> np.ndarray:
        """Dense discretization, shape ``(nblocks*n, nblocks*n)``."""
        n = self.grid.n
        Dm = differentiation_matrix(n, float(self.grid.length))
        b = self.nblocks
        complex_coef = any(np.iscomplexobj(np.asarray(p.coef))
                           for row in self.entries for e in row for ch in e for p in ch
                           if p.kind != "D")
        M = np.zeros((b * n, b * n), dtype=complex if complex_coef else float)
        for i, row in enumerate(self.entries):
            for j, chains in enumerate(row):
                blk = M[i * n:(i + 1) * n, j * n:(j + 1) * n]
                for ch in chains:
                    cm = np.eye(n, dtype=M.dtype)
                    for p in ch:
                        if p.kind == "D":
                            cm = cm @ Dm
                        elif p.kind == "mul":
                            cm = cm * np.asarray(p.coef)[None, :]
                        else:
                            cm = cm * p.coef
                    blk += cm
        return M

    # -- inspection ---------------------------------------------------------
    def describe(self) -> dict:
        """JSON-ready listing of chains per block entry."""
        return {
            "blocks": self.nblocks,
            "n": self.grid.n,
            "period": self.grid.length,
            "entries": [[[[p.token() for p in ch] for ch in e] for e in row]
                        for row in self.entries],
        }

    def same_chains(self, other: "DiffOperator") -> bool:
        """Structural equality: identical chains with bit-identical coefficients."""
        if self.nblocks != other.nblocks or self.grid != other.grid:
            return False
        for row_a, row_b in zip(self.entries, other.entries):
            for ea, eb in zip(row_a, row_b):
                if len(ea) != len(eb):
                    return False
                for ca, cb in zip(ea, eb):
                    if len(ca) != len(cb) or not all(p.same_as(q) for p, q in zip(ca, cb)):
                        return False
        return True

    def __repr__(self):
        return f"DiffOperator({self.describe()['entries']})"


def mul(f, label: str = "f") -> DiffOperator:
    """Multiplication operator by a periodic grid function."""
    if not isinstance(f, GridFunction):
        raise InvalidInputError("mul expects a GridFunction")
    if f.has_slope:
        raise InvalidInputError("multiplication coefficients must be periodic")
    return DiffOperator(f.grid, [[[(Primitive("mul", f.values, label),)]]])


def _random_bandlimited(rng, grid, modes):
    x = grid.points
    out = rng.normal() * np.ones_like(x)
    for m in range(1, modes + 1):
        w = 2 * np.pi * m / grid.length
        out = out + (rng.normal() * np.cos(w * x) + rng.normal() * np.sin(w * x)) / m
    return out


def adjoint_residual(op: DiffOperator, trials: int = 5, modes: int = 8, rng=None) -> float:
    """Worst normalized skewness defect ``|<Pf,g> + <f,Pg>| / (|f||g|)``."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    grid = op.grid
    for _ in range(trials):
        f = [GridFunction(grid, _random_bandlimited(rng, grid, modes)) for _ in range(op.nblocks)]
        g = [GridFunction(grid, _random_bandlimited(rng, grid, modes)) for _ in range(op.nblocks)]
        pf, pg = op.apply(f), op.apply(g)
        lhs = sum(inner(a, b) for a, b in zip(pf, g)) + sum(inner(a, b) for a, b in zip(f, pg))
        nf = np.sqrt(sum(inner(a, a) for a in f))
        ng = np.sqrt(sum(inner(a, a) for a in g))
        worst = max(worst, abs(lhs) / (nf * ng))
    return float(worst)


def apply(op: DiffOperator, f):
    return op.apply(f)

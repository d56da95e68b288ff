"""Fractional scattering cascade over frequency-decreasing paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Callable, Iterator

import numpy as np

from . import kernels
from .filterbank import FilterBank
from .frwt import modulate
from .grid import FractionalOrderPair, inverse_spectrum, spectrum

__all__ = [
    "Path",
    "ScatteringResult",
    "EnergyRow",
    "count_paths",
    "enumerate_paths",
    "propagate",
    "scatter",
    "scatter_reduce",
    "energy_report",
]

# Batch size for inverse transforms; bounds peak memory on large grids.
_CHUNK = 128


@dataclass(frozen=True, order=True)
class Path:
    """Sequence of ``(scale, angle)`` steps with strictly increasing scales."""

    steps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        steps = tuple((int(j), int(k)) for j, k in self.steps)
        for (j0, _), (j1, _) in zip(steps, steps[1:]):
            if not j0 < j1:
                raise ValueError(f"path scales must strictly increase, got {steps}")
        object.__setattr__(self, "steps", steps)

    @property
    def order(self) -> int:
        return len(self.steps)

    @property
    def parent(self) -> "Path":
        return Path(self.steps[:-1])

    def sort_key(self):
        return (self.order, tuple(j for j, _ in self.steps), tuple(k for _, k in self.steps))

    def __str__(self) -> str:
        if not self.steps:
            return "empty"
        return "-".join(f"j{j}k{k}" for j, k in self.steps)

    @classmethod
    def parse(cls, text: str) -> "Path":
        if text == "empty":
            return cls()
        steps = []
        for part in text.split("-"):
            j, k = part[1:].split("k")
            steps.append((int(j), int(k)))
        return cls(tuple(steps))


def count_paths(num_scales: int, num_angles: int, max_order: int) -> int:
    return sum(num_angles**m * comb(num_scales, m) for m in range(max_order + 1))


def enumerate_paths(num_scales: int, num_angles: int, max_order: int) -> list[Path]:
    """All frequency-decreasing paths, ordered by order, then scales, then angles."""
    if num_scales < 1 or num_angles < 1 or max_order < 0:
        raise ValueError("need num_scales >= 1, num_angles >= 1, max_order >= 0")
    out = []
    for m in range(max_order + 1):
        for scales in combinations(range(num_scales), m):
            for angles in product(range(num_angles), repeat=m):
                out.append(Path(tuple(zip(scales, angles))))
    return out


def _check_path(path: Path, bank: FilterBank) -> None:
    for j, k in path.steps:
        if not (0 <= j < bank.num_scales and 0 <= k < bank.num_angles):
            raise ValueError(
                f"path {path} references (j={j}, k={k}) outside a bank with "
                f"{bank.num_scales} scales and {bank.num_angles} angles"
            )


def _check_input(x, bank: FilterBank) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {x.shape}")
    if x.shape != bank.shape:
        raise ValueError(
            f"dimension mismatch: image is {x.shape[1]}x{x.shape[0]}, "
            f"bank grid is {bank.shape[1]}x{bank.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("image contains non-finite samples")
    return x.astype(np.complex128 if np.iscomplexobj(x) else np.float64, copy=False)


def propagate(x, path: Path, bank: FilterBank, orders) -> np.ndarray:
    """``U[p]x``: iterated modulus of fractional band-pass convolutions.

    The empty path returns ``x`` itself (complex inputs stay complex).
    """
    orders = FractionalOrderPair.coerce(orders)
    _check_path(path, bank)
    u = _check_input(x, bank)
    for j, k in path.steps:
        z = inverse_spectrum(spectrum(modulate(u, orders, +1)) * bank.psi_hat[j, k])
        # the outgoing chirp has unit modulus and is dropped by the modulus
        u = np.abs(z)
    return u


@dataclass
class ScatteringResult:
    """Windowed coefficients ``|S[p]x|`` in path order plus the energy ledger.

    ``energy_ledger[m]`` is ``(sum ||S[p]x||^2, sum ||U[p]x||^2)`` over paths of
    order ``m``; ``residual_energy`` is ``sum ||U[p]x||^2`` over order
    ``max_order + 1`` (``None`` when not computed).
    """

    paths: list[Path]
    values: np.ndarray
    energy_ledger: list[tuple[float, float]]
    orders: FractionalOrderPair
    residual_energy: float | None = None
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {p: i for i, p in enumerate(self.paths)}

    @property
    def coefficients(self) -> dict[Path, np.ndarray]:
        return {p: self.values[i] for i, p in enumerate(self.paths)}

    def __getitem__(self, path: Path) -> np.ndarray:
        return self.values[self._index[path]]

    def __len__(self) -> int:
        return len(self.paths)

    @property
    def max_order(self) -> int:
        return len(self.energy_ledger) - 1


@dataclass(frozen=True)
class _Plan:
    """Index arrays driving the breadth-first cascade."""

    paths: list[Path]
    level_sizes: list[int]
    # per transition m -> m+1: (parent index, scale, angle) of each child
    links: list[tuple[np.ndarray, np.ndarray, np.ndarray]]


def _links(parents: list[Path], children: list[Path]):
    parent_of = {p: i for i, p in enumerate(parents)}
    pidx = np.array([parent_of[c.parent] for c in children], dtype=np.intp)
    js = np.array([c.steps[-1][0] for c in children], dtype=np.intp)
    ks = np.array([c.steps[-1][1] for c in children], dtype=np.intp)
    return pidx, js, ks


@lru_cache(maxsize=32)
def _plan(num_scales: int, num_angles: int, max_order: int) -> _Plan:
    """Paths up to ``max_order + 1``; the last level feeds only the residual."""
    levels: list[list[Path]] = [[] for _ in range(max_order + 2)]
    for p in enumerate_paths(num_scales, num_angles, max_order + 1):
        levels[p.order].append(p)
    links = [_links(levels[m], levels[m + 1]) for m in range(max_order + 1)]
    paths = [p for lvl in levels[:-1] for p in lvl]
    return _Plan(paths, [len(lvl) for lvl in levels], links)


def _cascade(
    x: np.ndarray,
    bank: FilterBank,
    orders: FractionalOrderPair,
    max_order: int,
    residual: bool,
    sink: Callable[[int, np.ndarray], None],
) -> tuple[list[Path], list[tuple[float, float]], float | None]:
    """Breadth-first cascade; ``sink(offset, block)`` receives |S| images in path order."""
    plan = _plan(bank.num_scales, bank.num_angles, max_order)
    shape = x.shape
    phi = np.ascontiguousarray(bank.phi_hat)
    psi = np.ascontiguousarray(bank.psi_hat)
    ledger = []
    offset = 0
    u_level = x[None]
    res = None
    for m in range(max_order + 1):
        u_energy = float(np.sum(np.abs(u_level) ** 2))
        n = len(u_level)
        if n == 0:
            ledger.append((0.0, 0.0))
            if m == max_order and residual:
                res = 0.0
            continue
        spec_u = np.ascontiguousarray(spectrum(modulate(u_level, orders, +1)), dtype=np.complex128)
        s_energy = 0.0
        for a in range(0, n, _CHUNK):
            b = min(a + _CHUNK, n)
            prod = kernels.broadcast_multiply(spec_u[a:b], phi, np.empty((b - a,) + shape, np.complex128))
            z = np.ascontiguousarray(inverse_spectrum(prod, overwrite_x=True))
            block = np.empty((b - a,) + shape, np.float64)
            s_energy += kernels.modulus_energy(z, block)
            sink(offset + a, block)
        offset += n
        ledger.append((s_energy, u_energy))
        if m == max_order and not residual:
            break
        pidx, js, ks = plan.links[m]
        nc = len(pidx)
        if m == max_order:
            res = 0.0
        else:
            u_next = np.empty((nc,) + shape, dtype=np.float64)
        for a in range(0, nc, _CHUNK):
            b = min(a + _CHUNK, nc)
            prod = kernels.gather_multiply(
                spec_u, pidx[a:b], psi, js[a:b], ks[a:b], np.empty((b - a,) + shape, np.complex128)
            )
            z = np.ascontiguousarray(inverse_spectrum(prod, overwrite_x=True))
            if m == max_order:
                res += float(np.sum(z.real**2 + z.imag**2))
            else:
                kernels.modulus_energy(z, u_next[a:b])
        if m < max_order:
            u_level = u_next
    return plan.paths[:offset], ledger, res


def _resolve_order(bank: FilterBank, max_order: int | None) -> int:
    m = bank.spec.max_order if max_order is None else int(max_order)
    if m < 0:
        raise ValueError(f"max_order must be >= 0, got {m}")
    return m


def scatter(x, bank: FilterBank, orders, max_order: int | None = None, residual: bool = True) -> ScatteringResult:
    """Full windowed scattering of ``x`` up to ``max_order`` (default: the bank's).

    With ``residual`` the propagated energy one order beyond the last is
    also measured, which :func:`energy_report` needs.
    """
    orders = FractionalOrderPair.coerce(orders)
    x = _check_input(x, bank)
    m = _resolve_order(bank, max_order)
    n = count_paths(bank.num_scales, bank.num_angles, m)
    values = np.empty((n,) + x.shape, dtype=np.float64)

    def sink(offset, block):
        values[offset : offset + len(block)] = block

    paths, ledger, res = _cascade(x, bank, orders, m, residual, sink)
    return ScatteringResult(paths, values, ledger, orders, res)


def scatter_reduce(x, bank: FilterBank, orders, region=None, max_order: int | None = None) -> np.ndarray:
    """Spatial mean of every ``|S[p]x|`` over ``region`` (a pair of slices).

    Same numbers as ``scatter(...).values[:, region].mean()`` without holding
    every coefficient image at once.
    """
    orders = FractionalOrderPair.coerce(orders)
    x = _check_input(x, bank)
    m = _resolve_order(bank, max_order)
    h, w = x.shape
    rows, cols = (slice(None), slice(None)) if region is None else region
    r0, r1, _ = rows.indices(h)
    c0, c1, _ = cols.indices(w)
    if r1 <= r0 or c1 <= c0:
        raise ValueError(f"empty reduction region {region}")
    out = np.empty(count_paths(bank.num_scales, bank.num_angles, m), dtype=np.float64)

    def sink(offset, block):
        kernels.block_means(block, r0, r1, c0, c1, out[offset : offset + len(block)])

    _cascade(x, bank, orders, m, False, sink)
    return out


@dataclass(frozen=True)
class EnergyRow:
    order: int
    captured: float
    residual: float


def energy_report(result: ScatteringResult, input_norm_sq: float) -> list[EnergyRow]:
    """Per order ``m``: captured ``sum_{|p|<=m} ||S[p]x||^2`` and residual
    ``sum_{|p|=m+1} ||U[p]x||^2``, both divided by ``input_norm_sq``.

    A zero input (``input_norm_sq == 0`` with an all-zero ledger) reports zeros.
    """
    if input_norm_sq < 0 or not np.isfinite(input_norm_sq):
        raise ValueError(f"input_norm_sq must be a nonnegative finite number, got {input_norm_sq}")
    if result.residual_energy is None:
        raise ValueError("result has no residual energy; scatter with residual=True")
    ledger = result.energy_ledger
    if input_norm_sq == 0:
        if any(s or u for s, u in ledger) or result.residual_energy:
            raise ValueError("input_norm_sq must be positive for a nonzero result")
        return [EnergyRow(m, 0.0, 0.0) for m in range(len(ledger))]
    rows = []
    captured = 0.0
    for m, (s_energy, _) in enumerate(ledger):
        captured += s_energy
        nxt = ledger[m + 1][1] if m + 1 < len(ledger) else result.residual_energy
        rows.append(EnergyRow(m, captured / input_norm_sq, nxt / input_norm_sq))
    return rows


def iter_coefficients(result: ScatteringResult) -> Iterator[tuple[Path, np.ndarray]]:
    yield from zip(result.paths, result.values)

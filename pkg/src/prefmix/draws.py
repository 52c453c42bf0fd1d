"""Modified Latin Hypercube Sampling draws.

A draw block is a [person, draw, dimension] tensor. Uniform blocks are
stratified: for every (person, dimension) the ``n_draws`` values occupy the
``n_draws`` equal-width strata of (0, 1) exactly once, in shuffled order.
Normal blocks are obtained by pushing a uniform block through the inverse
standard-normal CDF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import WrongKind, ZeroCount

UNIFORM01 = "uniform01"
STD_NORMAL = "std_normal"

# Inverse-normal inputs are clamped to this open interval; beyond it the
# transform would amplify draw noise into huge tail values.
_CLAMP_LO = 1e-12
_CLAMP_HI = 1.0 - 1e-12


@dataclass(frozen=True)
class DrawBlock:
    """Immutable quasi-random draw tensor indexed [person, draw, dimension]."""

    values: np.ndarray
    kind: str
    seed: int
    n_draws: int

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n_persons(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[2]

    def dims(self, start: int, count: int) -> np.ndarray:
        """View of ``count`` dimensions starting at ``start``."""
        return self.values[:, :, start:start + count]


def mlhs(n_persons: int, n_draws: int, n_dims: int, seed: int) -> DrawBlock:
    """Generate a stratified uniform draw block.

    Per (person, dimension): a single offset u ~ U[0,1) is shifted into every
    stratum, giving (i + u) / n_draws for i = 0..n_draws-1, and the stratum
    order is then shuffled. Deterministic for a fixed seed.
    """
    for name, count in (("n_persons", n_persons), ("n_draws", n_draws), ("n_dims", n_dims)):
        if count < 1:
            raise ZeroCount(f"{name} must be >= 1, got {count}")

    rng = np.random.default_rng(seed)
    base = np.arange(n_draws, dtype=np.float64)
    values = np.empty((n_persons, n_draws, n_dims))
    for p in range(n_persons):
        for d in range(n_dims):
            u = rng.random()
            if u == 0.0:  # keep values strictly inside (0, 1)
                u = 0.5
            seq = (base + u) / n_draws
            rng.shuffle(seq)
            values[p, :, d] = seq
    return DrawBlock(values=values, kind=UNIFORM01, seed=seed, n_draws=n_draws)


def to_std_normal(block: DrawBlock) -> DrawBlock:
    """Transform a uniform block elementwise through the inverse normal CDF."""
    if block.kind != UNIFORM01:
        raise WrongKind(f"expected a {UNIFORM01} block, got {block.kind}")
    clipped = np.clip(block.values, _CLAMP_LO, _CLAMP_HI)
    return DrawBlock(values=ndtri(clipped), kind=STD_NORMAL,
                     seed=block.seed, n_draws=block.n_draws)


def export_csv(block: DrawBlock, path) -> None:
    """Write a block as person,draw,dim,value rows for cross-checking."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("person,draw,dim,value\n")
        n_p, n_r, n_d = block.values.shape
        for p in range(n_p):
            for r in range(n_r):
                for d in range(n_d):
                    fh.write(f"{p},{r},{d},{float(block.values[p, r, d])!r}\n")

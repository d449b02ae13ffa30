"""Validated probability vectors, instance generators, exact distances.

Generators are explicitly seeded with numpy's PCG64 so experiment
instances are bit-reproducible; the generator is recorded in result
metadata by the experiment runner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StructuralError

SUM_TOL = 1e-12


@dataclass(frozen=True)
class Distribution:
    """A finite probability vector on {0, ..., n-1}.

    Vectors that fail the simplex invariants are rejected outright rather
    than renormalized, so that input bugs cannot silently corrupt
    ground-truth distances.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 1:
            raise StructuralError("distribution needs at least one outcome")
        if any(p < 0 for p in probs):
            raise StructuralError(f"negative probability in {probs}")
        total = float(np.sum(probs))
        if abs(total - 1.0) > SUM_TOL:
            raise StructuralError(f"probabilities sum to {total!r}, not 1")

    @property
    def n(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


def _check_same_support(p: Distribution, q: Distribution) -> None:
    if p.n != q.n:
        raise StructuralError(f"support sizes differ: {p.n} vs {q.n}")


def l2_distance(p: Distribution, q: Distribution) -> float:
    _check_same_support(p, q)
    d = p.as_array() - q.as_array()
    return float(np.sqrt(np.sum(d * d)))


def l1_distance(p: Distribution, q: Distribution) -> float:
    _check_same_support(p, q)
    return float(np.sum(np.abs(p.as_array() - q.as_array())))


def uniform(n: int) -> Distribution:
    if n < 1:
        raise ParameterError("n must be >= 1")
    return Distribution((1.0 / n,) * n)


def point_mass(n: int, index: int = 0) -> Distribution:
    if not 0 <= index < n:
        raise ParameterError(f"point-mass index {index} out of range for n={n}")
    probs = [0.0] * n
    probs[index] = 1.0
    return Distribution(tuple(probs))


def bump_pair(n: int, target_l2: float) -> tuple[Distribution, Distribution]:
    """Uniform vector plus a perturbed copy at an exact l2 distance.

    Mass ``target_l2 * sqrt((n-1)/n)`` is added to outcome 0 and drained
    evenly from the others; the perturbation direction is unit-norm and
    sums to zero, so the distance equals the target to the last ulp.
    """
    if n < 2:
        raise ParameterError("bump_pair needs n >= 2")
    if target_l2 < 0:
        raise ParameterError("target distance must be non-negative")
    u = uniform(n)
    hi = target_l2 * np.sqrt((n - 1) / n)
    lo = hi / (n - 1)
    if 1.0 / n - lo < 0 or 1.0 / n + hi > 1:
        raise ParameterError(
            f"target l2 distance {target_l2} infeasible for uniform base, n={n}"
        )
    probs = [1.0 / n - lo] * n
    probs[0] = 1.0 / n + hi
    return u, Distribution(tuple(probs))


def dirichlet_random(n: int, seed: int) -> Distribution:
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(n))
    probs = probs / probs.sum()  # tighten to the 1e-12 sum invariant
    return Distribution(tuple(float(x) for x in probs))


def make_family(kind: str, n: int, *, target_l2: float | None = None,
                seed: int = 0, index: int = 0):
    """Dispatch to a named generator; pair-valued for ``bump_pair``."""
    if kind == "uniform":
        return uniform(n)
    if kind == "point_mass":
        return point_mass(n, index)
    if kind == "bump_pair":
        if target_l2 is None:
            raise ParameterError("bump_pair requires a target distance")
        return bump_pair(n, target_l2)
    if kind == "dirichlet_random":
        return dirichlet_random(n, seed)
    raise ParameterError(f"unknown family {kind!r}")


def parse_distribution_text(text: str) -> Distribution:
    """Parse the plain-text format: one decimal probability per line.

    Blank lines and ``#`` comments are ignored.
    """
    probs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            probs.append(float(line))
        except ValueError:
            raise StructuralError(
                f"line {lineno}: {line!r} is not a decimal probability"
            ) from None
    if not probs:
        raise StructuralError("distribution file contains no probabilities")
    return Distribution(tuple(probs))


def load_distribution(path) -> Distribution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_distribution_text(fh.read())


def save_distribution(dist: Distribution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in dist.probs:
            fh.write(f"{p!r}\n")

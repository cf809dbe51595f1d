"""Radial density weights with slowly varying inverse growth.

Everything downstream works with a weight ``rho(r)`` whose inverse grows like
``r^2`` times a logarithmic correction.  Three families are supported, named
by the hypothesis they realize:

``H1``
    one-sided: ``1/rho >= k (log r)^alpha r^2`` outside the ball of radius e.
``H2``
    two-sided: ``k1 r^2 / (log r)^alpha <= 1/rho <= k2 r^2 / (log r)^alpha``
    outside the ball of radius e.
``H2Smooth``
    the shifted two-sided form ``k (r + r0)^2 / (log(r + r0))^alpha`` bounded
    between the ``k1`` and ``k2`` multiples for every ``r >= 0``, which keeps
    the weight smooth and positive down to the origin.

Each family has a canonical smooth representative (see :func:`rho`), and
:func:`envelope_check` verifies an arbitrary user weight against the family
envelope on a sample grid.  Derived constants used by the feasibility layer,
a safe one-sided envelope constant for ``H1`` and inverse-weight bounds on
the closed ball of radius e, are produced by :func:`derive_k0` and
:func:`derive_rho_bounds`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

E = math.e

FAMILY_H1 = "H1"
FAMILY_H2 = "H2"
FAMILY_H2SMOOTH = "H2Smooth"
FAMILIES = (FAMILY_H1, FAMILY_H2, FAMILY_H2SMOOTH)

# Relative tolerance below which an envelope slack still counts as a pass;
# the canonical H2Smooth member with k1 == k2 sits exactly on both envelopes.
ENVELOPE_PASS_TOL = 1.0e-12


@dataclass(frozen=True)
class ProblemConstants:
    """Exponents and dimension of the reaction-diffusion problem.

    Parameters
    ----------
    m : float
        Degenerate diffusion exponent, strictly above 1.
    p : float
        Reaction exponent, strictly above 1.
    N : int
        Spatial dimension, at least 3.
    """

    m: float
    p: float
    N: int

    def __post_init__(self) -> None:
        if not self.m > 1.0:
            raise ValueError(f"m must exceed 1, got {self.m}")
        if not self.p > 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N}")


@dataclass(frozen=True)
class DensityParams:
    """Constants pinning down a weight family member.

    ``k`` is the H1 envelope constant; ``k1 <= k2`` are the two-sided band
    constants for H2/H2Smooth.  The canonical representative of the two-sided
    families uses ``k1``.  ``k0``, ``rho1`` and ``rho2`` are optional
    overrides for the derived constants (see :func:`derive_k0` and
    :func:`derive_rho_bounds`); when absent they are computed on demand.

    Only algebraic invariants are validated here (positivity, ``alpha > 1``,
    ``k1 <= k2``, ``r0 >= e``).  Whether a concrete weight actually respects
    its family envelope is a separate question answered by
    :func:`envelope_check`; in particular a two-sided band that is too narrow
    cannot be met by the canonical shifted representative near ``r = e``, and
    the constructor deliberately does not reject such parameter sets.
    """

    family: str
    alpha: float
    r0: float
    k: float = 1.0
    k1: float = 1.0
    k2: float = 1.0
    k0: Optional[float] = None
    rho1: Optional[float] = None
    rho2: Optional[float] = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown density family {self.family!r}; expected one of {FAMILIES}"
            )
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must exceed 1 for the H1/H2 families, got {self.alpha}")
        if not self.r0 >= E:
            raise ValueError(f"r0 must be at least e = {E:.15g}, got {self.r0}")
        if self.family == FAMILY_H1:
            if not self.k > 0.0:
                raise ValueError(f"k must be positive, got {self.k}")
        else:
            if not 0.0 < self.k1 <= self.k2:
                raise ValueError(f"need 0 < k1 <= k2, got k1={self.k1}, k2={self.k2}")
        if self.k0 is not None and not self.k0 > 0.0:
            raise ValueError(f"k0 override must be positive, got {self.k0}")
        if self.rho1 is not None or self.rho2 is not None:
            if self.rho1 is None or self.rho2 is None:
                raise ValueError("rho1 and rho2 overrides must be supplied together")
            if not 0.0 < self.rho1 <= self.rho2:
                raise ValueError(
                    f"need 0 < rho1 <= rho2, got rho1={self.rho1}, rho2={self.rho2}"
                )


def inverse_rho(params: DensityParams, r):
    """Inverse weight ``1/rho`` of the canonical family member at radius ``r``.

    Canonical representatives (``s = r + r0``, ``L = log s``):

    - H1: ``1/rho = k L^alpha s^2``
    - H2 / H2Smooth: ``1/rho = k1 s^2 / L^alpha``

    Accepts scalars or arrays, vectorized over ``r >= 0``.
    """
    s = np.asarray(r, dtype=float) + params.r0
    L = np.log(s)
    if params.family == FAMILY_H1:
        out = params.k * L**params.alpha * s**2
    else:
        out = params.k1 * s**2 / L**params.alpha
    if np.ndim(r) == 0:
        return float(out)
    return out


def rho(params: DensityParams, r):
    """Canonical weight ``rho(r)``; the reciprocal of :func:`inverse_rho`."""
    inv = inverse_rho(params, r)
    if np.ndim(r) == 0:
        return 1.0 / inv
    return 1.0 / np.asarray(inv)


def rho_function(params: DensityParams) -> Callable:
    """Bind ``params`` into a plain callable ``r -> rho(r)`` for the solver."""

    def _rho(r):
        return rho(params, r)

    return _rho


@dataclass(frozen=True)
class EnvelopeSample:
    """Outcome of one envelope comparison.

    ``passed`` is None for rejected samples (outside the family's region of
    validity), in which case ``reason`` says why and ``slack`` is NaN.
    ``slack`` is relative: min(inv/lower - 1, upper/inv - 1), so 0 means the
    weight touches the envelope and negative means it violates it.
    """

    r: float
    slack: float
    passed: Optional[bool]
    reason: Optional[str] = None


@dataclass(frozen=True)
class EnvelopeReport:
    family: str
    entries: tuple = field(repr=False, default=())
    worst_slack: float = math.inf
    worst_r: float = math.nan
    n_rejected: int = 0
    passed: bool = True


def _default_envelope_samples() -> np.ndarray:
    # Log-spaced radii on (e, 1e6]; the open left end keeps H1/H2 samples valid.
    return np.geomspace(E * (1.0 + 1e-9), 1.0e6, 4096)


def envelope_check(
    params: DensityParams,
    rho_fn: Optional[Callable] = None,
    samples: Optional[Sequence[float]] = None,
) -> EnvelopeReport:
    """Check a weight against its family envelope on a sample grid.

    Parameters
    ----------
    params : DensityParams
        Supplies the family and the envelope constants.
    rho_fn : callable, optional
        Weight to test, as ``r -> rho(r)``.  Defaults to the canonical
        representative of ``params``.
    samples : sequence of float, optional
        Radii to test.  Defaults to 4096 log-spaced points on (e, 1e6].
        For H1/H2 any sample with ``r <= e`` is rejected (recorded with a
        reason, not counted as a failure); H2Smooth accepts all ``r >= 0``.

    Returns
    -------
    EnvelopeReport
        Per-sample relative slacks, the worst slack with its radius, and an
        overall verdict (every accepted sample within ``ENVELOPE_PASS_TOL``).
    """
    if rho_fn is None:
        rho_fn = rho_function(params)
    if samples is None:
        samples = _default_envelope_samples()
    samples = np.asarray(samples, dtype=float)

    shifted = params.family == FAMILY_H2SMOOTH
    entries = []
    worst_slack = math.inf
    worst_r = math.nan
    n_rejected = 0

    for r_i in samples:
        if r_i < 0.0 or (not shifted and r_i <= E):
            region = "r >= 0" if shifted else "r > e"
            entries.append(
                EnvelopeSample(
                    r=float(r_i),
                    slack=math.nan,
                    passed=None,
                    reason=f"sample outside the family {params.family} region of validity ({region})",
                )
            )
            n_rejected += 1
            continue

        inv = 1.0 / float(rho_fn(r_i))
        if shifted:
            s = r_i + params.r0
            base = s**2 / math.log(s) ** params.alpha
            lower = params.k1 * base
            upper = params.k2 * base
            slack = min(inv / lower - 1.0, upper / inv - 1.0)
        elif params.family == FAMILY_H2:
            base = r_i**2 / math.log(r_i) ** params.alpha
            lower = params.k1 * base
            upper = params.k2 * base
            slack = min(inv / lower - 1.0, upper / inv - 1.0)
        else:
            lower = params.k * math.log(r_i) ** params.alpha * r_i**2
            slack = inv / lower - 1.0

        ok = slack >= -ENVELOPE_PASS_TOL
        entries.append(EnvelopeSample(r=float(r_i), slack=float(slack), passed=bool(ok)))
        if slack < worst_slack:
            worst_slack = float(slack)
            worst_r = float(r_i)

    accepted = [e for e in entries if e.passed is not None]
    passed = bool(accepted) and all(e.passed for e in accepted)
    return EnvelopeReport(
        family=params.family,
        entries=tuple(entries),
        worst_slack=worst_slack,
        worst_r=worst_r,
        n_rejected=n_rejected,
        passed=passed,
    )


def derive_k0(params: DensityParams, margin: float = 0.05) -> float:
    """Safe constant for the shifted one-sided envelope of an H1 weight.

    Returns ``k0`` such that ``1/rho >= k0 (log(r + r0))^alpha (r + r0)^2``
    holds for every ``r >= 0`` with a multiplicative safety margin.  The
    constant is the grid minimum of the ratio of the two sides (dense radii
    plus the analytic tail limit, which for the canonical member equals
    ``k``), shrunk by ``margin``.
    """
    if params.family != FAMILY_H1:
        raise ValueError("derive_k0 applies to the H1 family only")
    if params.k0 is not None:
        return params.k0
    radii = np.concatenate([[0.0], np.geomspace(1.0e-3, 1.0e6, 4096)])
    s = radii + params.r0
    envelope = np.log(s) ** params.alpha * s**2
    ratio = np.asarray(inverse_rho(params, radii)) / envelope
    tail = params.k  # the shifted envelope is exact for the canonical member
    return (1.0 - margin) * float(min(ratio.min(), tail))


def derive_rho_bounds(params: DensityParams, margin: float = 0.05) -> tuple:
    """Bounds ``rho1 <= 1/rho <= rho2`` on the closed ball of radius e.

    Explicit overrides on ``params`` win; otherwise the bounds come from a
    1025-point grid on [0, e], widened outward by ``margin`` on both sides.
    These constants feed the inner-ball branch of the blow-up feasibility
    system.
    """
    if params.rho1 is not None and params.rho2 is not None:
        return params.rho1, params.rho2
    radii = np.linspace(0.0, E, 1025)
    inv = np.asarray(inverse_rho(params, radii))
    return (1.0 - margin) * float(inv.min()), (1.0 + margin) * float(inv.max())

"""Trial configuration records for the one-arm and two-arm designs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .statmath import DomainError


def _check_count(name: str, value) -> int:
    if not isinstance(value, (int,)) or isinstance(value, bool) or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _check_positive(name: str, value) -> float:
    v = float(value)
    if not (math.isfinite(v) and v > 0.0):
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")
    return v


def _check_finite(name: str, value) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class ScenarioOneArm:
    """One-arm trial testing H0: theta <= theta0 with external borrowing.

    ``c`` is the posterior-probability rejection threshold (default
    ``1 - alpha``, the calibration-free setting in which borrowing shifts the
    operating characteristics); ``sigmaE`` defaults to ``sigma``; ``theta1``
    is the fixed alternative at which power is evaluated.
    """

    n: int
    sigma: float
    theta0: float
    alpha: float
    nE: int
    theta1: float
    c: float | None = None
    sigmaE: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", _check_count("n", self.n))
        object.__setattr__(self, "nE", _check_count("nE", self.nE))
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))
        object.__setattr__(self, "theta0", _check_finite("theta0", self.theta0))
        object.__setattr__(self, "theta1", _check_finite("theta1", self.theta1))
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        c = 1.0 - alpha if self.c is None else float(self.c)
        if not 0.0 <= c < 1.0:
            raise DomainError(f"c must lie in [0, 1), got {self.c!r}")
        object.__setattr__(self, "c", c)
        sigmaE = self.sigma if self.sigmaE is None else _check_positive("sigmaE", self.sigmaE)
        object.__setattr__(self, "sigmaE", sigmaE)
        if not self.theta1 > self.theta0:
            raise DomainError(
                f"theta1 must exceed theta0, got theta1={self.theta1} theta0={self.theta0}")

    @property
    def se(self) -> float:
        """Standard error of the current sample mean."""
        return self.sigma / math.sqrt(self.n)

    @property
    def seE(self) -> float:
        """Standard error of the external sample mean."""
        return self.sigmaE / math.sqrt(self.nE)


@dataclass(frozen=True)
class ScenarioTwoArm:
    """Two-arm trial testing H0: theta_t - theta_c <= 0, with external data
    borrowed into the control arm only (the treatment arm always carries a
    flat prior).

    ``theta1`` is the treatment-minus-control effect at which power is
    evaluated; defaults for ``c`` and ``sigmaE`` mirror the one-arm record.
    """

    nc: int
    nt: int
    nE: int
    sigma: float
    theta1: float
    alpha: float
    c: float | None = None
    sigmaE: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "nc", _check_count("nc", self.nc))
        object.__setattr__(self, "nt", _check_count("nt", self.nt))
        object.__setattr__(self, "nE", _check_count("nE", self.nE))
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))
        theta1 = _check_finite("theta1", self.theta1)
        if not theta1 > 0.0:
            raise DomainError(f"theta1 must be positive, got {self.theta1!r}")
        object.__setattr__(self, "theta1", theta1)
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        c = 1.0 - alpha if self.c is None else float(self.c)
        if not 0.0 <= c < 1.0:
            raise DomainError(f"c must lie in [0, 1), got {self.c!r}")
        object.__setattr__(self, "c", c)
        sigmaE = self.sigma if self.sigmaE is None else _check_positive("sigmaE", self.sigmaE)
        object.__setattr__(self, "sigmaE", sigmaE)

    @property
    def seE(self) -> float:
        return self.sigmaE / math.sqrt(self.nE)

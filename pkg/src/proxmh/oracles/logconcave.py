"""Black-box rejection sampler for one-dimensional log-concave densities.

Envelope: flat cap at the mode height over ``[xl, xr]`` plus two exponential
tails. ``xl`` and ``xr`` are the points where the log-density has dropped by
one unit from the mode; the tail slopes are backward secants ending there,
which bound the log-density from above beyond ``xl``/``xr`` by concavity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import NotLogConcaveError, OracleError

MAX_ATTEMPTS = 10**6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _h(fn, t):
    v = float(fn(t))
    if math.isnan(v):
        raise NotLogConcaveError(f"log-density is NaN at {t}")
    return v


def locate_mode(log_density: Callable[[float], float], mode_hint: float = 0.0,
                scale: float = 1.0, tol: float = 1e-10) -> float:
    """Maximizer of a concave function: bracket by doubling, then golden section."""
    x0 = float(mode_hint)
    h0 = _h(log_density, x0)
    step = float(scale)
    hp, hm = _h(log_density, x0 + step), _h(log_density, x0 - step)
    if hp <= h0 and hm <= h0:
        lo, hi = x0 - step, x0 + step
    else:
        direction = 1.0 if hp > hm else -1.0
        prev, cur, h_cur = x0, x0 + direction * step, max(hp, hm)
        for _ in range(2000):
            step *= 2.0
            nxt = cur + direction * step
            h_nxt = _h(log_density, nxt)
            if h_nxt <= h_cur:
                break
            prev, cur, h_cur = cur, nxt, h_nxt
        else:
            raise NotLogConcaveError("log-density increases without bound; no mode found")
        lo, hi = sorted((prev, nxt))
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    hc, hd = _h(log_density, c), _h(log_density, d)
    while hi - lo > tol * max(1.0, abs(lo) + abs(hi)):
        if hc >= hd:
            hi, d, hd = d, c, hc
            c = hi - _GOLDEN * (hi - lo)
            hc = _h(log_density, c)
        else:
            lo, c, hc = c, d, hd
            d = lo + _GOLDEN * (hi - lo)
            hd = _h(log_density, d)
    return 0.5 * (lo + hi)


def _drop_point(fn, mode, h_mode, direction, scale):
    """Point on one side of the mode where the log-density has dropped by >= 1."""
    d = scale
    for _ in range(2000):
        if h_mode - _h(fn, mode + direction * d) >= 1.0:
            break
        d *= 2.0
    else:
        raise NotLogConcaveError("log-density does not decay away from the mode")
    lo, hi = 0.5 * d, d
    if h_mode - _h(fn, mode + direction * lo) < 1.0:
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            if h_mode - _h(fn, mode + direction * mid) >= 1.0:
                hi = mid
            else:
                lo = mid
    return mode + direction * hi


@dataclass(frozen=True)
class LogConcaveEnvelope:
    """Three-piece envelope; tail slopes are magnitudes (``inf`` = no tail)."""

    log_density: Callable
    mode: float
    h_mode: float
    left: float
    right: float
    h_left: float
    h_right: float
    slope_left: float
    slope_right: float
    h_cap: float = None

    def __post_init__(self):
        if self.h_cap is None:
            object.__setattr__(self, "h_cap", self.h_mode)

    @classmethod
    def build(cls, log_density, mode_hint=0.0, scale=1.0):
        mode = locate_mode(log_density, mode_hint, scale)
        h_mode = _h(log_density, mode)
        if not math.isfinite(h_mode):
            raise NotLogConcaveError(f"log-density at the mode is {h_mode}")
        base = max(scale * 1e-3, 1e-9 * max(1.0, abs(mode)))
        right = _drop_point(log_density, mode, h_mode, 1.0, base)
        left = _drop_point(log_density, mode, h_mode, -1.0, base)
        h_right, h_left = _h(log_density, right), _h(log_density, left)
        slope_right = cls._secant(log_density, mode, right, h_right)
        slope_left = cls._secant(log_density, mode, left, h_left)
        # the located mode is within the golden-section tolerance of the true one,
        # and |h'| <= the steeper tail slope between the drop points, so lifting
        # the cap by slope * (bracket width) keeps it above the true maximum
        finite = [v for v in (slope_left, slope_right) if math.isfinite(v)]
        lift = (max(finite) if finite else 1.0) * 4e-10 * max(1.0, 2.0 * abs(mode) + scale)
        env = cls(log_density, mode, h_mode, left, right, h_left, h_right, slope_left, slope_right,
                  h_mode + lift)
        env._check_tails()
        return env

    @staticmethod
    def _secant(fn, mode, edge, h_edge):
        if h_edge == -math.inf:
            return math.inf
        delta = 1e-4 * abs(edge - mode)
        inner = edge - math.copysign(delta, edge - mode)
        slope = (_h(fn, inner) - h_edge) / delta
        if not slope > 0:
            raise NotLogConcaveError("log-density is not decreasing away from its mode")
        return slope

    def _check_tails(self):
        width = self.right - self.left
        for k in (0.5, 2.0, 8.0):
            for y in (self.right + k * width, self.left - k * width):
                if _h(self.log_density, y) > self.log_envelope(y) + 1e-9 * (1 + abs(self.h_mode)):
                    raise NotLogConcaveError(f"tangent bound violated at y={y}")

    def log_envelope(self, y):
        if y > self.right:
            return self.h_right - self.slope_right * (y - self.right)
        if y < self.left:
            return self.h_left - self.slope_left * (self.left - y)
        return self.h_cap

    def piece_masses(self):
        """Envelope masses relative to ``exp(h_mode)``: (left tail, cap, right tail)."""
        cap = (self.right - self.left) * math.exp(self.h_cap - self.h_mode)
        tr = 0.0 if self.slope_right == math.inf else math.exp(self.h_right - self.h_mode) / self.slope_right
        tl = 0.0 if self.slope_left == math.inf else math.exp(self.h_left - self.h_mode) / self.slope_left
        return tl, cap, tr

    def sample(self, rng: np.random.Generator, max_attempts: int = MAX_ATTEMPTS):
        """Returns ``(draw, attempts)``."""
        tl, cap, tr = self.piece_masses()
        total = tl + cap + tr
        tol = 1e-9 * (1 + abs(self.h_mode))
        for attempt in range(1, max_attempts + 1):
            v = rng.random() * total
            if v < tl:
                y = self.left + math.log(rng.random()) / self.slope_left
            elif v < tl + cap:
                y = self.left + rng.random() * (self.right - self.left)
            else:
                y = self.right - math.log(rng.random()) / self.slope_right
            h = _h(self.log_density, y)
            env = self.log_envelope(y)
            if h > env + tol:
                raise NotLogConcaveError(f"density exceeds its envelope at y={y}")
            if math.log(rng.random()) <= h - env:
                return y, attempt
        raise OracleError(f"log-concave rejection sampler failed after {max_attempts} attempts",
                          attempts=max_attempts)


def sample_logconcave_1d(log_density: Callable[[float], float], mode_hint: float,
                         rng: np.random.Generator, size=None, scale: float = 1.0,
                         max_attempts: int = MAX_ATTEMPTS):
    """Exact draw(s) from the density ``exp(log_density)``, which must be log-concave.

    With ``size`` an integer the envelope is built once and ``size`` draws are
    returned as an array.

    Raises:
        NotLogConcaveError: when the envelope construction or a proposal
            reveals that the density is not log-concave.
        OracleError: after ``max_attempts`` rejected proposals for one draw.
    """
    env = LogConcaveEnvelope.build(log_density, mode_hint, scale)
    if size is None:
        return env.sample(rng, max_attempts)[0]
    return np.array([env.sample(rng, max_attempts)[0] for _ in range(int(size))])

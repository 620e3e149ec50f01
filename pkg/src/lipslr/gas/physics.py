"""Stationary isothermal pipe flow with the AGA compressibility factor.

Pressures are in Pa and flows in kg/s unless a name says otherwise.  The
pressure function

    F(p) = (alpha p - ln(1 + alpha p)) / alpha^2 + q^2 Rs T (ln(1 + alpha p) - ln p)

(``q`` the mass flux per unit area) is increasing and convex on the admissible
interval ``(|q| sqrt(Rs T), 1/|alpha|)``, and the outlet pressure after
distance ``x`` solves ``F(p) = F(p_u) - Rs T q |q| theta x / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..model import NormSpec
from ..oracles import Oracle, register

BAR = 1e5
WEIGHT_FLOOR = 1e-12


class PipeInfeasibleError(ValueError):
    """No outlet pressure inside the admissible interval solves the pipe law."""


class DomainError(ValueError):
    """Pressure outside the admissible open interval."""


@dataclass(frozen=True)
class GasConstants:
    R_s: float = 518.26
    T: float = 288.15
    p_c: float = 46.5e5
    T_c: float = 190.6

    @property
    def alpha(self) -> float:
        return 0.257 / self.p_c - 0.533 * self.T_c / (self.p_c * self.T)

    @property
    def rst(self) -> float:
        return self.R_s * self.T

    @property
    def p_max(self) -> float:
        """Upper end ``1/|alpha|`` of the admissible pressure interval (Pa)."""
        return 1.0 / abs(self.alpha)

    def to_dict(self) -> dict:
        return {"R_s": self.R_s, "T": self.T, "p_c": self.p_c, "T_c": self.T_c}


@dataclass(frozen=True)
class PipeParams:
    length: float
    diameter: float
    friction: float

    def __post_init__(self):
        if not (self.length > 0 and self.diameter > 0 and self.friction > 0):
            raise ValueError("pipe length, diameter and friction must be positive")

    @property
    def theta(self) -> float:
        return self.friction / self.diameter

    @property
    def area(self) -> float:
        return math.pi * self.diameter ** 2 / 4.0

    def to_dict(self) -> dict:
        return {"length": self.length, "diameter": self.diameter, "friction": self.friction}


def _check_domain(p, flux, gc: GasConstants):
    if not (abs(flux) * math.sqrt(gc.rst) < p < gc.p_max):
        raise DomainError(f"pressure {p:.6g} Pa outside the admissible interval for flux {flux:.6g}")


def F(p: float, flux: float, gc: GasConstants = GasConstants()) -> float:
    _check_domain(p, flux, gc)
    return _kernels.pressure_F(p, flux, gc.rst, gc.alpha)


def F_prime(p: float, flux: float, gc: GasConstants = GasConstants()) -> float:
    _check_domain(p, flux, gc)
    return _kernels.pressure_dF(p, flux, gc.rst, gc.alpha)


def F_second(p: float, flux: float, gc: GasConstants = GasConstants()) -> float:
    _check_domain(p, flux, gc)
    a = gc.alpha
    q2 = flux * flux * gc.rst
    num = p * p - q2
    den = p * (1.0 + a * p)
    dden = 1.0 + 2.0 * a * p
    return (2.0 * p * den - num * dden) / (den * den)


@dataclass(frozen=True)
class Pipe:
    params: PipeParams
    constants: GasConstants = GasConstants()
    rtol: float = 1e-10
    max_iter: int = 200

    def _solve(self, p_start, flux, x):
        gc = self.constants
        p, status = _kernels.pipe_pressure(float(p_start), float(flux), float(x),
                                           self.params.theta, gc.rst, gc.alpha,
                                           self.rtol, self.max_iter)
        if status != _kernels.PIPE_OK:
            raise PipeInfeasibleError(
                f"no admissible pressure for p_start={p_start:.6g} Pa, flux={flux:.6g}, x={x:.6g}"
                + (" (no convergence)" if status == _kernels.PIPE_NOCONV else ""))
        return p

    def p_out(self, p_u: float, q: float, x: float | None = None) -> float:
        """Pressure at distance ``x`` (default: the whole pipe) for inlet ``p_u`` and mass flow ``q``."""
        x = self.params.length if x is None else x
        return self._solve(p_u, q / self.params.area, x)

    def p_in(self, p_v: float, q: float, x: float | None = None) -> float:
        """Inlet pressure that yields outlet ``p_v``; uses ``p_u(x, p, q) = p(x, p, -q)``."""
        x = self.params.length if x is None else x
        return self._solve(p_v, -q / self.params.area, x)

    def _flux_derivs(self, p_u, flux, x=None):
        gc = self.constants
        x = self.params.length if x is None else x
        p = self._solve(p_u, flux, x)
        dfp = _kernels.pressure_dF(p, flux, gc.rst, gc.alpha)
        dfu = _kernels.pressure_dF(p_u, flux, gc.rst, gc.alpha)
        a = gc.alpha
        log_term = math.log1p(a * p_u) - math.log(p_u) - math.log1p(a * p) + math.log(p)
        dq = (2.0 * flux * gc.rst * log_term - gc.rst * abs(flux) * self.params.theta * x) / dfp
        return p, dfu / dfp, dq

    def dpv_dpu(self, p_u: float, q: float, x: float | None = None) -> float:
        return self._flux_derivs(p_u, q / self.params.area, x)[1]

    def dpv_dq(self, p_u: float, q: float, x: float | None = None) -> float:
        """Derivative w.r.t. mass flow (Pa per kg/s)."""
        return self._flux_derivs(p_u, q / self.params.area, x)[2] / self.params.area

    def admissible(self, p: float, q: float) -> bool:
        flux = q / self.params.area
        return abs(flux) * math.sqrt(self.constants.rst) < p < self.constants.p_max

    # units used inside the optimization model: bar and kg/s

    def lipschitz_weights(self, pu_lo: float, pu_hi: float, q_lo: float, q_hi: float) -> tuple:
        """``(w_p, w_q)`` for a weighted 1-norm in bar and kg/s, valid on the box."""
        a = self.params.area
        if q_hi >= 0.0:
            w_p = self.dpv_dpu(pu_lo * BAR, q_hi)
        else:
            w_p = self.dpv_dpu(pu_hi * BAR, q_hi)
        cands = [0.0]
        if q_hi >= 0.0:
            cands.append(abs(self._flux_derivs(pu_lo * BAR, q_hi / a)[2]))
        if q_lo < 0.0:
            pv = self.p_out(pu_lo * BAR, q_lo)
            cands.append(abs(self._flux_derivs(pv, -q_lo / a)[2]))
        w_q = max(cands) * 1e-5 / a
        # relative pad absorbs rounding where the bound is attained
        pad = 1.0 + 1e-9
        return max(w_p * pad, WEIGHT_FLOOR), max(w_q * pad, WEIGHT_FLOOR)

    def outlet_range(self, pu_lo, pu_hi, q_lo, q_hi) -> tuple:
        """Extreme outlet pressures (bar) over the box, by monotonicity in both arguments."""
        return self.p_out(pu_lo * BAR, q_hi) / BAR, self.p_out(pu_hi * BAR, q_lo) / BAR

    def keep_box(self, pu_lo, pu_hi, q_lo, q_hi, pv_lo, pv_hi) -> bool:
        """False when the box provably holds no point with an outlet inside ``[pv_lo, pv_hi]`` (bar)."""
        if q_lo >= 0.0:
            try:
                best = self.p_out(pu_hi * BAR, q_lo) / BAR
            except PipeInfeasibleError:
                return False
            if best < pv_lo:
                return False
        if q_hi <= 0.0:
            try:
                worst = self.p_out(pu_lo * BAR, q_hi) / BAR
            except PipeInfeasibleError:
                return False
            if worst > pv_hi:
                return False
        return True

    def big_m(self, pu_lo, pu_hi, q_lo, q_hi, pv_lo, pv_hi) -> float:
        """Pipe Big-M in bar/kg/s from bounds alone."""
        qmax = max(q_hi, abs(q_lo))
        return max(pu_hi - pu_lo, q_hi - q_lo, self.constants.p_max / BAR - pv_lo,
                   pv_hi - qmax / self.params.area * math.sqrt(self.constants.rst) / BAR)


@register("gas-pipe")
class GasPipeOracle(Oracle):
    """Outlet pressure (bar) from inlet pressure (bar) and mass flow (kg/s).

    With ``fixed_flow`` set the input is the inlet pressure alone.
    """

    def __init__(self, length, diameter, friction, constants=None, fixed_flow=None,
                 rtol=1e-10, max_iter=200):
        gc = GasConstants(**constants) if isinstance(constants, dict) else (constants or GasConstants())
        self.pipe = Pipe(PipeParams(float(length), float(diameter), float(friction)), gc,
                         float(rtol), int(max_iter))
        self.fixed_flow = None if fixed_flow is None else float(fixed_flow)

    def params(self):
        d = self.pipe.params.to_dict()
        d["constants"] = self.pipe.constants.to_dict()
        if self.fixed_flow is not None:
            d["fixed_flow"] = self.fixed_flow
        d["rtol"] = self.pipe.rtol
        d["max_iter"] = self.pipe.max_iter
        return d

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        if self.fixed_flow is not None:
            return float(x[0]), self.fixed_flow
        return float(x[0]), float(x[1])

    def __call__(self, x):
        p_u, q = self._split(x)
        return self.pipe.p_out(p_u * BAR, q) / BAR

    def local_norm(self, lower, upper) -> NormSpec:
        if self.fixed_flow is not None:
            q_lo = q_hi = self.fixed_flow
        else:
            q_lo, q_hi = float(lower[1]), float(upper[1])
        w_p, w_q = self.pipe.lipschitz_weights(float(lower[0]), float(upper[0]), q_lo, q_hi)
        weights = (w_p,) if self.fixed_flow is not None else (w_p, w_q)
        return NormSpec("weighted-one-norm", weights)

    def keep_box(self, lower, upper, pv_lo, pv_hi) -> bool:
        if self.fixed_flow is not None:
            q_lo = q_hi = self.fixed_flow
        else:
            q_lo, q_hi = float(lower[1]), float(upper[1])
        return self.pipe.keep_box(float(lower[0]), float(upper[0]), q_lo, q_hi, pv_lo, pv_hi)

"""Oracle registry.

Oracles are callables on the input vector of a binding, identified by a
registry name plus a JSON-serializable parameter block.  Optional methods,
picked up when an instance file is loaded:

``local_norm(lower, upper)``
    a :class:`~lipslr.model.NormSpec` valid on the given sub-box;
``keep_box(lower, upper, out_lo, out_hi)``
    False when the box provably holds no feasible point;
``batch(X)``
    values at the rows of ``X``.
"""
from __future__ import annotations

import importlib
import math

import numpy as np

_REGISTRY: dict = {}
# registries provided by subpackages, imported on first use
_LAZY = {
    "gas-pipe": "lipslr.gas.physics",
    "bilevel-phi": "lipslr.bilevel.oracles",
    "bilevel-quadratic": "lipslr.bilevel.oracles",
}


def register(name: str):
    def deco(cls):
        cls.registry = name
        _REGISTRY[name] = cls
        return cls
    return deco


def make_oracle(name: str, params: dict):
    if name not in _REGISTRY and name in _LAZY:
        importlib.import_module(_LAZY[name])
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown oracle registry name {name!r}") from None
    return cls.from_params(params)


def registry_names() -> list[str]:
    return sorted(set(_REGISTRY) | set(_LAZY))


class Oracle:
    registry = ""
    thread_safe = True

    @classmethod
    def from_params(cls, params: dict):
        return cls(**params)

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"registry": self.registry, "params": self.params()}

    def __call__(self, x) -> float:
        raise NotImplementedError


@register("polynomial")
class Polynomial(Oracle):
    """``sum_k coef_k * prod_l x_l ** exps_k[l]``.

    ``terms`` is a list of ``[coef, [e_1, ..., e_l]]``; an empty exponent
    list or all zeros gives a constant.
    """

    def __init__(self, terms):
        self.terms = [(float(c), tuple(int(e) for e in exps)) for c, exps in terms]

    def params(self):
        return {"terms": [[c, list(e)] for c, e in self.terms]}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for c, exps in self.terms:
            v = c
            for xl, e in zip(x, exps):
                if e:
                    v *= xl ** e
            total += v
        return total

    def batch(self, X) -> np.ndarray:
        """Values at the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros(X.shape[0])
        for c, exps in self.terms:
            v = np.full(X.shape[0], c)
            for l, e in enumerate(exps):
                if e:
                    v = v * X[:, l] ** e
            total += v
        return total


@register("sum-of-sines")
class SumOfSines(Oracle):
    """``sum_l a_l sin(w_l x_l + phi_l)``; Lipschitz in the 1-norm with weights ``|a_l w_l|``."""

    def __init__(self, amplitude, frequency, phase=None):
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.frequency = np.asarray(frequency, dtype=float)
        self.phase = np.zeros_like(self.amplitude) if phase is None else np.asarray(phase, dtype=float)

    def params(self):
        return {"amplitude": self.amplitude.tolist(), "frequency": self.frequency.tolist(),
                "phase": self.phase.tolist()}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.amplitude * np.sin(self.frequency * x + self.phase)))

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.sum(self.amplitude * np.sin(self.frequency * X + self.phase), axis=1)

    def gradient_weights(self) -> np.ndarray:
        return np.abs(self.amplitude * self.frequency)


def oracle_from_callable(fn, thread_safe: bool = True) -> Oracle:
    """Wrap a plain Python callable (not serializable)."""

    class _Wrapped(Oracle):
        registry = "callable"

        def __call__(self, x):
            return float(fn(np.asarray(x, dtype=float)))

        def params(self):
            raise TypeError("callable oracles cannot be serialized")

    w = _Wrapped()
    w.thread_safe = thread_safe
    return w


def is_finite_value(v) -> bool:
    return isinstance(v, float) and math.isfinite(v)

"""Second-order jets in six variables.

A :class:`Jet2` holds the value, gradient and Hessian of a (possibly
array-valued) field at the origin.  The value may have any shape ``S``;
the gradient then has shape ``S + (6,)`` and the Hessian ``S + (6, 6)``.
Every function in this module also accepts plain ndarrays, which behave
as fields whose derivatives are all zero, so downstream tensor code is
written once and runs on either scalar type.

Differentiating a 2-jet yields a 1-jet: its Hessian is unknown and stored
as ``None``.  Products involving a truncated operand are truncated to the
lowest available order, so a formula that silently needs a third
derivative of the input fails loudly instead of returning garbage.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Union

import numpy as np

from .errors import DomainError, SingularMetric, TruncationError

DIM = 6

ArrayOrJet = Union[np.ndarray, "Jet2"]

_DERIV_LETTERS = "ZYXWVUTSRQ"


class Jet2:
    """Value, gradient and Hessian of a field at the base point."""

    __array_ufunc__ = None
    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad=None, hess=None):
        val = np.asarray(val, dtype=float)
        if grad is not None:
            grad = np.asarray(grad, dtype=float)
            if grad.shape != val.shape + (DIM,):
                raise ValueError(f"gradient shape {grad.shape} does not match value {val.shape}")
        if hess is not None:
            if grad is None:
                raise ValueError("a Hessian requires a gradient")
            hess = np.asarray(hess, dtype=float)
            if hess.shape != val.shape + (DIM, DIM):
                raise ValueError(f"Hessian shape {hess.shape} does not match value {val.shape}")
            hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
        self.val = val
        self.grad = grad
        self.hess = hess

    @classmethod
    def _raw(cls, val, grad, hess) -> "Jet2":
        out = object.__new__(cls)
        out.val, out.grad, out.hess = val, grad, hess
        return out

    @classmethod
    def constant(cls, val) -> "Jet2":
        val = np.asarray(val, dtype=float)
        return cls._raw(val, np.zeros(val.shape + (DIM,)), np.zeros(val.shape + (DIM, DIM)))

    @classmethod
    def variable(cls, index: int, value: float = 0.0) -> "Jet2":
        """The coordinate function x_index shifted to ``value`` at the origin."""
        grad = np.zeros(DIM)
        grad[index] = 1.0
        return cls._raw(np.asarray(float(value)), grad, np.zeros((DIM, DIM)))

    @property
    def order(self) -> int:
        if self.hess is not None:
            return 2
        return 1 if self.grad is not None else 0

    @property
    def shape(self) -> tuple:
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    def truncate(self, order: int) -> "Jet2":
        return Jet2._raw(
            self.val,
            self.grad if order >= 1 else None,
            self.hess if order >= 2 else None,
        )

    def __getitem__(self, key) -> "Jet2":
        if key is Ellipsis or (isinstance(key, tuple) and Ellipsis in key):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return Jet2._raw(
            self.val[key],
            None if self.grad is None else self.grad[key],
            None if self.hess is None else self.hess[key],
        )

    def transpose(self, axes) -> "Jet2":
        axes = tuple(axes)
        n = len(axes)
        return Jet2._raw(
            self.val.transpose(axes),
            None if self.grad is None else self.grad.transpose(axes + (n,)),
            None if self.hess is None else self.hess.transpose(axes + (n, n + 1)),
        )

    def reshape(self, shape) -> "Jet2":
        shape = tuple(shape)
        return Jet2._raw(
            self.val.reshape(shape),
            None if self.grad is None else self.grad.reshape(shape + (DIM,)),
            None if self.hess is None else self.hess.reshape(shape + (DIM, DIM)),
        )

    def __neg__(self) -> "Jet2":
        return Jet2._raw(
            -self.val,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __add__(self, other) -> "Jet2":
        return jet_add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return jet_add(self, -_as_operand(other))

    def __rsub__(self, other) -> "Jet2":
        return jet_add(-self, other)

    def __mul__(self, other) -> "Jet2":
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return jet_mul(self, jet_smooth(other, "reciprocal"))
        return jet_mul(self, 1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other) -> "Jet2":
        return jet_mul(jet_smooth(self, "reciprocal"), other)

    def __repr__(self) -> str:
        return f"Jet2(shape={self.shape}, order={self.order})"


def _as_operand(x):
    return x if isinstance(x, Jet2) else np.asarray(x, dtype=float)


def _lift(x: np.ndarray, axes: int) -> np.ndarray:
    return x.reshape(x.shape + (1,) * axes)


def _broadcast_deriv(d: np.ndarray, val_shape: tuple, axes: int) -> np.ndarray:
    return np.broadcast_to(d, val_shape + d.shape[d.ndim - axes:])


def is_jet(x) -> bool:
    return isinstance(x, Jet2)


def value(x) -> np.ndarray:
    """Base-point value of a jet, or the array itself."""
    return x.val if isinstance(x, Jet2) else np.asarray(x, dtype=float)


def jet_add(a, b) -> Jet2:
    """Componentwise sum; plain arrays count as constants."""
    a, b = _as_operand(a), _as_operand(b)
    if not isinstance(a, Jet2):
        a, b = b, a
    if not isinstance(b, Jet2):
        val = a.val + b
        grad = None if a.grad is None else _broadcast_deriv(a.grad, val.shape, 1).copy()
        hess = None if a.hess is None else _broadcast_deriv(a.hess, val.shape, 2).copy()
        return Jet2._raw(val, grad, hess)
    val = a.val + b.val
    order = min(a.order, b.order)
    grad = a.grad + b.grad if order >= 1 else None
    hess = a.hess + b.hess if order >= 2 else None
    return Jet2._raw(val, grad, hess)


def jet_mul(a, b) -> Jet2:
    """Elementwise product with the second-order Leibniz rule."""
    a, b = _as_operand(a), _as_operand(b)
    if not isinstance(a, Jet2):
        a, b = b, a
    if not isinstance(b, Jet2):
        return Jet2._raw(
            a.val * b,
            None if a.grad is None else a.grad * _lift(b, 1),
            None if a.hess is None else a.hess * _lift(b, 2),
        )
    order = min(a.order, b.order)
    val = a.val * b.val
    grad = hess = None
    if order >= 1:
        grad = _lift(a.val, 1) * b.grad + _lift(b.val, 1) * a.grad
    if order >= 2:
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        hess = (
            _lift(a.val, 2) * b.hess
            + _lift(b.val, 2) * a.hess
            + cross
            + np.swapaxes(cross, -1, -2)
        )
    return Jet2._raw(val, grad, hess)


def _reciprocal(x):
    if np.any(x == 0):
        raise DomainError("reciprocal of zero")
    return 1.0 / x, -1.0 / x**2, 2.0 / x**3


def _sqrt(x):
    if np.any(x <= 0):
        raise DomainError("sqrt requires a positive argument")
    r = np.sqrt(x)
    return r, 0.5 / r, -0.25 / (x * r)


def _log(x):
    if np.any(x <= 0):
        raise DomainError("log requires a positive argument")
    return np.log(x), 1.0 / x, -1.0 / x**2


SMOOTH: dict[str, Callable] = {"reciprocal": _reciprocal, "sqrt": _sqrt, "log": _log}


def jet_smooth(a, f: str):
    """Apply ``reciprocal``, ``sqrt`` or ``log`` elementwise via the chain rule."""
    try:
        fn = SMOOTH[f]
    except KeyError:
        raise ValueError(f"unknown smooth function {f!r}") from None
    if not isinstance(a, Jet2):
        return fn(np.asarray(a, dtype=float))[0]
    f0, f1, f2 = fn(a.val)
    grad = hess = None
    if a.grad is not None:
        grad = _lift(f1, 1) * a.grad
    if a.hess is not None:
        hess = _lift(f1, 2) * a.hess + _lift(f2, 2) * a.grad[..., :, None] * a.grad[..., None, :]
    return Jet2._raw(np.asarray(f0), grad, hess)


def reciprocal(a):
    return jet_smooth(a, "reciprocal")


def sqrt(a):
    return jet_smooth(a, "sqrt")


def log(a):
    return jet_smooth(a, "log")


def einsum(subscripts: str, *operands):
    """``np.einsum`` over arrays and jets, applying the product rule.

    Subscripts must be in explicit ``inputs->output`` form.
    """
    optimize = "greedy" if len(operands) > 2 else False
    if not any(isinstance(o, Jet2) for o in operands):
        return np.einsum(subscripts, *operands, optimize=optimize)
    spec = subscripts.replace(" ", "")
    if "->" not in spec:
        raise ValueError("jet einsum needs explicit output subscripts")
    lhs, out = spec.split("->")
    ins = lhs.split(",")
    free = [c for c in _DERIV_LETTERS if c not in spec]
    d, e = free[0], free[1]
    vals = [value(o) for o in operands]
    jets = [k for k, o in enumerate(operands) if isinstance(o, Jet2)]
    order = min(operands[k].order for k in jets)

    def term(parts, arrays, suffix):
        return np.einsum(",".join(parts) + "->" + out + suffix, *arrays, optimize=optimize)

    val = np.einsum(spec, *vals, optimize=optimize)
    grad = hess = None
    if order >= 1:
        grad = 0.0
        for k in jets:
            parts, arrays = list(ins), list(vals)
            parts[k] += d
            arrays[k] = operands[k].grad
            grad = grad + term(parts, arrays, d)
    if order >= 2:
        hess = 0.0
        for k in jets:
            parts, arrays = list(ins), list(vals)
            parts[k] += d + e
            arrays[k] = operands[k].hess
            hess = hess + term(parts, arrays, d + e)
        for a, b in combinations(jets, 2):
            parts, arrays = list(ins), list(vals)
            parts[a] += d
            parts[b] += e
            arrays[a] = operands[a].grad
            arrays[b] = operands[b].grad
            cross = term(parts, arrays, d + e)
            hess = hess + cross + np.swapaxes(cross, -1, -2)
    return Jet2._raw(np.asarray(val), grad, hess)


def transpose(x, axes):
    if isinstance(x, Jet2):
        return x.transpose(axes)
    return np.transpose(x, axes)


def partial(x):
    """Coordinate derivative with the new index placed first.

    Plain arrays are constant fields, so their derivative is zero.
    """
    if not isinstance(x, Jet2):
        x = np.asarray(x, dtype=float)
        return np.zeros((DIM,) + x.shape)
    if x.grad is None:
        raise TruncationError("derivative requested beyond the stored jet order")
    val = np.moveaxis(x.grad, -1, 0)
    grad = None if x.hess is None else np.moveaxis(x.hess, -2, 0)
    return Jet2._raw(val, grad, None)


def inv(m):
    """Inverse of a 6x6 matrix field."""
    m0 = value(m)
    try:
        a = np.linalg.inv(m0)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(str(exc)) from None
    if not np.all(np.isfinite(a)) or np.linalg.cond(m0) > 1e13:
        raise SingularMetric("matrix is numerically singular")
    if not isinstance(m, Jet2):
        return a
    grad = hess = None
    if m.grad is not None:
        x = np.einsum("ij,jkm->ikm", a, m.grad)
        grad = -np.einsum("ikm,kl->ilm", x, a)
    if m.hess is not None:
        p = np.einsum("ijm,jkn,kl->ilmn", x, x, a, optimize="greedy")
        hess = p + np.swapaxes(p, -1, -2) - np.einsum("ij,jkmn,kl->ilmn", a, m.hess, a, optimize="greedy")
    return Jet2._raw(a, grad, hess)


def zeros(shape, like=None):
    """Zero field of the given shape, a jet when ``like`` is one."""
    z = np.zeros(shape)
    if isinstance(like, Jet2):
        order = like.order
        return Jet2._raw(
            z,
            np.zeros(z.shape + (DIM,)) if order >= 1 else None,
            np.zeros(z.shape + (DIM, DIM)) if order >= 2 else None,
        )
    return z


def polynomial_jet(c0, c1, c2) -> Jet2:
    """Jet of ``c0 + c1.x + (1/2) x.c2.x``; trailing axes of c1/c2 are the variables."""
    return Jet2(c0, c1, c2)

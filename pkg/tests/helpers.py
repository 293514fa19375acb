"""Shared oracles for the test suite."""

from __future__ import annotations

from itertools import permutations

import numpy as np

from iiaflow import jets
from iiaflow.jets import DIM, Jet2
from iiaflow.multilinear import form_indices, perm_sign, unpack_form


class Quadratic:
    """p(x) = c0 + c1.x + x.c2.x / 2, known exactly."""

    def __init__(self, rng: np.random.Generator, shift: float = 0.0):
        self.c0 = float(rng.normal()) + shift
        self.c1 = rng.normal(size=DIM)
        a = rng.normal(size=(DIM, DIM))
        self.c2 = a + a.T

    def __call__(self, x: np.ndarray) -> float:
        return self.c0 + self.c1 @ x + 0.5 * x @ self.c2 @ x

    def jet(self) -> Jet2:
        return jets.polynomial_jet(self.c0, self.c1, self.c2)


def random_expression(rng: np.random.Generator, depth: int = 3):
    """A random composition of jet operations over quadratic leaves.

    Returns ``f(leaf_fn)`` where ``leaf_fn(q)`` turns a :class:`Quadratic`
    into either a float (evaluation at a point) or a jet (at the origin).
    Arguments to reciprocal/sqrt/log are kept away from zero by squaring.
    """
    if depth == 0:
        q = Quadratic(rng)
        return lambda leaf: leaf(q)
    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    op = rng.integers(7)
    if op == 0:
        return lambda leaf: a(leaf) + b(leaf)
    if op == 1:
        return lambda leaf: a(leaf) - b(leaf)
    if op == 2:
        return lambda leaf: a(leaf) * b(leaf)
    if op == 3:
        return lambda leaf: a(leaf) / (1.0 + b(leaf) * b(leaf))
    if op == 4:
        return lambda leaf: jets.sqrt(2.0 + a(leaf) * a(leaf))
    if op == 5:
        return lambda leaf: jets.log(1.5 + b(leaf) * b(leaf))
    return lambda leaf: jets.reciprocal(1.0 + a(leaf) * a(leaf)) * b(leaf)


def central_differences(f, h: float = 1e-4):
    """Gradient and Hessian of a scalar function at the origin by central differences."""
    e = np.eye(DIM) * h
    f0 = f(np.zeros(DIM))
    grad = np.array([(f(e[i]) - f(-e[i])) / (2 * h) for i in range(DIM)])
    hess = np.zeros((DIM, DIM))
    for i in range(DIM):
        hess[i, i] = (f(e[i]) - 2 * f0 + f(-e[i])) / h**2
        for j in range(i + 1, DIM):
            hess[i, j] = hess[j, i] = (
                f(e[i] + e[j]) - f(e[i] - e[j]) - f(-e[i] + e[j]) + f(-e[i] - e[j])
            ) / (4 * h**2)
    return f0, grad, hess


def richardson_differences(f, h: float = 2e-3):
    """Central differences at h and h/2 combined to cancel the O(h^2) error."""
    coarse = central_differences(f, h)
    fine = central_differences(f, h / 2)
    return fine[0], *((4 * b - a) / 3 for a, b in zip(coarse[1:], fine[1:]))


def jet_vs_fd_error(expr, h: float = 1e-4, richardson: bool = False) -> float:
    """Largest relative error of the jet against central differences."""
    jet = expr(lambda q: q.jet())

    def scalar(x):
        return float(expr(lambda q: q(x)))

    f0, grad, hess = richardson_differences(scalar) if richardson else central_differences(scalar, h)
    scale = max(1.0, abs(f0), np.abs(grad).max(), np.abs(hess).max())
    err = max(
        abs(float(jet.val) - f0),
        np.abs(jet.grad - grad).max(),
        np.abs(jet.hess - hess).max(),
    )
    return err / scale


def alternate_by_loops(t: np.ndarray) -> np.ndarray:
    """Signed permutation average written out explicitly."""
    p = t.ndim
    out = np.zeros_like(t)
    perms = list(permutations(range(p)))
    for idx in np.ndindex(t.shape):
        total = 0.0
        for perm in perms:
            total += perm_sign(perm) * t[tuple(idx[k] for k in perm)]
        out[idx] = total / len(perms)
    return out


def random_form(rng: np.random.Generator, k: int) -> np.ndarray:
    return unpack_form(rng.normal(size=len(form_indices(k))), k)


def rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    return float(np.abs(a - b).max(initial=0.0)) / scale


# A tiny exterior algebra on basis monomials, independent of the dense code.


def monomials(f: np.ndarray, tol: float = 0.0) -> dict[tuple, float]:
    """Sorted-index monomials of a dense antisymmetric array."""
    out = {}
    for idx in np.ndindex(f.shape):
        if list(idx) == sorted(set(idx)) and len(set(idx)) == len(idx) and abs(f[idx]) > tol:
            out[idx] = float(f[idx])
    return out


def _sort_sign(idx: tuple) -> tuple[int, tuple]:
    if len(set(idx)) < len(idx):
        return 0, idx
    order = sorted(range(len(idx)), key=lambda k: idx[k])
    return perm_sign(order), tuple(sorted(idx))


def mono_wedge(a: dict, b: dict) -> dict:
    out: dict[tuple, float] = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            s, key = _sort_sign(ia + ib)
            if s:
                out[key] = out.get(key, 0.0) + s * ca * cb
    return out


def mono_interior(j: int, a: dict) -> dict:
    out: dict[tuple, float] = {}
    for idx, c in a.items():
        if j in idx:
            p = idx.index(j)
            key = idx[:p] + idx[p + 1:]
            out[key] = out.get(key, 0.0) + (-1) ** p * c
    return out


def hitchin_K_by_monomials(phi: np.ndarray) -> np.ndarray:
    """K^i_j from iota_{e_j} phi ^ phi, reading off the coefficient of the
    monomial complementary to e^i with the orientation sign of (i, rest)."""
    m = monomials(phi)
    K = np.zeros((DIM, DIM))
    for j in range(DIM):
        five = mono_wedge(mono_interior(j, m), m)
        for idx, c in five.items():
            (i,) = set(range(DIM)) - set(idx)
            s, _ = _sort_sign((i,) + idx)
            K[i, j] += s * c
    return K

"""Dense tensors over a 6-dimensional fiber.

Components are stored densely with shape ``(6,) * rank``.  A p-form keeps
its fully antisymmetric coefficients directly, so ``phi[i, j, k]`` is the
coefficient of ``dx^i dx^j dx^k`` in ``(1/p!) phi_ijk dx^i ^ dx^j ^ dx^k``.
Every helper accepts ndarrays or :class:`~iiaflow.jets.Jet2` components.

A :class:`Tensor` pairs components with a variance string, one character
per slot: ``"u"`` for contravariant (upper) and ``"d"`` for covariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial

import numpy as np

from . import jets
from .errors import RankError, SlotError
from .jets import DIM, einsum

_LETTERS = "abcdefghijklmnop"


def perm_sign(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def signed_permutations(n: int) -> tuple:
    return tuple((perm_sign(p), p) for p in permutations(range(n)))


@lru_cache(maxsize=None)
def _epsilon() -> np.ndarray:
    eps = np.zeros((DIM,) * DIM)
    for s, p in signed_permutations(DIM):
        eps[p] = s
    eps.setflags(write=False)
    return eps


def epsilon() -> np.ndarray:
    """Permutation symbol with eps[0, 1, 2, 3, 4, 5] = +1."""
    return _epsilon()


def alt(x):
    """Full antisymmetrization with the 1/p! weight (a projector)."""
    p = jets.value(x).ndim
    if p <= 1:
        return x
    total = 0.0
    for s, perm in signed_permutations(p):
        term = jets.transpose(x, perm)
        total = total + (term if s > 0 else -term)
    return total * (1.0 / factorial(p))


def wedge_forms(a, b):
    """Wedge of a p-form and a q-form given as component arrays."""
    p, q = jets.value(a).ndim, jets.value(b).ndim
    if p + q > DIM:
        raise RankError(f"wedge of degrees {p} and {q} exceeds dimension {DIM}")
    ia, ib = _LETTERS[:p], _LETTERS[p:p + q]
    prod = einsum(f"{ia},{ib}->{ia}{ib}", a, b)
    return alt(prod) * (factorial(p + q) / (factorial(p) * factorial(q)))


def interior_form(v, f):
    """Contract a vector into the first slot of a form."""
    k = jets.value(f).ndim
    if k < 1:
        raise RankError("interior product of a 0-form")
    rest = _LETTERS[1:k]
    return einsum(f"a,a{rest}->{rest}", v, f)


def pairing_form(f5):
    """v^i = (1/5!) eps^{i a1..a5} f_{a1..a5}."""
    if jets.value(f5).ndim != 5:
        raise RankError("Levi-Civita pairing needs a 5-form")
    return einsum("iabcde,abcde->i", epsilon(), f5) * (1.0 / factorial(5))


@lru_cache(maxsize=None)
def form_indices(k: int) -> tuple:
    """Increasing index tuples labelling the independent components of a k-form."""
    return tuple(combinations(range(DIM), k))


def pack_form(f, k: int | None = None) -> np.ndarray:
    """Independent components ``f[i1 < ... < ik]`` in lexicographic order.

    ``k`` defaults to ``f.ndim``; any axes past the first ``k`` are carried along.
    """
    f = np.asarray(f)
    k = f.ndim if k is None else k
    return np.array([f[idx] for idx in form_indices(k)])


def unpack_form(coeffs, k: int) -> np.ndarray:
    """Dense antisymmetric array from independent components."""
    coeffs = np.asarray(coeffs, dtype=float)
    idx = form_indices(k)
    if coeffs.shape[0] != len(idx):
        raise RankError(f"a {k}-form has {len(idx)} components, got {coeffs.shape[0]}")
    out = np.zeros((DIM,) * k + coeffs.shape[1:])
    for c, base in zip(coeffs, idx):
        for s, perm in signed_permutations(k):
            out[tuple(base[i] for i in perm)] = s * c
    return out


def basis_form(*indices: int) -> np.ndarray:
    """e^{i1} ^ ... ^ e^{ik} for 0-based indices."""
    k = len(indices)
    out = np.zeros((DIM,) * k)
    for s, perm in signed_permutations(k):
        out[tuple(indices[i] for i in perm)] = s
    return out


def is_alternating(x, tol: float = 1e-12) -> bool:
    x = jets.value(x)
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    for a in range(x.ndim):
        for b in range(a + 1, x.ndim):
            if np.max(np.abs(x + np.swapaxes(x, a, b)), initial=0.0) > tol * scale:
                return False
    return True


@dataclass(frozen=True)
class Tensor:
    """Dense tensor with a slot variance signature (``"u"``/``"d"`` per slot)."""

    comps: object
    variance: str

    def __post_init__(self):
        if set(self.variance) - {"u", "d"}:
            raise SlotError(f"bad variance string {self.variance!r}")
        if len(self.variance) > DIM:
            raise RankError("rank exceeds 6")
        shape = jets.value(self.comps).shape
        if shape != (DIM,) * len(self.variance):
            raise RankError(f"components of shape {shape} do not match rank {self.rank}")

    @property
    def rank(self) -> int:
        return len(self.variance)

    def __add__(self, other: "Tensor") -> "Tensor":
        if other.variance != self.variance:
            raise SlotError("cannot add tensors of different signature")
        return Tensor(self.comps + other.comps, self.variance)

    def __sub__(self, other: "Tensor") -> "Tensor":
        if other.variance != self.variance:
            raise SlotError("cannot subtract tensors of different signature")
        return Tensor(self.comps - other.comps, self.variance)

    def __mul__(self, c) -> "Tensor":
        return Tensor(self.comps * c, self.variance)

    __rmul__ = __mul__


def _check_slot(t: Tensor, slot: int) -> None:
    if not 0 <= slot < t.rank:
        raise SlotError(f"slot {slot} out of range for rank {t.rank}")


def tensor_product(a: Tensor, b: Tensor) -> Tensor:
    ia, ib = _LETTERS[:a.rank], _LETTERS[a.rank:a.rank + b.rank]
    if a.rank + b.rank > DIM:
        raise RankError("product rank exceeds 6")
    return Tensor(einsum(f"{ia},{ib}->{ia}{ib}", a.comps, b.comps), a.variance + b.variance)


def contract(t: Tensor, slot_a: int, slot_b: int) -> Tensor:
    """Trace over one upper and one lower slot."""
    _check_slot(t, slot_a)
    _check_slot(t, slot_b)
    if slot_a == slot_b:
        raise SlotError("cannot contract a slot with itself")
    if {t.variance[slot_a], t.variance[slot_b]} != {"u", "d"}:
        raise SlotError("contraction needs one upper and one lower slot")
    idx = list(_LETTERS[:t.rank])
    idx[slot_b] = idx[slot_a]
    keep = [c for n, c in enumerate(idx) if n not in (slot_a, slot_b)]
    variance = "".join(v for n, v in enumerate(t.variance) if n not in (slot_a, slot_b))
    return Tensor(einsum("".join(idx) + "->" + "".join(keep), t.comps), variance)


def raise_lower(t: Tensor, slot: int, metric: Tensor) -> Tensor:
    """Flip a slot's variance using a rank-2 metric (or symplectic form).

    A ``"dd"`` metric lowers an upper slot, a ``"uu"`` one raises a lower
    slot; the metric's first index is the one contracted.
    """
    _check_slot(t, slot)
    if metric.rank != 2 or metric.variance not in ("dd", "uu"):
        raise SlotError("raise_lower needs a rank-2 tensor of variance 'dd' or 'uu'")
    want = "u" if metric.variance == "dd" else "d"
    if t.variance[slot] != want:
        raise SlotError(f"slot {slot} has variance {t.variance[slot]!r}, metric expects {want!r}")
    idx = _LETTERS[:t.rank]
    out = idx[:slot] + "z" + idx[slot + 1:]
    comps = einsum(f"{idx[slot]}z,{idx}->{out}", metric.comps, t.comps)
    variance = t.variance[:slot] + metric.variance[0] + t.variance[slot + 1:]
    return Tensor(comps, variance)


def alternate(t: Tensor) -> Tensor:
    if len(set(t.variance)) > 1:
        raise SlotError("alternation needs all slots of the same variance")
    return Tensor(alt(t.comps), t.variance)


def wedge(a: Tensor, b: Tensor) -> Tensor:
    if set(a.variance + b.variance) - {"d"}:
        raise SlotError("wedge expects covariant forms")
    return Tensor(wedge_forms(a.comps, b.comps), a.variance + b.variance)


def interior(v: Tensor, f: Tensor) -> Tensor:
    if v.variance != "u":
        raise SlotError("interior product needs a vector")
    if f.rank < 1:
        raise RankError("interior product of a 0-form")
    if f.variance[0] != "d":
        raise SlotError("interior product contracts a covariant slot")
    return Tensor(interior_form(v.comps, f.comps), f.variance[1:])


def apply_J(t: Tensor, slot: int, J: Tensor) -> Tensor:
    """Act with J on one slot: V^{Jk} = J^k_p V^p and W_{Jk} = J^p_k W_p."""
    _check_slot(t, slot)
    if J.variance != "ud":
        raise SlotError("J must be a (1,1) tensor with variance 'ud'")
    idx = _LETTERS[:t.rank]
    out = idx[:slot] + "z" + idx[slot + 1:]
    if t.variance[slot] == "u":
        spec = f"z{idx[slot]},{idx}->{out}"
    else:
        spec = f"{idx[slot]}z,{idx}->{out}"
    return Tensor(einsum(spec, J.comps, t.comps), t.variance)


def levi_civita_pairing(f5: Tensor) -> Tensor:
    if f5.rank != 5 or f5.variance != "ddddd":
        raise RankError("Levi-Civita pairing needs a covariant 5-form")
    return Tensor(pairing_form(f5.comps), "u")

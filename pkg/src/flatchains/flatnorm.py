"""Exact flat-norm optimization on finite complexes.

The flat norm of a k-chain T minimizes mass(T - dS) + mass(S) over
(k+1)-chains S; the mod-p variant minimizes the relaxed masses over
mod-p assignments, a finite search space.  Both are solved by the same
depth-first branch-and-bound: variables are the (k+1)-cells in
decreasing-volume order, the lower bound at a partial assignment counts
the cells of the remainder whose cofaces are all assigned plus the mass
of the assigned filling, and the incumbent is replaced only by a
strictly better value or an equal value with a lexicographically
smaller witness.  Results are therefore deterministic.

A brute-force enumeration oracle (vectorized, chunked) cross-checks the
mod-p solver on anything small enough to enumerate.

All infima are relative to the chain's own complex: competitors range
over the cells the complex actually has, not over an ambient space.
Every inequality asserted in the tests is valid verbatim in this
relative setting; absolute values can differ from a richer ambient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .core import (
    Complex,
    IntChain,
    InternalDefectError,
    ModPChain,
    PreconditionError,
    norm_mod_p,
)

ORACLE_LIMIT = 10 ** 7
_CHUNK = 32768


class FillInfeasibleError(ValueError):
    """No chain in the complex fills the requested boundary mod p."""


@dataclass(frozen=True)
class FlatWitness:
    """An optimal decomposition T = remainder + boundary(filling).

    value is mass(remainder) + mass(filling) in the relevant (plain or
    mod-p) mass; exact is True when optimality is proved, and
    bound_saturated flags an integral solve whose optimum touched the
    coefficient box.
    """

    value: object
    remainder: IntChain
    filling: IntChain
    exact: bool
    bound_saturated: bool
    modulus: Optional[int] = None
    bound: Optional[int] = None


def _residue_order(p: int) -> list[int]:
    vals = [0]
    for t in range(1, (p - 1) // 2 + 1):
        vals.extend((t, -t))
    if p % 2 == 0:
        vals.append(p // 2)
    return vals


def _int_order(bound: int) -> list[int]:
    vals = [0]
    for t in range(1, bound + 1):
        vals.extend((t, -t))
    return vals


def _rank(v: int) -> tuple[int, int]:
    return (abs(v), 0 if v >= 0 else 1)


def _exact_search(cx: Complex, k: int, target: dict[str, int], *,
                  p: Optional[int] = None, bound: Optional[int] = None,
                  fill: bool = False):
    """Minimize the flat objective (or the filling mass under congruence
    constraints when fill=True) over coefficient assignments to the
    (k+1)-cells.  Returns (cost, assignment) or None when infeasible."""
    sigmas = sorted(cx.cells(k + 1), key=lambda cid: (-cx.volume(cid), cid))
    m = len(sigmas)
    vals = _residue_order(p) if p is not None else _int_order(bound)
    weigh = (lambda g: norm_mod_p(g, p)) if p is not None else abs

    taus = set(target)
    cob: list[list[tuple[str, int]]] = []
    last_touch: dict[str, int] = {}
    for i, sid in enumerate(sigmas):
        faces = list(cx.boundary_of(sid).items())
        cob.append(faces)
        for tid, _ in faces:
            taus.add(tid)
            last_touch[tid] = i
    det_at: list[list[str]] = [[] for _ in range(m)]
    loose = []
    for tid in sorted(taus):
        if tid in last_touch:
            det_at[last_touch[tid]].append(tid)
        else:
            loose.append(tid)

    base = 0
    for tid in loose:
        g = target.get(tid, 0)
        if fill:
            if g % p != 0:
                return None
        else:
            base += weigh(g) * cx.volume(tid)

    vol_s = [cx.volume(sid) for sid in sigmas]
    vol_t = {tid: cx.volume(tid) for tid in taus}
    acc = {tid: target.get(tid, 0) for tid in taus}
    assign = [0] * m
    id_order = sorted(range(m), key=lambda i: sigmas[i])

    best_cost = None
    best_key = None
    best_assign = None

    def dfs(i: int, cost) -> None:
        nonlocal best_cost, best_key, best_assign
        if best_cost is not None and cost > best_cost:
            return
        if i == m:
            key = tuple(_rank(assign[j]) for j in id_order)
            if best_cost is None or cost < best_cost or (cost == best_cost
                                                         and key < best_key):
                best_cost, best_key, best_assign = cost, key, assign.copy()
            return
        for v in vals:
            stepped = cost + (abs(v) * vol_s[i] if v else 0)
            if best_cost is not None and stepped > best_cost:
                break  # candidate magnitudes only grow from here
            assign[i] = v
            for tid, coeff in cob[i]:
                acc[tid] -= coeff * v
            feasible = True
            for tid in det_at[i]:
                if fill:
                    if acc[tid] % p != 0:
                        feasible = False
                        break
                else:
                    stepped += weigh(acc[tid]) * vol_t[tid]
                    if best_cost is not None and stepped > best_cost:
                        feasible = False
                        break
            if feasible:
                dfs(i + 1, stepped)
            for tid, coeff in cob[i]:
                acc[tid] += coeff * v
        assign[i] = 0

    dfs(0, base)
    if best_cost is None:
        return None
    return best_cost, {sigmas[i]: best_assign[i] for i in range(m) if best_assign[i]}


def _is_float_mass(*values) -> bool:
    return any(isinstance(v, float) for v in values)


def _check_engine_value(reported, searched) -> None:
    if _is_float_mass(reported, searched):
        if abs(reported - searched) > 1e-9 * (1 + abs(reported)):
            raise InternalDefectError("solver cost drifted from the witness mass")
    elif reported != searched:
        raise InternalDefectError("solver cost disagrees with the witness mass")


def flat_norm_mod_p(T: Union[IntChain, ModPChain], p: int) -> FlatWitness:
    """The flat norm mod p of a chain, relative to its complex.

    Minimizes mass_p(T - dS) + mass_p(S) over all mod-p coefficient
    assignments S to the (k+1)-cells; always exact since the search
    space is finite.
    """
    if isinstance(T, ModPChain):
        if T.p != p:
            raise PreconditionError(f"chain has modulus {T.p}, requested {p}")
        base = T.lift()
    else:
        base = T
        if not isinstance(p, int) or p < 2:
            raise PreconditionError(f"invalid modulus: {p!r}")
    cx, k = base.complex, base.dim
    cost, s_coeffs = _exact_search(cx, k, dict(base.coeffs), p=p)
    filling = IntChain(cx, k + 1, s_coeffs)
    remainder = base - filling.boundary()
    value = remainder.mass_p(p) + filling.mass_p(p)
    _check_engine_value(value, cost)
    return FlatWitness(value, remainder, filling, exact=True,
                       bound_saturated=False, modulus=p)


def flat_norm_int(T: IntChain, bound: Optional[int] = None) -> FlatWitness:
    """The integral flat norm of a chain, relative to its complex.

    The filling search runs over integer coefficients in [-B, B].  With
    an explicit bound the solve is a single pass; otherwise B starts at
    twice (max coefficient + 1) and escalates by one, at most eight
    times, while the optimum sits on the box and optimality is still
    unproved.  Optimality is proved whenever every cell outside the box
    would on its own already cost more than the value found.
    """
    cx, k = T.complex, T.dim
    user_bound = bound is not None
    if user_bound:
        if not isinstance(bound, int) or bound < 1:
            raise PreconditionError(f"coefficient bound must be an integer >= 1, got {bound!r}")
        b = bound
    else:
        top = max((abs(g) for _, g in T.items()), default=0)
        b = 2 * (top + 1)
    sigmas = cx.cells(k + 1)
    escalations = 0
    while True:
        cost, s_coeffs = _exact_search(cx, k, dict(T.coeffs), bound=b)
        filling = IntChain(cx, k + 1, s_coeffs)
        remainder = T - filling.boundary()
        value = remainder.mass() + filling.mass()
        _check_engine_value(value, cost)
        saturated = any(abs(g) == b for g in s_coeffs.values())
        proved = all((b + 1) * cx.volume(sid) > value for sid in sigmas)
        if user_bound or proved or not saturated or escalations >= 8:
            break
        b += 1
        escalations += 1
    return FlatWitness(value, remainder, filling, exact=proved,
                       bound_saturated=saturated, bound=b)


def flat_norm_mod_p_oracle(T: Union[IntChain, ModPChain], p: int):
    """Exhaustive-enumeration flat norm mod p, for cross-checking.

    Guarded: refuses when the assignment space exceeds ORACLE_LIMIT.
    Integer-volume complexes are enumerated in exact integer arithmetic;
    anything else falls back to float64.
    """
    if isinstance(T, ModPChain):
        if T.p != p:
            raise PreconditionError(f"chain has modulus {T.p}, requested {p}")
        base = T.lift()
    else:
        base = T
        if not isinstance(p, int) or p < 2:
            raise PreconditionError(f"invalid modulus: {p!r}")
    cx, k = base.complex, base.dim
    sigmas = sorted(cx.cells(k + 1))
    m = len(sigmas)
    if p ** m > ORACLE_LIMIT:
        raise PreconditionError("oracle too large")

    taus = set(base.coeffs)
    for sid in sigmas:
        taus.update(cx.boundary_of(sid))
    taus = sorted(taus)
    if m == 0:
        return base.mass_p(p)

    vols = [cx.volume(c) for c in sigmas] + [cx.volume(c) for c in taus]
    integral = all(
        isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1)
        for v in vols)
    dtype = np.int64 if integral else np.float64
    cast = int if integral else float
    vol_s = np.array([cast(cx.volume(c)) for c in sigmas], dtype=dtype)
    vol_t = np.array([cast(cx.volume(c)) for c in taus], dtype=dtype)
    t_vec = np.array([base[cid] for cid in taus], dtype=np.int64)
    incidence = np.zeros((m, len(taus)), dtype=np.int64)
    tau_index = {tid: j for j, tid in enumerate(taus)}
    for i, sid in enumerate(sigmas):
        for tid, coeff in cx.boundary_of(sid).items():
            incidence[i, tau_index[tid]] = coeff

    residue = np.array([g - p if 2 * (g % p) > p else g % p for g in range(p)],
                       dtype=np.int64)
    radix = p ** np.arange(m, dtype=np.int64)
    total = p ** m
    best = None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // radix) % p
        s_res = residue[digits]
        raw = t_vec[None, :] - s_res @ incidence
        mod = raw % p
        cost = (np.minimum(mod, p - mod).astype(dtype) @ vol_t
                + np.abs(s_res).astype(dtype) @ vol_s)
        chunk_best = cost.min()
        if best is None or chunk_best < best:
            best = chunk_best
    return int(best) if integral else float(best)


def fill_mod_p(L: IntChain, p: int) -> IntChain:
    """A minimal-mass_p chain S with dS congruent to L mod p.

    L must be a cycle mod p; raises FillInfeasibleError when no chain of
    the complex has boundary L mod p.
    """
    if not isinstance(p, int) or p < 2:
        raise PreconditionError(f"invalid modulus: {p!r}")
    cx, k = L.complex, L.dim
    if k >= 1:
        rim = L.boundary().reduce_mod_p(p)
        if not rim.is_zero():
            cid = rim.items()[0][0]
            raise PreconditionError(f"not a cycle mod p: boundary residue at cell {cid!r}")
    found = _exact_search(cx, k, dict(L.coeffs), p=p, fill=True)
    if found is None:
        raise FillInfeasibleError("infeasible in this complex")
    _, s_coeffs = found
    filling = IntChain(cx, k + 1, s_coeffs)
    if not (filling.boundary() - L).reduce_mod_p(p).is_zero():
        raise InternalDefectError("filling does not bound the requested chain mod p")
    return filling


def isoperimetric_ratio(L: IntChain, p: int):
    """Filling mass over boundary mass to the power (k+1)/k.

    Exact (a Fraction) when the exponent is an integer and the volumes
    are exact, float otherwise.
    """
    k = L.dim
    if k < 1:
        raise PreconditionError("isoperimetric ratio needs a chain of dimension >= 1")
    denom_mass = L.mass_p(p)
    if denom_mass == 0:
        raise PreconditionError("zero cycle")
    filling = fill_mod_p(L, p)
    num = filling.mass_p(p)
    if (k + 1) % k == 0:
        return num / denom_mass ** ((k + 1) // k)
    return float(num) / float(denom_mass) ** ((k + 1) / k)


def flat_norm_under_refinement(chain, p: int, subdivide: int) -> tuple:
    """Flat norm mod p of a box chain before and after grid refinement.

    Returns (coarse value, refined value); refinement can only enlarge
    the competitor space, so the refined value never exceeds the coarse
    one.
    """
    from .boxes import BoxChain, arrangement_complex

    if not isinstance(chain, BoxChain):
        raise PreconditionError("refinement comparison needs a box-backed chain")
    if not isinstance(subdivide, int) or subdivide < 2:
        raise PreconditionError(f"subdivision factor must be an integer >= 2, got {subdivide!r}")
    _, coarse_chain = arrangement_complex(chain, 1)
    _, fine_chain = arrangement_complex(chain, subdivide)
    coarse = flat_norm_mod_p(coarse_chain, p).value
    refined = flat_norm_mod_p(fine_chain, p).value
    if refined > coarse:
        raise InternalDefectError("refinement increased the flat norm")
    return coarse, refined

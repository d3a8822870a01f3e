"""Pasting, extension, and the full certificate pipeline.

The basic move is the alpha-blend h(x) = a(x)*g(x) + (1-a(x))*f(p(x)) with
a(x) = min(dist(x, A)/r, 1) and p the nearest-point retraction onto A: it
extends f exactly on A (a = 0 there performs no arithmetic on f's weights)
and equals g exactly off the open r-neighborhood of A.  With r >= 4/eps and
delta small enough on both inputs the blend is (eps, eps)-Lipschitz, and
with disjoint carriers coboundedness degrades by at most 2r + 2.

On top of the blend sit: single-fresh-vertex extension at r = 8/eps, the
cobounded variant that blends against a re-namespaced global partition of
unity, bounded-piece extension with its two branches (far pieces get a fresh
constant vertex; near pieces get extended then carrier-retracted), disjoint
family gluing, and the recursive certificate builder with its budget ladder.

The budget ladder composes a modulus E (E(x) < x, non-decreasing): a node at
level i with q families is processed in ascending family order at budgets
E^((q-1)*P(i+1))(u), ..., E^(P(i+1))(u), u, each family glue feeding the next.
Schedules are computed in extended-range (mantissa, exponent) arithmetic and
refuse to produce budgets below 1e-300.

The final verification in build_certificate is mandatory: the verifier, not
the schedule, is the correctness authority.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covers import DecompositionTree, TreeNode, tree_validate
from .errors import (
    BadEpsilonError,
    BudgetTooSmallError,
    EmptySetError,
    InvalidInputError,
    NotRDisjointError,
    PreconditionViolatedError,
    ScheduleMismatchError,
    UnderflowError_,
    VerificationFailedError,
)
from .metric import (
    FiniteMetricSpace,
    PointSubset,
    dist_to_set_all,
    diameter,
    nearest_point_retraction,
)
from .simplex import (
    PartitionOfUnity,
    SimplexPoint,
    VertexMint,
    convex_combine,
    global_mint,
    renamespace,
    simplicial_retraction,
    star_preimage_diameters,
)
from .verify import (
    CoboundedReport,
    LipschitzReport,
    cobounded_check,
    lipschitz_check,
    r_disjoint_check,
)

BUDGET_FLOOR = 1e-300
_REL_TOL = 1e-12


# ---------------------------------------------------------------------------
# moduli and extended-range composition
# ---------------------------------------------------------------------------

class _XFloat:
    """Positive real as mantissa * 2**exponent, mantissa in [1, 2)."""

    __slots__ = ("m", "e")

    def __init__(self, m: float, e: int):
        while m >= 2.0:
            m /= 2.0
            e += 1
        while m < 1.0:
            m *= 2.0
            e -= 1
        self.m, self.e = m, e

    @classmethod
    def from_float(cls, x: float) -> "_XFloat":
        if x <= 0 or not math.isfinite(x):
            raise InvalidInputError(f"extended-range value must be positive finite, got {x!r}")
        man, ex = math.frexp(x)  # man in [0.5, 1)
        return cls(man * 2.0, ex - 1)

    def to_float(self) -> float:
        if self.e < -1100:
            return 0.0
        if self.e > 1023:
            return math.inf
        return math.ldexp(self.m, self.e)

    def below(self, floor: float) -> bool:
        f = self.to_float()
        return f < floor


@dataclass(frozen=True)
class Modulus:
    """The extension input budget E: eps -> delta, with 0 < E(eps) < eps.

    kind "paper" is E(eps) = eps^2 / (32 + 7*eps), the substitution r = 8/eps
    into the pasting constraint eps/(4r+7); it also satisfies the second
    constraint eps/3 - 2/(3r) = eps/4.  kind "linear" is E(eps) = eps/c with
    c > 1; linear moduli do not satisfy the pasting inequalities but keep
    deep schedules representable, and the verifier stays authoritative.
    kind "table" interpolates user breakpoints linearly.
    """

    kind: str
    c: float = 4.0
    table: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.kind == "linear":
            if not (self.c > 1):
                raise InvalidInputError(f"linear modulus needs c > 1, got {self.c!r}")
        elif self.kind == "table":
            if not self.table:
                raise InvalidInputError("table modulus needs breakpoints")
            pts = tuple(sorted((float(x), float(y)) for x, y in self.table))
            prev_y = 0.0
            for x, y in pts:
                if not (0 < y < x):
                    raise InvalidInputError(f"table breakpoint E({x!r})={y!r} outside (0, x)")
                if y < prev_y:
                    raise InvalidInputError("table modulus must be non-decreasing")
                prev_y = y
            object.__setattr__(self, "table", pts)
        elif self.kind != "paper":
            raise InvalidInputError(f"unknown modulus kind {self.kind!r}")

    def __call__(self, eps: float) -> float:
        if eps <= 0:
            raise InvalidInputError(f"modulus argument must be > 0, got {eps!r}")
        if self.kind == "paper":
            return eps * eps / (32.0 + 7.0 * eps)
        if self.kind == "linear":
            return eps / self.c
        xs = [p[0] for p in self.table]
        ys = [p[1] for p in self.table]
        if eps <= xs[0]:
            return ys[0] * eps / xs[0]  # scale toward 0 keeping E(x) < x
        if eps >= xs[-1]:
            return ys[-1]
        return float(np.interp(eps, xs, ys))

    def _step_x(self, x: _XFloat) -> _XFloat:
        if self.kind == "paper":
            # x^2: exact exponent doubling; the 7x term is dropped once x is
            # below float range, a relative error under x/32
            denom = 32.0 + 7.0 * x.to_float()
            return _XFloat(x.m * x.m / denom, 2 * x.e)
        if self.kind == "linear":
            return _XFloat(x.m / self.c, x.e)
        f = x.to_float()
        if f <= 0:
            raise UnderflowError_(-1)
        return _XFloat.from_float(self(f))

    def power(self, eps: float, k: int) -> float:
        """E^k(eps) with extended-range iteration; raises on underflow."""
        if k < 0:
            raise InvalidInputError("composition count must be >= 0")
        if k == 0:
            return float(eps)
        x = _XFloat.from_float(eps)
        cap = 10_000_000
        for _ in range(min(int(k), cap)):
            x = self._step_x(x)
            if x.below(BUDGET_FLOOR):
                raise UnderflowError_(-1, f"E^k({eps!r}) below {BUDGET_FLOOR!r}")
        if k > cap:
            raise InvalidInputError(f"composition count {k} too deep to evaluate")
        return x.to_float()

    def spec(self) -> str:
        if self.kind == "paper":
            return "paper"
        if self.kind == "linear":
            return f"linear:{self.c:g}"
        return "table"


def default_modulus() -> Modulus:
    """E(eps) = eps^2/(32 + 7*eps): the sharp budget for r = 8/eps pasting."""
    return Modulus(kind="paper")


def parse_modulus(text: str) -> Modulus:
    if text == "paper":
        return Modulus(kind="paper")
    if text.startswith("linear:"):
        return Modulus(kind="linear", c=float(text.split(":", 1)[1]))
    raise InvalidInputError(f"unknown modulus spec {text!r}")


# ---------------------------------------------------------------------------
# budget schedules
# ---------------------------------------------------------------------------

@dataclass
class BudgetSchedule:
    """Composition counts, products, radii, and floor budgets for a tree."""

    epsilon: float
    mode: str
    arity: Tuple[int, ...]
    N: Tuple[int, ...]             # N_1..N_m: N_1 = 0, N_i = prod(n_j, j < i)
    P: Tuple[int, ...]             # P_1..P_m: P_m = 1, P_i = P_{i+1} * n_i
    R_required: Tuple[float, ...]  # R_1..R_m (empty for depth-1 trees)
    bottom: Tuple[float, ...]      # bottom_i = E^(P_1 - P_i)(eps)
    delta_leaf: float
    modulus_spec: str

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "mode": self.mode,
            "modulus": self.modulus_spec,
            "arity": list(self.arity),
            "N": [int(x) for x in self.N],
            "P": [int(x) for x in self.P],
            "R_required": list(self.R_required),
            "bottom": list(self.bottom),
            "delta_leaf": self.delta_leaf,
        }


def budget_schedule(tree: DecompositionTree, epsilon: float, modulus: Modulus,
                    schedule_mode: str = "conservative") -> BudgetSchedule:
    """Compute the budget bookkeeping for a tree at a target slope.

    N and P follow the recursions N_1 = 0, N_i = prod of arities below i, and
    P_m = 1, P_i = P_{i+1} * n_i.  Paper mode sets each radius from
    2/(R_i + 1) = E^(N_i)(eps); conservative mode (the default) sets every
    radius from 2/(R + 1) = E^(P_1)(eps), the uniform bound under which every
    glue in the recursion keeps its budget above 2/(R + 1).
    """
    if not (0.0 < epsilon < 2.0):
        raise BadEpsilonError(f"epsilon must be in (0, 2), got {epsilon!r}")
    if schedule_mode not in ("conservative", "paper"):
        raise InvalidInputError(f"unknown schedule mode {schedule_mode!r}")
    m = tree.m
    arity = tree.arity

    N: List[int] = [0]
    for i in range(2, m + 1):
        prod = 1
        for a in arity[: i - 1]:
            prod *= a
        N.append(prod)
    P: List[int] = [0] * m
    if m >= 1:
        P[m - 1] = 1
        for i in range(m - 2, -1, -1):
            P[i] = P[i + 1] * arity[i]

    def power_at(level: int, k: int) -> float:
        try:
            return modulus.power(epsilon, k)
        except UnderflowError_ as exc:
            raise UnderflowError_(level, str(exc)) from None

    bottom = tuple(power_at(i + 1, P[0] - P[i]) for i in range(m))
    delta_leaf = bottom[-1]

    if m == 1:
        r_required: Tuple[float, ...] = ()
    elif schedule_mode == "conservative":
        e_p1 = power_at(m, P[0])
        r = 2.0 / e_p1 - 1.0
        if not math.isfinite(r):
            raise UnderflowError_(m, "required radius is not representable")
        r_required = tuple([r] * m)
    else:
        rs = []
        for i in range(1, m + 1):
            e_ni = power_at(i, N[i - 1])
            r = 2.0 / e_ni - 1.0
            if not math.isfinite(r):
                raise UnderflowError_(i, "required radius is not representable")
            rs.append(r)
        r_required = tuple(rs)

    return BudgetSchedule(
        epsilon=float(epsilon), mode=schedule_mode, arity=arity,
        N=tuple(N), P=tuple(P), R_required=r_required,
        bottom=bottom, delta_leaf=delta_leaf, modulus_spec=modulus.spec(),
    )


# ---------------------------------------------------------------------------
# pasting and single-vertex extension
# ---------------------------------------------------------------------------

def measured_bound(f: PartitionOfUnity) -> float:
    """Tight coboundedness of a pou; 0 for an empty domain."""
    if len(f.domain) == 0:
        return 0.0
    _, worst = star_preimage_diameters(f)
    return worst


def _require_lipschitz(f: PartitionOfUnity, delta: float, who: str) -> None:
    rep = lipschitz_check(f, delta, delta, mode="full")
    if not rep.passed:
        raise PreconditionViolatedError(
            f"{who} is ({delta:g},{delta:g})-Lipschitz",
            f"worst slack {rep.worst_slack:g} at pair {rep.witness_pair}",
        )


def _alpha_blend(f: PartitionOfUnity, g: PartitionOfUnity, r: float) -> PartitionOfUnity:
    """h = a*g + (1-a)*f(p(.)) over g's domain; exact on A and off B(A, r)."""
    space = f.space
    a_set = f.domain
    dist_a = dist_to_set_all(space, a_set)
    p = nearest_point_retraction(space, a_set)
    out: Dict[int, SimplexPoint] = {}
    for x in g.domain.ids:
        alpha = min(dist_a[x] / r, 1.0)
        out[x] = convex_combine(alpha, g(x), f(p(x)))
    return PartitionOfUnity(space, out)


def paste(f: PartitionOfUnity, g: PartitionOfUnity, r: float, epsilon: float,
          delta: float, check_inputs: bool = True) -> PartitionOfUnity:
    """Blend a pou on a subset into a pou on the whole target domain.

    Preconditions (each named on violation): r >= 4/epsilon,
    delta <= epsilon/3 - 2/(3r), delta <= epsilon/(4r + 7), A nonempty, and
    both inputs (delta, delta)-Lipschitz.  The Lipschitz checks run unless
    the caller asserts them with check_inputs=False.
    """
    if len(f.domain) == 0:
        raise EmptySetError("paste needs a nonempty subset pou")
    if not set(f.domain.ids) <= set(g.domain.ids):
        raise InvalidInputError("paste: f's domain must lie inside g's domain")
    if r < 4.0 / epsilon:
        raise PreconditionViolatedError("r >= 4/epsilon", f"r={r!r}, epsilon={epsilon!r}")
    lim1 = epsilon / 3.0 - 2.0 / (3.0 * r)
    if delta > lim1 + _REL_TOL * abs(lim1):
        raise PreconditionViolatedError(
            "delta <= epsilon/3 - 2/(3r)", f"delta={delta!r}, limit={lim1!r}")
    lim2 = epsilon / (4.0 * r + 7.0)
    if delta > lim2 + _REL_TOL * abs(lim2):
        raise PreconditionViolatedError(
            "delta <= epsilon/(4r+7)", f"delta={delta!r}, limit={lim2!r}")
    if check_inputs:
        _require_lipschitz(f, delta, "f")
        _require_lipschitz(g, delta, "g")
    return _alpha_blend(f, g, r)


def extend_pou(f: PartitionOfUnity, epsilon: float, modulus: Optional[Modulus] = None,
               target: Optional[PointSubset] = None, mint: Optional[VertexMint] = None,
               check_inputs: bool = True) -> PartitionOfUnity:
    """Extend an (E(eps), E(eps))-Lipschitz pou to the target at slope eps.

    Uses r = 8/eps and blends against a constant pou on a freshly minted
    vertex (not a previously used one: a shared vertex could collapse
    coboundedness across unrelated extensions).  Makes no coboundedness
    claim of its own.
    """
    if len(f.domain) == 0:
        raise EmptySetError("extend_pou needs a nonempty input pou")
    if epsilon <= 0:
        raise BadEpsilonError(f"epsilon must be > 0, got {epsilon!r}")
    modulus = modulus or default_modulus()
    mint = mint or global_mint()
    space = f.space
    target = target if target is not None else space.all_points()
    if not set(f.domain.ids) <= set(target.ids):
        raise InvalidInputError("extension target must contain the input domain")
    delta = modulus(epsilon)
    if check_inputs:
        _require_lipschitz(f, delta, "f")
    if f.domain.ids == target.ids:
        return f
    r = 8.0 / epsilon
    v = (mint.namespace(), 0)
    g_const = PartitionOfUnity.constant(space, target, v)
    return _alpha_blend(f, g_const, r)


def extend_pou_cobounded(f: PartitionOfUnity, u: PartitionOfUnity, epsilon: float,
                         modulus: Optional[Modulus] = None,
                         K: Optional[float] = None, Q: Optional[float] = None,
                         mint: Optional[VertexMint] = None,
                         check_inputs: bool = True) -> Tuple[PartitionOfUnity, float]:
    """Extend keeping coboundedness, by blending against a global cobounded pou.

    u's vertices are re-namespaced fresh before pasting, which forces the
    carriers disjoint; the output bound is max(K, Q) + 2r + 2 with r = 8/eps.
    Returns (extension, bound).
    """
    if len(f.domain) == 0:
        raise EmptySetError("extend_pou_cobounded needs a nonempty input pou")
    if epsilon <= 0:
        raise BadEpsilonError(f"epsilon must be > 0, got {epsilon!r}")
    modulus = modulus or default_modulus()
    mint = mint or global_mint()
    space = f.space
    if u.domain.ids != space.all_points().ids:
        raise InvalidInputError("the cobounded pou must cover the whole space")
    K = measured_bound(f) if K is None else float(K)
    Q = measured_bound(u) if Q is None else float(Q)
    delta = modulus(epsilon)
    r = 8.0 / epsilon
    if check_inputs:
        _require_lipschitz(f, delta, "f")
        _require_lipschitz(u, delta, "u")
        for name, pou, bound in (("f", f, K), ("u", u, Q)):
            rep = cobounded_check(pou, bound)
            if not rep.passed:
                raise PreconditionViolatedError(
                    f"{name} is {bound:g}-cobounded",
                    f"tight bound {rep.tight_bound:g}")
    if f.domain.ids == space.all_points().ids:
        return f, K
    u_fresh = renamespace(u, mint.namespace())
    g = _alpha_blend(f, u_fresh, r)
    return g, max(K, Q) + 2.0 * r + 2.0


# ---------------------------------------------------------------------------
# bounded pieces and disjoint families
# ---------------------------------------------------------------------------

def extend_over_bounded_piece(f: PartitionOfUnity, piece: PointSubset, r_m: Optional[float],
                              budget: float, modulus: Optional[Modulus] = None,
                              mint: Optional[VertexMint] = None,
                              piece_bound: Optional[float] = None,
                              input_bound: Optional[float] = None,
                              check_inputs: bool = False):
    """Extend a pou over one uniformly bounded piece.

    Branch 1 (the input domain misses the open r_m-neighborhood of the
    piece, or is empty): the piece maps to one fresh vertex, and cross pairs
    are handled by the distance gap alone.  Branch 2: extend at the given
    budget over domain-plus-piece, then retract the carrier over the
    neighborhood region onto the carrier of f near the piece, sending every
    new vertex to the smallest-id old one.

    Returns (pou, bound, branch) with the composed coboundedness formula
    bound: input + piece bound (+ r_m for branch 2).
    """
    if not piece.ids:
        raise EmptySetError("cannot extend over an empty piece")
    modulus = modulus or default_modulus()
    mint = mint or global_mint()
    space = f.space
    k_piece = diameter(space, piece) if piece_bound is None else float(piece_bound)
    k_in = (measured_bound(f) if input_bound is None else float(input_bound))

    a_ids = set(f.domain.ids)
    if a_ids:
        if r_m is not None and budget < (2.0 / (r_m + 1.0)) * (1.0 - _REL_TOL):
            # pairs across the piece's neighborhood boundary sit at distance
            # at least r_m, where only the additive budget covers the gap
            raise PreconditionViolatedError(
                "budget >= 2/(r_m + 1)",
                f"budget={budget!r}, r_m={r_m!r}")
        dist_piece = dist_to_set_all(space, piece)
        near_mask = dist_piece < (math.inf if r_m is None else r_m)
        a_near = [x for x in f.domain.ids if near_mask[x]]
    else:
        a_near = []

    if not a_ids or not a_near:
        v = (mint.namespace(), 0)
        d = SimplexPoint.delta(v)
        new = {x: d for x in piece.ids if x not in a_ids}
        return f.merged_with(new), k_in + k_piece, 1

    if r_m is None:
        raise InvalidInputError("branch 2 requires the neighborhood radius r_m")
    if check_inputs:
        _require_lipschitz(f, modulus(budget), "f")
    target = f.domain.union(piece)
    g = extend_pou(f, budget, modulus, target=target, mint=mint, check_inputs=False)

    region_ids = [x for x in target.ids if dist_piece[x] < r_m]
    region = PointSubset(tuple(region_ids))
    s1 = set()
    for x in a_near:
        s1.update(f(x).support())
    s2 = set()
    for x in region.ids:
        s2.update(g(x).support())
    s1_min = min(s1)
    retract = {v: (v if v in s1 else s1_min) for v in s2}
    h = simplicial_retraction(g, retract, region)
    return h, k_in + k_piece + r_m, 2


def extend_over_disjoint_family(f: PartitionOfUnity, pieces: Sequence[PointSubset],
                                R: float, budget: float,
                                extender: Callable[[PartitionOfUnity, int, float], tuple],
                                input_bound: Optional[float] = None,
                                strict_budget: bool = True,
                                verify_family: bool = True,
                                verify_output: bool = False,
                                budget_warnings: Optional[list] = None):
    """Extend a pou over every piece of an R-disjoint family and glue.

    Each piece is extended independently from the same input (extender(f, t,
    budget) must return a pou over domain-plus-piece-t and its bound); fresh
    vertices minted per piece must be pairwise disjoint, which is asserted by
    set intersection before the glue.  Gluing is sound when the budget is at
    least 2/(R + 1): cross-piece pairs sit at distance above R, where the
    additive slack alone covers the maximal simplex distance.

    Returns (pou, bound) with bound = 2 * max piece bound + input bound.
    """
    space = f.space
    k_in = measured_bound(f) if input_bound is None else float(input_bound)
    if not pieces:
        return f, k_in
    if verify_family:
        rep = r_disjoint_check(space, pieces, R)
        if not rep.passed:
            raise NotRDisjointError(rep.witness)
    required = 2.0 / (R + 1.0)
    if budget < required * (1.0 - _REL_TOL):
        if strict_budget:
            raise BudgetTooSmallError(budget, required)
        if budget_warnings is not None:
            budget_warnings.append(
                {"budget": budget, "required": required, "R": R})

    base_carrier = set(f.carrier())
    seen_new: set = set()
    glued: Dict[int, SimplexPoint] = {}
    worst_piece_bound = 0.0
    for t, piece in enumerate(pieces):
        g_t, bound_t = extender(f, t, budget)[:2]
        new_vs = set(g_t.carrier()) - base_carrier
        overlap = new_vs & seen_new
        if overlap:
            raise VerificationFailedError(
                f"carrier discipline violated: vertex {sorted(overlap)[0]} "
                f"used by two pieces")
        seen_new |= new_vs
        for x in piece.ids:
            if x not in f and x not in glued:
                glued[x] = g_t(x)
        worst_piece_bound = max(worst_piece_bound, bound_t)
    h = f.merged_with(glued)
    bound = 2.0 * worst_piece_bound + k_in
    if verify_output:
        rep = lipschitz_check(h, budget, budget, mode="full")
        if not rep.passed:
            raise VerificationFailedError(
                f"family glue is not ({budget:g},{budget:g})-Lipschitz",
                rep.to_json())
        crep = cobounded_check(h, bound)
        if not crep.passed:
            raise VerificationFailedError(
                f"family glue exceeds composed bound {bound:g}", crep.to_json())
    return h, bound


# ---------------------------------------------------------------------------
# the certificate pipeline
# ---------------------------------------------------------------------------

@dataclass
class CertificateResult:
    pou: PartitionOfUnity
    bound: float
    schedule: BudgetSchedule
    lipschitz: LipschitzReport
    cobounded: CoboundedReport
    branch_counts: Dict[str, int]
    budget_warnings: List[dict] = field(default_factory=list)
    assumptions: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.lipschitz.passed and self.cobounded.passed

    def report_json(self) -> dict:
        return {
            "check": "certificate",
            "pass": self.passed,
            "tolerance": self.lipschitz.tolerance,
            "epsilon": self.schedule.epsilon,
            "bound": self.bound,
            "lipschitz": self.lipschitz.to_json(),
            "cobounded": self.cobounded.to_json(),
            "branch_counts": dict(self.branch_counts),
            "budget_warnings": list(self.budget_warnings),
            "assumptions": list(self.assumptions),
        }


def build_certificate(space: FiniteMetricSpace, tree: DecompositionTree,
                      epsilon: float, modulus: Optional[Modulus] = None,
                      schedule_mode: str = "conservative",
                      workers: int = 1,
                      verify_mode: str = "restricted") -> CertificateResult:
    """Build and verify a certificate over a validated decomposition tree.

    Recursive descent: leaves go through the bounded-piece extension, and an
    interior node processes its families sequentially at the ascending budget
    ladder ending at the node's own budget.  The root starts from the empty
    pou at the target slope.  Tree radii must dominate the schedule's
    requirements (ScheduleMismatch before any work otherwise).  The final
    restricted-mode Lipschitz check and the coboundedness check against the
    composed formula bound are mandatory; their reports are the output.
    """
    modulus = modulus or default_modulus()
    if not (0.0 < epsilon < 2.0):
        raise BadEpsilonError(f"epsilon must be in (0, 2), got {epsilon!r}")
    validation = tree_validate(space, tree)
    if not validation.passed:
        raise InvalidInputError(
            f"tree validation failed: clause {validation.failed_clause}, "
            f"{validation.witness}")
    schedule = budget_schedule(tree, epsilon, modulus, schedule_mode)
    for i in range(1, tree.m):
        if tree.radii[i - 1] < schedule.R_required[i - 1] * (1.0 - _REL_TOL):
            raise ScheduleMismatchError(i, tree.radii[i - 1], schedule.R_required[i - 1])

    mint = VertexMint()
    leaf_bound = validation.leaf_bound
    r_claim = schedule.R_required[tree.m - 1] if tree.m >= 2 else None
    strict = schedule_mode == "conservative"
    counters = {"branch1": 0, "branch2": 0}
    warnings: List[dict] = []

    def extend_node(f: PartitionOfUnity, node: TreeNode, u: float,
                    k_in: float) -> Tuple[PartitionOfUnity, float]:
        if node.level == tree.m:
            g, bound, branch = extend_over_bounded_piece(
                f, node.members, r_claim, u, modulus, mint,
                piece_bound=leaf_bound, input_bound=k_in)
            counters[f"branch{branch}"] += 1
            return g, bound
        i = node.level
        p_next = schedule.P[i]  # P(i+1)
        q = len(node.families)
        h, k = f, k_in
        for j, fam in enumerate(node.families):
            steps = (q - 1 - j) * p_next
            u_j = modulus.power(u, steps) if steps else u
            children = [tree.node(cid) for cid in fam]
            pieces = [c.members for c in children]
            k_snapshot = k
            h, k = extend_over_disjoint_family(
                h, pieces, tree.radii[i - 1], u_j,
                lambda ff, t, uu: extend_node(ff, children[t], uu, k_snapshot),
                input_bound=k, strict_budget=strict,
                verify_family=False, budget_warnings=warnings)
        return h, k

    root = tree.root
    f0 = PartitionOfUnity.empty(space)
    pou, bound = extend_node(f0, root, epsilon, 0.0)

    if pou.domain.ids != tuple(range(space.n)):
        raise VerificationFailedError("certificate does not cover the space")
    lip = lipschitz_check(pou, epsilon, epsilon, mode=verify_mode, workers=workers)
    cob = cobounded_check(pou, bound)
    result = CertificateResult(
        pou=pou, bound=bound, schedule=schedule, lipschitz=lip, cobounded=cob,
        branch_counts=counters, budget_warnings=warnings,
        assumptions=["intermediate Lipschitz preconditions asserted by the ladder"],
    )
    if not result.passed:
        raise VerificationFailedError(
            "certificate failed its mandatory verification", result.report_json())
    return result

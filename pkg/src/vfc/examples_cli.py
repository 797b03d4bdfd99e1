"""Built-in example models, the full run pipeline, and the ``vfc`` CLI.

The two-disk models (``sphere-euler``, ``football-euler``) realize an
obstruction bundle over a two-chart surface: disks ``D₁`` (coordinates z)
and ``D₂`` (coordinates w) glued along an annulus ``A ≅ [0,1]×S¹``.  The
transition chart lives on a cyclic cover of the annulus circle with deck
group Γ₁×Γ₂; its domain sits inside E₁×E₂×A as the graph of the linear
map M(x) = −dw ∘ (dz)⁻¹, so the section s₁₂(e₁, x) = (e₁, M(x)e₁) cuts
out the annulus.  The perturbations ν_i are radial vector fields with a
single nondegenerate zero at each disk center, interpolated over the
annulus by a smooth cutoff; the transition section s₁₂ + ν₁₂ never
vanishes, so the perturbed zero set is exactly the two centers with
weights 1/|Γ₁| + 1/|Γ₂|.

Sample clouds are deterministic dyadic approximations (denominator 2²¹)
computed on orbit representatives and extended by the exact rational
group matrices, so every group-equivariance and compatibility identity
holds exactly on declared data; smooth ASTs agree with the samples to
well within the loose consistency tolerance.

Exit codes: 0 all checks pass, 1 validation failure, 2 numerical
rejection (non-transverse perturbation), 3 I/O, parse or parameter
errors.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import click

from .charts_atlas import (
    AtlasModel,
    ChartModel,
    CoordinateChangeModel,
    GroupQuotientModel,
    atlas_from_json,
    atlas_to_json,
    build_categories,
    check_atlas_model,
    check_chart,
    check_cocycle,
    check_coordinate_change,
    check_realizations,
    check_tame_and_filtration,
    cyclic_group,
    product_group,
    project_label,
    CheckReport,
)
from .exterior_engine import RationalMatrix, parse_rat, rat_str
from .expressions import num, var
from .reduction_perturb import (
    EquivariantNorms,
    Perturbation,
    Reduction,
    build_pruned_category,
    check_adapted,
    check_perturbation,
    check_reduction,
    compute_adaptedness_constants,
    norms_from_json,
    norms_to_json,
    perturbation_from_json,
    perturbation_to_json,
    reduction_from_json,
    reduction_to_json,
)
from .zeroset_branched import (
    PerturbationRejected,
    branched_interval_model,
    complete_groupoid,
    find_zeros,
    fundamental_class_0d,
    hausdorff_complete,
    weight_function,
    wnb_check,
    zero_set_report,
)

__all__ = [
    "EXAMPLE_NAMES",
    "ExampleDescriptor",
    "BuiltExample",
    "build_example",
    "build_toy_atlas",
    "random_toy_atlas",
    "run_example",
    "check_atlas_data",
    "example_to_json",
    "emit_json",
    "main",
]

F = Fraction

EXAMPLE_NAMES = (
    "football-atlas",
    "football-fclass",
    "sphere-euler",
    "football-euler",
    "branched-interval",
    "single-orbifold-chart",
)

RUN_SCHEMA = "vfc-run/1"

#: denominator of the dyadic sample approximations
RAT_DEN = 2**21

#: band coordinates of the three annulus sample rings
RING_T = (F(1, 4), F(1, 2), F(3, 4))


def _rat(x: float) -> Fraction:
    return F(round(x * RAT_DEN), RAT_DEN)


def _rat_vec(v) -> tuple:
    return tuple(_rat(float(c)) for c in v)


@dataclass
class ExampleDescriptor:
    name: str
    parameters: dict = field(default_factory=dict)


@dataclass
class BuiltExample:
    """A fully populated example: atlas plus (where applicable) the
    reduction V, the precompact core C, the perturbation, the norms and
    the smallness constant to use in the adaptedness checks."""

    kind: str  # "euler" | "atlas" | "orbifold" | "interval"
    atlas: AtlasModel | None = None
    V: Reduction | None = None
    C: Reduction | None = None
    nu: Perturbation | None = None
    norms: EquivariantNorms | None = None
    sigma: Fraction | None = None
    interval: object | None = None
    parameters: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# toy atlases: X with cover sets F_i, charts U_I = F_I × Γ_I, E = 0
# ---------------------------------------------------------------------------


def build_toy_atlas(cover: dict, x_labels: list, orders: dict) -> AtlasModel:
    """Charts U_I = F_I × Γ_I with Γ acting on the second factor."""
    x_labels = list(x_labels)
    basics = {i: cyclic_group(orders.get(i, 1)) for i in cover}

    def footprint(I):
        out = set(x_labels)
        for i in I:
            out &= set(cover[i])
        return sorted(out)

    indices = [
        I
        for r in range(1, len(cover) + 1)
        for I in itertools.combinations(sorted(cover), r)
        if footprint(I)
    ]
    charts = {}
    layouts = {}
    for I in indices:
        group = product_group([basics[i] for i in I])
        labels = footprint(I)
        pts = [(x, g) for x in labels for g in group.elements]
        layout = {p: k for k, p in enumerate(pts)}
        layouts[I] = layout
        perms = {
            d: tuple(layout[(x, group.mul(d, g))] for (x, g) in pts)
            for d in group.elements
        }
        coords = tuple(
            (F(x_labels.index(x)), F(group.elements.index(g))) for (x, g) in pts
        )
        domain = GroupQuotientModel(points=coords, group=group, perms=perms)
        charts[I] = ChartModel(
            index=I,
            domain=domain,
            obstruction_dim=0,
            obstruction_action={},
            obstruction_points=((),),
            section_samples=((),) * len(pts),
            footprint_map={k: x for (x, g), k in layout.items()},
        )
    changes = {}
    for I in indices:
        for J in indices:
            if set(I) < set(J):
                pts_J = list(layouts[J])
                rho = {}
                for (x, g) in pts_J:
                    rho[layouts[J][(x, g)]] = layouts[I][(x, project_label(g, J, I))]
                changes[(I, J)] = CoordinateChangeModel(
                    source_index=I,
                    target_index=J,
                    tilde_indices=tuple(range(len(pts_J))),
                    rho_idx=rho,
                    phi_hat=RationalMatrix.zero(0, 0),
                )
    return AtlasModel(
        x_labels=tuple(x_labels),
        cover={i: frozenset(s) for i, s in cover.items()},
        charts=charts,
        changes=changes,
    )


def random_toy_atlas(seed: int) -> AtlasModel:
    rng = random.Random(seed)
    nx = rng.randint(4, 7)
    x_labels = [f"x{k}" for k in range(nx)]
    ncharts = rng.randint(2, 3)
    cover = {}
    for i in range(1, ncharts + 1):
        size = rng.randint(2, nx)
        cover[i] = set(rng.sample(x_labels, size))
    for k, x in enumerate(x_labels):
        if not any(x in s for s in cover.values()):
            cover[1 + (k % ncharts)].add(x)
    orders = {i: rng.choice([1, 2, 3]) for i in cover}
    return build_toy_atlas(cover, x_labels, orders)


# ---------------------------------------------------------------------------
# the two-disk surface models (sphere / football)
# ---------------------------------------------------------------------------


def _order_matrix(n: int) -> RationalMatrix:
    """An exact rational rotation of order n (n ∈ {1, 2, 3})."""
    if n == 1:
        return RationalMatrix.identity(2)
    if n == 2:
        return RationalMatrix.from_rows([[F(-1), F(0)], [F(0), F(-1)]])
    if n == 3:
        # conjugate of the 1/3-turn by the hexagonal frame P
        return RationalMatrix.from_rows([[F(0), F(-1)], [F(1), F(-1)]])
    raise ValueError(f"no exact rational rotation of order {n}")


def _mat_pow(mat: RationalMatrix, k: int) -> RationalMatrix:
    out = RationalMatrix.identity(mat.rows)
    for _ in range(k):
        out = mat.mul(out)
    return out


def _block_diag(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    rows = []
    for r in range(a.rows):
        rows.append(list(a.entries[r]) + [F(0)] * b.cols)
    for r in range(b.rows):
        rows.append([F(0)] * a.cols + list(b.entries[r]))
    return RationalMatrix.from_rows(rows)


def _frame(n2: int):
    """The float frame P with P·Rot(2π/n₂)·P⁻¹ exactly rational."""
    if n2 == 3:
        s = math.sqrt(3.0)
        return ((1.0, 1.0 / s), (0.0, 2.0 / s))
    return ((1.0, 0.0), (0.0, 1.0))


def _frame_asts(n2: int):
    if n2 == 3:
        inv_s3 = ["/", num(1), ["sqrt", num(3)]]
        two_s3 = ["/", num(2), ["sqrt", num(3)]]
        return ((num(1), inv_s3), (num(0), two_s3))
    return ((num(1), num(0)), (num(0), num(1)))


def _q_ast(n2: int, w1, w2):
    """The Γ₂-invariant rational quadratic form with unit ring |P⁻¹w| = 1."""
    if n2 == 3:
        return [
            "+",
            ["-", ["*", w1, w1], ["*", w1, w2]],
            ["*", w2, w2],
        ]
    return ["+", ["*", w1, w1], ["*", w2, w2]]


def _exp_of_label(label: str, g1, g2) -> tuple[int, int]:
    parts = label.split("|")
    return g1.elements.index(parts[0]), g2.elements.index(parts[1])


def _two_disk_model(n1: int, n2: int, N: int, euler: bool) -> BuiltExample:
    """The two-chart surface atlas with Γ₁ = Z_{n1}, Γ₂ = Z_{n2}.

    ``euler`` selects the obstruction-bundle model (E_i = R², section
    graphs and perturbations); otherwise the bare orbifold atlas (E = 0).
    """
    if N < 8:
        raise ValueError("sample density must be at least 8 points per circle")
    if (n1, n2) not in {(1, 1), (2, 3)}:
        raise ValueError("supported isotropy orders: (1,1) and (2,3)")
    g1 = cyclic_group(n1)
    g2 = cyclic_group(n2)
    g12 = product_group([g1, g2])
    L = n1 * n2 * N  # cover circle
    D = n1 * n2  # deck group order
    R1 = _order_matrix(n1)
    A2 = _order_matrix(n2)
    # deck shifts: sigma1 lifts the Γ₁ generator (chart-1 shift +N,
    # trivial on chart 2), sigma2 lifts the Γ₂ generator
    sigma1 = next(
        s
        for s in range(0, L, N)
        if s % (n1 * N) == N % (n1 * N) and s % (n2 * N) == 0
    )
    sigma2 = next(
        s
        for s in range(0, L, N)
        if s % (n1 * N) == 0 and s % (n2 * N) == (-N) % (n2 * N)
    )
    P = _frame(n2)

    def pmul(vec):
        return (
            P[0][0] * vec[0] + P[0][1] * vec[1],
            P[1][0] * vec[0] + P[1][1] * vec[1],
        )

    # ----- chart 1: the z-disk -----
    n1N = n1 * N
    pts1: list = [(F(0), F(0))]
    for g in range(3):
        r = 1.0 + float(RING_T[g])
        ring = [None] * n1N
        for j in range(N):
            ang = 2.0 * math.pi * j / n1N
            ring[j] = _rat_vec((r * math.cos(ang), r * math.sin(ang)))
        for s in range(1, n1):
            mat = _mat_pow(R1, s)
            for j in range(N):
                ring[j + s * N] = tuple(mat.matvec(ring[j]))
        pts1.extend(ring)

    def idx1(g: int, j: int) -> int:
        return 1 + g * n1N + j % n1N

    def ring_label(g: int, k: int) -> str:
        return f"ring{g}:{k % N}"

    perms1 = {}
    for s, lab in enumerate(g1.elements):
        perm = [0] + [0] * (3 * n1N)
        for g in range(3):
            for j in range(n1N):
                perm[idx1(g, j)] = idx1(g, j + s * N)
        perms1[lab] = tuple(perm)
    affine1 = {
        lab: (_mat_pow(R1, s), (F(0), F(0))) for s, lab in enumerate(g1.elements)
    }
    foot1 = {0: "c1"}
    for g in range(3):
        for j in range(n1N):
            foot1[idx1(g, j)] = ring_label(g, j)

    # ----- chart 2: the w-disk -----
    n2N = n2 * N
    pts2: list = [(F(0), F(0))]
    for g in range(3):
        r = 1.0 / (1.0 + float(RING_T[g]))
        ring = [None] * n2N
        for j in range(N):
            ang = 2.0 * math.pi * j / n2N
            ring[j] = _rat_vec(pmul((r * math.cos(ang), r * math.sin(ang))))
        for s in range(1, n2):
            mat = _mat_pow(A2, s)
            for j in range(N):
                ring[j + s * N] = tuple(mat.matvec(ring[j]))
        pts2.extend(ring)

    def idx2(g: int, j: int) -> int:
        return 1 + g * n2N + j % n2N

    perms2 = {}
    for s, lab in enumerate(g2.elements):
        perm = [0] + [0] * (3 * n2N)
        for g in range(3):
            for j in range(n2N):
                perm[idx2(g, j)] = idx2(g, j + s * N)
        perms2[lab] = tuple(perm)
    affine2 = {
        lab: (_mat_pow(A2, s), (F(0), F(0))) for s, lab in enumerate(g2.elements)
    }
    foot2 = {0: "c2"}
    for g in range(3):
        for j in range(n2N):
            foot2[idx2(g, j)] = ring_label(g, (-j) % N)

    # ----- chart 12: rings of the annulus cover -----
    n12 = 3 * L
    deck = [(p, q) for p in range(n1) for q in range(n2)]
    deck_shift = {(p, q): (p * sigma1 + q * sigma2) % L for (p, q) in deck}
    e_base = (
        (F(1, 2), F(0)),
        (F(-1, 2), F(0)),
        (F(0), F(1, 2)),
        (F(0), F(-1, 2)),
    )

    def idx12(g: int, j: int) -> int:
        return g * L + j % L

    def eidx12(b: int, p: int, q: int) -> int:
        return n12 + b * D + deck.index((p % n1, q % n2))

    zero4 = (F(0),) * 4 if euler else ()
    pts12: list = []
    for g in range(3):
        for j in range(L):
            if euler:
                pts12.append((F(0), F(0), RING_T[g], F(j, L)))
            else:
                pts12.append((RING_T[g], F(j, L)))
    if euler:
        for b in range(4):
            for (p, q) in deck:
                e = tuple(_mat_pow(R1, p).matvec(e_base[b]))
                pts12.append((e[0], e[1], F(1, 2), F(deck_shift[(p, q)], L)))
    perms12 = {}
    for lab in g12.elements:
        p, q = _exp_of_label(lab, g1, g2)
        shift = deck_shift[(p, q)]
        perm = [0] * len(pts12)
        for g in range(3):
            for j in range(L):
                perm[idx12(g, j)] = idx12(g, j + shift)
        if euler:
            for b in range(4):
                for (p0, q0) in deck:
                    perm[eidx12(b, p0, q0)] = eidx12(b, p0 + p, q0 + q)
        perms12[lab] = tuple(perm)
    foot12 = {}
    for g in range(3):
        for j in range(L):
            foot12[idx12(g, j)] = ring_label(g, j % N)

    # covering maps to the basic charts
    rho1_idx = {idx12(g, j): idx1(g, j % n1N) for g in range(3) for j in range(L)}
    rho2_idx = {idx12(g, j): idx2(g, (-j) % n2N) for g in range(3) for j in range(L)}
    tilde12 = tuple(range(n12))

    # ----- smooth formulas on the transition chart -----
    if euler:
        a, b, t, u = var(0), var(1), var(2), var(3)
    else:
        t, u = var(0), var(1)
    c2a = ["cos2pi", ["*", num(n2), u]]
    s2a = ["sin2pi", ["*", num(n2), u]]
    c1a = ["cos2pi", ["*", num(n1), u]]
    s1a = ["sin2pi", ["*", num(n1), u]]
    inv1t = ["/", num(1), ["+", num(1), t]]
    PA = _frame_asts(n2)
    # w = P·(c1, −s1)/(1+t) and K·w = P·(s1, c1)/(1+t)
    wv = [
        ["*", ["+", ["*", PA[r][0], c1a], ["*", PA[r][1], ["neg", s1a]]], inv1t]
        for r in range(2)
    ]
    kwv = [
        ["*", ["+", ["*", PA[r][0], s1a], ["*", PA[r][1], c1a]], inv1t]
        for r in range(2)
    ]
    rho1_asts = (
        ["*", ["+", num(1), t], c2a],
        ["*", ["+", num(1), t], s2a],
    )
    rho2_asts = tuple(wv)

    section_asts12 = None
    nu_asts = {}
    if euler:
        re_a = ["*", ["+", ["*", a, c2a], ["*", b, s2a]], inv1t]
        im_a = ["*", ["-", ["*", b, c2a], ["*", a, s2a]], inv1t]
        ratio = num(F(n1, n2))
        section_asts12 = (
            a,
            b,
            ["+", ["*", re_a, wv[0]], ["*", ratio, im_a, kwv[0]]],
            ["+", ["*", re_a, wv[1]], ["*", ratio, im_a, kwv[1]]],
        )
        beta = ["smoothstep", ["*", num(2), ["-", num(F(3, 4)), t]]]
        one_m_beta = ["-", num(1), beta]
        nu_asts[(1, 2)] = (
            ["*", num(F(1, 8)), beta, c2a],
            ["*", num(F(1, 8)), beta, s2a],
            ["neg", ["*", num(F(1, 8)), one_m_beta, wv[0], inv1t]],
            ["neg", ["*", num(F(1, 8)), one_m_beta, wv[1], inv1t]],
        )
        # ν₁(z) = z·ĥ(|z|²)/8, a radial field with one transverse zero
        x, y = var(0), var(1)
        qa1 = ["+", ["*", x, x], ["*", y, y]]
        hh = [
            "/",
            num(1),
            ["sqrt", ["+", qa1, ["-", num(1), ["smoothstep", qa1]]]],
        ]
        nu_asts[(1,)] = (
            ["*", num(F(1, 8)), x, hh],
            ["*", num(F(1, 8)), y, hh],
        )
        # ν₂(w) = −w·k(Q(w))/8
        qa2 = _q_ast(n2, x, y)
        kk = [
            "sqrt",
            [
                "+",
                qa2,
                ["*", num(F(1, 4)), ["-", num(1), ["smoothstep", ["*", num(4), qa2]]]],
            ],
        ]
        nu_asts[(2,)] = (
            ["neg", ["*", num(F(1, 8)), x, kk]],
            ["neg", ["*", num(F(1, 8)), y, kk]],
        )

    # ----- declared perturbation samples (exact, orbit-extended) -----
    nu_samples: dict = {}
    e_samples_s: dict = {}
    if euler:
        # chart 1: ν₁ = (cosθ, sinθ)/8 on the rings, 0 at the center
        d1 = {0: (F(0), F(0))}
        for g in range(3):
            reps = {}
            for j in range(N):
                ang = 2.0 * math.pi * j / n1N
                reps[j] = _rat_vec((math.cos(ang) / 8.0, math.sin(ang) / 8.0))
            for s in range(n1):
                mat = _mat_pow(R1, s)
                for j in range(N):
                    d1[idx1(g, j + s * N)] = tuple(mat.matvec(reps[j]))
        nu_samples[(1,)] = d1
        # chart 2: ν₂ = −w/(8(1+t)) on the rings, 0 at the center
        d2 = {0: (F(0), F(0))}
        for g in range(3):
            r = 1.0 / (1.0 + float(RING_T[g]))
            reps = {}
            for j in range(N):
                ang = 2.0 * math.pi * j / n2N
                w = pmul((r * math.cos(ang), r * math.sin(ang)))
                scale = -r / 8.0
                reps[j] = _rat_vec((scale * w[0], scale * w[1]))
            for s in range(n2):
                mat = _mat_pow(A2, s)
                for j in range(N):
                    d2[idx2(g, j + s * N)] = tuple(mat.matvec(reps[j]))
        nu_samples[(2,)] = d2
        # chart 12: outer rings are the pushforwards of the basic values
        # (coordinate-change compatibility holds exactly); the middle ring
        # mixes both blocks and is orbit-extended from the representatives
        d12 = {}
        for j in range(L):
            v = d1[rho1_idx[idx12(0, j)]]
            d12[idx12(0, j)] = (v[0], v[1], F(0), F(0))
            w = d2[rho2_idx[idx12(2, j)]]
            d12[idx12(2, j)] = (F(0), F(0), w[0], w[1])
        mid_reps = {}
        for j in range(N):
            uu = j / L
            cc = math.cos(2.0 * math.pi * n2 * uu)
            ss = math.sin(2.0 * math.pi * n2 * uu)
            w = pmul(
                (
                    math.cos(2.0 * math.pi * n1 * uu) / 1.5,
                    -math.sin(2.0 * math.pi * n1 * uu) / 1.5,
                )
            )
            mid_reps[j] = _rat_vec(
                (cc / 16.0, ss / 16.0, -w[0] / 24.0, -w[1] / 24.0)
            )
        for (p, q) in deck:
            mat = _block_diag(_mat_pow(R1, p), _mat_pow(A2, q))
            shift = deck_shift[(p, q)]
            for j in range(N):
                d12[idx12(1, j + shift)] = tuple(mat.matvec(mid_reps[j]))
        # obstruction samples carry the same ν value as the underlying
        # ring point (ν₁₂ is independent of the E₁ coordinates)
        for b in range(4):
            for (p, q) in deck:
                d12[eidx12(b, p, q)] = d12[idx12(1, deck_shift[(p, q)])]
        nu_samples[(1, 2)] = d12
        # declared section values at the obstruction samples: the graph
        # relation (e₁, M(x)e₁) at u = 0, t = 1/2, orbit-extended
        z0 = 1.5
        w0 = pmul((1.0 / z0, 0.0))
        kw0 = pmul((0.0, 1.0 / z0))
        for bb, e in enumerate(e_base):
            ex, ey = float(e[0]), float(e[1])
            me = (
                (ex / z0) * w0[0] + (n1 / n2) * (ey / z0) * kw0[0],
                (ex / z0) * w0[1] + (n1 / n2) * (ey / z0) * kw0[1],
            )
            base_val = (e[0], e[1]) + _rat_vec(me)
            for (p, q) in deck:
                mat = _block_diag(_mat_pow(R1, p), _mat_pow(A2, q))
                e_samples_s[eidx12(bb, p, q)] = tuple(mat.matvec(base_val))

    # ----- obstruction grids -----
    if euler:
        grid1 = ((F(0), F(0)),) + tuple(
            v for e in ((F(1, 2), F(0)), (F(0), F(1, 2))) for v in (e, (-e[0], -e[1]))
        )
        orbit2 = []
        for s in range(n2):
            v = tuple(_mat_pow(A2, s).matvec((F(1, 2), F(0))))
            for w in (v, (-v[0], -v[1])):
                if w not in orbit2:
                    orbit2.append(w)
        if n2 == 1:
            orbit2 = [(F(1, 2), F(0)), (F(-1, 2), F(0)), (F(0), F(1, 2)), (F(0), F(-1, 2))]
        grid2 = ((F(0), F(0)),) + tuple(orbit2)
        grid12 = [zero4]
        for e in grid1[1:]:
            grid12.append((e[0], e[1], F(0), F(0)))
        for e in grid2[1:]:
            grid12.append((F(0), F(0), e[0], e[1]))
        for i in sorted(e_samples_s):
            if e_samples_s[i] not in grid12:
                grid12.append(e_samples_s[i])
        grid12 = tuple(grid12)
        act1 = {lab: _mat_pow(R1, s) for s, lab in enumerate(g1.elements)}
        act2 = {lab: _mat_pow(A2, s) for s, lab in enumerate(g2.elements)}
        act12 = {}
        for lab in g12.elements:
            p, q = _exp_of_label(lab, g1, g2)
            act12[lab] = _block_diag(_mat_pow(R1, p), _mat_pow(A2, q))
        m_basic, m12 = 2, 4
        phi1 = RationalMatrix.from_rows(
            [[F(1), F(0)], [F(0), F(1)], [F(0), F(0)], [F(0), F(0)]]
        )
        phi2 = RationalMatrix.from_rows(
            [[F(0), F(0)], [F(0), F(0)], [F(1), F(0)], [F(0), F(1)]]
        )
        s_samples1 = tuple((F(0), F(0)) for _ in pts1)
        s_samples2 = tuple((F(0), F(0)) for _ in pts2)
        s12 = [zero4] * n12 + [e_samples_s[n12 + k] for k in range(4 * D)]
        tangent1 = (0, 1)
        tangent12 = (0, 1, 2, 3)
        tilde_tangent = (2, 3)
        sec_asts_basic = (num(0), num(0))
    else:
        grid1 = grid2 = grid12 = ((),)
        act1 = act2 = act12 = {}
        m_basic, m12 = 0, 0
        phi1 = phi2 = RationalMatrix.zero(0, 0)
        s_samples1 = ((),) * len(pts1)
        s_samples2 = ((),) * len(pts2)
        s12 = [()] * n12
        tangent1 = ()
        tangent12 = ()
        tilde_tangent = ()
        sec_asts_basic = None

    chart1 = ChartModel(
        index=(1,),
        domain=GroupQuotientModel(
            points=tuple(pts1), group=g1, perms=perms1, affine=affine1
        ),
        obstruction_dim=m_basic,
        obstruction_action=act1,
        obstruction_points=grid1,
        section_samples=s_samples1,
        footprint_map=foot1,
        section_asts=sec_asts_basic,
        tangent_dims=tangent1,
    )
    chart2 = ChartModel(
        index=(2,),
        domain=GroupQuotientModel(
            points=tuple(pts2), group=g2, perms=perms2, affine=affine2
        ),
        obstruction_dim=m_basic,
        obstruction_action=act2,
        obstruction_points=grid2,
        section_samples=s_samples2,
        footprint_map=foot2,
        section_asts=sec_asts_basic,
        tangent_dims=tangent1,
    )
    chart12 = ChartModel(
        index=(1, 2),
        domain=GroupQuotientModel(points=tuple(pts12), group=g12, perms=perms12),
        obstruction_dim=m12,
        obstruction_action=act12,
        obstruction_points=grid12,
        section_samples=tuple(s12),
        footprint_map=foot12,
        section_asts=section_asts12,
        tangent_dims=tangent12,
    )
    changes = {
        ((1,), (1, 2)): CoordinateChangeModel(
            source_index=(1,),
            target_index=(1, 2),
            tilde_indices=tilde12,
            rho_idx=rho1_idx,
            phi_hat=phi1,
            rho_asts=rho1_asts,
            tilde_tangent_dims=tilde_tangent,
        ),
        ((2,), (1, 2)): CoordinateChangeModel(
            source_index=(2,),
            target_index=(1, 2),
            tilde_indices=tilde12,
            rho_idx=rho2_idx,
            phi_hat=phi2,
            rho_asts=rho2_asts,
            tilde_tangent_dims=tilde_tangent,
        ),
    }
    x_labels = (
        ["c1", "c2"]
        + [ring_label(g, k) for g in range(3) for k in range(N)]
    )
    cover = {
        1: frozenset(lab for lab in x_labels if lab != "c2"),
        2: frozenset(lab for lab in x_labels if lab != "c1"),
    }

    # ----- metric on intermediate classes: band × footprint circle -----
    positions = {}
    cls1 = chart1.domain.class_index_of()
    for i, p in enumerate(pts1):
        key = ((1,), cls1[i])
        if i == 0:
            positions[key] = (F(0), None)
        else:
            g, j = (i - 1) // n1N, (i - 1) % n1N
            positions[key] = (RING_T[g], F(j % N, N))
    cls2 = chart2.domain.class_index_of()
    for i, p in enumerate(pts2):
        key = ((2,), cls2[i])
        if i == 0:
            positions[key] = (F(1), None)
        else:
            g, j = (i - 1) // n2N, (i - 1) % n2N
            positions[key] = (RING_T[g], F((-j) % N, N))
    cls12 = chart12.domain.class_index_of()
    for i in range(len(pts12)):
        key = ((1, 2), cls12[i])
        if i < n12:
            g, j = i // L, i % L
            positions[key] = (RING_T[g], F(j % N, N))
        else:
            positions[key] = (F(1, 2), F(0))
    metric = {}
    keys = sorted(positions)
    for ai in range(len(keys)):
        for bi in range(ai + 1, len(keys)):
            ka, kb = keys[ai], keys[bi]
            (ga, ta), (gb, tb) = positions[ka], positions[kb]
            if ta is None or tb is None:
                circ = F(0)
            else:
                d = abs(ta - tb)
                circ = min(d, 1 - d)
            metric[(ka, kb)] = max(abs(ga - gb), circ)

    atlas = AtlasModel(
        x_labels=tuple(x_labels),
        cover=cover,
        charts={(1,): chart1, (2,): chart2, (1, 2): chart12},
        changes=changes,
        metric=metric,
    )

    # ----- reduction, precompact core, perturbation, norms -----
    v1 = frozenset([0] + [idx1(0, j) for j in range(n1N)])
    v2 = frozenset([0] + [idx2(2, j) for j in range(n2N)])
    v12 = frozenset(range(len(pts12)))
    if euler:
        x0, y0 = var(0), var(1)
        t0 = var(2)
        pred1 = ["<=", ["+", ["*", x0, x0], ["*", y0, y0]], num(2)]
        pred2 = ["<=", _q_ast(n2, x0, y0), num(F(2, 5))]
        pred12 = ["and", [">=", t0, num(0)], ["<=", t0, num(1)]]
    else:
        t0 = var(0)
        pred1 = ["<=", ["+", ["*", var(0), var(0)], ["*", var(1), var(1)]], num(2)]
        pred2 = ["<=", _q_ast(n2, var(0), var(1)), num(F(2, 5))]
        pred12 = ["and", [">=", t0, num(0)], ["<=", t0, num(1)]]
    V = Reduction(
        sets={(1,): v1, (2,): v2, (1, 2): v12},
        preds={(1,): pred1, (2,): pred2, (1, 2): pred12},
    )
    built = BuiltExample(
        kind="euler" if euler else "atlas",
        atlas=atlas,
        V=V,
        parameters={"density": N, "orders": [n1, n2]},
    )
    if euler:
        a0, b0 = var(0), var(1)
        tiny = num(F(1, 10**12))
        pred_c12 = [
            "and",
            ["<=", ["+", ["*", a0, a0], ["*", b0, b0]], tiny],
            [">=", var(2), num(0)],
        ]
        built.C = Reduction(
            sets={(1,): v1, (2,): v2, (1, 2): frozenset(range(n12))},
            preds={(1,): pred1, (2,): pred2, (1, 2): pred_c12},
        )
        built.nu = Perturbation(asts=nu_asts, samples=nu_samples)
        t_map = {
            1: RationalMatrix.identity(2),
            2: RationalMatrix.from_rows([[F(1), F(0)], [F(0), F(-1)], [F(-1), F(1)]])
            if n2 == 3
            else RationalMatrix.identity(2),
        }
        built.norms = EquivariantNorms(maps=t_map)
        built.sigma = F(1, 4)
    return built


# ---------------------------------------------------------------------------
# single-chart examples
# ---------------------------------------------------------------------------


def _single_orbifold_chart(order: int) -> BuiltExample:
    """One free Z_n permutation chart with trivial obstruction."""
    if order < 1:
        raise ValueError("group order must be a positive integer")
    g = cyclic_group(order)
    pts = tuple((F(k),) for k in range(order))
    perms = {lab: tuple((k + s) % order for k in range(order)) for s, lab in enumerate(g.elements)}
    chart = ChartModel(
        index=(1,),
        domain=GroupQuotientModel(points=pts, group=g, perms=perms),
        obstruction_dim=0,
        obstruction_action={},
        obstruction_points=((),),
        section_samples=((),) * order,
        footprint_map={k: "p" for k in range(order)},
    )
    atlas = AtlasModel(
        x_labels=("p",),
        cover={1: frozenset({"p"})},
        charts={(1,): chart},
        changes={},
    )
    V = Reduction(sets={(1,): frozenset(range(order))})
    return BuiltExample(
        kind="orbifold", atlas=atlas, V=V, parameters={"order": order}
    )


def _football_fclass() -> BuiltExample:
    """A single chart M/Z₆ with one fixed point and orbits of size 2, 3, 6
    — the orbifold fundamental-class model of the football."""
    g = cyclic_group(6)
    layout = [("p1", 1, 0)] + [("p2", 2, k) for k in range(2)] + [
        ("p3", 3, k) for k in range(3)
    ] + [("p6", 6, k) for k in range(6)]
    pts = tuple((F(i),) for i in range(len(layout)))
    offsets = {}
    pos = 0
    for lab, size, _ in layout:
        if lab not in offsets:
            offsets[lab] = pos
        pos += 1
    sizes = {"p1": 1, "p2": 2, "p3": 3, "p6": 6}
    perms = {}
    for s, el in enumerate(g.elements):
        perm = []
        for lab, size, k in layout:
            perm.append(offsets[lab] + (k + s) % size)
        perms[el] = tuple(perm)
    chart = ChartModel(
        index=(1,),
        domain=GroupQuotientModel(points=pts, group=g, perms=perms),
        obstruction_dim=0,
        obstruction_action={},
        obstruction_points=((),),
        section_samples=((),) * len(layout),
        footprint_map={i: lab for i, (lab, _, _) in enumerate(layout)},
    )
    atlas = AtlasModel(
        x_labels=("p1", "p2", "p3", "p6"),
        cover={1: frozenset({"p1", "p2", "p3", "p6"})},
        charts={(1,): chart},
        changes={},
    )
    V = Reduction(sets={(1,): frozenset(range(len(layout)))})
    return BuiltExample(kind="orbifold", atlas=atlas, V=V, parameters={})


# ---------------------------------------------------------------------------
# descriptor dispatch
# ---------------------------------------------------------------------------


def build_example(descriptor: ExampleDescriptor) -> BuiltExample:
    name = descriptor.name
    params = dict(descriptor.parameters)
    density = int(params.get("density", 12))
    if name == "sphere-euler":
        return _two_disk_model(1, 1, density, euler=True)
    if name == "football-euler":
        return _two_disk_model(2, 3, density, euler=True)
    if name == "football-atlas":
        return _two_disk_model(2, 3, density, euler=False)
    if name == "football-fclass":
        return _football_fclass()
    if name == "single-orbifold-chart":
        return _single_orbifold_chart(int(params.get("order", 5)))
    if name == "branched-interval":
        m = F(params.get("m", F(1, 2)))
        mp = F(params.get("mp", F(1, 2)))
        model = branched_interval_model(m, mp)
        return BuiltExample(
            kind="interval",
            interval=model,
            parameters={"m": rat_str(m), "mp": rat_str(mp)},
        )
    raise ValueError(f"unknown example {name!r}")


# ---------------------------------------------------------------------------
# the run pipeline
# ---------------------------------------------------------------------------


def _stage(stages: list, report: CheckReport) -> bool:
    stages.append(report.to_json())
    return report.ok


def _snap_zero_to_sample(atlas: AtlasModel, z) -> int | None:
    chart = atlas.charts[z.chart_index]
    best, best_d = None, 1e-3
    for i, p in enumerate(chart.domain.points):
        if len(p) != len(z.coordinates):
            continue
        d = max(abs(float(a) - b) for a, b in zip(p, z.coordinates))
        if d < best_d:
            best, best_d = i, d
    return best


def _groupoid_stages(built: BuiltExample, zsets: dict, signs_by_object: dict,
                     stages: list, report: dict) -> bool:
    """Completion → Hausdorff quotient → Λ → wnb axioms → total."""
    atlas, V = built.atlas, built.V
    completed = complete_groupoid(atlas, V, zsets)
    if not _stage(stages, completed.report):
        return False
    hausdorff = hausdorff_complete(atlas, V, zsets, completed)
    if not _stage(stages, hausdorff.report):
        return False
    weights = weight_function(atlas, hausdorff)
    if not _stage(stages, weights.report):
        return False
    wnb = wnb_check(atlas, hausdorff, weights.weights)
    if not _stage(stages, wnb.report):
        return False
    signs = {}
    for p in hausdorff.classes:
        vals = {
            signs_by_object[o]
            for o in hausdorff.objects
            if hausdorff.class_of[o] == p and o in signs_by_object
        }
        signs[p] = vals.pop() if len(vals) == 1 else 1
    klass = fundamental_class_0d(hausdorff.classes, weights.weights, signs)
    report["classes"] = [
        {
            "representative": repr(p),
            "minimal_footprint": list(hausdorff.minimal_footprint[p]),
            "weight": rat_str(weights.weights[p]),
            "sign": signs[p],
        }
        for p in hausdorff.classes
    ]
    report["total"] = klass.total_string()
    # aggregate Λ over the footprint labels (the orbifold weights)
    foot_sum: dict = {}
    for p in hausdorff.classes:
        obj = min(o for o in hausdorff.objects if hausdorff.class_of[o] == p)
        I, zidx = obj
        lab = atlas.charts[I].footprint_map.get(zidx)
        if lab is not None:
            foot_sum[lab] = foot_sum.get(lab, F(0)) + signs[p] * weights.weights[p]
    report["footprint_weights"] = {
        lab: rat_str(w) for lab, w in sorted(foot_sum.items())
    }
    report["hausdorff"] = hausdorff
    report["weights"] = weights.weights
    return True


def run_example(descriptor: ExampleDescriptor, seed_grid: int = 1):
    """Execute the full pipeline and return (report dict, exit code)."""
    report: dict = {
        "schema": RUN_SCHEMA,
        "example": descriptor.name,
        "parameters": {k: str(v) for k, v in sorted(descriptor.parameters.items())},
        "seed_grid": int(seed_grid),
    }
    stages: list = []
    report["stages"] = stages
    try:
        built = build_example(descriptor)
    except ValueError as ex:
        report["ok"] = False
        report["error"] = str(ex)
        return report, 3

    if built.kind == "interval":
        model = built.interval
        report["interval"] = {
            "classes": [
                {"representative": repr(p), "weight": rat_str(model.weights[p])}
                for p in model.classes
            ],
            "boundary_in": model.boundary_in.total_string(),
            "boundary_out": model.boundary_out.total_string(),
            "boundary_identity": rat_str(model.boundary_identity),
        }
        ok = model.boundary_identity == 0
        report["ok"] = ok
        return report, 0 if ok else 1

    atlas = built.atlas
    ok = _stage(stages, check_atlas_model(atlas))
    for I in atlas.index_sets():
        ok = ok and _stage(stages, check_chart(atlas, I))
    for (I, J) in sorted(atlas.changes):
        ok = ok and _stage(stages, check_coordinate_change(atlas, I, J))
    ok = ok and _stage(stages, check_cocycle(atlas, "strong"))
    ok = ok and _stage(stages, check_tame_and_filtration(atlas))
    if not ok:
        report["ok"] = False
        return report, 1
    cats = build_categories(atlas)
    ok = _stage(stages, cats.report)
    ok = ok and _stage(stages, check_realizations(atlas, cats.domain_category))
    ok = ok and _stage(stages, check_reduction(atlas, built.V))
    pruned = build_pruned_category(atlas, built.V)
    ok = ok and _stage(stages, pruned.report)
    if not ok:
        report["ok"] = False
        return report, 1

    signs_by_object: dict = {}
    if built.kind == "euler":
        ok = _stage(stages, built.norms.validate(atlas))
        if not ok:
            report["ok"] = False
            return report, 1
        seeds = None
        if seed_grid >= 2:
            seeds = {
                I: [atlas.charts[I].domain.points[x] for x in sorted(built.V.sets[I])]
                for I in atlas.index_sets()
            }
        try:
            zres = find_zeros(atlas, built.V, built.nu, seeds=seeds)
        except PerturbationRejected as ex:
            report["ok"] = False
            report["rejection"] = str(ex)
            return report, 2
        zero_pairs = [(z.chart_index, z.coordinates) for z in zres.zeros]
        ok = _stage(
            stages,
            check_perturbation(atlas, built.V, built.nu, C=built.C, zeros=zero_pairs),
        )
        try:
            constants = compute_adaptedness_constants(
                atlas, built.V, built.C, built.norms
            )
            adapted = check_adapted(
                atlas,
                built.V,
                built.C,
                built.norms,
                constants,
                built.sigma,
                built.nu,
                zeros=zero_pairs,
            )
            report["constants"] = {
                "delta_V": rat_str(constants.delta_V),
                "delta": rat_str(constants.delta),
                "sigma": rat_str(constants.sigma)
                if constants.sigma is not None
                else None,
                "sigma_used": rat_str(built.sigma),
            }
            ok = _stage(stages, adapted) and ok
        except ValueError as ex:
            rep = CheckReport("adapted")
            rep.fail("constants_unavailable", error=str(ex))
            ok = _stage(stages, rep) and ok
        if not ok:
            report["ok"] = False
            return report, 1
        # snap the numeric zeros to their sample classes and close under Γ
        zsets = {I: set() for I in atlas.index_sets()}
        snapped = {}
        for z in zres.zeros:
            idx = _snap_zero_to_sample(atlas, z)
            if idx is None:
                rep = CheckReport("zero_sampling")
                rep.fail("zero_not_at_sample", chart=z.chart_index,
                         point=list(z.coordinates))
                _stage(stages, rep)
                report["ok"] = False
                return report, 1
            snapped[(z.chart_index, idx)] = z
            orbit = atlas.charts[z.chart_index].domain.orbit(idx)
            zsets[z.chart_index].update(orbit)
            for o in orbit:
                signs_by_object[(z.chart_index, o)] = z.sign
        zsets = {I: frozenset(s) for I, s in zsets.items()}
        if not _groupoid_stages(built, zsets, signs_by_object, stages, report):
            report["ok"] = False
            return report, 1
        hausdorff = report.pop("hausdorff")
        weights = report.pop("weights")
        for (I, idx), z in snapped.items():
            p = hausdorff.class_of[(I, idx)]
            z.minimal_footprint = tuple(hausdorff.minimal_footprint[p])
            z.weight = weights[p]
        report["zero_set"] = zero_set_report(
            zres.zeros, total=parse_rat(report["total"]), warnings=zres.warnings
        )
        report["ok"] = True
        return report, 0

    # E = 0 examples: the zero set is everything in the reduction
    zsets = {
        I: frozenset(
            set(built.V.sets[I]) & set(atlas.charts[I].zero_sample_indices())
        )
        for I in atlas.index_sets()
    }
    if not _groupoid_stages(built, zsets, signs_by_object, stages, report):
        report["ok"] = False
        return report, 1
    report.pop("hausdorff")
    report.pop("weights")
    report["ok"] = True
    return report, 0


# ---------------------------------------------------------------------------
# serialization and file-level entry points
# ---------------------------------------------------------------------------


def example_to_json(built: BuiltExample) -> dict:
    """Atlas JSON with the reduction/perturbation/norm sections inlined."""
    if built.atlas is None:
        raise ValueError("example has no atlas serialization")
    data = atlas_to_json(built.atlas)
    if built.V is not None:
        data["reduction"] = reduction_to_json(built.V)
    if built.C is not None:
        data["precompact"] = reduction_to_json(built.C)
    if built.nu is not None:
        data["perturbation"] = perturbation_to_json(built.nu)
    if built.norms is not None:
        data["norms"] = norms_to_json(built.norms)
    return data


def emit_json(report: dict, path: str) -> None:
    """Deterministic serialization: sorted keys, rational strings."""
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def check_atlas_data(data: dict) -> dict:
    """Validation-only report for a parsed atlas JSON document."""
    atlas = atlas_from_json(data)
    stages: list = []
    report = {"schema": RUN_SCHEMA, "mode": "check", "stages": stages}
    ok = _stage(stages, check_atlas_model(atlas))
    for I in atlas.index_sets():
        ok = _stage(stages, check_chart(atlas, I)) and ok
    for (I, J) in sorted(atlas.changes):
        ok = _stage(stages, check_coordinate_change(atlas, I, J)) and ok
    ok = _stage(stages, check_cocycle(atlas, "strong")) and ok
    ok = _stage(stages, check_tame_and_filtration(atlas)) and ok
    if ok:
        cats = build_categories(atlas)
        ok = _stage(stages, cats.report) and ok
        ok = _stage(stages, check_realizations(atlas, cats.domain_category)) and ok
    if "reduction" in data:
        red = reduction_from_json(data["reduction"])
        ok = _stage(stages, check_reduction(atlas, red)) and ok
        ok = _stage(stages, build_pruned_category(atlas, red).report) and ok
    if "norms" in data:
        ok = _stage(stages, norms_from_json(data["norms"]).validate(atlas)) and ok
    if "perturbation" in data and "reduction" in data:
        red = reduction_from_json(data["reduction"])
        nu = perturbation_from_json(data["perturbation"])
        ok = _stage(stages, check_perturbation(atlas, red, nu)) and ok
    report["ok"] = ok
    return report


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _print_stage_summary(report: dict) -> None:
    for st in report.get("stages", ()):
        status = "ok" if st["ok"] else "FAIL"
        click.echo(f"  [{status}] {st['name']}")
        if not st["ok"]:
            for fl in st["failures"][:5]:
                click.echo(f"         {fl}")


@click.group()
def main() -> None:
    """Desk-scale computational toolkit for finite-isotropy chart atlases."""


@main.command("run")
@click.argument("example", type=click.Choice(EXAMPLE_NAMES))
@click.option("--json", "json_path", type=click.Path(), default=None,
              help="write the run report to this file")
@click.option("--density", type=int, default=12, show_default=True,
              help="sample points per footprint circle (minimum 8)")
@click.option("--seed-grid", type=int, default=1, show_default=True,
              help="Newton seed level: 1 = orbit representatives, >=2 = all samples")
@click.option("--order", type=int, default=5, show_default=True,
              help="group order for single-orbifold-chart")
@click.option("--m", "m_str", default="1/2", show_default=True,
              help="first weight for branched-interval")
@click.option("--mp", "mp_str", default="1/2", show_default=True,
              help="second weight for branched-interval")
def run_cmd(example, json_path, density, seed_grid, order, m_str, mp_str):
    """Build an example and run the full pipeline."""
    import time

    params: dict = {}
    if example in {"sphere-euler", "football-euler", "football-atlas"}:
        params["density"] = density
    if example == "single-orbifold-chart":
        params["order"] = order
    if example == "branched-interval":
        try:
            params["m"] = parse_rat(m_str)
            params["mp"] = parse_rat(mp_str)
        except (ValueError, ZeroDivisionError) as ex:
            click.echo(f"parameter error: {ex}", err=True)
            sys.exit(3)
    start = time.monotonic()
    report, code = run_example(
        ExampleDescriptor(name=example, parameters=params), seed_grid=seed_grid
    )
    elapsed = time.monotonic() - start
    click.echo(f"example: {example}")
    _print_stage_summary(report)
    if "total" in report:
        click.echo(f"total: {report['total']}")
    if "rejection" in report:
        click.echo(f"rejected: {report['rejection']}")
    if "error" in report:
        click.echo(f"error: {report['error']}", err=True)
    click.echo(f"elapsed: {elapsed:.2f}s")
    if json_path:
        emit_json(report, json_path)
    sys.exit(code)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as ex:
        click.echo(f"cannot read {path}: {ex}", err=True)
        sys.exit(3)
    except json.JSONDecodeError as ex:
        click.echo(
            f"parse error in {path}: line {ex.lineno}, column {ex.colno}: {ex.msg}",
            err=True,
        )
        sys.exit(3)


@main.command("check")
@click.argument("atlas_file", type=click.Path(exists=True))
@click.option("--json", "json_path", type=click.Path(), default=None)
def check_cmd(atlas_file, json_path):
    """Validate an atlas JSON file (schema vfc-atlas/1)."""
    data = _load_json(atlas_file)
    try:
        report = check_atlas_data(data)
    except (ValueError, KeyError, TypeError) as ex:
        click.echo(f"schema error: {ex}", err=True)
        sys.exit(3)
    _print_stage_summary(report)
    if json_path:
        emit_json(report, json_path)
    sys.exit(0 if report["ok"] else 1)


@main.command("zeros")
@click.argument("atlas_file", type=click.Path(exists=True))
@click.option("--perturbation", "pert_file", type=click.Path(exists=True),
              required=True)
@click.option("--json", "json_path", type=click.Path(), default=None)
def zeros_cmd(atlas_file, pert_file, json_path):
    """Find perturbed zeros of a serialized atlas."""
    data = _load_json(atlas_file)
    pdata = _load_json(pert_file)
    try:
        atlas = atlas_from_json(data)
        if "reduction" in data:
            red = reduction_from_json(data["reduction"])
        else:
            red = Reduction(
                sets={
                    I: frozenset(range(len(atlas.charts[I].domain.points)))
                    for I in atlas.index_sets()
                }
            )
        nu = perturbation_from_json(pdata)
    except (ValueError, KeyError, TypeError) as ex:
        click.echo(f"schema error: {ex}", err=True)
        sys.exit(3)
    try:
        result = find_zeros(atlas, red, nu)
    except PerturbationRejected as ex:
        click.echo(f"perturbation rejected: {ex}", err=True)
        sys.exit(2)
    report = zero_set_report(result.zeros, warnings=result.warnings)
    click.echo(f"zeros found: {len(result.zeros)}")
    for z in result.zeros:
        click.echo(
            f"  chart {z.chart_index}: {tuple(round(c, 6) for c in z.coordinates)}"
            f" sign {z.sign:+d} residual {z.residual:.2e}"
        )
    for w in result.warnings:
        click.echo(f"  warning: {w}")
    if json_path:
        emit_json(report, json_path)
    sys.exit(0)


if __name__ == "__main__":
    main()

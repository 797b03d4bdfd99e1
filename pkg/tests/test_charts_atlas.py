import itertools
import json
import random
from fractions import Fraction

import pytest

from vfc.charts_atlas import (
    AtlasModel,
    ChartModel,
    CoordinateChangeModel,
    FiniteGroup,
    GroupQuotientModel,
    atlas_from_json,
    atlas_to_json,
    build_categories,
    check_atlas_model,
    check_category,
    check_chart,
    check_cocycle,
    check_coordinate_change,
    check_group_covering,
    check_group_quotient,
    check_realizations,
    check_tame_and_filtration,
    compose_coordinate_changes,
    cyclic_group,
    kernel_labels,
    product_group,
    project_label,
    realize,
    restrict_chart,
    trivial_group,
)
from vfc.exterior_engine import RationalMatrix

F = Fraction


# ---------------------------------------------------------------------------
# toy-atlas builder: X with cover sets F_i, charts U_I = F_I × Γ_I
# ---------------------------------------------------------------------------


def build_toy_atlas(cover: dict, x_labels: list, orders: dict) -> AtlasModel:
    """Charts U_I = F_I × Γ_I with Γ acting on the second factor, E = 0."""
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
                gJ = charts[J].group
                pts_J = list(layouts[J])
                rho = {}
                for (x, g) in pts_J:
                    rho[layouts[J][(x, g)]] = layouts[I][
                        (x, project_label(g, J, I))
                    ]
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


@pytest.fixture
def toy3():
    cover = {1: {"a", "b", "c"}, 2: {"b", "c", "d"}, 3: {"c", "d", "e"}}
    return build_toy_atlas(cover, ["a", "b", "c", "d", "e"], {1: 2, 2: 3, 3: 1})


@pytest.fixture
def toy2():
    cover = {1: {"a", "b"}, 2: {"b", "c"}}
    return build_toy_atlas(cover, ["a", "b", "c"], {1: 2, 2: 3})


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------


class TestFiniteGroup:
    def test_cyclic_valid(self):
        assert cyclic_group(4).validate().ok

    def test_broken_table(self):
        g = cyclic_group(2)
        table = dict(g.table)
        table[("g1", "g1")] = "g1"  # idempotent non-identity breaks inverses
        bad = FiniteGroup(g.elements, table, "e")
        assert not bad.validate().ok

    def test_product_and_projection(self):
        p = product_group([cyclic_group(2), cyclic_group(3)])
        assert p.order == 6
        assert p.mul("g1|g1", "g1|g2") == "e|e"
        assert project_label("g1|g2", (1, 2), (2,)) == "g2"
        assert project_label("g1|g2", (1, 2), (1,)) == "g1"

    def test_kernel_labels(self):
        p = product_group([cyclic_group(2), cyclic_group(3)])
        ker = kernel_labels(p, (1, 2), (1,), "e")
        assert sorted(ker) == ["e|e", "e|g1", "e|g2"]


# ---------------------------------------------------------------------------
# group quotients
# ---------------------------------------------------------------------------


def _z2_on_4_points():
    g = cyclic_group(2)
    pts = tuple((F(k),) for k in range(4))
    perms = {"e": (0, 1, 2, 3), "g1": (1, 0, 3, 2)}
    return GroupQuotientModel(points=pts, group=g, perms=perms)


class TestGroupQuotient:
    def test_trivial_group(self):
        m = GroupQuotientModel(
            points=((F(0),), (F(1),)),
            group=trivial_group(),
            perms={"e": (0, 1)},
        )
        rep = check_group_quotient(m)
        assert rep.ok
        assert rep.details["num_classes"] == 2

    def test_z2_free(self):
        m = _z2_on_4_points()
        rep = check_group_quotient(m)
        assert rep.ok
        assert rep.details["num_classes"] == 2
        assert rep.details["stabilizer_orders"] == [1, 1]

    def test_action_law_violation(self):
        g = cyclic_group(2)
        m = GroupQuotientModel(
            points=((F(0),), (F(1),), (F(2),)),
            group=g,
            perms={"e": (0, 1, 2), "g1": (1, 2, 0)},  # order 3 ≠ order of g1
        )
        rep = check_group_quotient(m)
        assert any(f["clause"] == "action_law" for f in rep.failures)

    def test_affine_mismatch(self):
        m = _z2_on_4_points()
        m.affine = {
            "g1": (RationalMatrix.identity(1), (F(0),))  # identity ≠ swap
        }
        rep = check_group_quotient(m)
        assert any(f["clause"] == "affine_vs_permutation" for f in rep.failures)


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------


class TestChart:
    def test_toy_charts_pass(self, toy3):
        for I in toy3.index_sets():
            assert check_chart(toy3, I).ok

    def test_footprint_not_bijective(self, toy2):
        chart = toy2.charts[(1,)]
        broken = dict(chart.footprint_map)
        first = next(iter(broken))
        broken[first] = "zzz"
        chart2 = ChartModel(
            index=chart.index,
            domain=chart.domain,
            obstruction_dim=0,
            obstruction_action={},
            obstruction_points=chart.obstruction_points,
            section_samples=chart.section_samples,
            footprint_map=broken,
        )
        shadow = AtlasModel(
            x_labels=toy2.x_labels,
            cover=toy2.cover,
            charts={**toy2.charts, (1,): chart2},
            changes=toy2.changes,
        )
        rep = check_chart(shadow, (1,))
        assert not rep.ok

    def test_section_equivariance_violation(self):
        # dim-1 obstruction with a sign action; constant nonzero section
        g = cyclic_group(2)
        pts = ((F(0),), (F(1),))
        domain = GroupQuotientModel(points=pts, group=g, perms={"e": (0, 1), "g1": (1, 0)})
        chart = ChartModel(
            index=(1,),
            domain=domain,
            obstruction_dim=1,
            obstruction_action={
                "e": RationalMatrix.identity(1),
                "g1": RationalMatrix.from_rows([[F(-1)]]),
            },
            obstruction_points=((F(0),), (F(1),), (F(-1),)),
            section_samples=((F(1),), (F(1),)),  # should flip sign, doesn't
            footprint_map={},
        )
        atlas = AtlasModel(
            x_labels=(), cover={1: frozenset()}, charts={(1,): chart}, changes={}
        )
        rep = check_chart(atlas, (1,))
        assert any(f["clause"] == "section_not_equivariant" for f in rep.failures)


# ---------------------------------------------------------------------------
# coverings and coordinate changes
# ---------------------------------------------------------------------------


class TestGroupCovering:
    def test_identity_covering(self, toy2):
        rep = check_group_covering(toy2, (1,), (1,))
        assert rep.ok

    def test_toy_covering(self, toy2):
        rep = check_group_covering(toy2, (1,), (1, 2))
        assert rep.ok
        assert rep.details["kernel_order"] == 3  # Γ_2 = Z_3

    def test_kernel_fixed_point(self, toy2):
        chart = toy2.charts[(1, 2)]
        perms = dict(chart.domain.perms)
        ident = perms[chart.group.identity]
        for g in kernel_labels(chart.group, (1, 2), (1,), "e"):
            perms[g] = ident
        domain = GroupQuotientModel(
            points=chart.domain.points, group=chart.group, perms=perms
        )
        chart2 = ChartModel(
            index=chart.index,
            domain=domain,
            obstruction_dim=0,
            obstruction_action={},
            obstruction_points=chart.obstruction_points,
            section_samples=chart.section_samples,
            footprint_map=chart.footprint_map,
        )
        shadow = AtlasModel(
            x_labels=toy2.x_labels,
            cover=toy2.cover,
            charts={**toy2.charts, (1, 2): chart2},
            changes=toy2.changes,
        )
        rep = check_group_covering(shadow, (1,), (1, 2))
        assert any(f["clause"] == "kernel_action_not_free" for f in rep.failures)


class TestRestrictChart:
    def test_full_restriction(self, toy2):
        chart = toy2.charts[(1,)]
        out = restrict_chart(chart, ["true"])
        assert len(out.domain.points) == len(chart.domain.points)

    def test_restrict_to_sub_footprint(self, toy2):
        chart = toy2.charts[(1,)]
        # keep only x-label "b" (x coordinate index 1)
        pred = ["==", ["var", 0], ["num", "1/1"]]
        out = restrict_chart(chart, pred)
        assert len(out.domain.points) == chart.group.order
        assert set(out.footprint_map.values()) == {"b"}
        assert check_group_quotient(out.domain).ok

    def test_partial_footprint_raises(self, toy2):
        chart = toy2.charts[(1, 2)]  # Γ = Z2×Z3, 6 points per label
        # cut through a single fiber: keep group-coordinate 0 only
        pred = ["==", ["var", 1], ["num", "0/1"]]
        with pytest.raises(ValueError):
            restrict_chart(chart, pred)


def _tbc_fixture(phi_entries, section_asts):
    """Minimal I ⊊ J pair with 1- and 2-dim obstruction for tbc tests."""
    gI = trivial_group()
    chart_I = ChartModel(
        index=(1,),
        domain=GroupQuotientModel(
            points=((F(0),),), group=gI, perms={"e": (0,)}
        ),
        obstruction_dim=1,
        obstruction_action={"e": RationalMatrix.identity(1)},
        obstruction_points=((F(0),), (F(1),), (F(-1),)),
        section_samples=((F(0),),),
        footprint_map={0: "p"},
        section_asts=(["num", "0/1"],),
        tangent_dims=(0,),
    )
    gJ = product_group([trivial_group(), trivial_group()])
    chart_J = ChartModel(
        index=(1, 2),
        domain=GroupQuotientModel(
            points=((F(0), F(0)),), group=gJ, perms={"e|e": (0,)}
        ),
        obstruction_dim=2,
        obstruction_action={"e|e": RationalMatrix.identity(2)},
        obstruction_points=(
            (F(0), F(0)),
            (F(1), F(0)),
            (F(-1), F(0)),
            (F(0), F(1)),
            (F(0), F(-1)),
            (F(1), F(2)),
            (F(-1), F(-2)),
        ),
        section_samples=((F(0), F(0)),),
        footprint_map={0: "p"},
        section_asts=section_asts,
        tangent_dims=(0, 1),
    )
    change = CoordinateChangeModel(
        source_index=(1,),
        target_index=(1, 2),
        tilde_indices=(0,),
        rho_idx={0: 0},
        phi_hat=RationalMatrix.from_rows(phi_entries),
        tilde_tangent_dims=(1,),
    )
    return AtlasModel(
        x_labels=("p",),
        cover={1: frozenset({"p"}), 2: frozenset({"p"})},
        charts={(1,): chart_I, (1, 2): chart_J},
        changes={((1,), (1, 2)): change},
    )


class TestCoordinateChange:
    def test_toy_changes_pass(self, toy3):
        for (I, J) in toy3.changes:
            assert check_coordinate_change(toy3, I, J).ok

    def test_tbc_passes(self):
        # s_J(a, t) = (a, 2a): complement column (1, 2), φ̂ = (1, 0)ᵀ
        atlas = _tbc_fixture(
            [[F(1)], [F(0)]],
            (["var", 0], ["*", ["num", "2/1"], ["var", 0]]),
        )
        assert check_coordinate_change(atlas, (1,), (1, 2)).ok

    def test_tbc_fails_when_degenerate(self):
        # s_J(a, t) = (a, 0): block [[1,1],[0,0]] singular
        atlas = _tbc_fixture(
            [[F(1)], [F(0)]],
            (["var", 0], ["num", "0/1"]),
        )
        rep = check_coordinate_change(atlas, (1,), (1, 2))
        assert any(
            f["clause"] == "tangent_bundle_condition" for f in rep.failures
        )

    def test_noninjective_phi_hat(self):
        atlas = _tbc_fixture(
            [[F(0)], [F(0)]],
            (["var", 0], ["*", ["num", "2/1"], ["var", 0]]),
        )
        rep = check_coordinate_change(atlas, (1,), (1, 2))
        assert any(f["clause"] == "cokernel" for f in rep.failures)

    def test_index_condition_violation(self):
        atlas = _tbc_fixture(
            [[F(1)], [F(0)]],
            (["var", 0], ["*", ["num", "2/1"], ["var", 0]]),
        )
        chart = atlas.charts[(1,)]
        chart.tangent_dims = ()  # now n_J - n_I = 2 ≠ m_J - m_I = 1
        rep = check_coordinate_change(atlas, (1,), (1, 2))
        assert any(f["clause"] == "index_condition" for f in rep.failures)


class TestComposition:
    def test_composite_passes_and_fiber_count(self, toy3):
        out = compose_coordinate_changes(toy3, (1,), (1, 2), (1, 2, 3))
        assert not out.empty_domain
        assert out.report.ok
        ker = 3 * 1  # |Γ_{(1,2,3)∖(1,)}| = |Z3 × Z1|
        fibers = {}
        for z in out.change.tilde_indices:
            fibers.setdefault(out.change.rho_idx[z], 0)
            fibers[out.change.rho_idx[z]] += 1
        assert set(fibers.values()) == {ker}

    def test_empty_domain_flag(self, toy3):
        cIJ = toy3.changes[((1,), (1, 2))]
        empty = CoordinateChangeModel(
            source_index=cIJ.source_index,
            target_index=cIJ.target_index,
            tilde_indices=(),
            rho_idx={},
            phi_hat=cIJ.phi_hat,
        )
        shadow = AtlasModel(
            x_labels=toy3.x_labels,
            cover=toy3.cover,
            charts=toy3.charts,
            changes={**toy3.changes, ((1,), (1, 2)): empty},
        )
        out = compose_coordinate_changes(shadow, (1,), (1, 2), (1, 2, 3))
        assert out.empty_domain

    def test_composite_matches_direct_change(self, toy3):
        out = compose_coordinate_changes(toy3, (1,), (1, 2), (1, 2, 3))
        direct = toy3.changes[((1,), (1, 2, 3))]
        assert set(out.change.tilde_indices) == set(direct.tilde_indices)
        assert all(
            out.change.rho_idx[z] == direct.rho_idx[z]
            for z in out.change.tilde_indices
        )


class TestCocycle:
    def test_two_charts_vacuous(self, toy2):
        rep = check_cocycle(toy2, "strong")
        assert rep.ok
        assert rep.details["triples"] == 0

    def test_toy3_strong(self, toy3):
        for strength in ("weak", "cocycle", "strong"):
            assert check_cocycle(toy3, strength).ok

    def test_shrunk_domain_breaks_strong_only(self, toy3):
        cIK = toy3.changes[((1,), (1, 2, 3))]
        chart_K = toy3.charts[(1, 2, 3)]
        cls = chart_K.domain.class_index_of()
        drop_class = cls[cIK.tilde_indices[0]]
        kept = tuple(y for y in cIK.tilde_indices if cls[y] != drop_class)
        shrunk = CoordinateChangeModel(
            source_index=cIK.source_index,
            target_index=cIK.target_index,
            tilde_indices=kept,
            rho_idx={y: cIK.rho_idx[y] for y in kept},
            phi_hat=cIK.phi_hat,
        )
        shadow = AtlasModel(
            x_labels=toy3.x_labels,
            cover=toy3.cover,
            charts=toy3.charts,
            changes={**toy3.changes, ((1,), (1, 2, 3)): shrunk},
        )
        assert check_cocycle(shadow, "weak").ok
        assert not check_cocycle(shadow, "strong").ok


class TestTameAndFiltration:
    def test_toy_atlases_tame(self, toy2, toy3):
        for atlas in (toy2, toy3):
            rep = check_tame_and_filtration(atlas)
            assert rep.ok
            # tameness implies the strong cocycle condition
            assert check_cocycle(atlas, "strong").ok

    def test_deleted_sample_reported(self, toy3):
        cIJ = toy3.changes[((1,), (1, 2))]
        chart_J = toy3.charts[(1, 2)]
        cls = chart_J.domain.class_index_of()
        # delete a class that also lies in the triple overlap
        triple_labels = toy3.footprint((1, 2, 3))
        drop = None
        for y in cIJ.tilde_indices:
            lab = chart_J.footprint_map[y]
            if lab in triple_labels:
                drop = cls[y]
                break
        kept = tuple(y for y in cIJ.tilde_indices if cls[y] != drop)
        shrunk = CoordinateChangeModel(
            source_index=cIJ.source_index,
            target_index=cIJ.target_index,
            tilde_indices=kept,
            rho_idx={y: cIJ.rho_idx[y] for y in kept},
            phi_hat=cIJ.phi_hat,
        )
        shadow = AtlasModel(
            x_labels=toy3.x_labels,
            cover=toy3.cover,
            charts=toy3.charts,
            changes={**toy3.changes, ((1,), (1, 2)): shrunk},
        )
        rep = check_tame_and_filtration(shadow)
        assert not rep.ok


class TestAtlasModel:
    def test_toy_additivity(self, toy3):
        assert check_atlas_model(toy3).ok

    def test_missing_transition_chart(self, toy2):
        charts = dict(toy2.charts)
        del charts[(1, 2)]
        changes = {
            k: v for k, v in toy2.changes.items() if k[1] in charts
        }
        shadow = AtlasModel(
            x_labels=toy2.x_labels,
            cover=toy2.cover,
            charts=charts,
            changes=changes,
        )
        rep = check_atlas_model(shadow)
        assert any(f["clause"] == "index_set_mismatch" for f in rep.failures)

    def test_non_additive_group(self, toy2):
        chart = toy2.charts[(1, 2)]
        # claim trivial isotropy on the transition chart
        n = len(chart.domain.points)
        chart2 = ChartModel(
            index=chart.index,
            domain=GroupQuotientModel(
                points=chart.domain.points,
                group=trivial_group(),
                perms={"e": tuple(range(n))},
            ),
            obstruction_dim=0,
            obstruction_action={},
            obstruction_points=((),),
            section_samples=chart.section_samples,
            footprint_map=chart.footprint_map,
        )
        shadow = AtlasModel(
            x_labels=toy2.x_labels,
            cover=toy2.cover,
            charts={**toy2.charts, (1, 2): chart2},
            changes=toy2.changes,
        )
        rep = check_atlas_model(shadow)
        assert any(f["clause"] == "group_not_additive" for f in rep.failures)


# ---------------------------------------------------------------------------
# categories and realizations
# ---------------------------------------------------------------------------


class TestCategories:
    def test_single_chart_action_groupoid(self):
        cover = {1: {"a", "b"}}
        atlas = build_toy_atlas(cover, ["a", "b"], {1: 2})
        out = build_categories(atlas)
        assert out.report.ok
        B = out.domain_category
        assert len(B.objects) == 4  # 2 labels × |Z2|
        assert len(B.morphisms) == 8  # |U|·|Γ|

    def test_toy2_morphism_count(self, toy2):
        out = build_categories(toy2)
        assert out.report.ok
        B = out.domain_category
        # Σ_{I⊆J} |Ũ_IJ|·|Γ_I|
        expected = 0
        for I in toy2.index_sets():
            nI = len(toy2.charts[I].domain.points)
            expected += nI * toy2.charts[I].group.order
        for (I, J), c in toy2.changes.items():
            expected += len(c.tilde_indices) * toy2.charts[I].group.order
        assert len(B.morphisms) == expected

    def test_toy3_axioms_and_functors(self, toy3):
        out = build_categories(toy3)
        assert out.report.ok
        assert check_category(out.domain_category).ok
        assert check_category(out.obstruction_category).ok

    def test_random_toys_axioms(self):
        for seed in range(10):
            atlas = random_toy_atlas(seed)
            assert check_atlas_model(atlas).ok, seed
            assert check_tame_and_filtration(atlas).ok, seed
            out = build_categories(atlas)
            assert out.report.ok, seed


class TestRealization:
    def test_single_free_z2_chart(self):
        cover = {1: {"a", "b"}}
        atlas = build_toy_atlas(cover, ["a", "b"], {1: 2})
        out = build_categories(atlas)
        res = realize(out.domain_category)
        assert len(res.classes) == 2

    def test_toy_realizations(self, toy2, toy3):
        for atlas in (toy2, toy3):
            out = build_categories(atlas)
            rep = check_realizations(atlas, out.domain_category)
            assert rep.ok
            assert rep.details["zero_classes"] == len(atlas.x_labels)

    def test_full_vs_intermediate_counts(self, toy3):
        out = build_categories(toy3)
        rep = check_realizations(toy3, out.domain_category)
        assert rep.details["full_classes"] == rep.details["intermediate_classes"]
        # realization classes are exactly the footprint samples here
        assert rep.details["full_classes"] == len(toy3.x_labels)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


class TestSerialization:
    def test_round_trip(self, toy3):
        blob = atlas_to_json(toy3)
        text = json.dumps(blob, sort_keys=True)
        again = atlas_from_json(json.loads(text))
        assert again.x_labels == toy3.x_labels
        assert again.index_sets() == toy3.index_sets()
        for I in toy3.index_sets():
            assert again.charts[I].domain.points == toy3.charts[I].domain.points
            assert again.charts[I].domain.perms == toy3.charts[I].domain.perms
        assert set(again.changes) == set(toy3.changes)
        # deterministic bytes
        assert json.dumps(atlas_to_json(again), sort_keys=True) == text

    def test_schema_rejected(self):
        with pytest.raises(ValueError):
            atlas_from_json({"schema": "other/9"})

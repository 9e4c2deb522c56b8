import dataclasses
import json

import numpy as np
import pytest

from ddgraphs.compound import (
    NAMED,
    CertificationFailed,
    Infeasible,
    NotMoore,
    PlanGraphMismatch,
    RangeExceedsDegree,
    RangeSpec,
    ReplacementPlan,
    apply_plan,
    block_distance_checks,
    build_H3K3,
    build_H4K4,
    build_Q4K3,
    check_conditions,
    construct_named,
    index_tree,
    make_plan,
    slot_balance,
)
from ddgraphs.graph import bfs_distances, build_graph, certify, moore_bound
from ddgraphs.moore import build_Hq, build_Qq


@pytest.fixture(scope="module")
def h5():
    return build_Hq(5)


@pytest.fixture(scope="module")
def h3():
    return build_Hq(3)


def test_index_tree_h5(h5):
    ti = index_tree(h5, 0, RangeSpec(1, 4, 4))
    targets = ti.targets()
    assert len(targets) == 16
    d = bfs_distances(h5, 0)
    verts = [v for _, v, _ in targets]
    assert len(set(verts)) == 16 and all(d[v] == 3 for v in verts)
    assert not any(h5.has_edge(a, b) for a in verts for b in verts)
    # children are taken in ascending order
    assert list(ti.u) == sorted(ti.u)
    assert ti.w[0, 0] < ti.w[0, 1] < ti.w[0, 2]


def test_index_tree_h8_counts_and_errors():
    g = build_Hq(8)
    assert len(index_tree(g, 0, RangeSpec(2, 6, 5)).targets()) == 60
    with pytest.raises(RangeExceedsDegree):
        index_tree(g, 0, RangeSpec(10, 1, 1))
    with pytest.raises(RangeExceedsDegree):
        RangeSpec(0, 1, 1)


def test_index_tree_rejects_non_moore():
    c = build_graph([(i, (i + 1) % 12) for i in range(12)], 12)
    with pytest.raises(NotMoore):
        index_tree(c, 0, RangeSpec(1, 1, 1))


def test_slot_balance_examples():
    s = slot_balance(6, 4, RangeSpec(1, 4, 4))
    assert (s["capacity"], s["demand"], s["surplus"]) == (12, 12, 0)
    s = slot_balance(9, 6, RangeSpec(2, 6, 5))
    assert (s["capacity"], s["demand"], s["surplus"]) == (24, 24, 0)
    s = slot_balance(14, 7, RangeSpec(4, 12, 11))
    assert (s["capacity"], s["demand"], s["surplus"]) == (56, 56, 0)
    with pytest.raises(Infeasible):
        slot_balance(4, 3, RangeSpec(4, 3, 3))


@pytest.mark.parametrize("name", sorted(NAMED))
def test_slot_balance_identity_all_named(name):
    q, h, r, _ = NAMED[name]
    assert slot_balance(q + 1, h, RangeSpec(*r))["surplus"] == 0


def test_plan_invariants(h5):
    ti = index_tree(h5, 0, RangeSpec(1, 4, 4))
    plan = make_plan(ti, 4)
    assert len(plan.targets) == 16
    assert (plan.loads() == plan.cap).all()  # zero slack
    for t, (key, v, par) in enumerate(plan.targets):
        assert sorted(a for a, _ in plan.former[t]) == [int(c) for c in h5.neighbors(v)]
        assert dict(plan.former[t])[par] == 0
        kid_slots = {s for a, s in plan.former[t] if a != par}
        assert kid_slots == set(range(4))


def test_apply_plan_laws(h5):
    ti = index_tree(h5, 0, RangeSpec(1, 4, 4))
    plan = make_plan(ti, 4)
    g2 = apply_plan(h5, plan)
    assert g2.order == h5.order + 16 * 3 == 7860
    assert g2.degrees.max() <= 6
    touched = sorted({a for rows in plan.former for a, _ in rows})
    assert (g2.degrees[touched] == h5.degrees[touched]).all()
    assert g2.label(plan.vertex(0, 0)) == "clique0.0"
    assert g2.label(plan.vertex(15, 3)) == "clique15.3"
    report = check_conditions(g2, plan)
    assert report.summary() == {"a": "pass", "b": "pass", "c": "pass", "d": "vacuous", "e": "pass"}


def test_empty_plan_is_identity(h3):
    ti = index_tree(h3, 0, RangeSpec(1, 1, 1))
    plan = make_plan(ti, 2)
    empty = dataclasses.replace(plan, targets=[], former=[], links=[])
    assert apply_plan(h3, empty) is h3


def test_minimal_two_clique_plan(h3):
    ti = index_tree(h3, 0, RangeSpec(1, 1, 2))
    plan = make_plan(ti, 2)
    assert [kind for *_, kind in plan.links] == ["b"]
    g2 = apply_plan(h3, plan)
    assert g2.order == 730
    report = check_conditions(g2, plan)
    assert report.status("c") == "vacuous" and report.status("d") == "vacuous" and report.ok


def test_infeasible_plan(h3):
    ti = index_tree(h3, 0, RangeSpec(4, 3, 3))
    with pytest.raises(Infeasible):
        make_plan(ti, 3)


def test_deleted_b_edge_is_reported(h5):
    ti = index_tree(h5, 0, RangeSpec(1, 4, 4))
    plan = make_plan(ti, 4)
    i = next(k for k, link in enumerate(plan.links) if link[4] == "b")
    ta, _, tb, _, _ = plan.links[i]
    broken = dataclasses.replace(plan, links=plan.links[:i] + plan.links[i + 1:])
    report = check_conditions(apply_plan(h5, broken), broken)
    assert report.status("b") == "fail"
    bad = [r.subject for r in report.failures() if r.condition == "b"]
    names = ["K" + "".join(map(str, plan.targets[t][0])) for t in (ta, tb)]
    assert bad == [f"{names[0]}~{names[1]}"]


def test_plan_mismatch(h5, h3):
    plan = make_plan(index_tree(h5, 0, RangeSpec(1, 4, 4)), 4)
    with pytest.raises(PlanGraphMismatch):
        apply_plan(h3, plan)
    key, v, par = plan.targets[0]
    bad = dataclasses.replace(plan, former=[plan.former[0][1:]] + plan.former[1:])
    with pytest.raises(PlanGraphMismatch):
        apply_plan(h5, bad)


def test_plan_json_replay(h5):
    plan = make_plan(index_tree(h5, 0, RangeSpec(1, 4, 4)), 4, seed=3)
    back = ReplacementPlan.from_json(json.loads(plan.dumps()))
    assert back.dumps() == plan.dumps()
    assert apply_plan(h5, back).same_as(apply_plan(h5, plan))


def test_same_seed_same_bytes(h5):
    ti = index_tree(h5, 0, RangeSpec(1, 4, 4))
    a = apply_plan(h5, make_plan(ti, 4, seed=7))
    b = apply_plan(h5, make_plan(ti, 4, seed=7))
    assert a.indptr.tobytes() == b.indptr.tobytes() and a.indices.tobytes() == b.indices.tobytes()
    c = apply_plan(h5, make_plan(ti, 4, seed=8))
    assert not c.same_as(a)


def test_h5k4_certified_with_proof_obligations(h5):
    res = construct_named("H5K4", host=h5)
    cert = res.certificate
    assert (cert.order, cert.max_degree, cert.diameter, cert.diameter_method) == (7860, 6, 6, "exact")
    assert res.report.ok
    checks = block_distance_checks(res.graph, res.plan)
    assert checks["intra_block"] <= 3 and checks["cross_block"] <= 5
    assert cert.order <= moore_bound(6, 6)


def test_certification_failure_is_reported(h5, monkeypatch):
    import ddgraphs.compound as comp

    real = comp.certify

    def pessimist(g, *a, **k):
        cert = real(g, *a, **k)
        cert.diameter = 7
        return cert

    monkeypatch.setattr(comp, "certify", pessimist)
    with pytest.raises(CertificationFailed):
        construct_named("H5K4", host=h5, retries=2)


def test_q4k3():
    res = build_Q4K3()
    cert = res.certificate
    assert (cert.order, cert.max_degree, cert.diameter) == (186, 5, 4)
    # negative control: one clique fewer gives 184 vertices
    plan = res.plan
    drop = 7
    keep_links = [l for l in plan.links if drop not in (l[0], l[2])]
    smaller = dataclasses.replace(plan, targets=plan.targets[:drop], former=plan.former[:drop], links=keep_links)
    assert apply_plan(build_Qq(4), smaller).order == 184


def test_h3k3():
    res = build_H3K3()
    cert = res.certificate
    assert (cert.order, cert.max_degree, cert.diameter) == (740, 4, 6)
    summary = res.report.summary()
    assert all(summary[c] in ("pass", "vacuous") for c in "abce") and summary["d"] == "skipped"


def test_h4k4():
    res = build_H4K4()
    cert = res.certificate
    assert (cert.order, cert.max_degree, cert.diameter) == (2754, 5, 6)
    assert (2754 - 2730) // 3 == len(res.plan.targets) == 8
    assert res.report.summary() == {"a": "pass", "b": "pass", "c": "pass", "d": "skipped", "e": "pass"}


def test_searched_builders_are_deterministic():
    a, b = build_H3K3(seed=2), build_H3K3(seed=2)
    assert a.graph.same_as(b.graph) and a.plan.dumps() == b.plan.dumps()


def test_h13k7_order_disagrees_with_table():
    q, h, r, published = NAMED["H13K7"]
    t = r[0] * r[1] * r[2]
    assert 2 * (q**6 - 1) // (q - 1) + t * (h - 1) == 807636 != published == 806636

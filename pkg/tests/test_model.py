import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from fgsk import fixture
from fgsk.model import (Aggregate, CostParams, InputError, QueryGroup, QueryPoint, SpatioTextualObject,
                        aggregate, best_subgroup, cost_node, cost_object, keyword_similarity, min_dist,
                        normalized_distance, object_costs)
from fgsk.oracle import exhaustive_subgroup

EXAMPLE = CostParams(alpha=0.5, aggregate="sum", d_max=fixture.D_MAX)


def point_at(distance, keywords):
    return QueryPoint((distance, 0.0), frozenset(keywords))


O6 = SpatioTextualObject(6, (0.0, 0.0), frozenset({"t1", "t3", "t4"}))


# --- worked example -------------------------------------------------------

def test_distance_normalised_by_dmax():
    assert normalized_distance((6.5, 0.0), (0.0, 0.0), 10.0) == pytest.approx(0.65, abs=1e-12)


def test_similarity_half_of_query_keywords_shared():
    assert keyword_similarity({"t3", "t6"}, O6.keywords, EXAMPLE) == 0.5


@pytest.mark.parametrize("member,distance,keywords,expected", [
    ("q3", 6.5, {"t3", "t6"}, 0.575),
    ("q4", 1.0, {"t1"}, 0.05),
    ("q5", 9.5, {"t4", "t6"}, 0.725),
    # recomputed from the stated distances; the printed 0.175 and 0.535 do not follow
    ("q1", 3.5, {"t1", "t2"}, 0.425),
    ("q2", 5.5, {"t4"}, 0.275),
])
def test_example_member_costs(member, distance, keywords, expected):
    assert cost_object(point_at(distance, keywords), O6, EXAMPLE) == pytest.approx(expected, abs=1e-9)


def test_example_aggregate_matches_table_values():
    costs = [cost_object(QueryPoint((d, 0.0), frozenset(k.split())), O6, EXAMPLE)
             for d, k in zip(fixture.O6_DISTANCES, ["t1 t2", "t4", "t3 t6", "t1", "t4 t6"])]
    for m, want in fixture.O6_AGGREGATES.items():
        assert best_subgroup(costs, m, "sum").aggregate_cost == pytest.approx(want, abs=1e-9)


def test_pinned_fixture_reproduces_member_costs():
    objs = {o.id: o for o in fixture.objects()}
    group = fixture.query_group()
    got = object_costs(group, objs[6], EXAMPLE)
    assert got == pytest.approx(list(fixture.O6_COSTS), abs=1e-9)
    o7 = object_costs(group, objs[7], EXAMPLE)
    for m, want in fixture.O7_AGGREGATES.items():
        assert best_subgroup(o7, m, "sum").aggregate_cost == pytest.approx(want, abs=1e-9)


# --- cost function --------------------------------------------------------

def test_distance_clamps_at_one():
    q = QueryPoint((100.0, 0.0), {"a"})
    o = SpatioTextualObject(0, (0.0, 0.0), {"a"})
    params = CostParams(alpha=1.0, d_max=10.0)
    assert cost_object(q, o, params) == 1.0


def test_alpha_extremes():
    q = QueryPoint((3.0, 4.0), {"a", "b"})
    o = SpatioTextualObject(0, (0.0, 0.0), {"a"})
    assert cost_object(q, o, CostParams(alpha=1.0, d_max=10.0)) == 0.5
    assert cost_object(q, o, CostParams(alpha=0.0, d_max=10.0)) == 0.5


def test_weights_normalised_by_wmax():
    params = CostParams(d_max=1.0, w_max=4.0, weights={"a": 2.0, "b": 4.0})
    assert keyword_similarity({"a", "b", "c"}, {"a", "c"}, params) == pytest.approx((0.5 + 0.25) / 3)


def test_priority_divides_cost():
    o = SpatioTextualObject(0, (1.0, 1.0), {"a"})
    params = CostParams(d_max=10.0)
    base = cost_object(QueryPoint((0.0, 0.0), {"a", "b"}), o, params)
    assert cost_object(QueryPoint((0.0, 0.0), {"a", "b"}, 2.0), o, params) == base / 2.0


def test_min_dist_inside_is_zero():
    assert min_dist((1.0, 1.0), (0.0, 0.0, 2.0, 2.0)) == 0.0
    assert min_dist((5.0, 6.0), (0.0, 0.0, 2.0, 2.0)) == 5.0


def test_degenerate_rect_equals_point_distance():
    a, b = (0.3, 0.7), (12.1, -4.4)
    assert min(1.0, min_dist(a, (*b, *b)) / 20.0) == normalized_distance(a, b, 20.0)


@pytest.mark.parametrize("bad", [
    dict(alpha=-0.1), dict(alpha=1.5), dict(d_max=0.0), dict(w_max=0.0),
    dict(weights={"a": 2.0}), dict(weights={"a": -1.0}), dict(aggregate="avg"),
])
def test_cost_params_validation(bad):
    with pytest.raises(InputError):
        CostParams(**bad)


def test_input_validation():
    with pytest.raises(InputError):
        QueryPoint((0, 0), frozenset())
    with pytest.raises(InputError):
        QueryPoint((0, 0), {"a"}, priority=0.0)
    with pytest.raises(InputError):
        SpatioTextualObject(-1, (0, 0), {"a"})
    with pytest.raises(InputError):
        SpatioTextualObject(1, (0, 0), {""})
    with pytest.raises(InputError):
        QueryGroup(())
    with pytest.raises(InputError):
        min_dist((0, 0), (1.0, 0.0, 0.0, 1.0))


# --- aggregates and subgroups ---------------------------------------------

def test_aggregate_kinds():
    costs = [0.3, 0.1, 0.2]
    assert aggregate(costs, "sum") == 0.1 + 0.2 + 0.3
    assert aggregate(costs, Aggregate.MAX) == 0.3
    assert aggregate(costs, "MIN") == 0.1
    with pytest.raises(InputError):
        aggregate([], "sum")


def test_best_subgroup_ties_prefer_lower_index():
    sel = best_subgroup([0.2, 0.1, 0.2, 0.2], 2, "sum")
    assert sel.member_indices == (0, 1)


def test_best_subgroup_rejects_bad_size():
    with pytest.raises(InputError):
        best_subgroup([0.1, 0.2], 3, "sum")
    with pytest.raises(InputError):
        best_subgroup([0.1, 0.2], 0, "sum")


costs_strategy = st.lists(st.floats(0.0, 2.0, allow_nan=False), min_size=1, max_size=8)


@settings(max_examples=300, deadline=None)
@given(costs_strategy, st.data(), st.sampled_from(list(Aggregate)))
def test_best_subgroup_equals_exhaustive_search(costs, data, kind):
    m = data.draw(st.integers(1, len(costs)))
    fast = best_subgroup(costs, m, kind)
    slow = exhaustive_subgroup(costs, m, kind)
    assert fast.aggregate_cost == slow.aggregate_cost
    assert aggregate([costs[j] for j in fast.member_indices], kind) == fast.aggregate_cost


@settings(max_examples=200, deadline=None)
@given(costs_strategy, st.sampled_from(list(Aggregate)))
def test_sum_is_order_independent_and_monotone(costs, kind):
    base = aggregate(costs, kind)
    assert aggregate(list(reversed(costs)), kind) == base
    for i in range(len(costs)):
        bumped = list(costs)
        bumped[i] = math.nextafter(bumped[i], math.inf)
        assert aggregate(bumped, kind) >= base


@settings(max_examples=100, deadline=None)
@given(costs_strategy, st.sampled_from(list(Aggregate)))
def test_duplicated_member_matches_reference_fold(costs, kind):
    # aggregating the same cost vector twice over, as a fold by hand
    doubled = costs + costs
    if kind is Aggregate.SUM:
        ref = 0.0
        for c in sorted(doubled):
            ref += c
    else:
        ref = (max if kind is Aggregate.MAX else min)(doubled)
    assert aggregate(doubled, kind) == ref


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50),
       st.tuples(st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 10), st.floats(0, 10)),
       st.floats(0, 1), st.floats(0.1, 5))
def test_node_cost_bounds_any_contained_object(qx, qy, rect, alpha, priority):
    x0, y0, w, h = rect
    mbr = (x0, y0, x0 + w, y0 + h)
    q = QueryPoint((qx, qy), {"a", "b"}, priority)
    params = CostParams(alpha=alpha, d_max=30.0)
    for fx, fy in itertools.product((0.0, 0.37, 1.0), repeat=2):
        o = SpatioTextualObject(0, (x0 + fx * w, y0 + fy * h), {"a"})
        assert cost_node(q, mbr, {"a", "c"}, params) <= cost_object(q, o, params)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=6),
       st.sampled_from([0.125, 0.5, 2.0, 4.0, 16.0]))
def test_uniform_priority_scaling_keeps_argmin(locations, factor):
    # power-of-two factors scale every cost exactly, so ties stay ties
    group = QueryGroup(tuple(QueryPoint(p, {"a"}) for p in locations))
    params = CostParams(d_max=20.0)
    objs = [SpatioTextualObject(i, (i * 0.7 - 2, 1.3 - i * 0.4), {"a"} if i % 2 else {"b"}) for i in range(6)]

    def best(g):
        return min(objs, key=lambda o: (aggregate(object_costs(g, o, params), "sum"), o.id)).id

    assert best(group) == best(group.scaled(factor))

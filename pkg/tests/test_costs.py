import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fgsk.costs import GroupEvaluator, subgroup_bounds
from fgsk.model import (Aggregate, QueryGroup, QueryPoint, best_subgroup, cost_node, cost_object)
from fgsk.oracle import dataset_params


def _scalar_node_matrix(tree, group, params, node):
    out = np.empty((len(group), len(node)))
    for c, (_, mbr, summary) in enumerate(node.entries):
        tokens = tree.tokens(summary)
        for j, q in enumerate(group):
            out[j, c] = cost_node(q, mbr, tokens, params)
    return out


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 1.0])
def test_vectorised_costs_match_scalar_bit_for_bit(medium_workload, alpha):
    objects, tree, groups = medium_workload
    by_id = {o.id: o for o in objects}
    params = tree.cost_params(alpha, "sum")
    for group in groups[:6]:
        ev = GroupEvaluator(group, params, tree.keyword_ids)
        for node in tree.iter_nodes():
            if node.is_leaf:
                got = ev.object_costs(node, tree.read_postings(node).postings)
                want = np.array([[cost_object(q, by_id[oid], params) for oid in node.objects["id"].tolist()]
                                 for q in group])
            else:
                got = ev.node_costs(node)
                want = _scalar_node_matrix(tree, group, params, node)
            assert np.array_equal(got, want)


def test_unknown_query_keywords_contribute_nothing(medium_workload):
    objects, tree, groups = medium_workload
    params = tree.cost_params(0.5, "sum")
    group = QueryGroup((QueryPoint((500.0, 500.0), {"never-seen", "t1"}, 2.0),
                        QueryPoint((10.0, 900.0), {"also-unknown"})))
    ev = GroupEvaluator(group, params, tree.keyword_ids)
    node = next(n for n in tree.iter_nodes() if n.is_leaf)
    got = ev.object_costs(node, tree.read_postings(node).postings)
    by_id = {o.id: o for o in objects}
    want = np.array([[cost_object(q, by_id[i], params) for i in node.objects["id"].tolist()] for q in group])
    assert np.array_equal(got, want)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.floats(0, 3), min_size=1, max_size=5), min_size=1, max_size=7)
       .filter(lambda rows: len({len(r) for r in rows}) == 1),
       st.sampled_from(list(Aggregate)))
def test_subgroup_bounds_match_best_subgroup(rows, kind):
    costs = np.array(rows, dtype=np.float64)  # (n, C)
    n = costs.shape[0]
    sizes = list(range(1, n + 1))
    got = subgroup_bounds(costs, sizes, kind)
    for c in range(costs.shape[1]):
        for i, m in enumerate(sizes):
            assert got[i, c] == best_subgroup(costs[:, c].tolist(), m, kind).aggregate_cost


def test_dataset_params_match_index_header(medium_workload):
    objects, tree, _ = medium_workload
    p = dataset_params(objects, 0.5, "sum")
    assert p.d_max == tree.header.d_max
    assert p.w_max == tree.header.w_max

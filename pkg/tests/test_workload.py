import math
import statistics

import pytest

from fgsk.model import InputError, SpatioTextualObject
from fgsk.workload import (GenConfig, gen_objects, gen_query_group, gen_query_groups,
                           poisson_rate_for_mean)


def test_same_seed_same_output():
    cfg = GenConfig(seed=11, object_count=500, vocabulary_size=40)
    assert gen_objects(cfg) == gen_objects(cfg)
    objs = gen_objects(cfg)
    assert gen_query_groups(cfg.with_(query_space_fraction=0.05), objs, 3) == \
        gen_query_groups(cfg.with_(query_space_fraction=0.05), objs, 3)


def test_different_seed_differs():
    a = gen_objects(GenConfig(seed=1, object_count=50))
    b = gen_objects(GenConfig(seed=2, object_count=50))
    assert a != b


def test_groups_are_independent_of_how_many_are_drawn():
    cfg = GenConfig(seed=4, object_count=800, vocabulary_size=30, query_space_fraction=0.02)
    objs = gen_objects(cfg)
    five = gen_query_groups(cfg, objs, 5)
    assert gen_query_group(cfg, objs, index=3) == five[3]
    assert gen_query_groups(cfg, objs, 2, first=3) == five[3:]


@pytest.mark.parametrize("skew", [0.0, 1.0])
def test_mean_keywords_per_object(skew):
    cfg = GenConfig(seed=0, object_count=60_667, vocabulary_size=783, keywords_per_object=2.91,
                    keyword_skew=skew)
    objs = gen_objects(cfg)
    mean = statistics.fmean(len(o.keywords) for o in objs)
    assert abs(mean - 2.91) / 2.91 < 0.05
    assert min(len(o.keywords) for o in objs) >= 1


def test_truncated_poisson_rate():
    lam = poisson_rate_for_mean(2.91)
    assert lam / (1 - math.exp(-lam)) == pytest.approx(2.91)
    assert poisson_rate_for_mean(1.0) == 0.0


def test_one_object_inside_space():
    (o,) = gen_objects(GenConfig(seed=5, object_count=1, data_space=(10.0, 20.0, 11.0, 25.0)))
    assert 10.0 <= o.location[0] <= 11.0 and 20.0 <= o.location[1] <= 25.0


def test_skew_makes_low_ranked_keywords_common():
    objs = gen_objects(GenConfig(seed=3, object_count=5000, vocabulary_size=500, keyword_skew=1.0))
    counts = {}
    for o in objs:
        for k in o.keywords:
            counts[k] = counts.get(k, 0) + 1
    assert counts["t1"] > 10 * counts.get("t400", 1)


def test_members_inside_the_query_square():
    cfg = GenConfig(seed=2, object_count=20_000, vocabulary_size=200)
    objs = gen_objects(cfg)
    half = math.sqrt(cfg.query_space_fraction * 1000 * 1000) / 2
    for g in gen_query_groups(cfg, objs, 20):
        xs = [q.location[0] for q in g]
        ys = [q.location[1] for q in g]
        assert len(g) == cfg.group_size
        assert max(xs) - min(xs) <= 2 * half and max(ys) - min(ys) <= 2 * half
        assert all(1 <= len(q.keywords) <= cfg.keywords_per_query for q in g)


def test_query_keywords_come_from_the_square():
    cfg = GenConfig(seed=8, object_count=5000, vocabulary_size=300, query_space_fraction=0.01)
    objs = gen_objects(cfg)
    half = math.sqrt(cfg.query_space_fraction) * 1000 / 2
    for g in gen_query_groups(cfg, objs, 10):
        cx = (min(q.location[0] for q in g) + max(q.location[0] for q in g)) / 2
        cy = (min(q.location[1] for q in g) + max(q.location[1] for q in g)) / 2
        # every member lies in the square, so the square lies within 2*half of the centre estimate
        near = set().union(*(o.keywords for o in objs
                             if abs(o.location[0] - cx) <= 2 * half and abs(o.location[1] - cy) <= 2 * half))
        for q in g:
            assert q.keywords <= near


def test_full_fractions_draw_from_global_vocabulary():
    cfg = GenConfig(seed=6, object_count=300, vocabulary_size=20, query_space_fraction=1.0,
                    keyword_set_fraction=1.0)
    objs = gen_objects(cfg)
    vocab = set().union(*(o.keywords for o in objs))
    for g in gen_query_groups(cfg, objs, 5):
        for q in g:
            assert q.keywords <= vocab


def test_members_share_a_keyword_more_often_than_not():
    cfg = GenConfig(seed=0)
    objs = gen_objects(cfg.with_(object_count=100_000))
    shared = 0
    groups = gen_query_groups(cfg, objs, 1000)
    for g in groups:
        shared += bool(g[0].keywords & g[1].keywords)
    rate = shared / len(groups)
    # measured 1.000 at the defaults: a small square yields a keyword subset no
    # larger than keywords_per_query, so members draw the same keywords
    assert rate > 0.5, rate
    assert rate >= 0.99, rate


def test_empty_square_exhausts_retries():
    objs = [SpatioTextualObject(0, (0.0, 0.0), {"a"})]
    cfg = GenConfig(seed=1, data_space=(0.0, 0.0, 1000.0, 1000.0), max_retries=5)
    with pytest.raises(InputError, match="5 sampled"):
        gen_query_groups(cfg, objs, 1)


@pytest.mark.parametrize("bad", [
    dict(object_count=0), dict(query_space_fraction=0.0), dict(keyword_set_fraction=1.5),
    dict(keywords_per_object=0.5), dict(data_space=(0, 0, 0, 1)), dict(keyword_skew=-1.0),
])
def test_config_validation(bad):
    with pytest.raises(InputError):
        GenConfig(**bad)


def test_config_from_mapping():
    cfg = GenConfig.from_mapping({"seed": "9", "object_count": "123", "keywords_per_object": "7.72",
                                  "data_space": "0,0,10,10", "unknown": "x"})
    assert (cfg.seed, cfg.object_count, cfg.keywords_per_object, cfg.data_space) == (9, 123, 7.72, (0, 0, 10, 10))

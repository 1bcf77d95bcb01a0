import pytest

from fgsk import fixture
from fgsk.irtree import build_index, open_index
from fgsk.workload import GenConfig, gen_objects, gen_query_groups


def small_config(seed=0, count=2000, vocab=50, n=10, **kw) -> GenConfig:
    # a larger query square than the desk-scale default so small datasets still hit keywords
    kw.setdefault("query_space_fraction", 0.01)
    kw.setdefault("keyword_set_fraction", 0.1)
    return GenConfig(seed=seed, object_count=count, vocabulary_size=vocab, group_size=n, **kw)


def make_workload(tmp_path, seed=0, count=2000, vocab=50, n=10, groups=1, fanout=8, page_size=1024, **kw):
    """Objects, an open index over them and ``groups`` query groups."""
    config = small_config(seed, count, vocab, n, **kw)
    objects = gen_objects(config)
    path = tmp_path / f"w{seed}-{count}-{fanout}.idx"
    if not path.exists():
        build_index(objects, path, fanout=fanout, page_size=page_size)
    return objects, open_index(path), gen_query_groups(config, objects, groups)


@pytest.fixture(scope="session")
def example_index(tmp_path_factory):
    path = tmp_path_factory.mktemp("example") / "example.idx"
    build_index(fixture.objects(), path, fanout=fixture.FANOUT, page_size=512)
    with open_index(path) as tree:
        yield tree


@pytest.fixture(scope="session")
def medium_workload(tmp_path_factory):
    """2,000 objects at fanout 8 (a few levels deep) plus 40 groups."""
    tmp = tmp_path_factory.mktemp("medium")
    objects, tree, groups = make_workload(tmp, seed=5, groups=40)
    yield objects, tree, groups
    tree.close()


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture()
def criterion(request):
    """``criterion(n, ok, detail)`` records one acceptance line and prints it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda t: t[0]):
            terminalreporter.write_line(line)

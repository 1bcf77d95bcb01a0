"""Plain-text file formats (all UTF-8, tab separated).

dataset       ``id<TAB>x<TAB>y<TAB>kw1,kw2,...``
query groups  ``x<TAB>y<TAB>kw1,kw2,...[<TAB>priority]``; a blank line
              starts the next group
weights       ``keyword<TAB>weight``
config        ``key=value``; ``#`` starts a comment
"""

from __future__ import annotations

from typing import Iterable

from .model import InputError, QueryGroup, QueryPoint, SpatioTextualObject


class FormatError(InputError):
    pass


def _keywords(field: str, where: str) -> frozenset:
    kws = [k.strip() for k in field.split(",") if k.strip()]
    if not kws:
        raise FormatError(f"{where}: no keywords")
    return frozenset(kws)


def _float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{where}: not a number: {text!r}") from None


def parse_dataset(lines: Iterable[str], source: str = "<dataset>") -> list:
    objects = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        where = f"{source}:{lineno}"
        parts = line.split("\t")
        if len(parts) != 4:
            raise FormatError(f"{where}: expected 4 tab-separated fields, got {len(parts)}")
        try:
            oid = int(parts[0])
        except ValueError:
            raise FormatError(f"{where}: bad object id {parts[0]!r}") from None
        try:
            objects.append(SpatioTextualObject(oid, (_float(parts[1], where), _float(parts[2], where)),
                                               _keywords(parts[3], where)))
        except FormatError:
            raise
        except InputError as exc:
            raise FormatError(f"{where}: {exc}") from None
    return objects


def read_dataset(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh, str(path))


def write_dataset(objects, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for o in objects:
            fh.write(f"{o.id}\t{o.location[0]!r}\t{o.location[1]!r}\t{','.join(sorted(o.keywords))}\n")


def parse_queries(lines: Iterable[str], source: str = "<queries>") -> list:
    groups, current = [], []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            if current:
                groups.append(QueryGroup(tuple(current)))
                current = []
            continue
        if line.lstrip().startswith("#"):
            continue
        where = f"{source}:{lineno}"
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise FormatError(f"{where}: expected 3 or 4 tab-separated fields, got {len(parts)}")
        priority = _float(parts[3], where) if len(parts) == 4 else 1.0
        try:
            current.append(QueryPoint((_float(parts[0], where), _float(parts[1], where)),
                                      _keywords(parts[2], where), priority))
        except FormatError:
            raise
        except InputError as exc:
            raise FormatError(f"{where}: {exc}") from None
    if current:
        groups.append(QueryGroup(tuple(current)))
    if not groups:
        raise FormatError(f"{source}: no query groups")
    return groups


def read_queries(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_queries(fh, str(path))


def write_queries(groups, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g, group in enumerate(groups):
            if g:
                fh.write("\n")
            for q in group:
                line = f"{q.location[0]!r}\t{q.location[1]!r}\t{','.join(sorted(q.keywords))}"
                if q.priority != 1.0:
                    line += f"\t{q.priority!r}"
                fh.write(line + "\n")


def read_weights(path) -> dict:
    weights = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            where = f"{path}:{lineno}"
            if len(parts) != 2 or not parts[0]:
                raise FormatError(f"{where}: expected keyword<TAB>weight")
            w = _float(parts[1], where)
            if not w > 0:
                raise FormatError(f"{where}: weight must be positive")
            weights[parts[0]] = w
    return weights


def parse_config(lines: Iterable[str], source: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh, str(path))

"""Canonical JSON formats for regions and tilings.

Region::

    {"schema_version": 1, "family": "lozenge", "n": 2,
     "hexes": [[a, b], ...],            # lexicographic
     "tris":  [[a, b, "U"|"D"], ...],   # lexicographic
     "base":  [[a1, b1], [a2, b2]]}     # the height-0 boundary vertex

Tiling::

    {"schema_version": 1, "region": <Region JSON>,
     "assign": [[[a, b, "U"|"D"], [a, b]], ...]}  # lexicographic by triangle

``base`` is derived from the cell set, so readers re-derive it and
reject a mismatch instead of trusting the file.  Unknown fields are
ignored on read.
"""

from __future__ import annotations

import json
from typing import Any

from kagome.errors import KagomeError
from kagome.lattice import HexCoord, Region, TriCoord, region_from_cells
from kagome.tiling import Tiling, validate_tiling

SCHEMA_VERSION = 1


def region_to_json(region: Region) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "family": region.family,
        "n": region.n,
        "hexes": [[h.a, h.b] for h in region.hex_list],
        "tris": [[t.a, t.b, t.o] for t in region.tri_list],
    }
    if region.hexes:
        v = region.base_vertex
        doc["base"] = [[v.h1.a, v.h1.b], [v.h2.a, v.h2.b]]
    return doc


def region_from_json(doc: dict[str, Any]) -> Region:
    try:
        hexes = [HexCoord(int(a), int(b)) for a, b in doc["hexes"]]
        tris = [TriCoord(int(a), int(b), str(o)) for a, b, o in doc["tris"]]
        family = str(doc.get("family", "custom"))
        n = int(doc.get("n", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise KagomeError(f"malformed region JSON: {exc}") from exc
    region = region_from_cells(hexes, tris, family=family, n=n)
    if "base" in doc and region.hexes:
        (a1, b1), (a2, b2) = doc["base"]
        v = region.base_vertex
        if [[v.h1.a, v.h1.b], [v.h2.a, v.h2.b]] != [[a1, b1], [a2, b2]]:
            raise KagomeError("region JSON base vertex does not match cell set")
    return region


def tiling_to_json(tiling: Tiling) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "region": region_to_json(tiling.region),
        "assign": [
            [[t.a, t.b, t.o], [tiling.assign[t].a, tiling.assign[t].b]]
            for t in tiling.region.tri_list
        ],
    }


def tiling_from_json(doc: dict[str, Any]) -> Tiling:
    try:
        region = region_from_json(doc["region"])
        assign = {
            TriCoord(int(ta), int(tb), str(o)): HexCoord(int(ha), int(hb))
            for (ta, tb, o), (ha, hb) in doc["assign"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise KagomeError(f"malformed tiling JSON: {exc}") from exc
    try:
        tiling = Tiling(region, assign)
    except KeyError as exc:
        raise KagomeError(f"tiling JSON misses triangle {exc}") from exc
    validate_tiling(tiling)
    return tiling


def dumps(doc: dict[str, Any]) -> str:
    """Stable, compact one-line encoding."""
    return json.dumps(doc, separators=(",", ":"), sort_keys=False)


def load_tiling(path: str) -> Tiling:
    with open(path, encoding="utf-8") as fh:
        return tiling_from_json(json.load(fh))


def save_tiling(tiling: Tiling, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(tiling_to_json(tiling)))
        fh.write("\n")

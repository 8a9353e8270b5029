#!/usr/bin/env python3
"""Regenerate the bundled cycle catalogs and mapping files.

The catalogs match the published ones: 9 Collatz cycles (complete up to
period 12 by exact enumeration), 5 cycles of 3x+1 on [-150, 150], and
the 17 cycles of the four-branch Matthews example on [-6000, 6000].
"""

import json
import pathlib

import gx1cycles as gx

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "gx1cycles" / "data"


def main():
    g = gx.collatz()
    cat = gx.enumerate_cycles_exact(g, 12)
    cat.dump(DATA / "catalog_collatz.json")
    print("collatz:", len(cat), "cycles")

    t = gx.three_x_plus_one()
    rep = gx.search_range(t, -150, 150, max_steps=10**4)
    gx.CycleCatalog(t, rep.catalog.cycles,
                    provenance="bounded search over [-150, 150]").dump(
        DATA / "catalog_3x1.json")
    print("3x1:", len(rep.catalog), "cycles")

    mat = gx.matthews_4branch()
    with open(DATA / "matthews_map.json", "w", encoding="utf-8") as fh:
        json.dump(mat.to_json(), fh, indent=1)
        fh.write("\n")
    rep = gx.search_range(mat, -6000, 6000, max_steps=10**5)
    rep.catalog.dump(DATA / "catalog_matthews.json")
    print("matthews:", len(rep.catalog), "cycles")

    for name in ("catalog_collatz", "catalog_3x1", "catalog_matthews"):
        cat = gx.CycleCatalog.load(DATA / f"{name}.json")
        ver = gx.verify_catalog(cat.mapping, cat)
        assert ver.ok, name
        print(name, "verified:", len(cat), "cycles")


if __name__ == "__main__":
    main()

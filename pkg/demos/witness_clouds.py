"""Realizing a tree datum as a finite point cloud in Z_p^N.

A tree datum describes a truncated tree abstractly. Realization goes the
other way: it synthesizes actual p-adic points (to finite precision) whose
tree of residue classes is isomorphic to the datum's expansion. The tree
is recovered from the raw points alone, so a successful verification shows
the cloud genuinely has the declared shape.
"""

from padictrees import (
    Ball,
    cusp_datum,
    expand,
    from_points,
    is_isomorphic,
    realize,
    verify_realization,
    y_datum,
)


def main():
    p, depth = 3, 8

    # Y(3): one path that splits into two infinite branches at depth 3
    D = y_datum(3, m=0)
    cloud = realize(D, depth, p=p)
    print("datum Y(3), depth", depth)
    print("points:", len(cloud.points), "at precision", cloud.prec)
    for pt, tag in list(zip(cloud.points, cloud.provenance))[:4]:
        print("  ", pt.residues(), tag)

    report = verify_realization(cloud, D, p, depth)
    print("verified:", report.ok)
    print("layers:  ", report.cloud_layers)

    # the tree really is rebuilt from the numbers: do it by hand
    t = from_points(list(cloud.points), Ball((0,) * cloud.N, 0), depth)
    print("manual rebuild matches:", is_isomorphic(t, expand(D, (), p, depth)))

    # the cusp needs nested root extractions; precision bookkeeping is
    # handled by the realization context
    D2 = cusp_datum(p)
    cloud2 = realize(D2, 6, p=p)
    report2 = verify_realization(cloud2, D2, p, 6)
    print("\ncusp datum, depth 6")
    print("points:", len(cloud2.points), "verified:", report2.ok)
    print("layers:", report2.cloud_layers)


if __name__ == "__main__":
    main()

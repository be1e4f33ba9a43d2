#!/usr/bin/env python3
"""Search the small-group catalog for a few target multiplicity sets.

Usage: python scripts/catalog_demo.py [bound]
"""

import sys

from cfspectra.groups import catalog_search, format_triple, multiplicity_set_naive


def main():
    bound = int(sys.argv[1]) if len(sys.argv) > 1 else 40
    targets = [{1}, {2}, {4}, {1, 2}, {1, 4}, {2, 4}, {1, 2, 4}]
    for E in targets:
        rec = catalog_search(E, bound)
        if rec is None:
            print(f"E = {sorted(E)}: not found within order {bound}")
            continue
        recount = multiplicity_set_naive(rec.group, rec.subgroup, rec.automorphism)
        print(f"E = {sorted(E)}: order {rec.group.order}, recount verified: {recount == E}")
        print("  " + format_triple(rec.group, rec.subgroup, rec.automorphism).replace("\n", "\n  "))


if __name__ == "__main__":
    main()

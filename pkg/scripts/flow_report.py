"""First flows of the two-component trios at eps = 1, with commutators."""

from hamtrio.catalog import EXAMPLES
from hamtrio.hierarchy import Functional, first_flows, flows_commute


def main():
    for name in sorted(EXAMPLES):
        ex = EXAMPLES[name]
        cas = [Functional(ex.casimir(n), 2, n) for n in ex.casimirs]
        flows = first_flows(ex.trio(), cas, eps=1)
        print(name)
        for f in flows:
            for i, c in enumerate(f.components, 1):
                print(f"  {f.name}: u{i}_t = {c}")
        a, b = flows
        numeric = any(c.has_radicals() for f in flows for c in f.components)
        print(f"  commute: {flows_commute(a, b, numeric=numeric, samples=10, seed=0)}")


if __name__ == "__main__":
    main()

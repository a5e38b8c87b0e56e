#!/usr/bin/env python3
"""Reference values for the Mann-Whitney U tests.

Small-sample cases: exact permutation distribution by brute-force enumeration
(itertools.combinations), which stays valid under ties. Large-sample cases:
scipy.stats.mannwhitneyu with the asymptotic method, continuity correction,
and tie correction. Run to regenerate the constants frozen in test_stats.cpp.
"""

from itertools import combinations

from scipy.stats import mannwhitneyu


def u_stat(a, b):
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def exact_two_sided(a, b):
    na = len(a)
    pooled = list(a) + list(b)
    n = len(pooled)
    u = u_stat(a, b)
    u_max = na * (n - na)
    u_lo = min(u, u_max - u)
    total = extreme = 0
    for idx in combinations(range(n), na):
        sa = [pooled[i] for i in idx]
        sb = [pooled[i] for i in range(n) if i not in set(idx)]
        up = u_stat(sa, sb)
        total += 1
        if up <= u_lo + 1e-9 or up >= u_max - u_lo - 1e-9:
            extreme += 1
    return u, min(1.0, extreme / total)


def main():
    cases = [
        ("separated", [1, 2, 3], [4, 5, 6]),
        ("tied-overlap", [1, 2], [2, 3]),
        ("identical", [1, 2, 3], [1, 2, 3]),
        ("all-equal", [5, 5], [5, 5]),
        ("singletons", [3], [1]),
        ("interleaved", [1, 3, 5, 7], [2, 4, 6, 8]),
    ]
    for name, a, b in cases:
        u, p = exact_two_sided(a, b)
        print(f"exact {name:13s} U={u:6.2f}  p={p:.12g}")

    # Large-sample asymptotic cases (deterministic integer data, so the
    # values are portable): one without ties, one with heavy ties.
    a = [3, 10, 21, 34, 47, 55, 61, 72, 80, 95, 101, 117]
    b = [1, 6, 15, 28, 39, 44, 58, 66, 77, 88, 99, 110, 121, 130, 144]
    r = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
    print(f"asymptotic no-ties    U={r.statistic}  p={r.pvalue:.12g}")

    a = [1, 1, 2, 2, 3, 3, 3, 4, 5, 5]
    b = [2, 3, 3, 4, 4, 4, 5, 6, 6, 7, 7, 8]
    r = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
    print(f"asymptotic ties       U={r.statistic}  p={r.pvalue:.12g}")


if __name__ == "__main__":
    main()

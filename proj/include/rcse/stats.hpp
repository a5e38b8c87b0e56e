#pragma once

#include "rcse/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rcse {

struct MwuResult {
    double u = 0.0; // U statistic of the first group
    double p = 1.0; // two-sided p-value
};

namespace detail {

// U for group a against group b by direct pair counting; ties contribute 1/2,
// which is exactly the midrank convention.
inline double mwu_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y)
                u += 1.0;
            else if (x == y)
                u += 0.5;
        }
    return u;
}

// Visits every size-r index subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_combination(size_t n, size_t r, F&& visit) {
    std::vector<size_t> idx(r);
    for (size_t i = 0; i < r; ++i) idx[i] = i;
    for (;;) {
        visit(idx);
        size_t i = r;
        while (i > 0) {
            --i;
            if (idx[i] != i + n - r) break;
            if (i == 0) return;
        }
        if (idx[i] == i + n - r) return;
        ++idx[i];
        for (size_t j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace detail

// Two-sided Mann-Whitney U test. Small samples (both groups <= 8) get an
// exact permutation distribution (correct under ties); larger samples use the
// normal approximation with tie-corrected variance and a 0.5 continuity
// correction.
inline MwuResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw MetricError("mann_whitney_u needs two nonempty groups");
    const size_t na = a.size(), nb = b.size(), n = na + nb;
    const double u = detail::mwu_statistic(a, b);
    const double u_max = static_cast<double>(na) * static_cast<double>(nb);

    MwuResult res;
    res.u = u;

    if (na <= 8 && nb <= 8) {
        std::vector<double> pooled(a);
        pooled.insert(pooled.end(), b.begin(), b.end());
        const double u_lo = std::min(u, u_max - u);
        uint64_t total = 0, extreme = 0;
        detail::for_each_combination(n, na, [&](const std::vector<size_t>& idx) {
            std::vector<double> ga, gb;
            ga.reserve(na);
            gb.reserve(nb);
            size_t next = 0;
            for (size_t i = 0; i < n; ++i) {
                if (next < na && idx[next] == i) {
                    ga.push_back(pooled[i]);
                    ++next;
                } else {
                    gb.push_back(pooled[i]);
                }
            }
            const double up = detail::mwu_statistic(ga, gb);
            ++total;
            if (up <= u_lo + 1e-9 || up >= u_max - u_lo - 1e-9) ++extreme;
        });
        res.p = std::min(1.0, static_cast<double>(extreme) / static_cast<double>(total));
        return res;
    }

    // Normal approximation. Variance shrinks for tied values:
    //   sigma^2 = (na*nb/12) * [(n+1) - sum(t^3 - t) / (n*(n-1))]
    // over tie groups of size t in the pooled sample.
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mean = u_max / 2.0;
    const double var =
        (u_max / 12.0) *
        ((static_cast<double>(n) + 1.0) - tie_term / (static_cast<double>(n) * (n - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0; // every pooled value identical
        return res;
    }
    const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
    res.p = std::erfc(z / std::sqrt(2.0));
    return res;
}

} // namespace rcse

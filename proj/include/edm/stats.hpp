#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace edm {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Nearest-rank (lower) quantile: value at index ceil(q*n)-1 of the sorted
// sample. Used consistently for bottleneck cutoffs, winsor bounds and the
// solitary-degree threshold.
inline double lower_quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    long idx = static_cast<long>(std::ceil(q * n)) - 1;
    if (idx < 0) idx = 0;
    if (idx >= static_cast<long>(v.size())) idx = static_cast<long>(v.size()) - 1;
    return v[static_cast<std::size_t>(idx)];
}

// round to 4 decimals, ties to even (report emission contract)
inline double round4(double v) {
    return std::nearbyint(v * 10000.0) / 10000.0;
}

inline std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", round4(v));
    return buf;
}

} // namespace edm

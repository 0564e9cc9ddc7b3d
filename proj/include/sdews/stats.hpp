#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sdews/error.hpp"

namespace sdews {

struct SampleMoments {
    double mean = 0.0;
    double std_dev = 0.0;         ///< unbiased (n - 1) estimator; 0 for n < 2
    double standard_error = 0.0;  ///< std_dev / sqrt(n)
};

/// Summation in index order so results do not depend on how samples were produced.
inline SampleMoments sample_moments(std::span<const double> xs) {
    SampleMoments m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        m.standard_error = m.std_dev / std::sqrt(static_cast<double>(xs.size()));
    }
    return m;
}

/// Linear-interpolation quantile of already-sorted data, q in [0, 1].
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::InvalidParams, "quantile of empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Histogram {
    std::vector<double> edges;      ///< size = densities.size() + 1
    std::vector<double> densities;  ///< count / (n * width)

    [[nodiscard]] double integral() const {
        double s = 0.0;
        for (std::size_t b = 0; b < densities.size(); ++b) s += densities[b] * (edges[b + 1] - edges[b]);
        return s;
    }
};

/// Density histogram with Freedman-Diaconis bin width 2 IQR n^(-1/3).
/// Degenerate samples (zero IQR or range) fall back to sqrt(n) bins, or a single
/// unit-width bin centred on the value when every sample is equal.
inline Histogram density_histogram(std::span<const double> xs, std::size_t max_bins = 10000) {
    Histogram h;
    if (xs.empty()) return h;
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double n = static_cast<double>(sorted.size());

    if (!(hi > lo)) {
        h.edges = {lo - 0.5, lo + 0.5};
        h.densities = {1.0};
        return h;
    }

    const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    std::size_t bins = 0;
    if (iqr > 0.0) {
        const double width = 2.0 * iqr / std::cbrt(n);
        bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    } else {
        bins = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
    }
    bins = std::clamp<std::size_t>(bins, 1, max_bins);
    const double width = (hi - lo) / static_cast<double>(bins);

    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
    h.edges.back() = hi;
    std::vector<std::size_t> counts(bins, 0);
    for (double x : sorted) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    h.densities.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.densities[b] = static_cast<double>(counts[b]) / (n * (h.edges[b + 1] - h.edges[b]));
    }
    return h;
}

struct LinearFit {
    double slope;
    double intercept;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidParams, "least squares needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidParams, "least squares needs distinct x values");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace sdews

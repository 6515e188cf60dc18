#include "cvaod/errors.hpp"
#include "cvaod/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cvaod {

double sample_mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) throw DomainError("standard deviation needs two samples");
    const double mean = sample_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double sample_median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of an empty sample");
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid) {
    if (samples.size() < 10) throw DomainError("kernel_density needs at least 10 samples");
    const double sd = sample_sd(samples);
    if (!(sd > 0.0)) throw DomainError("kernel_density: samples have zero variance (degenerate spike)");
    const double m = static_cast<double>(samples.size());
    const double bw = 1.06 * sd * std::pow(m, -0.2);
    const double norm = 1.0 / (m * bw * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out;
    out.reserve(grid.size());
    for (double g : grid) {
        double acc = 0.0;
        for (double x : samples) {
            const double u = (g - x) / bw;
            acc += std::exp(-0.5 * u * u);
        }
        out.push_back(acc * norm);
    }
    return out;
}

std::vector<double> density_grid(std::span<const double> samples, Index points) {
    if (points < 2) throw DomainError("density grid needs at least two points");
    const double mean = sample_mean(samples);
    const double sd = sample_sd(samples);
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double lo = mean - 4.0 * sd;
    const double step = 8.0 * sd / static_cast<double>(points - 1);
    for (Index i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
    return grid;
}

NormalityStats normality_check(std::span<const double> samples) {
    if (samples.size() < 100) throw DomainError("normality_check needs at least 100 samples");
    const double m = static_cast<double>(samples.size());
    const double mean = sample_mean(samples);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= m;
    m3 /= m;
    m4 /= m;
    if (!(m2 > 0.0)) throw DomainError("normality_check: samples are constant");
    NormalityStats st;
    st.skewness = m3 / std::pow(m2, 1.5);
    st.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    st.jarque_bera = m * (st.skewness * st.skewness / 6.0 + st.excess_kurtosis * st.excess_kurtosis / 24.0);
    return st;
}

}  // namespace cvaod

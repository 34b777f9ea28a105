#pragma once
// Pairwise condition comparisons: paired t-tests over the five per-dimension
// alpha values with Bonferroni correction. Two-sided p values; the t CDF
// comes from the regularized incomplete beta in numerics.hpp.

#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/numerics.hpp"
#include "persim/ocean.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace persim {

struct PairedTResult {
    double delta_mean = 0.0;
    double t = 0.0;
    int df = 0;
    double p_two_sided = 1.0;
    bool all_zero = false;  // convention path: every difference exactly 0
};

inline PairedTResult paired_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw InvalidArgument("paired_t: inputs must have equal length");
    if (x.size() < 2) throw InvalidArgument("paired_t: needs at least 2 pairs");
    const std::size_t n = x.size();
    std::vector<double> d(n);
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = x[i] - y[i];
        if (d[i] != 0.0) all_zero = false;
    }
    PairedTResult out;
    out.df = static_cast<int>(n) - 1;
    if (all_zero) {
        out.all_zero = true;
        return out;  // delta 0, t 0, p 1 by convention, flagged
    }
    out.delta_mean = mean_of(d);
    const double sd = sample_sd(d);
    if (sd == 0.0)
        throw ZeroVarianceError("paired_t: all differences equal (sd = 0), t undefined");
    out.t = out.delta_mean / (sd / std::sqrt(static_cast<double>(n)));
    out.p_two_sided = student_t_two_sided_p(out.t, static_cast<double>(out.df));
    return out;
}

// p_adj = min(1, m * p), order preserved.
inline std::vector<double> bonferroni(const std::vector<double>& p_values, int m) {
    if (m < static_cast<int>(p_values.size()))
        throw InvalidArgument("bonferroni: m must cover the jointly tested p-values");
    std::vector<double> out;
    out.reserve(p_values.size());
    for (double p : p_values) out.push_back(std::min(1.0, static_cast<double>(m) * p));
    return out;
}

inline std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

struct PairedComparison {
    ConditionId condition_a = ConditionId::baseline;
    ConditionId condition_b = ConditionId::baseline;
    double delta_mean = 0.0;  // mean alpha(b) - mean alpha(a)
    double t = 0.0;
    int df = 0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    std::string stars;  // from the adjusted p
};

// All C(n,2) pairings in input order, each a paired t over the five
// dimension-wise alpha values, Bonferroni m = number of pairings.
inline std::vector<PairedComparison> pairwise_alpha_comparisons(
    const std::vector<std::pair<ConditionId, std::array<double, kOceanDims>>>& alphas) {
    if (alphas.size() < 2)
        throw InvalidArgument("pairwise_alpha_comparisons: needs at least 2 conditions");
    std::vector<PairedComparison> out;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (std::size_t j = i + 1; j < alphas.size(); ++j) {
            const auto& [cond_a, a] = alphas[i];
            const auto& [cond_b, b] = alphas[j];
            const PairedTResult r =
                paired_t(std::span<const double>(b.data(), b.size()),
                         std::span<const double>(a.data(), a.size()));
            PairedComparison cmp;
            cmp.condition_a = cond_a;
            cmp.condition_b = cond_b;
            cmp.delta_mean = r.delta_mean;
            cmp.t = r.t;
            cmp.df = r.df;
            cmp.p_raw = r.p_two_sided;
            out.push_back(std::move(cmp));
        }
    }
    const int m = static_cast<int>(out.size());
    std::vector<double> raw;
    raw.reserve(out.size());
    for (const auto& c : out) raw.push_back(c.p_raw);
    const std::vector<double> adjusted = bonferroni(raw, m);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].p_adjusted = adjusted[i];
        out[i].stars = significance_stars(out[i].p_adjusted);
    }
    return out;
}

}  // namespace persim

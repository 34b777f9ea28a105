#pragma once
// Independent brute-force oracles for the statistics under test. These stay
// deliberately naive: explicit double loops, quadrature instead of closed
// forms, and a separate algebraic route wherever one exists.

#include <persim/core.hpp>
#include <persim/numerics.hpp>
#include <persim/psychometrics.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Cronbach's alpha via the covariance-matrix route: total-score variance is
// the sum of the full item covariance matrix, item-variance sum its trace.
inline double alpha_covariance_route(const persim::ItemMatrix& m) {
    const std::size_t n = m.rows();
    const std::size_t k = m.cols();
    std::vector<double> col_mean(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t r = 0; r < n; ++r) col_mean[c] += m.at(r, c);
        col_mean[c] /= static_cast<double>(n);
    }
    std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                s += (m.at(r, a) - col_mean[a]) * (m.at(r, b) - col_mean[b]);
            cov[a][b] = s / static_cast<double>(n - 1);
        }
    double trace = 0.0, total = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            total += cov[a][b];
            if (a == b) trace += cov[a][b];
        }
    const double kk = static_cast<double>(k);
    return (kk / (kk - 1.0)) * (1.0 - trace / total);
}

// Two-way ANOVA decomposition with explicit sums of squares; ICC(A,1) and F.
struct AnovaIcc {
    double icc;
    double f;
    double ms_rows, ms_cols, ms_err;
};

inline AnovaIcc icc_anova_route(const persim::ItemMatrix& m) {
    const double n = static_cast<double>(m.rows());
    const double k = static_cast<double>(m.cols());
    double grand = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) grand += m.at(r, c);
    grand /= n * k;

    double ss_total = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            ss_total += (m.at(r, c) - grand) * (m.at(r, c) - grand);

    double ss_rows = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) mean += m.at(r, c);
        mean /= k;
        ss_rows += (mean - grand) * (mean - grand);
    }
    ss_rows *= k;

    double ss_cols = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) mean += m.at(r, c);
        mean /= n;
        ss_cols += (mean - grand) * (mean - grand);
    }
    ss_cols *= n;

    const double ss_err = ss_total - ss_rows - ss_cols;

    AnovaIcc out{};
    out.ms_rows = ss_rows / (n - 1.0);
    out.ms_cols = ss_cols / (k - 1.0);
    out.ms_err = ss_err / ((n - 1.0) * (k - 1.0));
    out.icc = (out.ms_rows - out.ms_err) /
              (out.ms_rows + (k - 1.0) * out.ms_err + (k / n) * (out.ms_cols - out.ms_err));
    out.f = out.ms_rows / out.ms_err;
    return out;
}

// Student-t density.
inline double t_pdf(double x, double df) {
    const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                     0.5 * std::log(df * M_PI);
    return std::exp(c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, int depth = 0) {
    const double c = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fc = f(c);
    const double s = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    const double lm = 0.5 * (a + c), rm = 0.5 * (c + b);
    const double flm = f(lm), frm = f(rm);
    const double s_left = (c - a) / 6.0 * (fa + 4.0 * flm + fc);
    const double s_right = (b - c) / 6.0 * (fc + 4.0 * frm + fb);
    if (depth > 40 || std::fabs(s_left + s_right - s) < 15.0 * eps)
        return s_left + s_right + (s_left + s_right - s) / 15.0;
    return adaptive_simpson(f, a, c, eps / 2.0, depth + 1) +
           adaptive_simpson(f, c, b, eps / 2.0, depth + 1);
}

// Two-sided tail probability by numerical integration of the density over
// [0, |t|]; p = 1 - 2 * integral.
inline double t_two_sided_p_quadrature(double t, double df) {
    const double at = std::fabs(t);
    if (at == 0.0) return 1.0;
    const double integral =
        adaptive_simpson([df](double x) { return t_pdf(x, df); }, 0.0, at, 1e-12);
    return std::max(0.0, 1.0 - 2.0 * integral);
}

// Monte-Carlo moments of the clamped gaussian clamp(N(mu, sigma), lo, hi),
// using an RNG unrelated to the implementation's.
struct McMoments {
    double mean;
    double sd;
};

inline McMoments clamped_gaussian_mc(double mu, double sigma, double lo, double hi,
                                     std::size_t samples, unsigned seed) {
    // xorshift + ratio-of-uniforms-free polar method; independent of the
    // library's Box-Muller path.
    std::uint64_t state = 0x9e3779b97f4a7c15ULL ^ seed;
    auto next_u = [&]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) * (1.0 / 9007199254740992.0);
    };
    double sum = 0.0, sum_sq = 0.0;
    std::size_t produced = 0;
    while (produced < samples) {
        const double u = 2.0 * next_u() - 1.0;
        const double v = 2.0 * next_u() - 1.0;
        const double s = u * u + v * v;
        if (s <= 0.0 || s >= 1.0) continue;
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        for (double z : {u * factor, v * factor}) {
            if (produced >= samples) break;
            double x = mu + sigma * z;
            x = std::min(hi, std::max(lo, x));
            sum += x;
            sum_sq += x * x;
            ++produced;
        }
    }
    McMoments m{};
    m.mean = sum / static_cast<double>(samples);
    m.sd = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(samples) - m.mean * m.mean));
    return m;
}

}  // namespace oracles

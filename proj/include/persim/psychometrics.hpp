#pragma once
// Reliability and validity statistics: Cronbach's alpha per dimension, ICC
// for absolute agreement (two-way random effects, single measure) with
// F-method confidence intervals, interpretation bands, and nearest-profile
// role discrimination (accuracy, macro P/R/F1, macro one-vs-rest AUC).

#include "persim/core.hpp"
#include "persim/numerics.hpp"
#include "persim/ocean.hpp"
#include "persim/profile.hpp"
#include "persim/record.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace persim {

// ---------------------------------------------------------------------------

struct ItemMatrix {
    std::vector<std::string> row_labels;  // observation units
    std::vector<std::string> col_labels;  // items / raters
    std::vector<double> data;             // row-major

    std::size_t rows() const { return row_labels.size(); }
    std::size_t cols() const { return col_labels.size(); }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }

    static ItemMatrix zeros(std::size_t rows, std::size_t cols) {
        ItemMatrix m;
        for (std::size_t r = 0; r < rows; ++r) m.row_labels.push_back("r" + std::to_string(r));
        for (std::size_t c = 0; c < cols; ++c) m.col_labels.push_back("c" + std::to_string(c));
        m.data.assign(rows * cols, 0.0);
        return m;
    }

    void validate() const {
        if (rows() < 2 || cols() < 2)
            throw InvalidArgument("item matrix: needs at least 2 rows and 2 columns");
        if (data.size() != rows() * cols())
            throw InvalidArgument("item matrix: data size does not match labels");
        for (double v : data)
            if (!std::isfinite(v)) throw InvalidArgument("item matrix: entries must be finite");
    }
};

// ---------------------------------------------------------------------------
// Cronbach's alpha: k/(k-1) * (1 - sum(item variances) / total-score
// variance), sample variances (n-1). May be negative; a zero total-score
// variance is an explicit error, never a silent 0.

inline double cronbach_alpha(const ItemMatrix& m) {
    m.validate();
    const std::size_t n = m.rows();
    const std::size_t k = m.cols();

    double sum_item_var = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = m.at(r, c);
        sum_item_var += sample_variance(col);
    }
    std::vector<double> totals(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) totals[r] += m.at(r, c);
    const double total_var = sample_variance(totals);
    if (total_var == 0.0)
        throw DegenerateMatrixError(
            "cronbach_alpha: total-score variance is zero, alpha undefined");
    return (static_cast<double>(k) / (static_cast<double>(k) - 1.0)) *
           (1.0 - sum_item_var / total_var);
}

// ---------------------------------------------------------------------------
// Per-dimension alpha over a score matrix: items are scenarios, observation
// rows are (agent, repetition) pairs; that mapping is recorded in report
// provenance.

struct AlphaReport {
    std::array<double, kOceanDims> by_dimension{};
    double mean = 0.0;
    double sd = 0.0;

    std::string mean_sd_string() const {
        return format_fixed(mean, 3) + " (" + format_fixed(sd, 3) + ")";
    }
};

inline AlphaReport summarize_alphas(const std::array<double, kOceanDims>& alphas) {
    AlphaReport rep;
    rep.by_dimension = alphas;
    std::vector<double> xs(alphas.begin(), alphas.end());
    rep.mean = mean_of(xs);
    rep.sd = sample_sd(xs);
    return rep;
}

inline AlphaReport alpha_per_dimension(const ScoreMatrix& sm) {
    const std::size_t n = sm.agents.size() * static_cast<std::size_t>(sm.repetitions);
    if (n < 2)
        throw InvalidArgument(
            "alpha_per_dimension: needs at least 2 (agent, repetition) observation rows");
    if (sm.scenarios.size() < 2)
        throw InvalidArgument("alpha_per_dimension: needs at least 2 scenario items");
    std::array<double, kOceanDims> alphas{};
    for (std::size_t d = 0; d < kOceanDims; ++d) {
        ItemMatrix m;
        for (const auto& agent : sm.agents)
            for (int rep = 1; rep <= sm.repetitions; ++rep)
                m.row_labels.push_back(agent + "#" + std::to_string(rep));
        m.col_labels = sm.scenarios;
        m.data.reserve(n * sm.scenarios.size());
        for (const auto& agent : sm.agents)
            for (int rep = 1; rep <= sm.repetitions; ++rep)
                for (const auto& scenario : sm.scenarios)
                    m.data.push_back(sm.at(agent, scenario, rep)[d]);
        try {
            alphas[d] = cronbach_alpha(m);
        } catch (const DegenerateMatrixError& e) {
            throw DegenerateMatrixError(std::string("alpha for dimension \"") + kOceanNames[d] +
                                        "\": " + e.what());
        }
    }
    return summarize_alphas(alphas);
}

// ---------------------------------------------------------------------------
// ICC, two-way random effects, absolute agreement, single measure.
// Rows are targets, columns are raters/repetitions.
//   ICC = (MSR - MSE) / (MSR + (k-1) MSE + (k/n)(MSC - MSE))
//   F   = MSR / MSE
// The 95% CI follows the F-method with Satterthwaite degrees of freedom.

struct IccResult {
    double icc = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double f_statistic = 0.0;  // +inf on perfect agreement

    bool operator==(const IccResult&) const = default;
};

inline IccResult icc_absolute_agreement(const ItemMatrix& m) {
    m.validate();
    const double n = static_cast<double>(m.rows());
    const double k = static_cast<double>(m.cols());

    double grand = 0.0;
    for (double v : m.data) grand += v;
    grand /= (n * k);

    std::vector<double> row_mean(m.rows(), 0.0), col_mean(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            row_mean[r] += m.at(r, c);
            col_mean[c] += m.at(r, c);
        }
        row_mean[r] /= k;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) col_mean[c] /= n;

    double ss_rows = 0.0, ss_cols = 0.0, ss_err = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) ss_rows += (row_mean[r] - grand) * (row_mean[r] - grand);
    ss_rows *= k;
    for (std::size_t c = 0; c < m.cols(); ++c) ss_cols += (col_mean[c] - grand) * (col_mean[c] - grand);
    ss_cols *= n;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double resid = m.at(r, c) - row_mean[r] - col_mean[c] + grand;
            ss_err += resid * resid;
        }

    const double ms_rows = ss_rows / (n - 1.0);
    const double ms_cols = ss_cols / (k - 1.0);
    const double ms_err = ss_err / ((n - 1.0) * (k - 1.0));

    if (ms_rows == 0.0 && ms_err == 0.0)
        throw DegenerateMatrixError("icc_absolute_agreement: no variance anywhere, ICC undefined");

    IccResult out;
    if (ms_err == 0.0) {
        // Perfect agreement across raters with real target variance.
        out.icc = 1.0;
        out.ci_low = 1.0;
        out.ci_high = 1.0;
        out.f_statistic = std::numeric_limits<double>::infinity();
        return out;
    }

    out.icc = (ms_rows - ms_err) /
              (ms_rows + (k - 1.0) * ms_err + (k / n) * (ms_cols - ms_err));
    out.f_statistic = ms_rows / ms_err;

    const double a = k * out.icc / (n * (1.0 - out.icc));
    const double b = 1.0 + k * out.icc * (n - 1.0) / (n * (1.0 - out.icc));
    const double v_num = (a * ms_cols + b * ms_err) * (a * ms_cols + b * ms_err);
    const double v_den = (a * ms_cols) * (a * ms_cols) / (k - 1.0) +
                         (b * ms_err) * (b * ms_err) / ((n - 1.0) * (k - 1.0));
    const double v = v_num / v_den;
    const double f_upper = f_quantile(0.975, n - 1.0, v);
    const double f_lower = f_quantile(0.975, v, n - 1.0);
    out.ci_low = n * (ms_rows - f_upper * ms_err) /
                 (f_upper * (k * ms_cols + (k * n - k - n) * ms_err) + n * ms_rows);
    out.ci_high = n * (f_lower * ms_rows - ms_err) /
                  (k * ms_cols + (k * n - k - n) * ms_err + n * f_lower * ms_rows);
    out.ci_low = std::min(out.ci_low, out.icc);
    out.ci_high = std::max(out.ci_high, out.icc);
    return out;
}

// ---------------------------------------------------------------------------
// Interpretation bands (lower band edge inclusive).

enum class AlphaBand { excellent, good, acceptable, questionable, poor };
enum class IccBand { excellent, good, moderate, poor };

inline AlphaBand interpret_alpha(double alpha) {
    if (alpha >= 0.90) return AlphaBand::excellent;
    if (alpha >= 0.80) return AlphaBand::good;
    if (alpha >= 0.70) return AlphaBand::acceptable;
    if (alpha >= 0.60) return AlphaBand::questionable;
    return AlphaBand::poor;
}

inline IccBand interpret_icc(double icc) {
    if (icc >= 0.90) return IccBand::excellent;
    if (icc >= 0.75) return IccBand::good;
    if (icc >= 0.50) return IccBand::moderate;
    return IccBand::poor;
}

inline const char* to_string(AlphaBand b) {
    switch (b) {
        case AlphaBand::excellent: return "excellent";
        case AlphaBand::good: return "good";
        case AlphaBand::acceptable: return "acceptable";
        case AlphaBand::questionable: return "questionable";
        case AlphaBand::poor: return "poor";
    }
    return "poor";
}

inline const char* to_string(IccBand b) {
    switch (b) {
        case IccBand::excellent: return "excellent";
        case IccBand::good: return "good";
        case IccBand::moderate: return "moderate";
        case IccBand::poor: return "poor";
    }
    return "poor";
}

// "good" -> "Good" for table rendering.
inline std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

// ---------------------------------------------------------------------------
// Per-dimension ICC over a score matrix: targets are (agent, scenario) pairs,
// raters are repetitions 1..R. The condition-level value is the mean of the
// five per-dimension results (per-dimension values are also reported).

inline ItemMatrix icc_matrix_for_dimension(const ScoreMatrix& sm, std::size_t dim) {
    ItemMatrix m;
    for (const auto& agent : sm.agents)
        for (const auto& scenario : sm.scenarios)
            m.row_labels.push_back(agent + "#" + scenario);
    for (int rep = 1; rep <= sm.repetitions; ++rep)
        m.col_labels.push_back("rep" + std::to_string(rep));
    m.data.reserve(m.rows() * m.cols());
    for (const auto& agent : sm.agents)
        for (const auto& scenario : sm.scenarios)
            for (int rep = 1; rep <= sm.repetitions; ++rep)
                m.data.push_back(sm.at(agent, scenario, rep)[dim]);
    return m;
}

struct IccReport {
    std::array<IccResult, kOceanDims> by_dimension{};
    IccResult average;  // condition-level summary
};

inline IccReport icc_per_dimension(const ScoreMatrix& sm) {
    if (sm.repetitions < 2)
        throw InvalidArgument("icc_per_dimension: needs at least 2 repetitions as raters");
    IccReport rep;
    double icc = 0.0, lo = 0.0, hi = 0.0, f = 0.0;
    for (std::size_t d = 0; d < kOceanDims; ++d) {
        try {
            rep.by_dimension[d] = icc_absolute_agreement(icc_matrix_for_dimension(sm, d));
        } catch (const DegenerateMatrixError& e) {
            throw DegenerateMatrixError(std::string("icc for dimension \"") + kOceanNames[d] +
                                        "\": " + e.what());
        }
        icc += rep.by_dimension[d].icc;
        lo += rep.by_dimension[d].ci_low;
        hi += rep.by_dimension[d].ci_high;
        f += rep.by_dimension[d].f_statistic;
    }
    rep.average.icc = icc / kOceanDims;
    rep.average.ci_low = lo / kOceanDims;
    rep.average.ci_high = hi / kOceanDims;
    rep.average.f_statistic = f / kOceanDims;
    return rep;
}

// ---------------------------------------------------------------------------
// Role discrimination: predict each response's agent as the roster profile
// with minimum OCEAN distance to the scored vector (ties -> roster order).

struct DiscriminationReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double macro_auc = 0.0;
    std::vector<std::string> labels;             // roster order
    std::vector<std::vector<int>> confusion;     // [true][predicted]
    bool degenerate_roster = false;
};

namespace detail {

// One-vs-rest ROC AUC by trapezoidal integration; tied scores advance as one
// group, which equals the midrank convention.
inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positives) {
    std::size_t pos = 0, neg = 0;
    for (bool p : positives) p ? ++pos : ++neg;
    if (pos == 0 || neg == 0) return 0.5;
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double auc = 0.0;
    double tp = 0.0, fp = 0.0;
    double prev_tp = 0.0, prev_fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = scores[order[i]];
        while (i < order.size() && scores[order[i]] == score) {
            positives[order[i]] ? ++tp : ++fp;
            ++i;
        }
        auc += (fp - prev_fp) * (tp + prev_tp) / 2.0;
        prev_tp = tp;
        prev_fp = fp;
    }
    return auc / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace detail

inline DiscriminationReport role_discrimination(const ScoreMatrix& sm,
                                                const std::vector<AgentProfile>& roster) {
    if (roster.size() < 2)
        throw InvalidArgument("role_discrimination: needs at least 2 roster profiles");
    for (const auto& agent : sm.agents) {
        const bool known = std::any_of(roster.begin(), roster.end(), [&](const AgentProfile& p) {
            return p.agent_id == agent;
        });
        if (!known)
            throw UnknownAgentError("role_discrimination: matrix agent \"" + agent +
                                    "\" is not in the roster");
    }

    DiscriminationReport rep;
    rep.degenerate_roster = true;
    for (std::size_t i = 1; i < roster.size(); ++i)
        if (!(roster[i].personality == roster[0].personality)) {
            rep.degenerate_roster = false;
            break;
        }

    for (const auto& p : roster) rep.labels.push_back(p.agent_id);
    rep.confusion.assign(roster.size(), std::vector<int>(roster.size(), 0));

    auto roster_index = [&](const std::string& id) {
        for (std::size_t i = 0; i < roster.size(); ++i)
            if (roster[i].agent_id == id) return i;
        return roster.size();
    };

    std::vector<std::size_t> true_idx;
    std::vector<OceanVector> scored;
    for (const auto& [key, vec] : sm.cells) {
        true_idx.push_back(roster_index(std::get<0>(key)));
        scored.push_back(vec);
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        std::size_t best = 0;
        double best_dist = ocean_distance(scored[i], roster[0].personality);
        for (std::size_t j = 1; j < roster.size(); ++j) {
            const double d = ocean_distance(scored[i], roster[j].personality);
            if (d < best_dist) {
                best = j;
                best_dist = d;
            }
        }
        rep.confusion[true_idx[i]][best] += 1;
        if (best == true_idx[i]) ++correct;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(scored.size());

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0, auc_sum = 0.0;
    for (std::size_t cls = 0; cls < roster.size(); ++cls) {
        int tp = rep.confusion[cls][cls];
        int fp = 0, fn = 0;
        for (std::size_t other = 0; other < roster.size(); ++other) {
            if (other == cls) continue;
            fp += rep.confusion[other][cls];
            fn += rep.confusion[cls][other];
        }
        const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;

        std::vector<double> scores(scored.size());
        std::vector<bool> positives(scored.size());
        for (std::size_t i = 0; i < scored.size(); ++i) {
            scores[i] = -ocean_distance(scored[i], roster[cls].personality);
            positives[i] = true_idx[i] == cls;
        }
        auc_sum += detail::roc_auc(scores, positives);
    }
    const double k = static_cast<double>(roster.size());
    rep.macro_precision = precision_sum / k;
    rep.macro_recall = recall_sum / k;
    rep.macro_f1 = f1_sum / k;
    rep.macro_auc = auc_sum / k;
    return rep;
}

// ---------------------------------------------------------------------------
// Condition-level bundle

struct ReliabilityReport {
    ConditionId condition = ConditionId::baseline;
    AlphaReport alpha;
    AlphaBand alpha_band = AlphaBand::poor;
    IccReport icc;
    IccBand icc_band = IccBand::poor;
    DiscriminationReport discrimination;
    // provenance
    std::size_t n_agents = 0;
    std::size_t n_scenarios = 0;
    int repetitions = 0;
    std::string scorer_id;
    std::uint64_t seed = 0;
    std::string item_mapping = "items=scenarios; observations=agent x repetition";

    json to_json() const {
        json j;
        j["condition"] = to_string(condition);
        json a;
        for (std::size_t d = 0; d < kOceanDims; ++d)
            a[kOceanNames[d]] = alpha.by_dimension[d];
        a["mean"] = alpha.mean;
        a["sd"] = alpha.sd;
        a["interpretation"] = to_string(alpha_band);
        j["cronbach_alpha"] = std::move(a);
        json ic;
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            json e;
            e["icc"] = icc.by_dimension[d].icc;
            e["ci95_low"] = icc.by_dimension[d].ci_low;
            e["ci95_high"] = icc.by_dimension[d].ci_high;
            e["f_statistic"] = icc.by_dimension[d].f_statistic;
            ic[kOceanNames[d]] = std::move(e);
        }
        ic["average"] = icc.average.icc;
        ic["ci95_low"] = icc.average.ci_low;
        ic["ci95_high"] = icc.average.ci_high;
        ic["f_statistic"] = icc.average.f_statistic;
        ic["interpretation"] = to_string(icc_band);
        j["icc"] = std::move(ic);
        json d;
        d["accuracy"] = discrimination.accuracy;
        d["macro_precision"] = discrimination.macro_precision;
        d["macro_recall"] = discrimination.macro_recall;
        d["macro_f1"] = discrimination.macro_f1;
        d["macro_auc"] = discrimination.macro_auc;
        d["degenerate_roster"] = discrimination.degenerate_roster;
        j["role_discrimination"] = std::move(d);
        json prov;
        prov["n_agents"] = n_agents;
        prov["n_scenarios"] = n_scenarios;
        prov["repetitions"] = repetitions;
        prov["scorer_id"] = scorer_id;
        prov["seed"] = seed;
        prov["item_mapping"] = item_mapping;
        j["provenance"] = std::move(prov);
        return j;
    }
};

inline ReliabilityReport compute_reliability(const ScoreMatrix& sm,
                                             const std::vector<AgentProfile>& roster,
                                             const std::string& scorer_id, std::uint64_t seed) {
    ReliabilityReport rep;
    rep.condition = sm.condition;
    rep.alpha = alpha_per_dimension(sm);
    rep.alpha_band = interpret_alpha(rep.alpha.mean);
    rep.icc = icc_per_dimension(sm);
    rep.icc_band = interpret_icc(rep.icc.average.icc);
    rep.discrimination = role_discrimination(sm, roster);
    rep.n_agents = sm.agents.size();
    rep.n_scenarios = sm.scenarios.size();
    rep.repetitions = sm.repetitions;
    rep.scorer_id = scorer_id;
    rep.seed = seed;
    return rep;
}

}  // namespace persim

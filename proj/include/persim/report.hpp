#pragma once
// Cross-condition report assembly and export. Three output formats:
//   csv    - one tabular-text file per table
//   json   - one structured document for the whole report
//   tables - aligned human-readable tables in a single text file
// Every number is recomputed from the persisted records; delta columns are
// differences of the per-condition values they sit next to.

#include "persim/ablation.hpp"
#include "persim/core.hpp"
#include "persim/psychometrics.hpp"
#include "persim/stats.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace persim {

struct ConditionSummary {
    ConditionId id = ConditionId::baseline;
    DataCharacteristics data;
    ReliabilityReport reliability;
};

struct DimensionGains {
    bool has_ccd = false;
    bool has_lora = false;
    std::array<double, kOceanDims> baseline{};
    std::array<double, kOceanDims> ccd{};
    std::array<double, kOceanDims> lora{};
};

struct AblationReport {
    std::vector<ConditionSummary> conditions;  // config order
    std::vector<PairedComparison> pairwise;    // all C(n,2), Bonferroni-corrected
    std::optional<DimensionGains> gains;       // needs baseline plus +CCD or +LoRA
    std::map<ConditionId, double> coherence;   // only when a judge is configured
    std::string coherence_judge_id;
    RunManifest manifest;

    const ConditionSummary* find(ConditionId id) const {
        for (const auto& c : conditions)
            if (c.id == id) return &c;
        return nullptr;
    }
};

inline AblationReport summarize(const AblationDataset& dataset,
                                CoherenceJudge* judge = nullptr) {
    if (dataset.conditions.empty())
        throw MissingConditionError("summarize: dataset has no completed conditions");
    AblationReport report;
    report.manifest = dataset.manifest;
    for (const auto& cd : dataset.conditions)
        report.conditions.push_back({cd.id, cd.data, cd.reliability});

    if (dataset.conditions.size() >= 2) {
        std::vector<std::pair<ConditionId, std::array<double, kOceanDims>>> alphas;
        for (const auto& cd : dataset.conditions)
            alphas.emplace_back(cd.id, cd.reliability.alpha.by_dimension);
        report.pairwise = pairwise_alpha_comparisons(alphas);
    }

    const ConditionDataset* base = dataset.find(ConditionId::baseline);
    const ConditionDataset* ccd = dataset.find(ConditionId::plus_ccd);
    const ConditionDataset* lora = dataset.find(ConditionId::plus_lora);
    if (base && (ccd || lora)) {
        DimensionGains g;
        g.baseline = base->reliability.alpha.by_dimension;
        if (ccd) {
            g.has_ccd = true;
            g.ccd = ccd->reliability.alpha.by_dimension;
        }
        if (lora) {
            g.has_lora = true;
            g.lora = lora->reliability.alpha.by_dimension;
        }
        report.gains = g;
    }

    if (judge) {
        report.coherence_judge_id = judge->id();
        for (const auto& cd : dataset.conditions) {
            double sum = 0.0;
            for (const auto& r : cd.records) {
                const double rating = judge->rate(r);
                if (!(rating >= 1.0) || !(rating <= 5.0))
                    throw ScorerFailureError("coherence judge \"" + judge->id() +
                                             "\" returned a rating outside [1, 5]");
                sum += rating;
            }
            report.coherence[cd.id] =
                cd.records.empty() ? 0.0 : sum / static_cast<double>(cd.records.size());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Shared value formatting

namespace reportfmt {

inline std::string alpha(double v) { return format_fixed(v, 3); }
inline std::string icc(double v) { return format_fixed(v, 3); }
inline std::string ci(const IccResult& r) {
    return "[" + format_fixed(r.ci_low, 2) + ", " + format_fixed(r.ci_high, 2) + "]";
}
inline std::string fstat(double v) {
    return std::isinf(v) ? "inf" : format_fixed(v, 1);
}
inline std::string signed3(double v) {
    return (v >= 0.0 ? "+" : "") + format_fixed(v, 3);
}
inline std::string signed2(double v) {
    return (v >= 0.0 ? "+" : "") + format_fixed(v, 2);
}
inline std::string pvalue(double p) {
    if (p < 0.001) return "<0.001";
    return format_fixed(p, 3);
}

}  // namespace reportfmt

// ---------------------------------------------------------------------------
// Individual tables as rows of cells; the csv and aligned-text writers share
// them.

struct TableDoc {
    std::string name;   // file stem and title
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<TableDoc> report_tables(const AblationReport& report) {
    using namespace reportfmt;
    std::vector<TableDoc> tables;

    {
        TableDoc t;
        t.name = "data_characteristics";
        t.header = {"Characteristic"};
        for (const auto& c : report.conditions) t.header.push_back(condition_label(c.id));
        auto row = [&](const std::string& label, auto getter) {
            std::vector<std::string> r{label};
            for (const auto& c : report.conditions) r.push_back(getter(c));
            t.rows.push_back(std::move(r));
        };
        row("Agent configurations", [](const ConditionSummary& c) {
            return std::to_string(c.data.agent_count);
        });
        row("Scenarios per agent", [](const ConditionSummary& c) {
            return std::to_string(c.data.scenario_count);
        });
        row("Repetitions per scenario", [](const ConditionSummary& c) {
            return std::to_string(c.data.repetitions);
        });
        row("Total responses", [](const ConditionSummary& c) {
            return std::to_string(c.data.total_responses);
        });
        row("Mean response length (tokens)", [](const ConditionSummary& c) {
            return format_fixed(c.data.mean_tokens, 1);
        });
        row("Response time (ms)", [](const ConditionSummary& c) {
            return format_fixed(c.data.mean_latency_ms, 0);
        });
        tables.push_back(std::move(t));
    }

    {
        TableDoc t;
        t.name = "alpha_by_dimension";
        t.header = {"Condition", "O", "C", "E", "A", "N", "Mean (SD)"};
        for (const auto& c : report.conditions) {
            std::vector<std::string> r{condition_label(c.id)};
            for (std::size_t d = 0; d < kOceanDims; ++d)
                r.push_back(format_fixed(c.reliability.alpha.by_dimension[d], 2));
            r.push_back(c.reliability.alpha.mean_sd_string());
            t.rows.push_back(std::move(r));
        }
        tables.push_back(std::move(t));
    }

    {
        TableDoc t;
        t.name = "icc_by_condition";
        t.header = {"Condition", "ICC", "95% CI", "F-statistic", "Interpretation"};
        for (const auto& c : report.conditions) {
            t.rows.push_back({condition_label(c.id), icc(c.reliability.icc.average.icc),
                              ci(c.reliability.icc.average),
                              fstat(c.reliability.icc.average.f_statistic),
                              capitalize(to_string(c.reliability.icc_band))});
        }
        tables.push_back(std::move(t));
    }

    {
        TableDoc t;
        t.name = "role_discrimination";
        t.header = {"Condition", "Accuracy", "Precision", "Recall", "F1", "AUC"};
        for (const auto& c : report.conditions) {
            const auto& d = c.reliability.discrimination;
            t.rows.push_back({condition_label(c.id), format_percent(d.accuracy),
                              format_fixed(d.macro_precision, 2), format_fixed(d.macro_recall, 2),
                              format_fixed(d.macro_f1, 2), format_fixed(d.macro_auc, 2)});
        }
        tables.push_back(std::move(t));
    }

    {
        TableDoc t;
        t.name = "component_contributions";
        t.header = {"Metric"};
        for (const auto& c : report.conditions) t.header.push_back(condition_label(c.id));
        const ConditionSummary* base = report.find(ConditionId::baseline);
        std::vector<std::string> alpha_row{"Cronbach's alpha"}, delta_row{"Delta alpha from Baseline"},
            icc_row{"ICC"}, disc_row{"Role Discrimination"};
        for (const auto& c : report.conditions) {
            alpha_row.push_back(alpha(c.reliability.alpha.mean));
            if (base)
                delta_row.push_back(c.id == ConditionId::baseline
                                        ? "-"
                                        : signed3(c.reliability.alpha.mean -
                                                  base->reliability.alpha.mean));
            icc_row.push_back(icc(c.reliability.icc.average.icc));
            disc_row.push_back(format_percent(c.reliability.discrimination.accuracy));
        }
        t.rows.push_back(std::move(alpha_row));
        if (base) t.rows.push_back(std::move(delta_row));
        t.rows.push_back(std::move(icc_row));
        t.rows.push_back(std::move(disc_row));
        if (!report.coherence.empty()) {
            std::vector<std::string> coh_row{"Response Coherence"};
            for (const auto& c : report.conditions) {
                auto it = report.coherence.find(c.id);
                coh_row.push_back(it == report.coherence.end()
                                      ? "-"
                                      : format_fixed(it->second, 1) + "/5");
            }
            t.rows.push_back(std::move(coh_row));
        }
        tables.push_back(std::move(t));
    }

    if (!report.pairwise.empty()) {
        TableDoc t;
        t.name = "alpha_pairwise_tests";
        t.header = {"Comparison", "Delta alpha", "t", "df", "p"};
        for (const auto& cmp : report.pairwise) {
            t.rows.push_back({std::string(condition_label(cmp.condition_a)) + " vs " +
                                  condition_label(cmp.condition_b),
                              signed3(cmp.delta_mean), format_fixed(cmp.t, 2),
                              std::to_string(cmp.df), pvalue(cmp.p_adjusted) + cmp.stars});
        }
        tables.push_back(std::move(t));
    }

    if (report.gains) {
        const DimensionGains& g = *report.gains;
        TableDoc t;
        t.name = "alpha_dimension_gains";
        t.header = {"Dimension", "Baseline"};
        if (g.has_ccd) t.header.push_back("+CCD");
        if (g.has_lora) t.header.push_back("+LoRA");
        if (g.has_ccd) t.header.push_back("Delta (CCD)");
        if (g.has_lora) t.header.push_back("Delta (LoRA)");
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            std::vector<std::string> r{capitalize(kOceanNames[d]),
                                       format_fixed(g.baseline[d], 2)};
            if (g.has_ccd) r.push_back(format_fixed(g.ccd[d], 2));
            if (g.has_lora) r.push_back(format_fixed(g.lora[d], 2));
            if (g.has_ccd) r.push_back(signed2(g.ccd[d] - g.baseline[d]));
            if (g.has_lora) r.push_back(signed2(g.lora[d] - g.baseline[d]));
            t.rows.push_back(std::move(r));
        }
        tables.push_back(std::move(t));
    }

    return tables;
}

// ---------------------------------------------------------------------------
// Writers

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string table_to_csv(const TableDoc& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? "," : "") << csv_escape(t.header[i]);
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
        out << "\n";
    }
    return out.str();
}

inline std::string table_to_text(const TableDoc& t) {
    std::vector<std::size_t> widths(t.header.size(), 0);
    auto widen = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    };
    widen(t.header);
    for (const auto& row : t.rows) widen(row);

    std::ostringstream out;
    out << "== " << t.name << " ==\n";
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i];
            if (i + 1 < row.size())
                out << std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out << "\n";
    };
    emit(t.header);
    std::size_t total = 0;
    for (std::size_t w : widths) total += w + 2;
    out << std::string(total > 2 ? total - 2 : total, '-') << "\n";
    for (const auto& row : t.rows) emit(row);
    return out.str();
}

inline json report_to_json(const AblationReport& report) {
    json j;
    j["run_id"] = report.manifest.run_id;
    j["config_hash"] = hex64(report.manifest.config_hash);
    j["global_seed"] = report.manifest.global_seed;
    j["tool_version"] = report.manifest.tool_version;
    json conds = json::array();
    for (const auto& c : report.conditions) {
        json e;
        e["condition"] = to_string(c.id);
        json data;
        data["agent_count"] = c.data.agent_count;
        data["scenario_count"] = c.data.scenario_count;
        data["repetitions"] = c.data.repetitions;
        data["total_responses"] = c.data.total_responses;
        data["mean_tokens"] = c.data.mean_tokens;
        data["mean_latency_ms"] = c.data.mean_latency_ms;
        e["data"] = std::move(data);
        e["reliability"] = c.reliability.to_json();
        if (!report.coherence.empty() && report.coherence.count(c.id))
            e["coherence"] = report.coherence.at(c.id);
        conds.push_back(std::move(e));
    }
    j["conditions"] = std::move(conds);
    json cmps = json::array();
    for (const auto& cmp : report.pairwise) {
        json e;
        e["condition_a"] = to_string(cmp.condition_a);
        e["condition_b"] = to_string(cmp.condition_b);
        e["delta_alpha"] = cmp.delta_mean;
        e["t"] = cmp.t;
        e["df"] = cmp.df;
        e["p_raw"] = cmp.p_raw;
        e["p_adjusted"] = cmp.p_adjusted;
        e["stars"] = cmp.stars;
        cmps.push_back(std::move(e));
    }
    j["pairwise_alpha_comparisons"] = std::move(cmps);
    if (!report.coherence_judge_id.empty()) j["coherence_judge"] = report.coherence_judge_id;
    return j;
}

enum class ReportFormat { csv, json, tables };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "csv" || s == "tabular-text") return ReportFormat::csv;
    if (s == "json" || s == "structured-text") return ReportFormat::json;
    if (s == "tables" || s == "human-readable") return ReportFormat::tables;
    throw InvalidArgument("unknown report format \"" + s +
                          "\" (expected csv, json, or tables)");
}

// Deterministic file set under <dir>/reports; returns the written paths.
inline std::vector<std::filesystem::path> export_report(const AblationReport& report,
                                                        const std::filesystem::path& dir,
                                                        ReportFormat format) {
    const auto reports_dir = dir / "reports";
    std::filesystem::create_directories(reports_dir);
    std::vector<std::filesystem::path> written;
    const std::vector<TableDoc> tables = report_tables(report);
    switch (format) {
        case ReportFormat::csv:
            for (const auto& t : tables) {
                const auto path = reports_dir / (t.name + ".csv");
                write_text_file(path, table_to_csv(t));
                written.push_back(path);
            }
            break;
        case ReportFormat::json: {
            const auto path = reports_dir / "report.json";
            write_text_file(path, dump_canonical(report_to_json(report)));
            written.push_back(path);
            break;
        }
        case ReportFormat::tables: {
            std::ostringstream out;
            out << "Run " << report.manifest.run_id << " (config "
                << hex64(report.manifest.config_hash) << ", seed "
                << report.manifest.global_seed << ")\n\n";
            for (const auto& t : tables) out << table_to_text(t) << "\n";
            const auto path = reports_dir / "report_tables.txt";
            write_text_file(path, out.str());
            written.push_back(path);
            break;
        }
    }
    return written;
}

}  // namespace persim

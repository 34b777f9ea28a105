#pragma once
// Battery administration and response scoring. The default scorer is the
// transparent lexical rubric: per dimension, count high-indicator (h) and
// low-indicator (l) phrase occurrences and score clamp(3 + 0.5*(h - l), 1, 5).
// Judge-model scorers plug in behind the same 1-5 contract.

#include "persim/backend.hpp"
#include "persim/ccd.hpp"
#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/lexicon.hpp"
#include "persim/record.hpp"
#include "persim/scenario.hpp"
#include "persim/workflow.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace persim {

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual OceanVector score(const std::string& response_text) = 0;
    virtual std::string id() const = 0;
};

class LexiconScorer final : public Scorer {
public:
    explicit LexiconScorer(IndicatorLexicon lexicon = IndicatorLexicon::builtin())
        : lexicon_(std::move(lexicon)) {
        lexicon_.validate();
    }

    OceanVector score(const std::string& response_text) override {
        OceanVector v;
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            int high = 0, low = 0;
            for (const auto& phrase : lexicon_.high[d])
                high += count_phrase_occurrences(response_text, phrase);
            for (const auto& phrase : lexicon_.low[d])
                low += count_phrase_occurrences(response_text, phrase);
            v[d] = clamp_trait(3.0 + 0.5 * static_cast<double>(high - low));
        }
        return v;
    }

    std::string id() const override { return "lexicon"; }

private:
    IndicatorLexicon lexicon_;
};

inline ResponseRecord score_response(ResponseRecord record, Scorer& scorer) {
    if (record.response_text.empty())
        throw EmptyResponseError("score_response: empty response for " + record.cell_key());
    OceanVector v;
    try {
        v = scorer.score(record.response_text);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ScorerFailureError("score_response: scorer \"" + scorer.id() + "\" failed on " +
                                 record.cell_key() + ": " + e.what());
    }
    v.validate("score for " + record.cell_key());
    record.ocean_score = v;
    record.scorer_id = scorer.id();
    return record;
}

// ---------------------------------------------------------------------------
// Battery administration: |roster| x |scenarios| x R single-shot
// administrations, each via WorkflowEngine::run_assessment with a per-record
// derived seed, optionally in parallel (cells are mutually independent).

struct BatteryOptions {
    int parallelism = 4;
    int retry_budget = 2;  // extra attempts per cell after the first
    // When set, each record is scored before it is reported or returned.
    Scorer* scorer = nullptr;
    // Incremental persistence hook; called once per finished record.
    std::function<void(const ResponseRecord&)> on_record;
    // Resume support: cells whose key is listed here are skipped.
    std::set<std::string> skip_cells;
};

inline std::uint64_t condition_seed(std::uint64_t global_seed, ConditionId condition) {
    return fnv1a64(to_string(condition), fnv1a64_u64(global_seed, 14695981039346656037ULL));
}

inline std::vector<ResponseRecord> administer_battery(
    const std::vector<AgentRuntime>& roster, const std::vector<Scenario>& scenarios,
    int repetitions, const PipelineConfig& condition, std::uint64_t global_seed,
    WorkflowEngine& engine, const BatteryOptions& opts = {}) {
    if (roster.empty()) throw InvalidArgument("administer_battery: roster must be non-empty");
    if (scenarios.empty())
        throw InvalidArgument("administer_battery: scenario battery must be non-empty");
    if (repetitions < 1) throw InvalidArgument("administer_battery: repetitions must be >= 1");

    struct Cell {
        const AgentRuntime* agent;
        const Scenario* scenario;
        int repetition;
    };
    std::vector<Cell> cells;
    const std::uint64_t cond_seed = condition_seed(global_seed, condition.id);
    for (const auto& agent : roster)
        for (const auto& scenario : scenarios)
            for (int rep = 1; rep <= repetitions; ++rep) {
                const std::string key = agent.profile.agent_id + "|" + scenario.scenario_id +
                                        "|" + std::to_string(rep);
                if (opts.skip_cells.count(key)) continue;
                cells.push_back({&agent, &scenario, rep});
            }

    std::vector<std::optional<ResponseRecord>> slots(cells.size());
    std::vector<std::string> failures;
    std::mutex failure_mutex, record_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::exception_ptr fatal;  // first non-backend failure, rethrown after join

    auto worker = [&]() {
        for (;;) {
            if (aborted.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            const std::uint64_t seed = derive_call_seed(
                cell.agent->profile.agent_id, cell.scenario->scenario_id, cell.repetition,
                cond_seed);
            bool done = false;
            std::string last_error;
            for (int attempt = 0; attempt <= opts.retry_budget && !done; ++attempt) {
                try {
                    ResponseRecord rec =
                        engine.run_assessment(*cell.agent, *cell.scenario, cell.repetition,
                                              condition, seed);
                    if (opts.scorer) rec = score_response(std::move(rec), *opts.scorer);
                    if (opts.on_record) {
                        std::lock_guard<std::mutex> lock(record_mutex);
                        opts.on_record(rec);
                    }
                    slots[i] = std::move(rec);
                    done = true;
                } catch (const BackendError& e) {
                    last_error = e.what();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!fatal) fatal = std::current_exception();
                    aborted.store(true);
                    return;
                }
            }
            if (!done) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failures.push_back(cell.agent->profile.agent_id + "|" +
                                   cell.scenario->scenario_id + "|" +
                                   std::to_string(cell.repetition) + " (" + last_error + ")");
            }
        }
    };

    const int threads = std::max(1, std::min<int>(opts.parallelism,
                                                  static_cast<int>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        throw IncompleteRunError("administer_battery: " + std::to_string(failures.size()) +
                                     " administration(s) failed after retries",
                                 std::move(failures));
    }

    std::vector<ResponseRecord> records;
    records.reserve(slots.size());
    for (auto& s : slots) records.push_back(std::move(*s));
    return records;
}

}  // namespace persim

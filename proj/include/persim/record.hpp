#pragma once
// Scored administration records and the condition-level score matrix that
// feeds every statistic.

#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/ocean.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace persim {

struct ResponseRecord {
    std::string agent_id;
    std::string scenario_id;
    int repetition = 1;  // 1..R
    ConditionId condition = ConditionId::baseline;
    std::string response_text;
    std::optional<OceanVector> ocean_score;  // filled by scoring
    double latency_ms = 0.0;
    int token_count = 0;
    std::uint64_t seed = 0;
    Millis created_at = 0;
    std::string scorer_id;
    std::string backend_id;

    bool operator==(const ResponseRecord&) const = default;

    std::string cell_key() const {
        return agent_id + "|" + scenario_id + "|" + std::to_string(repetition);
    }

    json to_json() const {
        json j;
        j["agent_id"] = agent_id;
        j["scenario_id"] = scenario_id;
        j["repetition"] = repetition;
        j["condition"] = to_string(condition);
        j["response_text"] = response_text;
        if (ocean_score) j["ocean_score"] = ocean_score->to_json();
        j["latency_ms"] = latency_ms;
        j["token_count"] = token_count;
        j["seed"] = seed;
        j["created_at"] = created_at;
        j["scorer_id"] = scorer_id;
        j["backend_id"] = backend_id;
        return j;
    }

    static ResponseRecord from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j,
                              {"agent_id", "scenario_id", "repetition", "condition",
                               "response_text", "ocean_score", "latency_ms", "token_count",
                               "seed", "created_at", "scorer_id", "backend_id"},
                              where);
        ResponseRecord r;
        r.agent_id = require_string(j, "agent_id", where);
        r.scenario_id = require_string(j, "scenario_id", where);
        r.repetition = static_cast<int>(require_integer(j, "repetition", where));
        r.condition = condition_from_string(require_string(j, "condition", where), where);
        r.response_text = require_string(j, "response_text", where);
        if (j.contains("ocean_score"))
            r.ocean_score = OceanVector::from_json(j.at("ocean_score"), where + ".ocean_score");
        r.latency_ms = require_number(j, "latency_ms", where);
        r.token_count = static_cast<int>(require_integer(j, "token_count", where));
        r.seed = static_cast<std::uint64_t>(require_integer(j, "seed", where));
        r.created_at = require_integer(j, "created_at", where);
        r.scorer_id = require_string(j, "scorer_id", where);
        r.backend_id = require_string(j, "backend_id", where);
        return r;
    }
};

// Natural ordering for ids like "S2" < "S10": shorter first, then lexical.
inline bool natural_id_less(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

// Deterministic sort used everywhere records are persisted or exported.
inline void sort_records(std::vector<ResponseRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const ResponseRecord& a, const ResponseRecord& b) {
                  if (a.condition != b.condition)
                      return static_cast<int>(a.condition) < static_cast<int>(b.condition);
                  if (a.agent_id != b.agent_id) return natural_id_less(a.agent_id, b.agent_id);
                  if (a.scenario_id != b.scenario_id)
                      return natural_id_less(a.scenario_id, b.scenario_id);
                  return a.repetition < b.repetition;
              });
}

// ---------------------------------------------------------------------------

struct ScoreMatrix {
    ConditionId condition = ConditionId::baseline;
    std::vector<std::string> agents;     // sorted, natural order
    std::vector<std::string> scenarios;  // sorted, natural order
    int repetitions = 0;
    // cell (agent, scenario, repetition 1..R) -> scored vector
    std::map<std::tuple<std::string, std::string, int>, OceanVector> cells;

    std::size_t cell_count() const { return cells.size(); }

    const OceanVector& at(const std::string& agent, const std::string& scenario,
                          int repetition) const {
        auto it = cells.find({agent, scenario, repetition});
        if (it == cells.end())
            throw InvalidArgument("score matrix: no cell (" + agent + ", " + scenario + ", " +
                                  std::to_string(repetition) + ")");
        return it->second;
    }
};

// Completeness check: every (agent, scenario, repetition 1..R) combination
// must be present exactly once, all scored, all one condition.
inline ScoreMatrix build_score_matrix(const std::vector<ResponseRecord>& records) {
    if (records.empty()) throw InvalidArgument("build_score_matrix: no records");
    ScoreMatrix m;
    m.condition = records.front().condition;
    std::set<std::string> agents, scenarios;
    int max_rep = 0;
    for (const auto& r : records) {
        if (r.condition != m.condition)
            throw MixedConditionsError(
                "build_score_matrix: records mix conditions \"" +
                std::string(to_string(m.condition)) + "\" and \"" + to_string(r.condition) +
                "\"");
        if (!r.ocean_score)
            throw InvalidArgument("build_score_matrix: unscored record " + r.cell_key());
        r.ocean_score->validate("record " + r.cell_key() + " score");
        if (r.repetition < 1)
            throw RangeError("build_score_matrix: repetition must be >= 1 in " + r.cell_key());
        auto key = std::make_tuple(r.agent_id, r.scenario_id, r.repetition);
        if (m.cells.count(key))
            throw DuplicateIdError("build_score_matrix: duplicate cell " + r.cell_key());
        m.cells[key] = *r.ocean_score;
        agents.insert(r.agent_id);
        scenarios.insert(r.scenario_id);
        max_rep = std::max(max_rep, r.repetition);
    }
    m.agents.assign(agents.begin(), agents.end());
    std::sort(m.agents.begin(), m.agents.end(), natural_id_less);
    m.scenarios.assign(scenarios.begin(), scenarios.end());
    std::sort(m.scenarios.begin(), m.scenarios.end(), natural_id_less);
    m.repetitions = max_rep;

    std::vector<std::string> missing;
    for (const auto& a : m.agents)
        for (const auto& s : m.scenarios)
            for (int rep = 1; rep <= m.repetitions; ++rep)
                if (!m.cells.count({a, s, rep}))
                    missing.push_back(a + "|" + s + "|" + std::to_string(rep));
    if (!missing.empty()) {
        std::string msg = "build_score_matrix: incomplete matrix, missing " +
                          std::to_string(missing.size()) + " cell(s): ";
        for (std::size_t i = 0; i < std::min<std::size_t>(5, missing.size()); ++i)
            msg += (i ? ", " : "") + missing[i];
        throw IncompleteRunError(msg, std::move(missing));
    }
    return m;
}

// Score-matrix export: one row per scored administration.
inline std::string records_to_csv(std::vector<ResponseRecord> records) {
    sort_records(records);
    std::ostringstream out;
    out << "condition,agent_id,scenario_id,repetition,O,C,E,A,N,latency_ms,tokens,seed\n";
    for (const auto& r : records) {
        out << to_string(r.condition) << "," << r.agent_id << "," << r.scenario_id << ","
            << r.repetition;
        for (std::size_t d = 0; d < kOceanDims; ++d)
            out << "," << (r.ocean_score ? format_trait((*r.ocean_score)[d]) : std::string());
        out << "," << format_fixed(r.latency_ms, 1) << "," << r.token_count << "," << r.seed
            << "\n";
    }
    return out.str();
}

}  // namespace persim

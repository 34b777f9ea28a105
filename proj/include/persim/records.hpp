#pragma once
// Long-term memory record families: episodic events, semantic facts, belief
// update audit entries and session summaries. Field sets follow the
// relational schema one-to-one.

#include "persim/core.hpp"
#include "persim/emotion.hpp"

#include <map>
#include <string>
#include <vector>

namespace persim {

enum class BeliefLevel { core, intermediate };

inline const char* to_string(BeliefLevel l) {
    return l == BeliefLevel::core ? "core" : "intermediate";
}

inline BeliefLevel belief_level_from_string(const std::string& s, const std::string& where) {
    if (s == "core") return BeliefLevel::core;
    if (s == "intermediate") return BeliefLevel::intermediate;
    throw SchemaError(where + ": belief_level must be \"core\" or \"intermediate\"");
}

struct EpisodicRecord {
    std::string memory_id;
    std::string agent_id;
    std::string event_type;
    Millis event_time = 0;
    std::string content;
    double emotional_valence = 0.0;
    double importance = 0.0;
    std::map<std::string, std::string> metadata;

    bool operator==(const EpisodicRecord&) const = default;

    void validate() const {
        if (agent_id.empty()) throw SchemaError("episodic record: agent_id must be non-empty");
        if (!std::isfinite(importance) || importance < 0.0 || importance > 1.0)
            throw RangeError("episodic record: field \"importance\" outside [0, 1]");
        if (!std::isfinite(emotional_valence) || emotional_valence < -1.0 ||
            emotional_valence > 1.0)
            throw RangeError("episodic record: field \"emotional_valence\" outside [-1, 1]");
    }

    json to_json() const {
        json j;
        j["memory_id"] = memory_id;
        j["agent_id"] = agent_id;
        j["event_type"] = event_type;
        j["event_time"] = event_time;
        j["content"] = content;
        j["emotional_valence"] = emotional_valence;
        j["importance"] = importance;
        j["metadata"] = metadata;
        return j;
    }

    static EpisodicRecord from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j,
                              {"memory_id", "agent_id", "event_type", "event_time", "content",
                               "emotional_valence", "importance", "metadata"},
                              where);
        EpisodicRecord r;
        r.memory_id = require_string(j, "memory_id", where);
        r.agent_id = require_string(j, "agent_id", where);
        r.event_type = require_string(j, "event_type", where);
        r.event_time = require_integer(j, "event_time", where);
        r.content = require_string(j, "content", where);
        r.emotional_valence = require_number(j, "emotional_valence", where);
        r.importance = require_number(j, "importance", where);
        for (auto it = require_object(j, "metadata", where).begin();
             it != j.at("metadata").end(); ++it) {
            if (!it.value().is_string())
                throw SchemaError(where + ": metadata values must be strings");
            r.metadata[it.key()] = it.value().get<std::string>();
        }
        r.validate();
        return r;
    }
};

struct SemanticRecord {
    std::string fact_id;
    std::string agent_id;
    std::string category;
    std::string content;
    double confidence = 0.0;
    std::string source;
    Millis updated_at = 0;

    bool operator==(const SemanticRecord&) const = default;

    void validate() const {
        if (agent_id.empty()) throw SchemaError("semantic record: agent_id must be non-empty");
        if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0)
            throw RangeError("semantic record: field \"confidence\" outside [0, 1]");
    }

    json to_json() const {
        json j;
        j["fact_id"] = fact_id;
        j["agent_id"] = agent_id;
        j["category"] = category;
        j["content"] = content;
        j["confidence"] = confidence;
        j["source"] = source;
        j["updated_at"] = updated_at;
        return j;
    }

    static SemanticRecord from_json(const json& j, const std::string& where) {
        reject_unknown_fields(
            j, {"fact_id", "agent_id", "category", "content", "confidence", "source", "updated_at"},
            where);
        SemanticRecord r;
        r.fact_id = require_string(j, "fact_id", where);
        r.agent_id = require_string(j, "agent_id", where);
        r.category = require_string(j, "category", where);
        r.content = require_string(j, "content", where);
        r.confidence = require_number(j, "confidence", where);
        r.source = require_string(j, "source", where);
        r.updated_at = require_integer(j, "updated_at", where);
        r.validate();
        return r;
    }
};

struct BeliefUpdateRecord {
    std::string update_id;
    std::string agent_id;
    BeliefLevel belief_level = BeliefLevel::core;
    std::string belief_type;
    std::string old_value;
    std::string new_value;
    std::string trigger_event;
    Millis timestamp = 0;

    bool operator==(const BeliefUpdateRecord&) const = default;

    void validate() const {
        if (agent_id.empty())
            throw SchemaError("belief update record: agent_id must be non-empty");
    }

    json to_json() const {
        json j;
        j["update_id"] = update_id;
        j["agent_id"] = agent_id;
        j["belief_level"] = to_string(belief_level);
        j["belief_type"] = belief_type;
        j["old_value"] = old_value;
        j["new_value"] = new_value;
        j["trigger_event"] = trigger_event;
        j["timestamp"] = timestamp;
        return j;
    }

    static BeliefUpdateRecord from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j,
                              {"update_id", "agent_id", "belief_level", "belief_type",
                               "old_value", "new_value", "trigger_event", "timestamp"},
                              where);
        BeliefUpdateRecord r;
        r.update_id = require_string(j, "update_id", where);
        r.agent_id = require_string(j, "agent_id", where);
        r.belief_level = belief_level_from_string(require_string(j, "belief_level", where), where);
        r.belief_type = require_string(j, "belief_type", where);
        r.old_value = require_string(j, "old_value", where);
        r.new_value = require_string(j, "new_value", where);
        r.trigger_event = require_string(j, "trigger_event", where);
        r.timestamp = require_integer(j, "timestamp", where);
        r.validate();
        return r;
    }
};

struct DialogueSummary {
    std::string summary_id;
    std::string session_id;
    std::string agent_id;
    std::string summary;
    std::vector<std::string> key_topics;
    std::vector<EmotionVector> emotional_trajectory;
    Millis created_at = 0;

    bool operator==(const DialogueSummary&) const = default;

    void validate() const {
        if (agent_id.empty())
            throw SchemaError("dialogue summary: agent_id must be non-empty");
    }

    json to_json() const {
        json j;
        j["summary_id"] = summary_id;
        j["session_id"] = session_id;
        j["agent_id"] = agent_id;
        j["summary"] = summary;
        j["key_topics"] = key_topics;
        json traj = json::array();
        for (const auto& e : emotional_trajectory) traj.push_back(e.to_json());
        j["emotional_trajectory"] = std::move(traj);
        j["created_at"] = created_at;
        return j;
    }

    static DialogueSummary from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j,
                              {"summary_id", "session_id", "agent_id", "summary", "key_topics",
                               "emotional_trajectory", "created_at"},
                              where);
        DialogueSummary s;
        s.summary_id = require_string(j, "summary_id", where);
        s.session_id = require_string(j, "session_id", where);
        s.agent_id = require_string(j, "agent_id", where);
        s.summary = require_string(j, "summary", where);
        s.key_topics = string_list(require_array(j, "key_topics", where), where + ".key_topics");
        for (const auto& e : require_array(j, "emotional_trajectory", where))
            s.emotional_trajectory.push_back(
                EmotionVector::from_json(e, where + ".emotional_trajectory"));
        s.created_at = require_integer(j, "created_at", where);
        s.validate();
        return s;
    }
};

}  // namespace persim

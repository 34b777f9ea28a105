#pragma once
// Three-layer cognitive model: background history, belief system (core and
// intermediate beliefs plus coping strategies), and situation-triggered
// appraisals. The appraisal rule is deterministic and auditable:
//   - an intermediate belief activates iff its trigger tags intersect the
//     situation's tags;
//   - each activated belief emits one automatic thought with credibility
//     strength x intensity;
//   - the belief's configured emotion deltas, scaled by that credibility, are
//     added to baseline + situation bias, then clamped to [0, 1];
//   - a coping strategy fires when any of its activating emotions reaches its
//     threshold in the resulting state.

#include "persim/core.hpp"
#include "persim/emotion.hpp"
#include "persim/records.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace persim {

struct LifeEvent {
    std::string label;
    std::string description;
    double valence = 0.0;  // [-1, 1]

    bool operator==(const LifeEvent&) const = default;
};

struct Belief {
    std::string schema_label;
    std::string statement;
    double strength = 0.0;  // [0, 1]

    bool operator==(const Belief&) const = default;
};

struct ConditionalBelief {
    std::string statement;
    std::string parent_core_belief;  // schema_label of an existing core belief
    std::set<std::string> trigger_tags;
    double strength = 0.0;  // [0, 1]
    std::map<std::string, double> emotion_deltas;  // canonical emotion -> [-1, 1]

    bool operator==(const ConditionalBelief&) const = default;
};

struct CopingStrategy {
    std::string label;
    std::string behavior;
    std::set<std::string> activating_emotions;  // subset of the seven canonical names
    double activation_threshold = 0.0;          // [0, 1]

    bool operator==(const CopingStrategy&) const = default;
};

struct CcdModel {
    std::string agent_id;
    std::vector<LifeEvent> relevant_history;
    std::vector<Belief> core_beliefs;
    std::vector<ConditionalBelief> intermediate_beliefs;
    std::vector<CopingStrategy> coping_strategies;

    bool operator==(const CcdModel&) const = default;

    void validate() const {
        const std::string where = "ccd \"" + agent_id + "\"";
        for (const auto& ev : relevant_history)
            if (!std::isfinite(ev.valence) || ev.valence < -1.0 || ev.valence > 1.0)
                throw RangeError(where + ": life event \"" + ev.label +
                                 "\" valence outside [-1, 1]");
        std::set<std::string> core_labels;
        for (const auto& b : core_beliefs) {
            if (!std::isfinite(b.strength) || b.strength < 0.0 || b.strength > 1.0)
                throw RangeError(where + ": core belief \"" + b.schema_label +
                                 "\" strength outside [0, 1]");
            core_labels.insert(b.schema_label);
        }
        for (const auto& b : intermediate_beliefs) {
            if (!core_labels.count(b.parent_core_belief))
                throw SchemaError(where + ": intermediate belief \"" + b.statement +
                                  "\" references unknown core belief \"" +
                                  b.parent_core_belief + "\"");
            if (b.trigger_tags.empty())
                throw SchemaError(where + ": intermediate belief \"" + b.statement +
                                  "\" must have at least one trigger tag");
            if (!std::isfinite(b.strength) || b.strength < 0.0 || b.strength > 1.0)
                throw RangeError(where + ": intermediate belief \"" + b.statement +
                                 "\" strength outside [0, 1]");
            for (const auto& [emotion, delta] : b.emotion_deltas) {
                if (!EmotionVector::index_of(emotion))
                    throw SchemaError(where + ": intermediate belief \"" + b.statement +
                                      "\" names unknown emotion \"" + emotion + "\"");
                if (!std::isfinite(delta) || delta < -1.0 || delta > 1.0)
                    throw RangeError(where + ": emotion delta \"" + emotion +
                                     "\" outside [-1, 1]");
            }
        }
        for (const auto& cs : coping_strategies) {
            if (!std::isfinite(cs.activation_threshold) || cs.activation_threshold < 0.0 ||
                cs.activation_threshold > 1.0)
                throw RangeError(where + ": coping strategy \"" + cs.label +
                                 "\" threshold outside [0, 1]");
            for (const auto& emotion : cs.activating_emotions)
                if (!EmotionVector::index_of(emotion))
                    throw SchemaError(where + ": coping strategy \"" + cs.label +
                                      "\" names unknown emotion \"" + emotion + "\"");
        }
    }
};

struct SituationTrigger {
    std::string description;
    std::set<std::string> tags;
    double intensity = 0.0;  // [0, 1]
    std::map<std::string, double> emotion_bias;  // partial delta over baseline

    bool operator==(const SituationTrigger&) const = default;

    void validate() const {
        if (tags.empty()) throw SchemaError("situation trigger: tags must be non-empty");
        if (!std::isfinite(intensity) || intensity < 0.0 || intensity > 1.0)
            throw RangeError("situation trigger: intensity outside [0, 1]");
        for (const auto& [emotion, _] : emotion_bias)
            if (!EmotionVector::index_of(emotion))
                throw SchemaError("situation trigger: unknown emotion \"" + emotion + "\"");
    }
};

struct AutomaticThought {
    std::string statement;
    double credibility = 0.0;
    std::string source_belief;

    bool operator==(const AutomaticThought&) const = default;
};

struct AppraisalOutcome {
    std::vector<AutomaticThought> automatic_thoughts;  // descending credibility
    EmotionVector emotions;
    std::vector<std::string> behaviors;  // labels of fired coping strategies
    SituationTrigger trigger;

    bool operator==(const AppraisalOutcome&) const = default;
};

// ---------------------------------------------------------------------------

inline bool tags_intersect(const std::set<std::string>& a, const std::set<std::string>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& t : small)
        if (large.count(t)) return true;
    return false;
}

// Pure appraisal; empty activation is a valid outcome.
inline AppraisalOutcome appraise(const CcdModel& ccd, const SituationTrigger& trigger,
                                 const EmotionVector& baseline) {
    trigger.validate();
    AppraisalOutcome out;
    out.trigger = trigger;

    EmotionVector emotions = baseline;
    for (const auto& [emotion, delta] : trigger.emotion_bias)
        emotions.set(emotion, emotions.get(emotion) + delta);

    for (const auto& belief : ccd.intermediate_beliefs) {
        if (!tags_intersect(belief.trigger_tags, trigger.tags)) continue;
        const double credibility = belief.strength * trigger.intensity;
        out.automatic_thoughts.push_back({belief.statement, credibility, belief.statement});
        for (const auto& [emotion, delta] : belief.emotion_deltas)
            emotions.set(emotion, emotions.get(emotion) + delta * credibility);
    }
    out.emotions = emotions.clamped();

    std::stable_sort(out.automatic_thoughts.begin(), out.automatic_thoughts.end(),
                     [](const AutomaticThought& a, const AutomaticThought& b) {
                         return a.credibility > b.credibility;
                     });

    for (const auto& cs : ccd.coping_strategies) {
        for (const auto& emotion : cs.activating_emotions) {
            if (out.emotions.get(emotion) >= cs.activation_threshold) {
                out.behaviors.push_back(cs.label);
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prompt rendering: background -> belief system -> triggered responses.

inline std::string render_ccd_block(const CcdModel& ccd, const AppraisalOutcome& outcome) {
    std::ostringstream out;
    out << "[CCD]\n";
    out << "Background:\n";
    if (ccd.relevant_history.empty()) {
        out << "- none\n";
    } else {
        for (const auto& ev : ccd.relevant_history)
            out << "- " << ev.label << ": " << ev.description << " (valence "
                << format_fixed(ev.valence, 2) << ")\n";
    }
    out << "Belief system:\n";
    out << "Core beliefs:\n";
    if (ccd.core_beliefs.empty()) {
        out << "- none\n";
    } else {
        for (const auto& b : ccd.core_beliefs)
            out << "- [" << b.schema_label << "] " << b.statement << " (strength "
                << format_fixed(b.strength, 2) << ")\n";
    }
    out << "Intermediate beliefs:\n";
    if (ccd.intermediate_beliefs.empty()) {
        out << "- none\n";
    } else {
        for (const auto& b : ccd.intermediate_beliefs)
            out << "- " << b.statement << " (parent " << b.parent_core_belief << ", strength "
                << format_fixed(b.strength, 2) << ")\n";
    }
    out << "Coping strategies:\n";
    if (ccd.coping_strategies.empty()) {
        out << "- none\n";
    } else {
        for (const auto& cs : ccd.coping_strategies) {
            out << "- " << cs.label << ": " << cs.behavior << " (threshold "
                << format_fixed(cs.activation_threshold, 2) << ")\n";
        }
    }
    out << "Triggered responses:\n";
    out << "Situation: "
        << (outcome.trigger.description.empty() ? "none" : outcome.trigger.description) << "\n";
    out << "Automatic thoughts:\n";
    if (outcome.automatic_thoughts.empty()) {
        out << "- none\n";
    } else {
        for (const auto& t : outcome.automatic_thoughts)
            out << "- " << t.statement << " (credibility " << format_fixed(t.credibility, 2)
                << ")\n";
    }
    out << "Emotions:";
    for (std::size_t i = 0; i < kEmotionDims; ++i)
        out << " " << kEmotionNames[i] << "=" << format_fixed(outcome.emotions[i], 2);
    out << "\n";
    out << "Behaviors:\n";
    if (outcome.behaviors.empty()) {
        out << "- none\n";
    } else {
        for (const auto& b : outcome.behaviors) out << "- " << b << "\n";
    }
    out << "[/CCD]";
    return out.str();
}

// ---------------------------------------------------------------------------
// Belief updates: value-semantics edit plus an audit record; the input model
// is never modified. target_ref matches a core belief's statement or schema
// label, or an intermediate belief's statement.

inline std::pair<CcdModel, BeliefUpdateRecord> apply_belief_update(
    const CcdModel& ccd, BeliefLevel level, const std::string& target_ref,
    const std::string& new_value, const std::string& trigger_event, Millis at) {
    CcdModel updated = ccd;
    BeliefUpdateRecord record;
    record.agent_id = ccd.agent_id;
    record.belief_level = level;
    record.new_value = new_value;
    record.trigger_event = trigger_event;
    record.timestamp = at;

    if (level == BeliefLevel::core) {
        for (auto& b : updated.core_beliefs) {
            if (b.statement == target_ref || b.schema_label == target_ref) {
                record.belief_type = b.schema_label;
                record.old_value = b.statement;
                b.statement = new_value;
                return {std::move(updated), std::move(record)};
            }
        }
    } else {
        for (auto& b : updated.intermediate_beliefs) {
            if (b.statement == target_ref) {
                record.belief_type = b.parent_core_belief;
                record.old_value = b.statement;
                b.statement = new_value;
                return {std::move(updated), std::move(record)};
            }
        }
    }
    throw UnknownBeliefError("apply_belief_update: no " + std::string(to_string(level)) +
                             " belief matches \"" + target_ref + "\"");
}

// ---------------------------------------------------------------------------
// Document format

inline CcdModel ccd_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j,
                          {"agent_id", "background", "core_beliefs", "intermediate_beliefs",
                           "coping_strategies"},
                          where);
    CcdModel m;
    m.agent_id = require_string(j, "agent_id", where);
    for (const auto& ev : require_array(j, "background", where)) {
        const std::string w = where + ".background";
        reject_unknown_fields(ev, {"label", "description", "valence"}, w);
        m.relevant_history.push_back({require_string(ev, "label", w),
                                      require_string(ev, "description", w),
                                      require_number(ev, "valence", w)});
    }
    for (const auto& b : require_array(j, "core_beliefs", where)) {
        const std::string w = where + ".core_beliefs";
        reject_unknown_fields(b, {"schema_label", "statement", "strength"}, w);
        m.core_beliefs.push_back({require_string(b, "schema_label", w),
                                  require_string(b, "statement", w),
                                  require_number(b, "strength", w)});
    }
    for (const auto& b : require_array(j, "intermediate_beliefs", where)) {
        const std::string w = where + ".intermediate_beliefs";
        reject_unknown_fields(b, {"statement", "parent_core_belief", "trigger_tags", "strength",
                                  "emotion_deltas"},
                              w);
        ConditionalBelief cb;
        cb.statement = require_string(b, "statement", w);
        cb.parent_core_belief = require_string(b, "parent_core_belief", w);
        for (const auto& t : string_list(require_array(b, "trigger_tags", w), w))
            cb.trigger_tags.insert(t);
        cb.strength = require_number(b, "strength", w);
        if (b.contains("emotion_deltas")) {
            const json& deltas = b.at("emotion_deltas");
            if (!deltas.is_object()) throw SchemaError(w + ": emotion_deltas must be an object");
            for (auto it = deltas.begin(); it != deltas.end(); ++it) {
                if (!it.value().is_number())
                    throw SchemaError(w + ": emotion delta \"" + it.key() + "\" must be a number");
                cb.emotion_deltas[it.key()] = it.value().get<double>();
            }
        }
        m.intermediate_beliefs.push_back(std::move(cb));
    }
    for (const auto& cs : require_array(j, "coping_strategies", where)) {
        const std::string w = where + ".coping_strategies";
        reject_unknown_fields(
            cs, {"label", "behavior", "activating_emotions", "activation_threshold"}, w);
        CopingStrategy s;
        s.label = require_string(cs, "label", w);
        s.behavior = require_string(cs, "behavior", w);
        for (const auto& e : string_list(require_array(cs, "activating_emotions", w), w))
            s.activating_emotions.insert(e);
        s.activation_threshold = require_number(cs, "activation_threshold", w);
        m.coping_strategies.push_back(std::move(s));
    }
    m.validate();
    return m;
}

inline CcdModel load_ccd(const std::string& document) {
    return ccd_from_json(parse_json(document, "ccd"), "ccd");
}

inline CcdModel load_ccd_file(const std::filesystem::path& path) {
    return ccd_from_json(parse_json(read_text_file(path), path.string()), path.string());
}

inline json ccd_to_json(const CcdModel& m) {
    json j;
    j["agent_id"] = m.agent_id;
    json bg = json::array();
    for (const auto& ev : m.relevant_history) {
        json e;
        e["label"] = ev.label;
        e["description"] = ev.description;
        e["valence"] = ev.valence;
        bg.push_back(std::move(e));
    }
    j["background"] = std::move(bg);
    json cores = json::array();
    for (const auto& b : m.core_beliefs) {
        json e;
        e["schema_label"] = b.schema_label;
        e["statement"] = b.statement;
        e["strength"] = b.strength;
        cores.push_back(std::move(e));
    }
    j["core_beliefs"] = std::move(cores);
    json inters = json::array();
    for (const auto& b : m.intermediate_beliefs) {
        json e;
        e["statement"] = b.statement;
        e["parent_core_belief"] = b.parent_core_belief;
        e["trigger_tags"] = std::vector<std::string>(b.trigger_tags.begin(), b.trigger_tags.end());
        e["strength"] = b.strength;
        json deltas = json::object();
        for (const auto& [emotion, delta] : b.emotion_deltas) deltas[emotion] = delta;
        e["emotion_deltas"] = std::move(deltas);
        inters.push_back(std::move(e));
    }
    j["intermediate_beliefs"] = std::move(inters);
    json copes = json::array();
    for (const auto& cs : m.coping_strategies) {
        json e;
        e["label"] = cs.label;
        e["behavior"] = cs.behavior;
        e["activating_emotions"] =
            std::vector<std::string>(cs.activating_emotions.begin(), cs.activating_emotions.end());
        e["activation_threshold"] = cs.activation_threshold;
        copes.push_back(std::move(e));
    }
    j["coping_strategies"] = std::move(copes);
    return j;
}

inline std::string save_ccd(const CcdModel& m) {
    m.validate();
    return dump_canonical(ccd_to_json(m));
}

}  // namespace persim

#pragma once
// Standardized assessment scenarios. The built-in battery ships ten
// elderly-care situations (S1-S10); batteries are also loadable from fixture
// files with the same schema.

#include "persim/core.hpp"

#include <set>
#include <string>
#include <vector>

namespace persim {

struct Scenario {
    std::string scenario_id;
    std::string name;
    std::string description;
    std::string prompt_text;
    std::set<std::string> tags;  // drive CCD triggering and semantic retrieval

    bool operator==(const Scenario&) const = default;

    void validate() const {
        if (scenario_id.empty()) throw SchemaError("scenario: scenario_id must be non-empty");
        if (prompt_text.empty())
            throw SchemaError("scenario \"" + scenario_id + "\": prompt_text must be non-empty");
    }

    json to_json() const {
        json j;
        j["scenario_id"] = scenario_id;
        j["name"] = name;
        j["description"] = description;
        j["prompt_text"] = prompt_text;
        j["tags"] = std::vector<std::string>(tags.begin(), tags.end());
        return j;
    }

    static Scenario from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j, {"scenario_id", "name", "description", "prompt_text", "tags"},
                              where);
        Scenario s;
        s.scenario_id = require_string(j, "scenario_id", where);
        s.name = require_string(j, "name", where);
        s.description = require_string(j, "description", where);
        s.prompt_text = require_string(j, "prompt_text", where);
        for (const auto& t : string_list(require_array(j, "tags", where), where + ".tags"))
            s.tags.insert(t);
        s.validate();
        return s;
    }
};

inline std::vector<Scenario> builtin_scenarios() {
    auto mk = [](const char* id, const char* name, const char* desc, const char* prompt,
                 std::set<std::string> tags) {
        Scenario s;
        s.scenario_id = id;
        s.name = name;
        s.description = desc;
        s.prompt_text = prompt;
        s.tags = std::move(tags);
        return s;
    };
    return {
        mk("S1", "Medication Adherence",
           "The older adult discusses reluctance to take prescribed medications.",
           "Your doctor has prescribed a new daily medication. Talk through how you feel about "
           "taking it every day and whether you intend to follow the prescription.",
           {"medication", "health", "adherence"}),
        mk("S2", "Family Conflict",
           "The older adult describes disagreement with adult children.",
           "You and your adult children disagree about how much help you need at home, and the "
           "conversation got heated. Describe the disagreement and how you are handling it.",
           {"family", "conflict", "criticism"}),
        mk("S3", "Social Isolation",
           "The older adult expresses feelings of loneliness and disconnection.",
           "Lately the days feel long and you have spoken to very few people. Talk about how "
           "connected you feel to others right now and what you do about it.",
           {"loneliness", "social", "isolation"}),
        mk("S4", "Health Anxiety",
           "The older adult worries about worsening health condition.",
           "A routine check-up came back with numbers slightly worse than last time. Share what "
           "is going through your mind about your health.",
           {"health", "worry", "uncertainty"}),
        mk("S5", "Financial Concerns",
           "The older adult discusses worries about healthcare costs.",
           "Medical bills and daily expenses are adding up this month. Talk about how you are "
           "thinking about money and the cost of your care.",
           {"finance", "worry", "cost"}),
        mk("S6", "Loss and Grief",
           "The older adult processes recent loss of spouse or friend.",
           "Someone close to you passed away a few months ago. Share how you have been coping "
           "since the loss.",
           {"grief", "loss", "family"}),
        mk("S7", "Ageism Experience",
           "The older adult recounts experience of age discrimination.",
           "At a recent appointment, someone spoke over you and addressed your companion instead "
           "of you, as if your age made your opinion matter less. Describe the experience and "
           "how you responded.",
           {"ageism", "discrimination", "criticism"}),
        mk("S8", "Care Transition",
           "The older adult discusses moving to assisted living facility.",
           "Your family has raised the idea of moving you to an assisted living facility. Talk "
           "about how you feel about the possible move.",
           {"transition", "care", "family"}),
        mk("S9", "Technology Frustration",
           "The older adult expresses difficulty with digital health tools.",
           "The clinic now wants appointments booked through a phone app, and it keeps logging "
           "you out. Describe your experience with these digital tools.",
           {"technology", "frustration"}),
        mk("S10", "End-of-Life Planning",
           "The older adult discusses advance care preferences.",
           "Your care team has asked whether you have thought about advance care preferences. "
           "Share your thoughts on planning for the end of life.",
           {"end_of_life", "planning", "health"}),
    };
}

inline std::vector<Scenario> battery_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j, {"scenarios"}, where);
    std::vector<Scenario> out;
    std::set<std::string> ids;
    for (const auto& e : require_array(j, "scenarios", where)) {
        Scenario s = Scenario::from_json(e, where);
        if (!ids.insert(s.scenario_id).second)
            throw SchemaError(where + ": duplicate scenario_id \"" + s.scenario_id + "\"");
        out.push_back(std::move(s));
    }
    if (out.empty()) throw SchemaError(where + ": battery has no scenarios");
    return out;
}

inline std::vector<Scenario> load_battery_file(const std::filesystem::path& path) {
    return battery_from_json(parse_json(read_text_file(path), path.string()), path.string());
}

inline json battery_to_json(const std::vector<Scenario>& battery) {
    json arr = json::array();
    for (const auto& s : battery) arr.push_back(s.to_json());
    json j;
    j["scenarios"] = std::move(arr);
    return j;
}

}  // namespace persim

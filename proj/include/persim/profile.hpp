#pragma once
// Agent identity: demographics, health status, OCEAN traits, social context,
// behavioral constraints and role typing. Profiles are immutable value
// objects once loaded; the document format is strict (closed) JSON.

#include "persim/core.hpp"
#include "persim/ocean.hpp"

#include <optional>
#include <string>
#include <vector>

namespace persim {

// ---------------------------------------------------------------------------
// Role taxonomy

enum class RoleCategory {
    older_adult,
    healthcare_provider,
    family_member,
    community,
    institutional,
};

inline constexpr std::array<RoleCategory, 5> kAllRoleCategories = {
    RoleCategory::older_adult, RoleCategory::healthcare_provider,
    RoleCategory::family_member, RoleCategory::community, RoleCategory::institutional};

inline const char* to_string(RoleCategory c) {
    switch (c) {
        case RoleCategory::older_adult: return "older_adult";
        case RoleCategory::healthcare_provider: return "healthcare_provider";
        case RoleCategory::family_member: return "family_member";
        case RoleCategory::community: return "community";
        case RoleCategory::institutional: return "institutional";
    }
    return "older_adult";
}

inline RoleCategory role_category_from_string(const std::string& s, const std::string& where) {
    for (RoleCategory c : kAllRoleCategories)
        if (s == to_string(c)) return c;
    throw UnknownRoleError(where + ": unknown role category \"" + s + "\"");
}

struct RoleType {
    RoleCategory category = RoleCategory::older_adult;
    std::string subtype;
    std::optional<OceanVector> typical_ocean;

    bool operator==(const RoleType&) const = default;

    bool is_default() const { return *this == RoleType{}; }

    void validate(const std::string& where) const {
        if (typical_ocean) typical_ocean->validate(where + ".typical_ocean");
    }

    json to_json() const {
        json j;
        j["category"] = to_string(category);
        j["subtype"] = subtype;
        if (typical_ocean) j["typical_ocean"] = typical_ocean->to_json();
        return j;
    }

    static RoleType from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j, {"category", "subtype", "typical_ocean"}, where);
        RoleType r;
        r.category = role_category_from_string(require_string(j, "category", where), where);
        r.subtype = require_string(j, "subtype", where);
        if (j.contains("typical_ocean"))
            r.typical_ocean = OceanVector::from_json(j.at("typical_ocean"), where + ".typical_ocean");
        return r;
    }
};

// ---------------------------------------------------------------------------
// Profile blocks

struct Demographics {
    std::string name;
    int age = 0;
    std::string gender;
    std::string education;
    std::string occupation;
    std::string living_situation;
    std::string marital_status;
    int children = 0;
    std::string income_level;

    bool operator==(const Demographics&) const = default;
};

struct HealthStatus {
    std::vector<std::string> chronic_conditions;
    std::string cognitive_status;
    std::string functional_status;
    std::string medication_adherence;

    bool operator==(const HealthStatus&) const = default;
};

struct SocialContext {
    std::string family_support;
    std::string community_engagement;
    std::vector<std::string> discrimination_history;

    bool operator==(const SocialContext&) const = default;
};

struct AgentProfile {
    std::string agent_id;
    Demographics demographics;
    HealthStatus health_status;
    OceanVector personality;
    SocialContext social_context;
    std::vector<std::string> behavior_constraints;
    RoleType role_type;

    bool operator==(const AgentProfile&) const = default;

    // Scenario override for the context-sensitive blocks. Demographics and
    // personality are the stable identity and cannot be swapped.
    AgentProfile with_context(HealthStatus health, SocialContext social) const {
        AgentProfile p = *this;
        p.health_status = std::move(health);
        p.social_context = std::move(social);
        p.validate();
        return p;
    }

    void validate() const {
        const std::string where = "profile \"" + agent_id + "\"";
        if (agent_id.empty()) throw SchemaError("profile: agent_id must be non-empty");
        if (demographics.age < 0)
            throw RangeError(where + ": field \"age\" must be >= 0");
        if (demographics.children < 0)
            throw RangeError(where + ": field \"children\" must be >= 0");
        for (const auto& rule : behavior_constraints)
            if (rule.empty())
                throw SchemaError(where + ": behavior_constraints must not contain empty strings");
        personality.validate(where + ".personality");
        role_type.validate(where + ".role_type");
    }
};

// ---------------------------------------------------------------------------
// Document format (strict schema, canonical key order)

namespace detail {

inline Demographics demographics_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j,
                          {"name", "age", "gender", "education", "occupation",
                           "living_situation", "marital_status", "children", "income_level"},
                          where);
    Demographics d;
    d.name = require_string(j, "name", where);
    d.age = static_cast<int>(require_integer(j, "age", where));
    d.gender = require_string(j, "gender", where);
    d.education = require_string(j, "education", where);
    d.occupation = require_string(j, "occupation", where);
    d.living_situation = require_string(j, "living_situation", where);
    d.marital_status = require_string(j, "marital_status", where);
    d.children = static_cast<int>(require_integer(j, "children", where));
    d.income_level = require_string(j, "income_level", where);
    return d;
}

inline HealthStatus health_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j,
                          {"chronic_conditions", "cognitive_status", "functional_status",
                           "medication_adherence"},
                          where);
    HealthStatus h;
    h.chronic_conditions = string_list(require_array(j, "chronic_conditions", where),
                                       where + ".chronic_conditions");
    h.cognitive_status = require_string(j, "cognitive_status", where);
    h.functional_status = require_string(j, "functional_status", where);
    h.medication_adherence = require_string(j, "medication_adherence", where);
    return h;
}

inline SocialContext social_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j,
                          {"family_support", "community_engagement", "discrimination_history"},
                          where);
    SocialContext s;
    s.family_support = require_string(j, "family_support", where);
    s.community_engagement = require_string(j, "community_engagement", where);
    s.discrimination_history = string_list(require_array(j, "discrimination_history", where),
                                           where + ".discrimination_history");
    return s;
}

}  // namespace detail

inline AgentProfile profile_from_json(const json& j, const std::string& where) {
    reject_unknown_fields(j,
                          {"agent_id", "demographics", "health_status", "personality",
                           "social_context", "behavior_constraints", "role_type"},
                          where);
    AgentProfile p;
    p.agent_id = require_string(j, "agent_id", where);
    p.demographics =
        detail::demographics_from_json(require_object(j, "demographics", where), where + ".demographics");
    p.health_status =
        detail::health_from_json(require_object(j, "health_status", where), where + ".health_status");
    p.personality =
        OceanVector::from_json(require_object(j, "personality", where), where + ".personality");
    p.social_context =
        detail::social_from_json(require_object(j, "social_context", where), where + ".social_context");
    p.behavior_constraints = string_list(require_array(j, "behavior_constraints", where),
                                         where + ".behavior_constraints");
    if (j.contains("role_type"))
        p.role_type = RoleType::from_json(j.at("role_type"), where + ".role_type");
    p.validate();
    return p;
}

inline AgentProfile load_profile(const std::string& document) {
    return profile_from_json(parse_json(document, "profile"), "profile");
}

inline AgentProfile load_profile_file(const std::filesystem::path& path) {
    return profile_from_json(parse_json(read_text_file(path), path.string()), path.string());
}

inline json profile_to_json(const AgentProfile& p) {
    json j;
    j["agent_id"] = p.agent_id;
    json d;
    d["name"] = p.demographics.name;
    d["age"] = p.demographics.age;
    d["gender"] = p.demographics.gender;
    d["education"] = p.demographics.education;
    d["occupation"] = p.demographics.occupation;
    d["living_situation"] = p.demographics.living_situation;
    d["marital_status"] = p.demographics.marital_status;
    d["children"] = p.demographics.children;
    d["income_level"] = p.demographics.income_level;
    j["demographics"] = std::move(d);
    json h;
    h["chronic_conditions"] = p.health_status.chronic_conditions;
    h["cognitive_status"] = p.health_status.cognitive_status;
    h["functional_status"] = p.health_status.functional_status;
    h["medication_adherence"] = p.health_status.medication_adherence;
    j["health_status"] = std::move(h);
    j["personality"] = p.personality.to_json();
    json s;
    s["family_support"] = p.social_context.family_support;
    s["community_engagement"] = p.social_context.community_engagement;
    s["discrimination_history"] = p.social_context.discrimination_history;
    j["social_context"] = std::move(s);
    j["behavior_constraints"] = p.behavior_constraints;
    // Listing-layout compatibility: the role block is emitted only when it
    // carries information, so documents without one round-trip unchanged.
    if (!p.role_type.is_default()) j["role_type"] = p.role_type.to_json();
    return j;
}

// Deterministic canonical serialization; load_profile(save_profile(p)) == p.
inline std::string save_profile(const AgentProfile& p) {
    p.validate();
    return dump_canonical(profile_to_json(p));
}

// ---------------------------------------------------------------------------
// Role templates. Qualitative trait guidance maps to the fixed rule
// low = 2.0, high = 4.0, unspecified = 3.0.

namespace detail {

struct RoleEntry {
    RoleCategory category;
    std::vector<std::string> subtypes;
    OceanVector typical;
};

inline OceanVector make_typical(double o, double c, double e, double a, double n) {
    return OceanVector{o, c, e, a, n};
}

inline const std::vector<RoleEntry>& role_registry() {
    static const std::vector<RoleEntry> registry = {
        {RoleCategory::older_adult,
         {"solitary older adult", "chronic disease adult", "cognitive impairment adult"},
         make_typical(3.0, 3.0, 2.0, 3.0, 4.0)},
        {RoleCategory::healthcare_provider,
         {"geriatrician", "nurse", "rehabilitation therapist"},
         make_typical(3.0, 4.0, 3.0, 4.0, 3.0)},
        {RoleCategory::family_member,
         {"supportive child", "neglectful child", "discriminatory child", "spouse"},
         make_typical(3.0, 3.0, 3.0, 3.0, 3.0)},
        {RoleCategory::community,
         {"social worker", "neighbor", "stranger"},
         make_typical(3.0, 3.0, 3.0, 3.0, 3.0)},
        {RoleCategory::institutional,
         {"nursing home staff", "social services"},
         make_typical(3.0, 4.0, 3.0, 3.0, 3.0)},
    };
    return registry;
}

}  // namespace detail

// Skeleton profile for a registered (category, subtype) pair; personality is
// seeded from the category's typical trait pattern.
inline AgentProfile role_template(RoleCategory category, const std::string& subtype) {
    for (const auto& entry : detail::role_registry()) {
        if (entry.category != category) continue;
        for (const auto& st : entry.subtypes) {
            if (st != subtype) continue;
            AgentProfile p;
            std::string slug = subtype;
            for (char& ch : slug)
                if (ch == ' ') ch = '_';
            p.agent_id = slug + "_template";
            p.demographics.name = subtype;
            p.demographics.age = category == RoleCategory::older_adult ? 70 : 40;
            p.demographics.gender = "unspecified";
            p.demographics.education = "unspecified";
            p.demographics.occupation = subtype;
            p.demographics.living_situation = "unspecified";
            p.demographics.marital_status = "unspecified";
            p.demographics.children = 0;
            p.demographics.income_level = "moderate";
            p.health_status.cognitive_status = "normal";
            p.health_status.functional_status = "independent";
            p.health_status.medication_adherence = "moderate";
            p.social_context.family_support = "moderate";
            p.social_context.community_engagement = "moderate";
            p.personality = entry.typical;
            p.role_type = RoleType{category, subtype, entry.typical};
            p.validate();
            return p;
        }
    }
    throw UnknownRoleError(std::string("role_template: unregistered role (") +
                           to_string(category) + ", \"" + subtype + "\")");
}

// ---------------------------------------------------------------------------
// Prompt rendering

inline std::string render_persona_block(const AgentProfile& p) {
    std::ostringstream out;
    out << "[PERSONA]\n";
    out << "You are " << p.demographics.name << " (" << p.agent_id << "), a "
        << p.demographics.age << "-year-old " << p.demographics.gender << " "
        << (p.role_type.subtype.empty() ? std::string(to_string(p.role_type.category))
                                        : p.role_type.subtype)
        << ".\n";
    out << "Background: education " << p.demographics.education << "; occupation "
        << p.demographics.occupation << "; " << p.demographics.living_situation << "; "
        << p.demographics.marital_status << "; " << p.demographics.children
        << " children; income " << p.demographics.income_level << ".\n";
    out << "Health: ";
    if (p.health_status.chronic_conditions.empty()) {
        out << "no chronic conditions";
    } else {
        for (std::size_t i = 0; i < p.health_status.chronic_conditions.size(); ++i)
            out << (i ? ", " : "") << p.health_status.chronic_conditions[i];
    }
    out << "; cognitive status " << p.health_status.cognitive_status << "; functional status "
        << p.health_status.functional_status << "; medication adherence "
        << p.health_status.medication_adherence << ".\n";
    out << "Social context: family support " << p.social_context.family_support
        << "; community engagement " << p.social_context.community_engagement << ".\n";
    out << "Personality targets (1-5):";
    for (std::size_t i = 0; i < kOceanDims; ++i)
        out << " " << kOceanLetters[i] << "=" << format_trait(p.personality[i]);
    out << "\n";
    if (!p.behavior_constraints.empty()) {
        out << "Behavioral rules:\n";
        for (const auto& rule : p.behavior_constraints) out << "- " << rule << "\n";
    }
    out << "[/PERSONA]";
    return out.str();
}

}  // namespace persim

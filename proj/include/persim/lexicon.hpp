#pragma once
// Behavioral-indicator lexicon: high/low phrase lists per OCEAN dimension,
// used both by the lexical scorer and by the scripted responder. Matching is
// case-insensitive on word boundaries, so "organized" never fires inside
// "disorganized".

#include "persim/core.hpp"
#include "persim/ocean.hpp"

#include <array>
#include <cctype>
#include <string>
#include <vector>

namespace persim {

struct IndicatorLexicon {
    std::array<std::vector<std::string>, kOceanDims> high;
    std::array<std::vector<std::string>, kOceanDims> low;

    void validate() const {
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            if (high[d].empty() || low[d].empty())
                throw SchemaError(std::string("lexicon: dimension \"") + kOceanNames[d] +
                                  "\" needs at least one high and one low indicator");
            for (const auto& p : high[d])
                if (p.empty()) throw SchemaError("lexicon: empty indicator phrase");
            for (const auto& p : low[d])
                if (p.empty()) throw SchemaError("lexicon: empty indicator phrase");
        }
    }

    static IndicatorLexicon builtin() {
        IndicatorLexicon lex;
        lex.high[0] = {"curious", "curiosity", "creative", "creativity", "imaginative",
                       "imagination", "open to new experiences"};
        lex.low[0] = {"conventional", "practical", "traditional", "prefers routine",
                      "prefer the familiar"};
        lex.high[1] = {"organized", "dependable", "self-disciplined", "goal-oriented",
                       "methodical"};
        lex.low[1] = {"careless", "impulsive", "disorganized", "scattered", "flexible"};
        lex.high[2] = {"sociable", "assertive", "energetic", "talkative", "outgoing"};
        lex.low[2] = {"reserved", "quiet", "solitary", "reflective", "withdrawn"};
        lex.high[3] = {"cooperative", "trusting", "helpful", "empathetic", "compassionate"};
        lex.low[3] = {"competitive", "skeptical", "challenging", "detached", "argumentative"};
        lex.high[4] = {"anxious", "moody", "emotionally reactive", "vulnerable", "worried"};
        lex.low[4] = {"calm", "stable", "resilient", "secure", "even-tempered"};
        return lex;
    }

    json to_json() const {
        json dims;
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            json entry;
            entry["high"] = high[d];
            entry["low"] = low[d];
            dims[kOceanNames[d]] = std::move(entry);
        }
        json j;
        j["dimensions"] = std::move(dims);
        return j;
    }

    static IndicatorLexicon from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j, {"dimensions"}, where);
        const json& dims = require_object(j, "dimensions", where);
        reject_unknown_fields(
            dims, std::vector<std::string>(kOceanNames.begin(), kOceanNames.end()), where);
        IndicatorLexicon lex;
        for (std::size_t d = 0; d < kOceanDims; ++d) {
            const json& entry = require_object(dims, kOceanNames[d], where);
            reject_unknown_fields(entry, {"high", "low"}, where);
            lex.high[d] = string_list(require_array(entry, "high", where), where);
            lex.low[d] = string_list(require_array(entry, "low", where), where);
        }
        lex.validate();
        return lex;
    }

    static IndicatorLexicon load_file(const std::filesystem::path& path) {
        return from_json(parse_json(read_text_file(path), path.string()), path.string());
    }
};

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace detail

// Non-overlapping, case-insensitive, word-boundary occurrence count.
inline int count_phrase_occurrences(std::string_view text, std::string_view phrase) {
    if (phrase.empty() || text.size() < phrase.size()) return 0;
    int count = 0;
    for (std::size_t i = 0; i + phrase.size() <= text.size();) {
        bool match = true;
        for (std::size_t k = 0; k < phrase.size(); ++k) {
            if (detail::lower(text[i + k]) != detail::lower(phrase[k])) {
                match = false;
                break;
            }
        }
        const bool left_ok = match && (i == 0 || !detail::is_word_char(text[i - 1]));
        const bool right_ok = match && (i + phrase.size() == text.size() ||
                                        !detail::is_word_char(text[i + phrase.size()]));
        if (match && left_ok && right_ok) {
            ++count;
            i += phrase.size();
        } else {
            ++i;
        }
    }
    return count;
}

}  // namespace persim

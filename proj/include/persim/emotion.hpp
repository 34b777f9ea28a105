#pragma once
// Seven-channel emotional state, each intensity in [0, 1].

#include "persim/core.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace persim {

inline constexpr std::array<const char*, 7> kEmotionNames = {
    "anxiety", "fear", "sadness", "anger", "shame", "guilt", "happiness"};
inline constexpr std::size_t kEmotionDims = 7;

struct EmotionVector {
    std::array<double, 7> intensities{};  // zero-initialized

    double& operator[](std::size_t i) { return intensities[i]; }
    double operator[](std::size_t i) const { return intensities[i]; }

    bool operator==(const EmotionVector&) const = default;

    static std::optional<std::size_t> index_of(std::string_view name) {
        for (std::size_t i = 0; i < kEmotionDims; ++i)
            if (name == kEmotionNames[i]) return i;
        return std::nullopt;
    }

    double get(std::string_view name) const {
        auto idx = index_of(name);
        if (!idx) throw SchemaError("unknown emotion \"" + std::string(name) + "\"");
        return intensities[*idx];
    }

    void set(std::string_view name, double v) {
        auto idx = index_of(name);
        if (!idx) throw SchemaError("unknown emotion \"" + std::string(name) + "\"");
        intensities[*idx] = v;
    }

    EmotionVector clamped() const {
        EmotionVector out = *this;
        for (double& v : out.intensities) v = clamp01(v);
        return out;
    }

    void validate(const std::string& where) const {
        for (std::size_t i = 0; i < kEmotionDims; ++i) {
            const double v = intensities[i];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw RangeError(where + ": emotion \"" + kEmotionNames[i] +
                                 "\" outside [0, 1]");
        }
    }

    json to_json() const {
        json j;
        for (std::size_t i = 0; i < kEmotionDims; ++i) j[kEmotionNames[i]] = intensities[i];
        return j;
    }

    static EmotionVector from_json(const json& j, const std::string& where) {
        reject_unknown_fields(
            j, std::vector<std::string>(kEmotionNames.begin(), kEmotionNames.end()), where);
        EmotionVector v;
        for (std::size_t i = 0; i < kEmotionDims; ++i)
            v.intensities[i] = require_number(j, kEmotionNames[i], where);
        v.validate(where);
        return v;
    }
};

}  // namespace persim

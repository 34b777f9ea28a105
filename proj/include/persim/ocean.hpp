#pragma once
// Big Five (OCEAN) trait vector on the 1-5 scale.

#include "persim/core.hpp"

#include <array>
#include <cmath>

namespace persim {

inline constexpr std::array<const char*, 5> kOceanNames = {
    "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};
inline constexpr std::array<char, 5> kOceanLetters = {'O', 'C', 'E', 'A', 'N'};
inline constexpr std::size_t kOceanDims = 5;

struct OceanVector {
    double openness = 3.0;
    double conscientiousness = 3.0;
    double extraversion = 3.0;
    double agreeableness = 3.0;
    double neuroticism = 3.0;

    double& operator[](std::size_t i) {
        switch (i) {
            case 0: return openness;
            case 1: return conscientiousness;
            case 2: return extraversion;
            case 3: return agreeableness;
            default: return neuroticism;
        }
    }
    double operator[](std::size_t i) const {
        return const_cast<OceanVector&>(*this)[i];
    }

    bool operator==(const OceanVector&) const = default;

    // Exactly five components, each finite and in [1, 5].
    void validate(const std::string& where) const {
        for (std::size_t i = 0; i < kOceanDims; ++i) {
            const double v = (*this)[i];
            if (!std::isfinite(v))
                throw RangeError(where + ": trait \"" + kOceanNames[i] + "\" is not finite");
            if (v < 1.0 || v > 5.0)
                throw RangeError(where + ": trait \"" + kOceanNames[i] + "\" = " +
                                 format_trait(v) + " outside [1, 5]");
        }
    }

    json to_json() const {
        json j;
        for (std::size_t i = 0; i < kOceanDims; ++i) j[kOceanNames[i]] = (*this)[i];
        return j;
    }

    static OceanVector from_json(const json& j, const std::string& where) {
        reject_unknown_fields(
            j, std::vector<std::string>(kOceanNames.begin(), kOceanNames.end()), where);
        OceanVector v;
        for (std::size_t i = 0; i < kOceanDims; ++i)
            v[i] = require_number(j, kOceanNames[i], where);
        v.validate(where);
        return v;
    }
};

// Euclidean distance over the five components.
inline double ocean_distance(const OceanVector& a, const OceanVector& b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < kOceanDims; ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

}  // namespace persim

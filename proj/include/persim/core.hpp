#pragma once
// Shared primitives: error taxonomy, timestamps, deterministic RNG, hashing,
// number formatting and strict-schema JSON helpers used by every module.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace persim {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Document / validation
class SyntaxError : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };
class UnknownRoleError : public Error { public: using Error::Error; };
class UnknownBeliefError : public Error { public: using Error::Error; };

// Storage
class FileNotFoundError : public Error { public: using Error::Error; };
class StorageError : public Error { public: using Error::Error; };
class UnknownAgentError : public Error { public: using Error::Error; };
class DuplicateIdError : public Error { public: using Error::Error; };
class EmptySessionError : public Error { public: using Error::Error; };

// Generation
class BackendError : public Error { public: using Error::Error; };
class BackendUnavailableError : public BackendError {
public:
    BackendUnavailableError(const std::string& msg, int attempts)
        : BackendError(msg), attempts(attempts) {}
    int attempts;
};
class BackendRejectedError : public BackendError {
public:
    BackendRejectedError(const std::string& msg, int status, std::string body_excerpt)
        : BackendError(msg), status(status), body_excerpt(std::move(body_excerpt)) {}
    int status;
    std::string body_excerpt;
};
class ContextOverflowError : public BackendError { public: using BackendError::BackendError; };
class ScorerFailureError : public BackendError { public: using BackendError::BackendError; };

// Workflows / experiment
class RosterSizeError : public Error { public: using Error::Error; };
class EmptyResponseError : public Error { public: using Error::Error; };
class DegenerateMatrixError : public Error { public: using Error::Error; };
class ZeroVarianceError : public Error { public: using Error::Error; };
class MixedConditionsError : public Error { public: using Error::Error; };
class MissingConditionError : public Error { public: using Error::Error; };
class MissingRunError : public Error { public: using Error::Error; };
class ChecksumError : public Error { public: using Error::Error; };
class IncompleteRunError : public Error {
public:
    IncompleteRunError(const std::string& msg, std::vector<std::string> missing)
        : Error(msg), missing_cells(std::move(missing)) {}
    std::vector<std::string> missing_cells;
};

// ---------------------------------------------------------------------------
// Time

// Unix milliseconds.
using Millis = std::int64_t;

inline constexpr double kMillisPerDay = 86'400'000.0;

inline Millis wall_clock_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// "YYYY-MM-DD HH:MM:SS" in UTC, locale/timezone independent (civil-days
// algorithm so output is identical on every platform).
inline std::string format_timestamp(Millis ms) {
    std::int64_t secs = ms / 1000;
    if (ms < 0 && ms % 1000 != 0) --secs;
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) { rem += 86400; --days; }
    const int hh = static_cast<int>(rem / 3600);
    const int mm = static_cast<int>((rem % 3600) / 60);
    const int ss = static_cast<int>(rem % 60);
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld %02d:%02d:%02d",
                  static_cast<long long>(m <= 2 ? y + 1 : y),
                  static_cast<long long>(m), static_cast<long long>(d), hh, mm, ss);
    return buf;
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a 64): config hashes, per-record seed derivation, checksums.

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<unsigned char>(v >> (8 * i));
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 is fully specified by the standard; uniform
// and gaussian draws use explicit bit manipulation / Box-Muller so sequences
// are identical across standard libraries and platforms.

class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Standard normal via Box-Muller (no cached spare: draw count stays
    // predictable for seeding tests).
    double gaussian() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Numeric helpers

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
inline double clamp_trait(double v) { return std::clamp(v, 1.0, 5.0); }

inline bool nearly_equal(double a, double b, double tol = 1e-12) {
    return std::fabs(a - b) <= tol;
}

// Fixed-precision decimal rendering, always '.'-separated.
inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// Shortest fixed-point rendering that round-trips, with at least one decimal
// place (profile trait serialization contract).
inline std::string format_trait(double v) {
    for (int p = 1; p <= 17; ++p) {
        std::string s = format_fixed(v, p);
        if (std::strtod(s.c_str(), nullptr) == v) return s;
    }
    return format_fixed(v, 17);
}

inline std::string format_percent(double fraction, int decimals = 1) {
    return format_fixed(fraction * 100.0, decimals) + "%";
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw StorageError("read failed: " + path.string());
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write file: " + path.string());
    out << text;
    out.flush();
    if (!out) throw StorageError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Strict-schema JSON helpers. Loaders reject unknown fields and name the
// offending field in every diagnostic.

inline json parse_json(const std::string& text, const std::string& where) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SyntaxError(where + ": malformed JSON document");
    return j;
}

inline const json& require_field(const json& obj, const std::string& key,
                                 const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaError(where + ": missing required field \"" + key + "\"");
    return obj.at(key);
}

inline void reject_unknown_fields(const json& obj,
                                  const std::vector<std::string>& allowed,
                                  const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw SchemaError(where + ": unknown field \"" + it.key() + "\"");
    }
}

inline std::string require_string(const json& obj, const std::string& key,
                                  const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_string()) throw SchemaError(where + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

inline double require_number(const json& obj, const std::string& key,
                             const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_number()) throw SchemaError(where + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

inline std::int64_t require_integer(const json& obj, const std::string& key,
                                    const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_number_integer())
        throw SchemaError(where + ": field \"" + key + "\" must be an integer");
    return v.get<std::int64_t>();
}

inline const json& require_array(const json& obj, const std::string& key,
                                 const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_array()) throw SchemaError(where + ": field \"" + key + "\" must be an array");
    return v;
}

inline const json& require_object(const json& obj, const std::string& key,
                                  const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_object()) throw SchemaError(where + ": field \"" + key + "\" must be an object");
    return v;
}

inline std::vector<std::string> string_list(const json& arr, const std::string& where) {
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw SchemaError(where + ": expected string entries");
        out.push_back(v.get<std::string>());
    }
    return out;
}

// Canonical document form: 2-space indent, insertion-ordered keys, trailing
// newline. Equal values serialize to equal bytes.
inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

// Whitespace-delimited word count (the scripted token-accounting contract).
inline int count_tokens(std::string_view text) {
    int count = 0;
    bool in_word = false;
    for (char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++count;
        in_word = !ws;
    }
    return count;
}

}  // namespace persim

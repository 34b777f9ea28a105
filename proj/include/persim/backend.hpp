#pragma once
// Generation contract: configuration, context assembly with a fixed block
// order (persona -> memory -> ccd -> scenario), and the deterministic
// scripted backend used for offline desk-scale experiments. The HTTP backend
// lives in http_backend.hpp.

#include "persim/core.hpp"
#include "persim/lexicon.hpp"
#include "persim/ocean.hpp"
#include "persim/profile.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace persim {

// ---------------------------------------------------------------------------

struct GenerationConfig {
    std::string model_name = "qwen2.5-14b";
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 512;
    int context_window = 8192;
    std::string endpoint_url;  // empty = not configured
    std::chrono::milliseconds timeout{30000};
    std::optional<std::uint64_t> seed;
    int max_retries = 3;  // connection errors / timeouts only
    std::chrono::milliseconds retry_backoff{500};

    bool operator==(const GenerationConfig&) const = default;

    void validate() const {
        if (!(temperature >= 0.0))
            throw RangeError("generation config: temperature must be >= 0");
        if (!(top_p > 0.0) || top_p > 1.0)
            throw RangeError("generation config: top_p must be in (0, 1]");
        if (max_tokens < 1) throw RangeError("generation config: max_tokens must be >= 1");
        if (max_tokens > context_window)
            throw RangeError("generation config: max_tokens exceeds context_window");
        if (max_retries < 1) throw RangeError("generation config: max_retries must be >= 1");
    }

    json to_json() const {
        json j;
        j["model_name"] = model_name;
        j["temperature"] = temperature;
        j["top_p"] = top_p;
        j["max_tokens"] = max_tokens;
        j["context_window"] = context_window;
        j["endpoint_url"] = endpoint_url;
        j["timeout_ms"] = static_cast<std::int64_t>(timeout.count());
        if (seed) j["seed"] = *seed;
        j["max_retries"] = max_retries;
        j["retry_backoff_ms"] = static_cast<std::int64_t>(retry_backoff.count());
        return j;
    }

    static GenerationConfig from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j,
                              {"model_name", "temperature", "top_p", "max_tokens",
                               "context_window", "endpoint_url", "timeout_ms", "seed",
                               "max_retries", "retry_backoff_ms"},
                              where);
        GenerationConfig c;
        if (j.contains("model_name")) c.model_name = require_string(j, "model_name", where);
        if (j.contains("temperature")) c.temperature = require_number(j, "temperature", where);
        if (j.contains("top_p")) c.top_p = require_number(j, "top_p", where);
        if (j.contains("max_tokens"))
            c.max_tokens = static_cast<int>(require_integer(j, "max_tokens", where));
        if (j.contains("context_window"))
            c.context_window = static_cast<int>(require_integer(j, "context_window", where));
        if (j.contains("endpoint_url")) c.endpoint_url = require_string(j, "endpoint_url", where);
        if (j.contains("timeout_ms"))
            c.timeout = std::chrono::milliseconds(require_integer(j, "timeout_ms", where));
        if (j.contains("seed"))
            c.seed = static_cast<std::uint64_t>(require_integer(j, "seed", where));
        if (j.contains("max_retries"))
            c.max_retries = static_cast<int>(require_integer(j, "max_retries", where));
        if (j.contains("retry_backoff_ms"))
            c.retry_backoff =
                std::chrono::milliseconds(require_integer(j, "retry_backoff_ms", where));
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------

enum class BlockKind { persona, memory, ccd, scenario };

inline const char* block_marker(BlockKind k) {
    switch (k) {
        case BlockKind::persona: return "[PERSONA]";
        case BlockKind::memory: return "[MEMORY]";
        case BlockKind::ccd: return "[CCD]";
        case BlockKind::scenario: return "[SCENARIO]";
    }
    return "";
}

struct PromptBlock {
    BlockKind kind;
    std::string text;

    bool operator==(const PromptBlock&) const = default;
};

struct ChatTurn {
    std::string role;  // "user" or "assistant"
    std::string text;

    bool operator==(const ChatTurn&) const = default;
};

// Identifies which administration a request belongs to; the scripted backend
// keys its noise draws on this so administrations are order-independent.
struct RequestProvenance {
    std::string agent_id;
    std::string scenario_id;
    int repetition = 0;

    bool operator==(const RequestProvenance&) const = default;
};

struct GenerationRequest {
    std::vector<PromptBlock> blocks;  // fixed order persona(,memory)(,ccd),scenario
    std::vector<ChatTurn> history;
    GenerationConfig config;
    RequestProvenance provenance;

    bool has_block(BlockKind k) const {
        for (const auto& b : blocks)
            if (b.kind == k) return true;
        return false;
    }

    const PromptBlock* find_block(BlockKind k) const {
        for (const auto& b : blocks)
            if (b.kind == k) return &b;
        return nullptr;
    }

    int prompt_token_count() const {
        int total = 0;
        for (const auto& b : blocks) total += count_tokens(b.text);
        for (const auto& t : history) total += count_tokens(t.text);
        return total;
    }

    // OpenAI-compatible chat payload. Persona/memory/ccd blocks form the
    // system message, the scenario block is the first user message, history
    // follows in order.
    json to_wire() const {
        json messages = json::array();
        std::string system_text;
        for (const auto& b : blocks) {
            if (b.kind == BlockKind::scenario) continue;
            if (!system_text.empty()) system_text += "\n\n";
            system_text += b.text;
        }
        if (!system_text.empty()) {
            json m;
            m["role"] = "system";
            m["content"] = system_text;
            messages.push_back(std::move(m));
        }
        if (const PromptBlock* scenario = find_block(BlockKind::scenario)) {
            json m;
            m["role"] = "user";
            m["content"] = scenario->text;
            messages.push_back(std::move(m));
        }
        for (const auto& t : history) {
            json m;
            m["role"] = t.role;
            m["content"] = t.text;
            messages.push_back(std::move(m));
        }
        json j;
        j["model"] = config.model_name;
        j["messages"] = std::move(messages);
        j["temperature"] = config.temperature;
        j["top_p"] = config.top_p;
        j["max_tokens"] = config.max_tokens;
        j["stream"] = false;
        if (config.seed) j["seed"] = *config.seed;
        return j;
    }
};

struct GenerationResponse {
    std::string text;
    int token_count = 0;
    double latency_ms = 0.0;
    std::string backend_id;

    bool operator==(const GenerationResponse&) const = default;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Context assembly. Blocks keep the fixed order; on overflow the oldest
// history turns are dropped first; the scenario prompt is never dropped.

inline GenerationRequest assemble_context(const std::string& persona_block,
                                          const std::optional<std::string>& memory_block,
                                          const std::optional<std::string>& ccd_block,
                                          const std::string& scenario_prompt,
                                          std::vector<ChatTurn> history,
                                          const GenerationConfig& config,
                                          RequestProvenance provenance = {}) {
    if (persona_block.empty())
        throw InvalidArgument("assemble_context: persona block must be non-empty");
    config.validate();
    GenerationRequest req;
    req.blocks.push_back({BlockKind::persona, persona_block});
    if (memory_block) req.blocks.push_back({BlockKind::memory, *memory_block});
    if (ccd_block) req.blocks.push_back({BlockKind::ccd, *ccd_block});
    req.blocks.push_back({BlockKind::scenario, scenario_prompt});
    req.history = std::move(history);
    req.config = config;
    req.provenance = std::move(provenance);

    while (req.prompt_token_count() > config.context_window && !req.history.empty())
        req.history.erase(req.history.begin());
    if (req.prompt_token_count() > config.context_window)
        throw ContextOverflowError("assemble_context: prompt blocks exceed context window (" +
                                   std::to_string(req.prompt_token_count()) + " > " +
                                   std::to_string(config.context_window) + " tokens)");
    return req;
}

// ---------------------------------------------------------------------------
// Scripted backend: a pure function of (profile, sigma, scenario, repetition,
// seed). Each trait is expressed as a clamped gaussian around the profile
// value; the response text encodes the expressed value with indicator
// phrases (high phrases when t >= 3, low otherwise, round(2*|t-3|) of them)
// and carries a machine-readable trailer for calibration tests.

struct ExpressedTraits {
    OceanVector values;
};

inline std::uint64_t derive_call_seed(const std::string& agent_id,
                                      const std::string& scenario_id, int repetition,
                                      std::uint64_t seed) {
    std::uint64_t h = fnv1a64(agent_id);
    h = fnv1a64("|", h);
    h = fnv1a64(scenario_id, h);
    h = fnv1a64("|", h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(repetition), h);
    h = fnv1a64_u64(seed, h);
    return h;
}

inline GenerationResponse scripted_respond(const AgentProfile& profile,
                                           const IndicatorLexicon& lexicon, double sigma,
                                           const std::string& scenario_id, int repetition,
                                           std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw RangeError("scripted_respond: sigma must be >= 0");
    DeterministicRng rng(derive_call_seed(profile.agent_id, scenario_id, repetition, seed));

    OceanVector expressed;
    for (std::size_t d = 0; d < kOceanDims; ++d)
        expressed[d] = clamp_trait(profile.personality[d] + sigma * rng.gaussian());

    std::ostringstream text;
    text << "Speaking as " << profile.demographics.name << " about " << scenario_id << " (take "
         << repetition << "):";
    for (std::size_t d = 0; d < kOceanDims; ++d) {
        const double t = expressed[d];
        const bool high_side = t >= 3.0;
        const auto& phrases = high_side ? lexicon.high[d] : lexicon.low[d];
        const int n = static_cast<int>(std::lround(2.0 * std::fabs(t - 3.0)));
        for (int i = 0; i < n; ++i)
            text << " I am " << phrases[static_cast<std::size_t>(i) % phrases.size()] << ".";
    }
    text << "\n[[expressed";
    for (std::size_t d = 0; d < kOceanDims; ++d)
        text << " " << kOceanLetters[d] << "=" << format_fixed(expressed[d], 3);
    text << "]]";

    GenerationResponse resp;
    resp.text = text.str();
    resp.token_count = count_tokens(resp.text);
    resp.latency_ms = 900.0 + std::floor(rng.uniform() * 600.0);  // synthetic, deterministic
    resp.backend_id = "scripted";
    return resp;
}

// Parses the calibration trailer back out of a scripted response.
inline std::optional<OceanVector> parse_expressed_trailer(const std::string& text) {
    const auto pos = text.rfind("[[expressed");
    if (pos == std::string::npos) return std::nullopt;
    OceanVector v;
    const char* p = text.c_str() + pos;
    for (std::size_t d = 0; d < kOceanDims; ++d) {
        const std::string key = std::string(1, kOceanLetters[d]) + "=";
        const char* hit = std::strstr(p, key.c_str());
        if (!hit) return std::nullopt;
        v[d] = std::strtod(hit + key.size(), nullptr);
    }
    return v;
}

class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(IndicatorLexicon lexicon, double sigma, std::uint64_t seed)
        : lexicon_(std::move(lexicon)), sigma_(sigma), seed_(seed) {
        if (!(sigma_ >= 0.0)) throw RangeError("scripted backend: sigma must be >= 0");
        lexicon_.validate();
    }

    void register_profile(const AgentProfile& profile) {
        profiles_.insert_or_assign(profile.agent_id, profile);
    }

    double sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }

    GenerationResponse generate(const GenerationRequest& request) override {
        auto it = profiles_.find(request.provenance.agent_id);
        if (it == profiles_.end())
            throw BackendError("scripted backend: unregistered agent \"" +
                               request.provenance.agent_id + "\"");
        return scripted_respond(it->second, lexicon_, sigma_, request.provenance.scenario_id,
                                request.provenance.repetition, seed_);
    }

    std::string id() const override { return "scripted"; }

private:
    IndicatorLexicon lexicon_;
    double sigma_;
    std::uint64_t seed_;
    std::map<std::string, AgentProfile> profiles_;
};

}  // namespace persim

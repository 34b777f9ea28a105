#pragma once
// Ablation conditions and their pipeline feature flags. The four conditions
// nest monotonically: baseline adds nothing, plus_memory enables memory,
// plus_ccd enables memory and the cognitive model, plus_lora additionally
// swaps in the fine-tuned model endpoint.

#include "persim/backend.hpp"
#include "persim/core.hpp"

#include <array>
#include <string>

namespace persim {

enum class ConditionId { baseline, plus_memory, plus_ccd, plus_lora };

inline constexpr std::array<ConditionId, 4> kAllConditions = {
    ConditionId::baseline, ConditionId::plus_memory, ConditionId::plus_ccd,
    ConditionId::plus_lora};

inline const char* to_string(ConditionId c) {
    switch (c) {
        case ConditionId::baseline: return "baseline";
        case ConditionId::plus_memory: return "plus_memory";
        case ConditionId::plus_ccd: return "plus_ccd";
        case ConditionId::plus_lora: return "plus_lora";
    }
    return "baseline";
}

// Display names used in report tables.
inline const char* condition_label(ConditionId c) {
    switch (c) {
        case ConditionId::baseline: return "Baseline";
        case ConditionId::plus_memory: return "+Memory";
        case ConditionId::plus_ccd: return "+CCD";
        case ConditionId::plus_lora: return "+LoRA";
    }
    return "Baseline";
}

inline ConditionId condition_from_string(const std::string& s, const std::string& where) {
    for (ConditionId c : kAllConditions)
        if (s == to_string(c)) return c;
    throw SchemaError(where + ": unknown condition \"" + s + "\"");
}

struct PipelineConfig {
    ConditionId id = ConditionId::baseline;
    bool memory_enabled = false;
    bool ccd_enabled = false;
    GenerationConfig generation;  // plus_lora swaps model_name / endpoint
    std::string scorer_id = "lexicon";
    std::uint64_t seed = 0;
    double scripted_sigma = 0.0;  // scripted-mode fidelity knob

    void validate(const std::string& base_model_name) const {
        switch (id) {
            case ConditionId::baseline:
                if (memory_enabled || ccd_enabled)
                    throw SchemaError("baseline condition must not enable memory or ccd");
                break;
            case ConditionId::plus_memory:
                if (!memory_enabled || ccd_enabled)
                    throw SchemaError("plus_memory condition must enable memory only");
                break;
            case ConditionId::plus_ccd:
                if (!memory_enabled || !ccd_enabled)
                    throw SchemaError("plus_ccd condition must enable memory and ccd");
                break;
            case ConditionId::plus_lora:
                if (!memory_enabled || !ccd_enabled)
                    throw SchemaError("plus_lora condition must enable memory and ccd");
                if (generation.model_name == base_model_name)
                    throw SchemaError("plus_lora condition must select an alternate model");
                break;
        }
    }
};

// Pure lookup honoring the nesting invariant. The +LoRA condition is
// expressed purely as a different model selection; no training happens here.
inline PipelineConfig condition_flags(ConditionId c, const GenerationConfig& base_model,
                                      const GenerationConfig& lora_model) {
    PipelineConfig p;
    p.id = c;
    switch (c) {
        case ConditionId::baseline:
            p.generation = base_model;
            break;
        case ConditionId::plus_memory:
            p.memory_enabled = true;
            p.generation = base_model;
            break;
        case ConditionId::plus_ccd:
            p.memory_enabled = true;
            p.ccd_enabled = true;
            p.generation = base_model;
            break;
        case ConditionId::plus_lora:
            p.memory_enabled = true;
            p.ccd_enabled = true;
            p.generation = lora_model;
            break;
    }
    p.validate(base_model.model_name);
    return p;
}

inline PipelineConfig condition_flags(ConditionId c) {
    GenerationConfig base;
    GenerationConfig lora = base;
    lora.model_name = base.model_name + "-lora";
    return condition_flags(c, base, lora);
}

}  // namespace persim

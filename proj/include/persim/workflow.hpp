#pragma once
// The four interaction patterns, implemented as deterministic schedulers over
// agents and a generation backend: dual-agent dialogue, event-driven social
// simulation, protocolized multi-round intervention, and single-shot
// assessment administration. Timestamps inside workflows are logical turn
// counters so scripted runs are byte-identical.

#include "persim/backend.hpp"
#include "persim/ccd.hpp"
#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/memory.hpp"
#include "persim/profile.hpp"
#include "persim/record.hpp"
#include "persim/scenario.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace persim {

enum class WorkflowType { dual_dialogue, social_simulation, intervention_protocol, assessment_protocol };

inline const char* to_string(WorkflowType t) {
    switch (t) {
        case WorkflowType::dual_dialogue: return "dual_dialogue";
        case WorkflowType::social_simulation: return "social_simulation";
        case WorkflowType::intervention_protocol: return "intervention_protocol";
        case WorkflowType::assessment_protocol: return "assessment_protocol";
    }
    return "dual_dialogue";
}

struct TranscriptTurn {
    std::string speaker;
    std::string text;
    Millis timestamp = 0;
    std::map<std::string, std::string> metadata;

    bool operator==(const TranscriptTurn&) const = default;
};

struct Transcript {
    WorkflowType workflow_type = WorkflowType::dual_dialogue;
    std::string session_id;
    std::vector<TranscriptTurn> turns;
    bool complete = true;

    bool operator==(const Transcript&) const = default;

    json to_json() const {
        json j;
        j["workflow_type"] = to_string(workflow_type);
        j["session_id"] = session_id;
        j["complete"] = complete;
        json ts = json::array();
        for (const auto& t : turns) {
            json e;
            e["speaker"] = t.speaker;
            e["text"] = t.text;
            e["timestamp"] = t.timestamp;
            e["metadata"] = t.metadata;
            ts.push_back(std::move(e));
        }
        j["turns"] = std::move(ts);
        return j;
    }

    // Line-delimited export, one JSON record per turn.
    std::string to_jsonl() const {
        std::ostringstream out;
        for (const auto& t : turns) {
            json e;
            e["session_id"] = session_id;
            e["workflow_type"] = to_string(workflow_type);
            e["speaker"] = t.speaker;
            e["text"] = t.text;
            e["timestamp"] = t.timestamp;
            out << e.dump() << "\n";
        }
        return out.str();
    }
};

// Backend failure mid-workflow: carries the partial transcript (marked
// incomplete) and the turn index at failure.
class WorkflowError : public Error {
public:
    WorkflowError(const std::string& msg, Transcript partial, std::size_t turn_index)
        : Error(msg), partial(std::move(partial)), turn_index(turn_index) {}
    Transcript partial;
    std::size_t turn_index;
};

struct RoundSpec {
    std::string goal;
    std::string opening_prompt;
    int max_exchanges = 3;  // one exchange = therapist turn + older-adult reply
};

struct InterventionProtocol {
    std::vector<RoundSpec> rounds;

    void validate() const {
        if (rounds.empty()) throw SchemaError("intervention protocol: needs at least one round");
        for (const auto& r : rounds)
            if (r.max_exchanges < 1)
                throw SchemaError("intervention protocol: each round needs >= 1 exchange");
    }

    static InterventionProtocol default_cbt() {
        auto mk = [](const char* goal, const char* prompt) {
            return RoundSpec{goal, prompt, 3};
        };
        InterventionProtocol p;
        p.rounds = {
            mk("Build rapport and set the agenda",
               "Thank you for meeting with me today. Before we begin, how have things been for "
               "you lately, and what would you like to focus on together?"),
            mk("Identify situations and automatic thoughts",
               "Let's look at a recent situation that upset you. What went through your mind in "
               "that moment?"),
            mk("Examine the evidence for and against the thought",
               "Taking the thought we identified, what makes it feel true, and is there anything "
               "that does not fit it?"),
            mk("Develop a balanced alternative perspective",
               "If a good friend were in the same situation, what would you say to them? How "
               "might we restate the thought in a fairer way?"),
            mk("Plan small behavioral steps",
               "What is one small activity this week that would move you toward the things that "
               "matter to you?"),
            mk("Review progress and plan for maintenance",
               "Looking back over our sessions, what has changed, and how will you keep using "
               "what worked when things get hard?"),
        };
        return p;
    }

    static InterventionProtocol from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j, {"rounds"}, where);
        InterventionProtocol p;
        for (const auto& r : require_array(j, "rounds", where)) {
            reject_unknown_fields(r, {"goal", "opening_prompt", "max_exchanges"}, where);
            RoundSpec spec;
            spec.goal = require_string(r, "goal", where);
            spec.opening_prompt = require_string(r, "opening_prompt", where);
            spec.max_exchanges = static_cast<int>(require_integer(r, "max_exchanges", where));
            p.rounds.push_back(std::move(spec));
        }
        p.validate();
        return p;
    }
};

struct SocialEvent {
    std::string description;
    std::vector<std::string> addressed;  // agent ids, responding in roster order
};

inline std::vector<SocialEvent> event_schedule_from_json(const json& j,
                                                         const std::string& where) {
    reject_unknown_fields(j, {"events"}, where);
    std::vector<SocialEvent> out;
    for (const auto& e : require_array(j, "events", where)) {
        reject_unknown_fields(e, {"description", "addressed"}, where);
        SocialEvent ev;
        ev.description = require_string(e, "description", where);
        ev.addressed = string_list(require_array(e, "addressed", where), where + ".addressed");
        if (ev.addressed.empty())
            throw SchemaError(where + ": event \"" + ev.description +
                              "\" must address at least one agent");
        out.push_back(std::move(ev));
    }
    return out;
}

inline std::vector<SocialEvent> load_event_schedule_file(const std::filesystem::path& path) {
    return event_schedule_from_json(parse_json(read_text_file(path), path.string()),
                                    path.string());
}

inline InterventionProtocol load_protocol_file(const std::filesystem::path& path) {
    return InterventionProtocol::from_json(parse_json(read_text_file(path), path.string()),
                                           path.string());
}

// ---------------------------------------------------------------------------

// Abstractive summarizer backed by a generation backend; the extractive
// default in memory.hpp stays the offline path.
class BackendSummarizer final : public Summarizer {
public:
    BackendSummarizer(Backend& backend, GenerationConfig config, std::string persona_block)
        : backend_(backend), config_(std::move(config)), persona_block_(std::move(persona_block)) {}

    DialogueSummary summarize(const ShortTermMemory& stm, const SessionInfo& info) override {
        if (stm.turns().empty())
            throw EmptySessionError("summarize_session: short-term memory has no turns");
        std::vector<ChatTurn> history;
        for (const auto& t : stm.turns()) history.push_back({"user", t.text});
        GenerationRequest req = assemble_context(
            persona_block_, std::nullopt, std::nullopt,
            "[SCENARIO]\nSummarize the conversation above in a few sentences, keeping the "
            "clinically salient details.\n[/SCENARIO]",
            std::move(history), config_, {info.agent_id, info.session_id, 0});
        const GenerationResponse resp = backend_.generate(req);

        DialogueSummary s;
        s.session_id = info.session_id;
        s.agent_id = info.agent_id;
        s.summary = resp.text;
        std::set<std::string> seen;
        for (const auto& tag : info.tags_seen)
            if (seen.insert(tag).second) s.key_topics.push_back(tag);
        s.emotional_trajectory = stm.emotional_trail();
        s.created_at = info.created_at;
        return s;
    }

    std::string id() const override { return "backend:" + backend_.id(); }

private:
    Backend& backend_;
    GenerationConfig config_;
    std::string persona_block_;
};

// Conversational state for one participant.
struct AgentRuntime {
    AgentProfile profile;
    std::optional<CcdModel> ccd;
    ShortTermMemory stm{100};

    explicit AgentRuntime(AgentProfile p, std::optional<CcdModel> c = std::nullopt)
        : profile(std::move(p)), ccd(std::move(c)) {}
};

struct WorkflowOptions {
    bool memory_enabled = false;
    bool ccd_enabled = false;
    std::set<std::string> tags;      // situation tags for CCD / retrieval
    int retrieval_k = kDefaultRetrievalK;
    double recency_lambda = kDefaultRecencyLambda;
    double trigger_intensity = 0.7;
    double turn_importance = 0.5;
    Millis now = 0;                  // logical reference time
    GenerationConfig generation;
};

class WorkflowEngine {
public:
    WorkflowEngine(Backend& backend, MemoryStore* store, WorkflowOptions opts)
        : backend_(backend), store_(store), opts_(std::move(opts)) {
        if (opts_.memory_enabled && !store_)
            throw InvalidArgument("workflow engine: memory enabled but no store provided");
    }

    const WorkflowOptions& options() const { return opts_; }

    // Strict alternation starting with agent_a; stops at max_turns or on an
    // empty generation.
    Transcript run_dual_dialogue(AgentRuntime& agent_a, AgentRuntime& agent_b,
                                 const std::string& opening_prompt, int max_turns,
                                 const std::string& session_id = "dialogue") {
        if (agent_a.profile.agent_id == agent_b.profile.agent_id)
            throw InvalidArgument("dual dialogue: agents must be distinct");
        if (max_turns < 1) throw InvalidArgument("dual dialogue: max_turns must be >= 1");
        Transcript t;
        t.workflow_type = WorkflowType::dual_dialogue;
        t.session_id = session_id;
        for (int i = 0; i < max_turns; ++i) {
            AgentRuntime& speaker = (i % 2 == 0) ? agent_a : agent_b;
            const std::string trigger_text =
                t.turns.empty() ? opening_prompt : t.turns.back().text;
            GenerationResponse resp;
            try {
                resp = speak(speaker, opening_prompt, trigger_text, t, i);
            } catch (const BackendError& e) {
                t.complete = false;
                throw WorkflowError("dual dialogue failed at turn " + std::to_string(i) + ": " +
                                        e.what(),
                                    t, static_cast<std::size_t>(i));
            }
            if (resp.text.empty()) break;
            append_response(t, speaker, resp, i);
            share_turn(t.turns.back(), {&agent_a, &agent_b});
        }
        return t;
    }

    // Events dispatched in schedule order; each addressed agent responds once
    // per event in roster order; earlier responses are visible to later
    // responders within the same event.
    Transcript run_social_simulation(std::vector<AgentRuntime*> roster,
                                     const std::vector<SocialEvent>& schedule,
                                     const std::string& session_id = "social") {
        if (roster.size() < 3 || roster.size() > 6)
            throw RosterSizeError("social simulation: roster must have 3-6 agents, got " +
                                  std::to_string(roster.size()));
        if (schedule.empty())
            throw InvalidArgument("social simulation: event schedule must be non-empty");
        for (const auto& ev : schedule)
            for (const auto& id : ev.addressed)
                if (!find_agent(roster, id))
                    throw UnknownAgentError("social simulation: event addresses unknown agent \"" +
                                            id + "\"");
        Transcript t;
        t.workflow_type = WorkflowType::social_simulation;
        t.session_id = session_id;
        int turn_index = 0;
        for (const auto& ev : schedule) {
            for (AgentRuntime* agent : roster) {
                if (std::find(ev.addressed.begin(), ev.addressed.end(),
                              agent->profile.agent_id) == ev.addressed.end())
                    continue;
                GenerationResponse resp;
                try {
                    resp = speak(*agent, ev.description, ev.description, t, turn_index);
                } catch (const BackendError& e) {
                    t.complete = false;
                    throw WorkflowError("social simulation failed at turn " +
                                            std::to_string(turn_index) + ": " + e.what(),
                                        t, static_cast<std::size_t>(turn_index));
                }
                append_response(t, *agent, resp, turn_index);
                t.turns.back().metadata["event"] = ev.description;
                std::vector<AgentRuntime*> all(roster.begin(), roster.end());
                share_turn(t.turns.back(), all);
                ++turn_index;
            }
        }
        return t;
    }

    // Protocolized rounds. Each round opens with the therapist's round prompt
    // (the first exchange's therapist turn); after every round the older
    // adult's session summary is persisted so later rounds can retrieve it.
    std::vector<Transcript> run_intervention(AgentRuntime& older_adult, AgentRuntime& therapist,
                                             const InterventionProtocol& protocol,
                                             const std::string& session_id = "intervention") {
        protocol.validate();
        if (!store_)
            throw InvalidArgument("intervention workflow: requires a long-term memory store");
        store_->register_agent(older_adult.profile.agent_id);
        std::vector<Transcript> rounds;
        ExtractiveSummarizer summarizer;
        for (std::size_t r = 0; r < protocol.rounds.size(); ++r) {
            const RoundSpec& spec = protocol.rounds[r];
            Transcript t;
            t.workflow_type = WorkflowType::intervention_protocol;
            t.session_id = session_id + "_round" + std::to_string(r + 1);
            int turn_index = 0;
            for (int ex = 0; ex < spec.max_exchanges; ++ex) {
                // Therapist side: scripted opening for the first exchange,
                // generated afterwards.
                GenerationResponse ther;
                if (ex == 0) {
                    ther.text = spec.opening_prompt;
                    ther.backend_id = "protocol";
                    ther.token_count = count_tokens(ther.text);
                } else {
                    try {
                        ther = speak(therapist, spec.goal,
                                     t.turns.empty() ? spec.opening_prompt : t.turns.back().text,
                                     t, turn_index);
                    } catch (const BackendError& e) {
                        t.complete = false;
                        rounds.push_back(t);
                        throw WorkflowError("intervention round " + std::to_string(r + 1) +
                                                " failed: " + e.what(),
                                            rounds.back(), static_cast<std::size_t>(turn_index));
                    }
                }
                if (ther.text.empty()) break;
                append_response(t, therapist, ther, turn_index);
                share_turn(t.turns.back(), {&older_adult, &therapist});
                ++turn_index;

                GenerationResponse reply;
                try {
                    reply = speak(older_adult, spec.goal, t.turns.back().text, t, turn_index);
                } catch (const BackendError& e) {
                    t.complete = false;
                    rounds.push_back(t);
                    throw WorkflowError("intervention round " + std::to_string(r + 1) +
                                            " failed: " + e.what(),
                                        rounds.back(), static_cast<std::size_t>(turn_index));
                }
                if (reply.text.empty()) break;
                append_response(t, older_adult, reply, turn_index);
                share_turn(t.turns.back(), {&older_adult, &therapist});
                ++turn_index;
            }
            rounds.push_back(t);

            SessionInfo info;
            info.session_id = t.session_id;
            info.agent_id = older_adult.profile.agent_id;
            info.tags_seen.assign(opts_.tags.begin(), opts_.tags.end());
            info.created_at = opts_.now + static_cast<Millis>(r + 1);
            store_->store_summary(summarize_session(older_adult.stm, summarizer, info));
        }
        return rounds;
    }

    // One single-shot administration with full provenance. Leaves the agent
    // runtime untouched so administrations stay mutually independent.
    ResponseRecord run_assessment(const AgentRuntime& agent, const Scenario& scenario,
                                  int repetition, const PipelineConfig& condition,
                                  std::uint64_t derived_seed) {
        scenario.validate();
        GenerationConfig config = condition.generation;
        config.seed = derived_seed;

        std::optional<std::string> memory_block;
        if (condition.memory_enabled && store_)
            memory_block = render_memory_block(store_->retrieve_context(
                agent.profile.agent_id, scenario.tags, opts_.now, opts_.retrieval_k,
                opts_.recency_lambda));
        std::optional<std::string> ccd_block;
        if (condition.ccd_enabled && agent.ccd) {
            SituationTrigger trigger{scenario.prompt_text, scenario.tags,
                                     opts_.trigger_intensity, {}};
            const AppraisalOutcome outcome = appraise(*agent.ccd, trigger, EmotionVector{});
            ccd_block = render_ccd_block(*agent.ccd, outcome);
        }
        GenerationRequest req = assemble_context(
            render_persona_block(agent.profile), memory_block, ccd_block,
            "[SCENARIO]\n" + scenario.prompt_text + "\n[/SCENARIO]", {}, config,
            {agent.profile.agent_id, scenario.scenario_id, repetition});
        const GenerationResponse resp = backend_.generate(req);

        ResponseRecord rec;
        rec.agent_id = agent.profile.agent_id;
        rec.scenario_id = scenario.scenario_id;
        rec.repetition = repetition;
        rec.condition = condition.id;
        rec.response_text = resp.text;
        rec.latency_ms = resp.latency_ms;
        rec.token_count = resp.token_count;
        rec.seed = derived_seed;
        rec.created_at = opts_.now;
        rec.backend_id = resp.backend_id;
        return rec;
    }

private:
    static AgentRuntime* find_agent(const std::vector<AgentRuntime*>& roster,
                                    const std::string& id) {
        for (AgentRuntime* a : roster)
            if (a->profile.agent_id == id) return a;
        return nullptr;
    }

    std::set<std::string> effective_tags() const {
        if (!opts_.tags.empty()) return opts_.tags;
        return {"conversation"};
    }

    // Assemble the speaker's view and generate one utterance.
    GenerationResponse speak(AgentRuntime& speaker, const std::string& standing_prompt,
                             const std::string& trigger_text, const Transcript& t,
                             int turn_index) {
        std::optional<std::string> memory_block;
        if (opts_.memory_enabled && store_ && store_->has_agent(speaker.profile.agent_id))
            memory_block = render_memory_block(
                store_->retrieve_context(speaker.profile.agent_id, effective_tags(), opts_.now,
                                         opts_.retrieval_k, opts_.recency_lambda));
        std::optional<std::string> ccd_block;
        if (opts_.ccd_enabled && speaker.ccd) {
            SituationTrigger trigger{trigger_text, effective_tags(), opts_.trigger_intensity, {}};
            const AppraisalOutcome outcome =
                appraise(*speaker.ccd, trigger, speaker.stm.emotional_state());
            speaker.stm.set_emotional_state(outcome.emotions);
            std::vector<std::string> thoughts;
            for (const auto& th : outcome.automatic_thoughts) thoughts.push_back(th.statement);
            speaker.stm.set_active_thoughts(std::move(thoughts));
            ccd_block = render_ccd_block(*speaker.ccd, outcome);
        }
        std::vector<ChatTurn> history;
        for (const auto& turn : t.turns)
            history.push_back(
                {turn.speaker == speaker.profile.agent_id ? "assistant" : "user", turn.text});
        GenerationRequest req = assemble_context(
            render_persona_block(speaker.profile), memory_block, ccd_block,
            "[SCENARIO]\n" + standing_prompt + "\n[/SCENARIO]", std::move(history),
            opts_.generation,
            {speaker.profile.agent_id, t.session_id, turn_index});
        return backend_.generate(req);
    }

    void append_response(Transcript& t, const AgentRuntime& speaker,
                         const GenerationResponse& resp, int turn_index) {
        TranscriptTurn turn;
        turn.speaker = speaker.profile.agent_id;
        turn.text = resp.text;
        turn.timestamp = opts_.now + turn_index;
        turn.metadata["tokens"] = std::to_string(resp.token_count);
        turn.metadata["backend"] = resp.backend_id;
        t.turns.push_back(std::move(turn));
    }

    void share_turn(const TranscriptTurn& turn, const std::vector<AgentRuntime*>& listeners) {
        for (AgentRuntime* agent : listeners)
            agent->stm.append_turn(
                {turn.speaker, turn.text, turn.timestamp, opts_.turn_importance});
    }

    Backend& backend_;
    MemoryStore* store_;
    WorkflowOptions opts_;
};

}  // namespace persim

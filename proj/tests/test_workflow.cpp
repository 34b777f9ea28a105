#include <doctest.h>

#include <persim/battery.hpp>
#include <persim/workflow.hpp>

#include "test_helpers.hpp"

#include <random>

using namespace persim;

namespace {

AgentProfile profile(const std::string& id, double extraversion = 3.0) {
    AgentProfile p = testutil::minimal_profile(id);
    p.demographics.name = id;
    p.personality.extraversion = extraversion;
    return p;
}

ScriptedBackend make_backend(const std::vector<AgentProfile>& roster, double sigma = 0.2,
                             std::uint64_t seed = 42) {
    ScriptedBackend backend(IndicatorLexicon::builtin(), sigma, seed);
    for (const auto& p : roster) backend.register_profile(p);
    return backend;
}

// Fails every call after the first `allowed` generations.
class FlakyBackend final : public Backend {
public:
    FlakyBackend(Backend& inner, int allowed) : inner_(inner), allowed_(allowed) {}
    GenerationResponse generate(const GenerationRequest& req) override {
        if (calls_++ >= allowed_)
            throw BackendUnavailableError("injected failure", 1);
        return inner_.generate(req);
    }
    std::string id() const override { return "flaky"; }

private:
    Backend& inner_;
    int allowed_;
    int calls_ = 0;
};

// Records the requests that reach the inner backend.
class RecordingBackend final : public Backend {
public:
    explicit RecordingBackend(Backend& inner) : inner_(inner) {}
    GenerationResponse generate(const GenerationRequest& req) override {
        requests.push_back(req);
        return inner_.generate(req);
    }
    std::string id() const override { return inner_.id(); }
    std::vector<GenerationRequest> requests;

private:
    Backend& inner_;
};

}  // namespace

TEST_CASE("dual dialogue: single turn comes from agent a") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowEngine engine(backend, nullptr, {});
    const Transcript t = engine.run_dual_dialogue(a, b, "Hello there", 1);
    REQUIRE(t.turns.size() == 1);
    CHECK(t.turns[0].speaker == "agent_a");
    CHECK(t.complete);
}

TEST_CASE("dual dialogue: strict alternation over six turns") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowEngine engine(backend, nullptr, {});
    const Transcript t = engine.run_dual_dialogue(a, b, "Opening", 6);
    REQUIRE(t.turns.size() == 6);
    const char* expected[] = {"agent_a", "agent_b", "agent_a", "agent_b", "agent_a", "agent_b"};
    for (int i = 0; i < 6; ++i) CHECK(t.turns[i].speaker == expected[i]);
    // both agents heard every turn
    CHECK(a.stm.turns().size() == 6);
    CHECK(b.stm.turns().size() == 6);
}

TEST_CASE("dual dialogue: byte-identical across fresh engines with one seed") {
    auto run_once = [] {
        auto a = AgentRuntime(profile("agent_a"));
        auto b = AgentRuntime(profile("agent_b"));
        auto backend = make_backend({a.profile, b.profile}, 0.4, 99);
        WorkflowEngine engine(backend, nullptr, {});
        return engine.run_dual_dialogue(a, b, "Opening line", 5).to_json().dump();
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("dual dialogue rejects bad arguments") {
    auto a = AgentRuntime(profile("agent_a"));
    auto a2 = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowEngine engine(backend, nullptr, {});
    CHECK_THROWS_AS((void)engine.run_dual_dialogue(a, a2, "x", 3), InvalidArgument);
    CHECK_THROWS_AS((void)engine.run_dual_dialogue(a, b, "x", 0), InvalidArgument);
}

TEST_CASE("dual dialogue: backend failure keeps the partial transcript") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto inner = make_backend({a.profile, b.profile});
    FlakyBackend flaky(inner, 3);
    WorkflowEngine engine(flaky, nullptr, {});
    try {
        (void)engine.run_dual_dialogue(a, b, "Opening", 6);
        FAIL("expected WorkflowError");
    } catch (const WorkflowError& e) {
        CHECK(e.turn_index == 3);
        CHECK(e.partial.turns.size() == 3);
        CHECK(!e.partial.complete);
    }
}

TEST_CASE("social simulation: roster order dispatch and turn-count law") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto c = AgentRuntime(profile("agent_c"));
    auto backend = make_backend({a.profile, b.profile, c.profile});
    WorkflowEngine engine(backend, nullptr, {});

    const std::vector<SocialEvent> schedule = {
        {"A fire drill interrupts lunch", {"agent_a", "agent_b", "agent_c"}},
    };
    const Transcript t = engine.run_social_simulation({&a, &b, &c}, schedule);
    REQUIRE(t.turns.size() == 3);
    CHECK(t.turns[0].speaker == "agent_a");
    CHECK(t.turns[1].speaker == "agent_b");
    CHECK(t.turns[2].speaker == "agent_c");
    CHECK(t.turns[0].metadata.at("event") == "A fire drill interrupts lunch");
}

TEST_CASE("social simulation: roster size and schedule preconditions") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowEngine engine(backend, nullptr, {});
    CHECK_THROWS_AS((void)engine.run_social_simulation({&a, &b}, {{"e", {"agent_a"}}}),
                    RosterSizeError);

    auto c = AgentRuntime(profile("agent_c"));
    auto backend3 = make_backend({a.profile, b.profile, c.profile});
    WorkflowEngine engine3(backend3, nullptr, {});
    CHECK_THROWS_AS((void)engine3.run_social_simulation({&a, &b, &c}, {}), InvalidArgument);
    CHECK_THROWS_AS(
        (void)engine3.run_social_simulation({&a, &b, &c}, {{"e", {"nobody"}}}),
        UnknownAgentError);
}

TEST_CASE("property: social simulation emits exactly the addressed turn count") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n_agents = 3 + static_cast<int>(rng() % 4);
        std::vector<AgentRuntime> agents;
        std::vector<AgentProfile> profiles;
        for (int i = 0; i < n_agents; ++i) profiles.push_back(profile("agent_" + std::to_string(i)));
        for (const auto& p : profiles) agents.emplace_back(p);
        auto backend = make_backend(profiles);
        WorkflowEngine engine(backend, nullptr, {});

        std::vector<SocialEvent> schedule;
        std::size_t expected = 0;
        const int n_events = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < n_events; ++e) {
            SocialEvent ev;
            ev.description = "event " + std::to_string(e);
            for (int i = 0; i < n_agents; ++i)
                if (rng() % 2) ev.addressed.push_back("agent_" + std::to_string(i));
            if (ev.addressed.empty()) ev.addressed.push_back("agent_0");
            expected += ev.addressed.size();
            schedule.push_back(std::move(ev));
        }
        std::vector<AgentRuntime*> roster;
        for (auto& a : agents) roster.push_back(&a);
        CHECK(engine.run_social_simulation(roster, schedule).turns.size() == expected);
    }
}

TEST_CASE("social simulation: earlier responses are visible within an event") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto c = AgentRuntime(profile("agent_c"));
    auto inner = make_backend({a.profile, b.profile, c.profile});
    RecordingBackend recording(inner);
    WorkflowEngine engine(recording, nullptr, {});
    const Transcript t = engine.run_social_simulation(
        {&a, &b, &c}, {{"The clinic announces new visiting hours", {"agent_a", "agent_c"}}});
    REQUIRE(t.turns.size() == 2);
    REQUIRE(recording.requests.size() == 2);
    // the second responder's history carries the first responder's utterance
    REQUIRE(!recording.requests[1].history.empty());
    CHECK(recording.requests[1].history.back().text == t.turns[0].text);
    CHECK(recording.requests[1].history.back().role == "user");
}

TEST_CASE("social simulation and intervention are deterministic under a fixed seed") {
    auto run_social = [] {
        auto a = AgentRuntime(profile("agent_a"));
        auto b = AgentRuntime(profile("agent_b"));
        auto c = AgentRuntime(profile("agent_c"));
        auto backend = make_backend({a.profile, b.profile, c.profile}, 0.5, 77);
        WorkflowEngine engine(backend, nullptr, {});
        return engine
            .run_social_simulation({&a, &b, &c},
                                   {{"event one", {"agent_b", "agent_c"}},
                                    {"event two", {"agent_a"}}})
            .to_json()
            .dump();
    };
    CHECK(run_social() == run_social());

    auto run_intervention = [](const std::filesystem::path& dir) {
        auto adult = AgentRuntime(profile("agent_adult"));
        auto therapist = AgentRuntime(profile("agent_therapist"));
        auto backend = make_backend({adult.profile, therapist.profile}, 0.5, 78);
        MemoryStore store(dir);
        WorkflowEngine engine(backend, &store, {});
        InterventionProtocol protocol;
        protocol.rounds = {{"g", "Opening", 2}, {"g2", "Second", 2}};
        std::string serialized;
        for (const auto& t : engine.run_intervention(adult, therapist, protocol))
            serialized += t.to_json().dump() + "\n";
        return serialized;
    };
    testutil::TempDir d1("det1"), d2("det2");
    CHECK(run_intervention(d1.path()) == run_intervention(d2.path()));
}

TEST_CASE("intervention: later rounds retrieve earlier round summaries") {
    testutil::TempDir dir("retrieval_rounds");
    auto adult = AgentRuntime(profile("agent_adult"));
    auto therapist = AgentRuntime(profile("agent_therapist"));
    auto inner = make_backend({adult.profile, therapist.profile});
    RecordingBackend recording(inner);
    MemoryStore store(dir.path());
    WorkflowOptions opts;
    opts.memory_enabled = true;
    WorkflowEngine engine(recording, &store, opts);
    InterventionProtocol protocol;
    protocol.rounds = {{"g1", "Round one prompt", 1}, {"g2", "Round two prompt", 1}};
    (void)engine.run_intervention(adult, therapist, protocol);

    // the adult's round-2 request must contain the persisted round-1 summary
    bool saw_summary = false;
    for (const auto& req : recording.requests) {
        const PromptBlock* memory = req.find_block(BlockKind::memory);
        if (!memory) continue;
        if (memory->text.find("Last session summary:\n- none") == std::string::npos &&
            memory->text.find("Last session summary:") != std::string::npos)
            saw_summary = true;
    }
    CHECK(saw_summary);
    CHECK(store.fetch_summary("sum_000001").has_value());
    CHECK(store.fetch_summary("sum_000002").has_value());
}

TEST_CASE("intervention: six default rounds store six summaries") {
    testutil::TempDir dir("intervention");
    auto adult = AgentRuntime(profile("agent_adult"));
    auto therapist = AgentRuntime(profile("agent_therapist"));
    auto backend = make_backend({adult.profile, therapist.profile});
    MemoryStore store(dir.path());
    WorkflowOptions opts;
    opts.tags = {"therapy"};
    WorkflowEngine engine(backend, &store, opts);
    const auto rounds =
        engine.run_intervention(adult, therapist, InterventionProtocol::default_cbt());
    CHECK(rounds.size() == 6);
    std::size_t summaries = 0;
    for (int i = 1; i <= 10; ++i)
        if (store.fetch_summary("sum_" + std::string(i < 10 ? "00000" : "0000") +
                                std::to_string(i)))
            ++summaries;
    CHECK(summaries == 6);
    for (const auto& r : rounds) {
        CHECK(r.complete);
        CHECK(r.turns.front().speaker == "agent_therapist");
    }
}

TEST_CASE("intervention: single round, exchange bound") {
    testutil::TempDir dir("intervention2");
    auto adult = AgentRuntime(profile("agent_adult"));
    auto therapist = AgentRuntime(profile("agent_therapist"));
    auto backend = make_backend({adult.profile, therapist.profile});
    MemoryStore store(dir.path());
    WorkflowEngine engine(backend, &store, {});

    InterventionProtocol one;
    one.rounds = {{"goal", "Opening prompt", 2}};
    const auto rounds = engine.run_intervention(adult, therapist, one);
    REQUIRE(rounds.size() == 1);
    CHECK(rounds[0].turns.size() <= 4);  // two exchanges at most
    CHECK(rounds[0].turns[0].text == "Opening prompt");

    InterventionProtocol bad;
    bad.rounds = {};
    CHECK_THROWS_AS((void)engine.run_intervention(adult, therapist, bad), SchemaError);
}

TEST_CASE("intervention: a failed round aborts later rounds, summaries persist") {
    testutil::TempDir dir("intervention3");
    auto adult = AgentRuntime(profile("agent_adult"));
    auto therapist = AgentRuntime(profile("agent_therapist"));
    auto inner = make_backend({adult.profile, therapist.profile});
    // round 1 = 1 scripted opening + 1 generated reply + 2 generated in
    // exchange 2 -> allow 4 then fail inside round 2
    FlakyBackend flaky(inner, 4);
    MemoryStore store(dir.path());
    WorkflowEngine engine(flaky, &store, {});
    InterventionProtocol protocol;
    protocol.rounds = {{"g1", "Round one prompt", 2}, {"g2", "Round two prompt", 2}};
    CHECK_THROWS_AS((void)engine.run_intervention(adult, therapist, protocol), WorkflowError);
    // round 1 summary persisted before the failure
    CHECK(store.fetch_summary("sum_000001").has_value());
    CHECK(!store.fetch_summary("sum_000002").has_value());
}

TEST_CASE("assessment: zero noise expresses the profile, records carry provenance") {
    auto agent = AgentRuntime(testutil::listing_profile());
    ScriptedBackend backend(IndicatorLexicon::builtin(), 0.0, 7);
    backend.register_profile(agent.profile);
    WorkflowOptions opts;
    opts.now = 1234;
    WorkflowEngine engine(backend, nullptr, opts);
    const Scenario scenario = builtin_scenarios()[0];
    const PipelineConfig condition = condition_flags(ConditionId::baseline);

    const ResponseRecord rec = engine.run_assessment(agent, scenario, 2, condition, 555);
    CHECK(rec.agent_id == "elderly_patient_001");
    CHECK(rec.scenario_id == "S1");
    CHECK(rec.repetition == 2);
    CHECK(rec.condition == ConditionId::baseline);
    CHECK(rec.seed == 555);
    CHECK(rec.created_at == 1234);
    CHECK(rec.backend_id == "scripted");
    const auto expressed = parse_expressed_trailer(rec.response_text);
    REQUIRE(expressed.has_value());
    for (std::size_t d = 0; d < kOceanDims; ++d)
        CHECK((*expressed)[d] == doctest::Approx(agent.profile.personality[d]));

    const ResponseRecord again = engine.run_assessment(agent, scenario, 2, condition, 555);
    CHECK(again == rec);
}

TEST_CASE("assessment: condition flags control the context blocks") {
    testutil::TempDir dir("blocks");
    MemoryStore store(dir.path());
    auto agent = AgentRuntime(testutil::listing_profile(),
                              load_ccd_file(testutil::fixture("ccd/elderly_patient_001.json")));
    store.register_agent(agent.profile.agent_id);
    ScriptedBackend inner(IndicatorLexicon::builtin(), 0.0, 7);
    inner.register_profile(agent.profile);
    RecordingBackend recording(inner);
    WorkflowEngine engine(recording, &store, {});
    const Scenario scenario = builtin_scenarios()[1];  // family conflict

    (void)engine.run_assessment(agent, scenario, 1, condition_flags(ConditionId::baseline), 1);
    REQUIRE(recording.requests.size() == 1);
    CHECK(!recording.requests[0].has_block(BlockKind::memory));
    CHECK(!recording.requests[0].has_block(BlockKind::ccd));
    CHECK(recording.requests[0].has_block(BlockKind::persona));
    CHECK(recording.requests[0].has_block(BlockKind::scenario));

    (void)engine.run_assessment(agent, scenario, 1, condition_flags(ConditionId::plus_memory), 1);
    CHECK(recording.requests[1].has_block(BlockKind::memory));
    CHECK(!recording.requests[1].has_block(BlockKind::ccd));

    (void)engine.run_assessment(agent, scenario, 1, condition_flags(ConditionId::plus_ccd), 1);
    CHECK(recording.requests[2].has_block(BlockKind::memory));
    CHECK(recording.requests[2].has_block(BlockKind::ccd));
    // the appraisal reacted to the scenario's tags
    const PromptBlock* ccd_block = recording.requests[2].find_block(BlockKind::ccd);
    REQUIRE(ccd_block != nullptr);
    CHECK(ccd_block->text.find("[CCD]") == 0);
}

TEST_CASE("assessment leaves the agent runtime untouched") {
    auto agent = AgentRuntime(testutil::listing_profile(),
                              load_ccd_file(testutil::fixture("ccd/elderly_patient_001.json")));
    ScriptedBackend backend(IndicatorLexicon::builtin(), 0.1, 7);
    backend.register_profile(agent.profile);
    WorkflowEngine engine(backend, nullptr, {});
    const Scenario scenario = builtin_scenarios()[3];
    (void)engine.run_assessment(agent, scenario, 1, condition_flags(ConditionId::baseline), 9);
    CHECK(agent.stm.turns().empty());
    CHECK(agent.stm.emotional_trail().empty());
}

TEST_CASE("dual dialogue stops on an empty generation") {
    class SilentAfter final : public Backend {
    public:
        SilentAfter(Backend& inner, int talk) : inner_(inner), talk_(talk) {}
        GenerationResponse generate(const GenerationRequest& req) override {
            if (calls_++ >= talk_) return {"", 0, 0.0, "silent"};
            return inner_.generate(req);
        }
        std::string id() const override { return "silent_after"; }

    private:
        Backend& inner_;
        int talk_;
        int calls_ = 0;
    };
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto inner = make_backend({a.profile, b.profile});
    SilentAfter silent(inner, 2);
    WorkflowEngine engine(silent, nullptr, {});
    const Transcript t = engine.run_dual_dialogue(a, b, "Opening", 10);
    CHECK(t.turns.size() == 2);  // stopped early, no empty turn appended
    CHECK(t.complete);
}

TEST_CASE("workflow documents load from JSON text") {
    testutil::TempDir dir("docs");
    const auto schedule_path = dir.path() / "schedule.json";
    write_text_file(schedule_path, R"({
      "events": [
        {"description": "Lunch is served", "addressed": ["agent_a", "agent_b"]},
        {"description": "A visitor arrives", "addressed": ["agent_a"]}
      ]
    })");
    const auto schedule = load_event_schedule_file(schedule_path);
    REQUIRE(schedule.size() == 2);
    CHECK(schedule[0].addressed.size() == 2);
    CHECK(schedule[1].description == "A visitor arrives");

    const auto protocol_path = dir.path() / "protocol.json";
    write_text_file(protocol_path, R"({
      "rounds": [
        {"goal": "warm up", "opening_prompt": "How are you?", "max_exchanges": 2}
      ]
    })");
    const auto protocol = load_protocol_file(protocol_path);
    REQUIRE(protocol.rounds.size() == 1);
    CHECK(protocol.rounds[0].max_exchanges == 2);

    write_text_file(schedule_path, R"({"events": [{"description": "x", "addressed": []}]})");
    CHECK_THROWS_AS((void)load_event_schedule_file(schedule_path), SchemaError);
}

TEST_CASE("ccd-enabled dialogue mirrors the latest appraisal into short-term memory") {
    auto a = AgentRuntime(testutil::listing_profile(),
                          load_ccd_file(testutil::fixture("ccd/elderly_patient_001.json")));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowOptions opts;
    opts.ccd_enabled = true;
    opts.tags = {"family", "criticism"};
    WorkflowEngine engine(backend, nullptr, opts);
    (void)engine.run_dual_dialogue(a, b, "Your son questions how you take your pills", 2);
    CHECK(!a.stm.active_thoughts().empty());
    CHECK(!a.stm.emotional_trail().empty());
}

TEST_CASE("backend summarizer delegates to the generation backend") {
    class CannedBackend final : public Backend {
    public:
        GenerationResponse generate(const GenerationRequest& req) override {
            CHECK(req.find_block(BlockKind::scenario) != nullptr);
            return {"A short abstractive summary.", 4, 1.0, id()};
        }
        std::string id() const override { return "canned"; }
    } canned;

    ShortTermMemory stm;
    stm.append_turn({"a", "first turn", 1, 0.5});
    stm.append_turn({"b", "second turn", 2, 0.5});
    BackendSummarizer summarizer(canned, {}, "[PERSONA]\np\n[/PERSONA]");
    const DialogueSummary s =
        summarize_session(stm, summarizer, {"sess", "agent_a", {"health"}, 7});
    CHECK(s.summary == "A short abstractive summary.");
    CHECK(s.key_topics == std::vector<std::string>{"health"});

    ShortTermMemory empty;
    CHECK_THROWS_AS((void)summarize_session(empty, summarizer, {"sess", "agent_a", {}, 0}),
                    EmptySessionError);
}

TEST_CASE("short-term memory serializes as timestamped records") {
    ShortTermMemory stm(5);
    stm.append_turn({"speaker_a", "hello", 1000, 0.4});
    stm.set_running_summary("summary so far");
    const json j = stm.to_json();
    CHECK(j.at("capacity").get<int>() == 5);
    CHECK(j.at("turns")[0].at("timestamp").get<Millis>() == 1000);
    CHECK(j.at("turns")[0].at("speaker") == "speaker_a");
    CHECK(j.at("running_summary") == "summary so far");
    CHECK(j.contains("emotional_state"));
    CHECK(j.contains("active_thoughts"));
}

TEST_CASE("transcript jsonl export carries one line per turn") {
    auto a = AgentRuntime(profile("agent_a"));
    auto b = AgentRuntime(profile("agent_b"));
    auto backend = make_backend({a.profile, b.profile});
    WorkflowEngine engine(backend, nullptr, {});
    const Transcript t = engine.run_dual_dialogue(a, b, "Opening", 4);
    const std::string jsonl = t.to_jsonl();
    std::size_t lines = 0;
    for (char c : jsonl)
        if (c == '\n') ++lines;
    CHECK(lines == 4);
}

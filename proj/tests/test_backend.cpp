#include <doctest.h>

#include <persim/backend.hpp>
#include <persim/http_backend.hpp>

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <atomic>
#include <thread>

using namespace persim;

TEST_CASE("generation config validation") {
    GenerationConfig c;
    CHECK_NOTHROW(c.validate());
    c.max_tokens = 9000;
    CHECK_THROWS_AS(c.validate(), RangeError);
    c = GenerationConfig{};
    c.top_p = 0.0;
    CHECK_THROWS_AS(c.validate(), RangeError);
    c = GenerationConfig{};
    c.temperature = -0.1;
    CHECK_THROWS_AS(c.validate(), RangeError);
}

TEST_CASE("default config reaches the wire unchanged") {
    GenerationRequest req = assemble_context("[PERSONA]\npersona\n[/PERSONA]", std::nullopt,
                                             std::nullopt, "scenario text", {}, {});
    const json wire = req.to_wire();
    CHECK(wire.at("temperature").get<double>() == 0.7);
    CHECK(wire.at("top_p").get<double>() == 0.9);
    CHECK(wire.at("max_tokens").get<int>() == 512);
    CHECK(wire.at("model").get<std::string>() == "qwen2.5-14b");
    CHECK(wire.at("messages").is_array());
    CHECK(wire.at("messages")[0].at("role") == "system");
    CHECK(wire.at("messages")[1].at("role") == "user");
    CHECK(!wire.contains("seed"));

    GenerationConfig seeded;
    seeded.seed = 1234;
    GenerationRequest req2 = assemble_context("[PERSONA]\np\n[/PERSONA]", std::nullopt,
                                              std::nullopt, "s", {}, seeded);
    CHECK(req2.to_wire().at("seed").get<std::uint64_t>() == 1234);
}

TEST_CASE("assemble_context keeps the fixed block order") {
    GenerationRequest req =
        assemble_context("[PERSONA]\np\n[/PERSONA]", std::string("[MEMORY]\nm\n[/MEMORY]"),
                         std::string("[CCD]\nc\n[/CCD]"), "[SCENARIO]\ns\n[/SCENARIO]", {}, {});
    REQUIRE(req.blocks.size() == 4);
    CHECK(req.blocks[0].kind == BlockKind::persona);
    CHECK(req.blocks[1].kind == BlockKind::memory);
    CHECK(req.blocks[2].kind == BlockKind::ccd);
    CHECK(req.blocks[3].kind == BlockKind::scenario);

    GenerationRequest persona_only =
        assemble_context("[PERSONA]\np\n[/PERSONA]", std::nullopt, std::nullopt, "s", {}, {});
    CHECK(persona_only.blocks.size() == 2);
    CHECK(!persona_only.has_block(BlockKind::memory));
    CHECK(!persona_only.has_block(BlockKind::ccd));

    CHECK_THROWS_AS(
        (void)assemble_context("", std::nullopt, std::nullopt, "s", {}, {}), InvalidArgument);
}

TEST_CASE("history truncation drops oldest turns first, never the scenario") {
    GenerationConfig tight;
    tight.context_window = 20;
    tight.max_tokens = 10;
    std::vector<ChatTurn> history;
    for (int i = 0; i < 10; ++i)
        history.push_back({"user", "turn " + std::to_string(i) + " word word"});
    GenerationRequest req = assemble_context("persona block here", std::nullopt, std::nullopt,
                                             "scenario prompt", history, tight);
    CHECK(req.prompt_token_count() <= 20);
    REQUIRE(!req.history.empty());
    CHECK(req.history.back().text == "turn 9 word word");
    for (const auto& t : req.history) CHECK(t.text != "turn 0 word word");
    CHECK(req.find_block(BlockKind::scenario) != nullptr);

    // blocks alone exceeding the window is an overflow error
    GenerationConfig tiny;
    tiny.context_window = 2;
    tiny.max_tokens = 1;
    CHECK_THROWS_AS((void)assemble_context("five words of persona text", std::nullopt,
                                           std::nullopt, "scenario", {}, tiny),
                    ContextOverflowError);
}

TEST_CASE("count_tokens splits on whitespace") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("one") == 1);
    CHECK(count_tokens("  two words \n three\tfour ") == 4);
}

// --- scripted backend --------------------------------------------------------

TEST_CASE("scripted responses are a pure function of the keyed tuple") {
    const AgentProfile p = testutil::listing_profile();
    const IndicatorLexicon lex = IndicatorLexicon::builtin();
    const GenerationResponse a = scripted_respond(p, lex, 0.5, "S3", 2, 42);
    const GenerationResponse b = scripted_respond(p, lex, 0.5, "S3", 2, 42);
    CHECK(a.text == b.text);
    CHECK(a.latency_ms == b.latency_ms);
    const GenerationResponse c = scripted_respond(p, lex, 0.5, "S3", 3, 42);
    CHECK(a.text != c.text);
}

TEST_CASE("zero noise expresses the profile exactly, every repetition") {
    const AgentProfile p = testutil::listing_profile();
    const IndicatorLexicon lex = IndicatorLexicon::builtin();
    for (int rep = 1; rep <= 5; ++rep) {
        const GenerationResponse r = scripted_respond(p, lex, 0.0, "S1", rep, 7);
        const auto expressed = parse_expressed_trailer(r.text);
        REQUIRE(expressed.has_value());
        for (std::size_t d = 0; d < kOceanDims; ++d)
            CHECK((*expressed)[d] == doctest::Approx(p.personality[d]).epsilon(1e-9));
    }
}

TEST_CASE("noisy expression matches the clamped-gaussian oracle") {
    AgentProfile p = testutil::minimal_profile("mc_agent");
    p.personality = {3.0, 3.0, 3.0, 3.0, 3.5};
    const IndicatorLexicon lex = IndicatorLexicon::builtin();
    const double sigma = 0.5;

    double sum = 0.0, sum_sq = 0.0;
    const int n = 1000;
    for (int rep = 1; rep <= n; ++rep) {
        const auto r = scripted_respond(p, lex, sigma, "S4", rep, 11);
        const auto expressed = parse_expressed_trailer(r.text);
        REQUIRE(expressed.has_value());
        const double v = expressed->neuroticism;
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);

    const auto oracle = oracles::clamped_gaussian_mc(3.5, sigma, 1.0, 5.0, 200000, 1234);
    CHECK(std::fabs(mean - 3.5) < 0.1);
    CHECK(std::fabs(sd - oracle.sd) < 0.1);
}

TEST_CASE("scripted backend resolves profiles from provenance") {
    ScriptedBackend backend(IndicatorLexicon::builtin(), 0.0, 5);
    backend.register_profile(testutil::listing_profile());
    GenerationRequest req = assemble_context("[PERSONA]\np\n[/PERSONA]", std::nullopt,
                                             std::nullopt, "s", {}, {},
                                             {"elderly_patient_001", "S2", 1});
    const GenerationResponse resp = backend.generate(req);
    CHECK(resp.backend_id == "scripted");
    CHECK(resp.token_count == count_tokens(resp.text));

    GenerationRequest unknown = assemble_context("[PERSONA]\np\n[/PERSONA]", std::nullopt,
                                                 std::nullopt, "s", {}, {},
                                                 {"ghost", "S2", 1});
    CHECK_THROWS_AS((void)backend.generate(unknown), BackendError);
}

// --- HTTP backend ------------------------------------------------------------

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> calls{0};
    json last_request;
    std::mutex mutex;

    explicit TestServer(std::function<void(TestServer&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions",
                    [this, handler](const httplib::Request& req, httplib::Response& res) {
                        {
                            std::lock_guard<std::mutex> lock(mutex);
                            last_request = json::parse(req.body, nullptr, false);
                        }
                        calls.fetch_add(1);
                        handler(*this, res);
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

GenerationRequest http_request(const std::string& endpoint) {
    GenerationConfig config;
    config.endpoint_url = endpoint;
    config.seed = 99;
    return assemble_context("[PERSONA]\npersona\n[/PERSONA]", std::nullopt, std::nullopt,
                            "scenario prompt", {{"user", "hello"}}, config);
}

}  // namespace

TEST_CASE("http backend: one successful call, parameters on the wire, no retry") {
    TestServer server([](TestServer&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"content":"hello there"}}],)"
                        R"("usage":{"completion_tokens":17}})",
                        "application/json");
    });
    HttpBackend backend("test-key");
    const GenerationResponse resp = backend.generate(http_request(server.endpoint()));
    CHECK(resp.text == "hello there");
    CHECK(resp.token_count == 17);
    CHECK(resp.latency_ms >= 0.0);
    CHECK(server.calls.load() == 1);  // success is never retried

    std::lock_guard<std::mutex> lock(server.mutex);
    CHECK(server.last_request.at("temperature").get<double>() == 0.7);
    CHECK(server.last_request.at("top_p").get<double>() == 0.9);
    CHECK(server.last_request.at("max_tokens").get<int>() == 512);
    CHECK(server.last_request.at("seed").get<int>() == 99);
    CHECK(server.last_request.at("messages").size() == 3);  // system, scenario, history
}

TEST_CASE("http backend: non-success status raises immediately with the body excerpt") {
    TestServer server([](TestServer&, httplib::Response& res) {
        res.status = 500;
        res.set_content("upstream exploded", "text/plain");
    });
    HttpBackend backend;
    try {
        (void)backend.generate(http_request(server.endpoint()));
        FAIL("expected BackendRejectedError");
    } catch (const BackendRejectedError& e) {
        CHECK(e.status == 500);
        CHECK(e.body_excerpt == "upstream exploded");
    }
    CHECK(server.calls.load() == 1);  // status errors are not retried
}

TEST_CASE("http backend: unreachable endpoint exhausts the retry budget") {
    GenerationConfig config;
    config.endpoint_url = "http://127.0.0.1:9/v1";  // reserved port, nothing listens
    config.retry_backoff = std::chrono::milliseconds(1);
    config.max_retries = 3;
    GenerationRequest req = assemble_context("[PERSONA]\np\n[/PERSONA]", std::nullopt,
                                             std::nullopt, "s", {}, config);
    HttpBackend backend;
    try {
        (void)backend.generate(req);
        FAIL("expected BackendUnavailableError");
    } catch (const BackendUnavailableError& e) {
        CHECK(e.attempts == 3);
    }
}

TEST_CASE("http backend: token count falls back to word count without usage") {
    TestServer server([](TestServer&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"content":"three short words"}}]})",
                        "application/json");
    });
    HttpBackend backend;
    const GenerationResponse resp = backend.generate(http_request(server.endpoint()));
    CHECK(resp.token_count == 3);
}

TEST_CASE("endpoint parsing") {
    auto e = detail::parse_endpoint("http://localhost:8080/v1");
    CHECK(e.host_port == "http://localhost:8080");
    CHECK(e.base_path == "/v1");
    auto bare = detail::parse_endpoint("http://localhost:8080");
    CHECK(bare.base_path.empty());
    CHECK_THROWS_AS((void)detail::parse_endpoint("localhost:8080"), InvalidArgument);
}

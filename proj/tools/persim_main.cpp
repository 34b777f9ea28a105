// persim command-line entry point.
//
// Subcommands:
//   validate <paths...>   check profiles, CCDs, batteries, lexicons, run configs
//   run      --config f   execute the ablation experiment into a run directory
//   report   <run_dir>    re-render reports from persisted records
//   chat     --profile f  interactive dual-dialogue REPL for inspection
//
// Exit codes: 0 success, 1 validation failure, 2 missing input,
//             3 backend failure, 4 incomplete run.

#include <persim/http_backend.hpp>
#include <persim/persim.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIncomplete = 4;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

void apply_env_overrides(persim::RunConfig& config) {
    config.generation.endpoint_url =
        env_or("PERSIM_ENDPOINT", config.generation.endpoint_url);
    config.generation.model_name = env_or("PERSIM_MODEL", config.generation.model_name);
    if (config.lora_endpoint_url.empty())
        config.lora_endpoint_url = env_or("PERSIM_LORA_ENDPOINT", config.lora_endpoint_url);
    if (config.lora_model_name.empty())
        config.lora_model_name = env_or("PERSIM_LORA_MODEL", config.lora_model_name);
}

// --- validate ---------------------------------------------------------------

// Document kind is sniffed from the top-level fields.
int validate_one(const std::filesystem::path& path) {
    const std::string text = persim::read_text_file(path);
    const persim::json j = persim::parse_json(text, path.string());
    if (j.contains("demographics")) {
        persim::profile_from_json(j, path.string());
        std::cout << "OK " << path.string() << " (profile)\n";
    } else if (j.contains("core_beliefs")) {
        persim::ccd_from_json(j, path.string());
        std::cout << "OK " << path.string() << " (ccd)\n";
    } else if (j.contains("roster")) {
        // run configs also carry a "scenarios" path, so this must win
        persim::load_run(persim::RunConfig::from_json(j, path.parent_path(), path.string()));
        std::cout << "OK " << path.string() << " (run config)\n";
    } else if (j.contains("scenarios") && j.at("scenarios").is_array()) {
        persim::battery_from_json(j, path.string());
        std::cout << "OK " << path.string() << " (battery)\n";
    } else if (j.contains("dimensions")) {
        persim::IndicatorLexicon::from_json(j, path.string());
        std::cout << "OK " << path.string() << " (lexicon)\n";
    } else if (j.contains("events")) {
        (void)persim::event_schedule_from_json(j, path.string());
        std::cout << "OK " << path.string() << " (event schedule)\n";
    } else if (j.contains("rounds")) {
        (void)persim::InterventionProtocol::from_json(j, path.string());
        std::cout << "OK " << path.string() << " (intervention protocol)\n";
    } else {
        throw persim::SchemaError(path.string() + ": unrecognized document type");
    }
    return kExitOk;
}

int cmd_validate(const std::vector<std::string>& paths) {
    int exit_code = kExitOk;
    for (const auto& p : paths) {
        try {
            validate_one(p);
        } catch (const persim::FileNotFoundError& e) {
            std::cerr << "ERROR " << e.what() << "\n";
            return kExitMissingInput;
        } catch (const persim::Error& e) {
            std::cerr << "ERROR " << e.what() << "\n";
            exit_code = kExitValidation;
        }
    }
    return exit_code;
}

// --- run / report -----------------------------------------------------------

persim::AblationRunner::BackendFactory http_factory(const std::string& api_key) {
    return [api_key](const persim::PipelineConfig&, const persim::LoadedRun&) {
        return std::make_unique<persim::HttpBackend>(api_key);
    };
}

void export_all(const persim::AblationReport& report, const std::filesystem::path& out_dir,
                const std::string& format) {
    std::vector<persim::ReportFormat> formats;
    if (format == "all") {
        formats = {persim::ReportFormat::csv, persim::ReportFormat::json,
                   persim::ReportFormat::tables};
    } else {
        formats = {persim::report_format_from_string(format)};
    }
    for (auto f : formats)
        for (const auto& path : persim::export_report(report, out_dir, f))
            std::cout << "wrote " << path.string() << "\n";
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool resume, bool force,
            std::optional<std::uint64_t> seed_override, bool scripted_override,
            std::optional<int> parallelism_override, const std::string& format) {
    persim::RunConfig config = persim::RunConfig::load_file(config_path);
    if (seed_override) config.global_seed = *seed_override;
    if (scripted_override) config.mode = "scripted";
    if (parallelism_override) config.parallelism = *parallelism_override;
    apply_env_overrides(config);
    config.validate();

    persim::LoadedRun loaded = persim::load_run(config);
    persim::AblationRunner runner(std::move(loaded), out_dir);
    runner.set_progress([](const std::string& msg) { std::cout << msg << "\n"; });
    if (config.mode == "http")
        runner.set_backend_factory(http_factory(env_or("PERSIM_API_KEY", "")));

    persim::AblationDataset dataset = runner.run(resume, force);
    persim::AblationReport report = persim::summarize(dataset);
    export_all(report, out_dir, format);
    for (const auto& t : persim::report_tables(report))
        std::cout << "\n" << persim::table_to_text(t);
    std::cout << "\nrun " << dataset.manifest.run_id << " complete: "
              << dataset.conditions.size() << " condition(s), "
              << runner.generation_calls() << " new generation call(s)\n";
    return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
    persim::AblationDataset dataset = persim::AblationRunner::load_dataset(run_dir);
    persim::AblationReport report = persim::summarize(dataset);
    export_all(report, run_dir, format);
    for (const auto& t : persim::report_tables(report))
        std::cout << "\n" << persim::table_to_text(t);
    return kExitOk;
}

// --- chat -------------------------------------------------------------------

int cmd_chat(const std::string& profile_path, const std::string& ccd_path, bool scripted,
             double sigma, std::uint64_t seed, const std::string& condition_name,
             const std::string& input_path, const std::string& transcript_path, bool debug,
             const std::string& store_dir) {
    persim::AgentProfile profile = persim::load_profile_file(profile_path);
    std::optional<persim::CcdModel> ccd;
    if (!ccd_path.empty()) ccd = persim::load_ccd_file(ccd_path);

    persim::PipelineConfig condition = persim::condition_flags(
        persim::condition_from_string(condition_name, "chat"));
    condition.generation.endpoint_url = env_or("PERSIM_ENDPOINT", "");
    condition.generation.model_name = env_or("PERSIM_MODEL", condition.generation.model_name);

    std::unique_ptr<persim::Backend> backend;
    if (scripted) {
        auto sb = std::make_unique<persim::ScriptedBackend>(persim::IndicatorLexicon::builtin(),
                                                            sigma, seed);
        sb->register_profile(profile);
        backend = std::move(sb);
    } else {
        backend = std::make_unique<persim::HttpBackend>(env_or("PERSIM_API_KEY", ""));
    }

    std::optional<persim::MemoryStore> store;
    if (!store_dir.empty()) store.emplace(store_dir);

    persim::WorkflowOptions opts;
    opts.memory_enabled = condition.memory_enabled && store.has_value();
    opts.ccd_enabled = condition.ccd_enabled && ccd.has_value();
    opts.now = persim::kDefaultReferenceTime;
    opts.generation = condition.generation;
    persim::WorkflowEngine engine(*backend, store ? &*store : nullptr, opts);
    if (store) store->register_agent(profile.agent_id);

    persim::AgentRuntime agent(profile, ccd);
    persim::Transcript transcript;
    transcript.workflow_type = persim::WorkflowType::dual_dialogue;
    transcript.session_id = "chat_" + profile.agent_id;

    std::ifstream scripted_input;
    std::istream* in = &std::cin;
    if (!input_path.empty()) {
        scripted_input.open(input_path);
        if (!scripted_input) {
            std::cerr << "ERROR cannot open input file: " << input_path << "\n";
            return kExitMissingInput;
        }
        in = &scripted_input;
    }

    std::cout << "chatting with " << profile.demographics.name << " (" << profile.agent_id
              << "); /quit to exit\n";
    std::string line;
    int turn = 0;
    while (std::getline(*in, line)) {
        if (line == "/quit") break;
        if (line.empty()) continue;
        transcript.turns.push_back({"user", line, turn, {}});
        ++turn;
        try {
            std::optional<std::string> memory_block;
            if (opts.memory_enabled)
                memory_block = persim::render_memory_block(store->retrieve_context(
                    profile.agent_id, {"conversation"}, opts.now, opts.retrieval_k));
            std::optional<std::string> ccd_block;
            if (opts.ccd_enabled) {
                persim::SituationTrigger trigger{line, {"conversation"}, 0.7, {}};
                auto outcome = persim::appraise(*agent.ccd, trigger, agent.stm.emotional_state());
                agent.stm.set_emotional_state(outcome.emotions);
                ccd_block = persim::render_ccd_block(*agent.ccd, outcome);
                if (debug) std::cout << "--- appraisal ---\n" << *ccd_block << "\n-----------------\n";
            }
            std::vector<persim::ChatTurn> history;
            for (const auto& t : transcript.turns)
                history.push_back({t.speaker == profile.agent_id ? "assistant" : "user", t.text});
            history.pop_back();  // last user line becomes the scenario prompt
            persim::GenerationRequest req = persim::assemble_context(
                persim::render_persona_block(profile), memory_block, ccd_block,
                "[SCENARIO]\n" + line + "\n[/SCENARIO]", std::move(history),
                condition.generation, {profile.agent_id, "chat", turn});
            persim::GenerationResponse resp = backend->generate(req);
            std::cout << profile.demographics.name << ": " << resp.text << "\n";
            transcript.turns.push_back({profile.agent_id, resp.text, turn, {}});
            agent.stm.append_turn({profile.agent_id, resp.text, turn, 0.5});
            ++turn;
        } catch (const persim::BackendError& e) {
            std::cerr << "backend error (turn kept, session continues): " << e.what() << "\n";
        }
    }

    if (!transcript_path.empty()) {
        persim::write_text_file(transcript_path, transcript.to_jsonl());
        std::cout << "transcript saved to " << transcript_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persona-stable agent simulation and psychometric validation"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "validate profile/ccd/battery/config files");
    std::vector<std::string> validate_paths;
    validate->add_option("paths", validate_paths, "files to validate")->required();

    // run
    auto* run = app.add_subcommand("run", "execute the ablation experiment");
    std::string run_config, run_out = "runs/out", run_format = "all";
    bool run_resume = false, run_force = false, run_scripted = false;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    int run_parallelism = 0;
    run->add_option("--config", run_config, "run configuration file")->required();
    run->add_option("--out", run_out, "output run directory");
    run->add_flag("--resume", run_resume, "resume an interrupted run");
    run->add_flag("--force", run_force, "discard previous results and rerun");
    run->add_flag("--scripted", run_scripted, "force scripted mode");
    run->add_option("--seed", run_seed, "override the global seed")
        ->each([&](const std::string&) { run_seed_set = true; });
    run->add_option("--parallelism", run_parallelism, "max in-flight generations");
    run->add_option("--format", run_format, "report format: csv|json|tables|all");

    // report
    auto* report = app.add_subcommand("report", "re-render reports from a run directory");
    std::string report_dir, report_format = "all";
    report->add_option("run_dir", report_dir, "run directory")->required();
    report->add_option("--format", report_format, "report format: csv|json|tables|all");

    // chat
    auto* chat = app.add_subcommand("chat", "interactive dialogue REPL (debug tool)");
    std::string chat_profile, chat_ccd, chat_input, chat_transcript, chat_store;
    std::string chat_condition = "baseline";
    bool chat_scripted = false, chat_debug = false;
    double chat_sigma = 0.2;
    std::uint64_t chat_seed = 42;
    chat->add_option("--profile", chat_profile, "agent profile file")->required();
    chat->add_option("--ccd", chat_ccd, "agent CCD file");
    chat->add_option("--condition", chat_condition, "condition flags to apply");
    chat->add_flag("--scripted", chat_scripted, "use the scripted backend");
    chat->add_option("--sigma", chat_sigma, "scripted fidelity noise");
    chat->add_option("--seed", chat_seed, "scripted seed");
    chat->add_option("--input", chat_input, "read user turns from file");
    chat->add_option("--transcript", chat_transcript, "save transcript to file");
    chat->add_option("--store", chat_store, "long-term memory store directory");
    chat->add_flag("--debug", chat_debug, "print appraisal blocks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(validate_paths);
        if (*run)
            return cmd_run(run_config, run_out, run_resume, run_force,
                           run_seed_set ? std::optional<std::uint64_t>(run_seed) : std::nullopt,
                           run_scripted,
                           run_parallelism > 0 ? std::optional<int>(run_parallelism)
                                               : std::nullopt,
                           run_format);
        if (*report) return cmd_report(report_dir, report_format);
        if (*chat)
            return cmd_chat(chat_profile, chat_ccd, chat_scripted, chat_sigma, chat_seed,
                            chat_condition, chat_input, chat_transcript, chat_debug, chat_store);
    } catch (const persim::FileNotFoundError& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const persim::MissingRunError& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const persim::IncompleteRunError& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        for (const auto& cell : e.missing_cells) std::cerr << "  missing: " << cell << "\n";
        return kExitIncomplete;
    } catch (const persim::BackendError& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return kExitBackend;
    } catch (const persim::ChecksumError& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return kExitValidation;
    } catch (const persim::Error& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

#pragma once
// End-to-end ablation driver: loads a run configuration, administers the
// battery per condition with incremental persistence (a crashed run resumes
// from completed cells), computes per-condition reliability, runs the
// cross-condition comparisons and exports the report suite.

#include "persim/backend.hpp"
#include "persim/battery.hpp"
#include "persim/ccd.hpp"
#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/memory.hpp"
#include "persim/profile.hpp"
#include "persim/psychometrics.hpp"
#include "persim/record.hpp"
#include "persim/scenario.hpp"
#include "persim/stats.hpp"
#include "persim/workflow.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace persim {

// Fixed logical reference time for scripted runs (keeps reruns byte-equal).
inline constexpr Millis kDefaultReferenceTime = 1754265600000;  // 2025-08-04 UTC

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::string run_id;  // default: derived from the config hash
    std::vector<std::string> roster_paths;
    std::string scenarios_path;  // empty = built-in battery
    std::string lexicon_path;    // empty = built-in lexicon
    std::string ccd_dir;         // optional; <agent_id>.json per agent
    std::string memories_dir;    // optional; <agent_id>.json per agent
    int repetitions = 5;
    std::vector<ConditionId> conditions{kAllConditions.begin(), kAllConditions.end()};
    std::uint64_t global_seed = 42;
    std::string mode = "scripted";  // "scripted" | "http"
    std::map<ConditionId, double> sigma_schedule = {
        {ConditionId::baseline, 0.8},
        {ConditionId::plus_memory, 0.75},
        {ConditionId::plus_ccd, 0.35},
        {ConditionId::plus_lora, 0.2},
    };
    GenerationConfig generation;
    std::string lora_model_name;    // default "<model>-lora"
    std::string lora_endpoint_url;  // default: same endpoint
    int parallelism = 4;
    int retry_budget = 2;
    Millis reference_time = kDefaultReferenceTime;

    void validate() const {
        if (roster_paths.empty()) throw SchemaError("run config: roster must be non-empty");
        if (repetitions < 1) throw SchemaError("run config: repetitions must be >= 1");
        if (conditions.empty()) throw SchemaError("run config: conditions must be non-empty");
        if (mode != "scripted" && mode != "http")
            throw SchemaError("run config: mode must be \"scripted\" or \"http\"");
        if (parallelism < 1) throw SchemaError("run config: parallelism must be >= 1");
        for (ConditionId c : conditions) {
            auto it = sigma_schedule.find(c);
            if (mode == "scripted" && (it == sigma_schedule.end() || !(it->second >= 0.0)))
                throw SchemaError(std::string("run config: sigma_schedule missing condition \"") +
                                  to_string(c) + "\"");
        }
        generation.validate();
    }

    static RunConfig from_json(const json& j, const std::filesystem::path& base_dir,
                               const std::string& where) {
        reject_unknown_fields(j,
                              {"run_id", "roster", "scenarios", "lexicon", "ccd_dir",
                               "memories_dir", "repetitions", "conditions", "global_seed",
                               "mode", "sigma_schedule", "generation", "lora_model_name",
                               "lora_endpoint_url", "parallelism", "retry_budget",
                               "reference_time_ms"},
                              where);
        RunConfig c;
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path.string() : (base_dir / path).string();
        };
        if (j.contains("run_id")) c.run_id = require_string(j, "run_id", where);
        for (const auto& p : string_list(require_array(j, "roster", where), where + ".roster"))
            c.roster_paths.push_back(resolve(p));
        if (j.contains("scenarios")) c.scenarios_path = resolve(require_string(j, "scenarios", where));
        if (j.contains("lexicon")) c.lexicon_path = resolve(require_string(j, "lexicon", where));
        if (j.contains("ccd_dir")) c.ccd_dir = resolve(require_string(j, "ccd_dir", where));
        if (j.contains("memories_dir"))
            c.memories_dir = resolve(require_string(j, "memories_dir", where));
        if (j.contains("repetitions"))
            c.repetitions = static_cast<int>(require_integer(j, "repetitions", where));
        if (j.contains("conditions")) {
            c.conditions.clear();
            for (const auto& s :
                 string_list(require_array(j, "conditions", where), where + ".conditions"))
                c.conditions.push_back(condition_from_string(s, where));
        }
        if (j.contains("global_seed"))
            c.global_seed = static_cast<std::uint64_t>(require_integer(j, "global_seed", where));
        if (j.contains("mode")) c.mode = require_string(j, "mode", where);
        if (j.contains("sigma_schedule")) {
            const json& sched = require_object(j, "sigma_schedule", where);
            for (auto it = sched.begin(); it != sched.end(); ++it) {
                const ConditionId cid = condition_from_string(it.key(), where);
                if (!it.value().is_number())
                    throw SchemaError(where + ": sigma_schedule values must be numbers");
                c.sigma_schedule[cid] = it.value().get<double>();
            }
        }
        if (j.contains("generation"))
            c.generation = GenerationConfig::from_json(j.at("generation"), where + ".generation");
        if (j.contains("lora_model_name"))
            c.lora_model_name = require_string(j, "lora_model_name", where);
        if (j.contains("lora_endpoint_url"))
            c.lora_endpoint_url = require_string(j, "lora_endpoint_url", where);
        if (j.contains("parallelism"))
            c.parallelism = static_cast<int>(require_integer(j, "parallelism", where));
        if (j.contains("retry_budget"))
            c.retry_budget = static_cast<int>(require_integer(j, "retry_budget", where));
        if (j.contains("reference_time_ms"))
            c.reference_time = require_integer(j, "reference_time_ms", where);
        c.validate();
        return c;
    }

    static RunConfig load_file(const std::filesystem::path& path) {
        return from_json(parse_json(read_text_file(path), path.string()),
                         path.parent_path(), path.string());
    }

    GenerationConfig lora_generation() const {
        GenerationConfig g = generation;
        g.model_name = lora_model_name.empty() ? generation.model_name + "-lora" : lora_model_name;
        if (!lora_endpoint_url.empty()) g.endpoint_url = lora_endpoint_url;
        return g;
    }
};

// Per-agent seed memories (optional fixture).
struct AgentMemories {
    std::string agent_id;
    std::vector<EpisodicRecord> episodic;
    std::vector<SemanticRecord> semantic;

    static AgentMemories from_json(const json& j, const std::string& where) {
        reject_unknown_fields(j, {"agent_id", "episodic", "semantic"}, where);
        AgentMemories m;
        m.agent_id = require_string(j, "agent_id", where);
        if (j.contains("episodic"))
            for (const auto& e : require_array(j, "episodic", where))
                m.episodic.push_back(EpisodicRecord::from_json(e, where + ".episodic"));
        if (j.contains("semantic"))
            for (const auto& e : require_array(j, "semantic", where))
                m.semantic.push_back(SemanticRecord::from_json(e, where + ".semantic"));
        return m;
    }
};

// Fully resolved run inputs plus the effective-configuration hash. The hash
// covers loaded content (profiles, battery, lexicon, CCDs, memories) and all
// result-affecting parameters; parallelism and retry budget are excluded
// because administrations are order-independent.
struct LoadedRun {
    RunConfig config;
    std::vector<AgentProfile> roster;
    std::vector<Scenario> scenarios;
    IndicatorLexicon lexicon;
    std::map<std::string, CcdModel> ccds;
    std::vector<AgentMemories> memories;
    std::uint64_t config_hash = 0;

    std::string run_id() const {
        return config.run_id.empty() ? "run_" + hex64(config_hash) : config.run_id;
    }
};

inline LoadedRun load_run(const RunConfig& config) {
    config.validate();
    LoadedRun run;
    run.config = config;
    std::set<std::string> ids;
    for (const auto& path : config.roster_paths) {
        AgentProfile p = load_profile_file(path);
        if (!ids.insert(p.agent_id).second)
            throw SchemaError("run config: duplicate agent_id \"" + p.agent_id + "\" in roster");
        run.roster.push_back(std::move(p));
    }
    run.scenarios = config.scenarios_path.empty() ? builtin_scenarios()
                                                  : load_battery_file(config.scenarios_path);
    run.lexicon = config.lexicon_path.empty() ? IndicatorLexicon::builtin()
                                              : IndicatorLexicon::load_file(config.lexicon_path);
    if (!config.ccd_dir.empty()) {
        for (const auto& p : run.roster) {
            const auto path = std::filesystem::path(config.ccd_dir) / (p.agent_id + ".json");
            if (std::filesystem::exists(path)) run.ccds.emplace(p.agent_id, load_ccd_file(path));
        }
    }
    if (!config.memories_dir.empty()) {
        for (const auto& p : run.roster) {
            const auto path = std::filesystem::path(config.memories_dir) / (p.agent_id + ".json");
            if (!std::filesystem::exists(path)) continue;
            run.memories.push_back(AgentMemories::from_json(
                parse_json(read_text_file(path), path.string()), path.string()));
        }
    }

    json h;
    json roster_json = json::array();
    for (const auto& p : run.roster) roster_json.push_back(profile_to_json(p));
    h["roster"] = std::move(roster_json);
    h["scenarios"] = battery_to_json(run.scenarios);
    h["lexicon"] = run.lexicon.to_json();
    json ccds_json = json::object();
    for (const auto& [id, ccd] : run.ccds) ccds_json[id] = ccd_to_json(ccd);
    h["ccds"] = std::move(ccds_json);
    json mem_json = json::array();
    for (const auto& m : run.memories) {
        json e;
        e["agent_id"] = m.agent_id;
        json epi = json::array(), sem = json::array();
        for (const auto& r : m.episodic) epi.push_back(r.to_json());
        for (const auto& r : m.semantic) sem.push_back(r.to_json());
        e["episodic"] = std::move(epi);
        e["semantic"] = std::move(sem);
        mem_json.push_back(std::move(e));
    }
    h["memories"] = std::move(mem_json);
    h["repetitions"] = config.repetitions;
    json conds = json::array();
    for (ConditionId c : config.conditions) conds.push_back(to_string(c));
    h["conditions"] = std::move(conds);
    h["global_seed"] = config.global_seed;
    h["mode"] = config.mode;
    json sigma = json::object();
    for (const auto& [cid, s] : config.sigma_schedule) sigma[to_string(cid)] = s;
    h["sigma_schedule"] = std::move(sigma);
    h["generation"] = config.generation.to_json();
    h["lora_model_name"] = config.lora_model_name;
    h["lora_endpoint_url"] = config.lora_endpoint_url;
    h["reference_time_ms"] = config.reference_time;
    run.config_hash = fnv1a64(h.dump());
    return run;
}

inline LoadedRun load_run_file(const std::filesystem::path& config_path) {
    return load_run(RunConfig::load_file(config_path));
}

// ---------------------------------------------------------------------------
// Manifest

struct RunManifest {
    std::string run_id;
    std::uint64_t config_hash = 0;
    std::uint64_t global_seed = 0;
    std::string tool_version = kVersion;
    std::string scorer_id;
    struct ConditionState {
        std::size_t completed = 0;
        std::size_t total = 0;
        bool complete = false;
        std::string backend_id;
    };
    std::vector<std::pair<ConditionId, ConditionState>> conditions;  // config order
    std::map<std::string, std::string> checksums;  // file -> fnv64 hex
    Millis created_at = 0;
    Millis updated_at = 0;

    bool all_complete() const {
        if (conditions.empty()) return false;
        for (const auto& [id, st] : conditions)
            if (!st.complete) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["run_id"] = run_id;
        j["config_hash"] = hex64(config_hash);
        j["global_seed"] = global_seed;
        j["tool_version"] = tool_version;
        j["scorer_id"] = scorer_id;
        json conds = json::array();
        for (const auto& [id, st] : conditions) {
            json e;
            e["condition"] = to_string(id);
            e["completed"] = st.completed;
            e["total"] = st.total;
            e["complete"] = st.complete;
            e["backend_id"] = st.backend_id;
            conds.push_back(std::move(e));
        }
        j["conditions"] = std::move(conds);
        j["checksums"] = checksums;
        j["created_at"] = created_at;
        j["updated_at"] = updated_at;
        return j;
    }

    static RunManifest from_json(const json& j, const std::string& where) {
        RunManifest m;
        m.run_id = require_string(j, "run_id", where);
        m.config_hash = std::stoull(require_string(j, "config_hash", where), nullptr, 16);
        m.global_seed = static_cast<std::uint64_t>(require_integer(j, "global_seed", where));
        m.tool_version = require_string(j, "tool_version", where);
        if (j.contains("scorer_id")) m.scorer_id = require_string(j, "scorer_id", where);
        for (const auto& e : require_array(j, "conditions", where)) {
            ConditionState st;
            st.completed = static_cast<std::size_t>(require_integer(e, "completed", where));
            st.total = static_cast<std::size_t>(require_integer(e, "total", where));
            st.complete = require_field(e, "complete", where).get<bool>();
            if (e.contains("backend_id")) st.backend_id = require_string(e, "backend_id", where);
            m.conditions.emplace_back(
                condition_from_string(require_string(e, "condition", where), where), st);
        }
        if (j.contains("checksums"))
            for (auto it = j.at("checksums").begin(); it != j.at("checksums").end(); ++it)
                m.checksums[it.key()] = it.value().get<std::string>();
        m.created_at = require_integer(j, "created_at", where);
        m.updated_at = require_integer(j, "updated_at", where);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Dataset

struct DataCharacteristics {
    std::size_t agent_count = 0;
    std::size_t scenario_count = 0;
    int repetitions = 0;
    std::size_t total_responses = 0;
    double mean_tokens = 0.0;
    double mean_latency_ms = 0.0;
};

struct ConditionDataset {
    ConditionId id = ConditionId::baseline;
    std::vector<ResponseRecord> records;  // sorted, scored
    ScoreMatrix matrix;
    ReliabilityReport reliability;
    DataCharacteristics data;
};

struct AblationDataset {
    std::vector<ConditionDataset> conditions;  // config order
    RunManifest manifest;
    std::vector<AgentProfile> roster;

    const ConditionDataset* find(ConditionId id) const {
        for (const auto& c : conditions)
            if (c.id == id) return &c;
        return nullptr;
    }
};

inline DataCharacteristics data_characteristics(const std::vector<ResponseRecord>& records,
                                                const ScoreMatrix& matrix) {
    DataCharacteristics d;
    d.agent_count = matrix.agents.size();
    d.scenario_count = matrix.scenarios.size();
    d.repetitions = matrix.repetitions;
    d.total_responses = records.size();
    double tokens = 0.0, latency = 0.0;
    for (const auto& r : records) {
        tokens += r.token_count;
        latency += r.latency_ms;
    }
    if (!records.empty()) {
        d.mean_tokens = tokens / static_cast<double>(records.size());
        d.mean_latency_ms = latency / static_cast<double>(records.size());
    }
    return d;
}

// Optional response-quality hook (1-5 scale). No default implementation is
// shipped; when unset the coherence column is simply absent.
class CoherenceJudge {
public:
    virtual ~CoherenceJudge() = default;
    virtual double rate(const ResponseRecord& record) = 0;
    virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Runner

class AblationRunner {
public:
    using BackendFactory =
        std::function<std::unique_ptr<Backend>(const PipelineConfig&, const LoadedRun&)>;
    using ProgressFn = std::function<void(const std::string&)>;

    AblationRunner(LoadedRun run, std::filesystem::path out_dir)
        : run_(std::move(run)), out_dir_(std::move(out_dir)) {}

    void set_backend_factory(BackendFactory f) { backend_factory_ = std::move(f); }
    void set_progress(ProgressFn fn) { progress_ = std::move(fn); }

    const LoadedRun& loaded() const { return run_; }
    std::filesystem::path records_dir() const { return out_dir_ / "records"; }
    std::filesystem::path manifest_path() const { return out_dir_ / "manifest.json"; }

    // Total generate() calls issued by this runner (idempotency checks).
    std::size_t generation_calls() const { return generation_calls_; }

    PipelineConfig pipeline_for(ConditionId id) const {
        PipelineConfig p = condition_flags(id, run_.config.generation,
                                           run_.config.lora_generation());
        p.seed = condition_seed(run_.config.global_seed, id);
        auto it = run_.config.sigma_schedule.find(id);
        p.scripted_sigma = it == run_.config.sigma_schedule.end() ? 0.0 : it->second;
        return p;
    }

    AblationDataset run(bool resume = false, bool force = false) {
        std::filesystem::create_directories(records_dir());
        write_roster();

        RunManifest manifest;
        bool have_manifest = false;
        if (std::filesystem::exists(manifest_path())) {
            manifest = RunManifest::from_json(
                parse_json(read_text_file(manifest_path()), "manifest"), "manifest");
            have_manifest = true;
        }
        if (have_manifest && manifest.config_hash != run_.config_hash) {
            if (resume && !force)
                throw InvalidArgument(
                    "cannot resume: configuration changed since the manifest was written (hash " +
                    hex64(manifest.config_hash) + " vs " + hex64(run_.config_hash) + ")");
            have_manifest = false;  // restart from scratch below
        }
        if (have_manifest && manifest.all_complete() && !force) {
            progress("run already complete; loading persisted records (no generation calls)");
            return load_dataset(out_dir_, run_.roster);
        }
        if (!have_manifest || force) {
            for (const auto& entry : std::filesystem::directory_iterator(records_dir()))
                std::filesystem::remove(entry.path());
            manifest = RunManifest{};
            manifest.run_id = run_.run_id();
            manifest.config_hash = run_.config_hash;
            manifest.global_seed = run_.config.global_seed;
            manifest.created_at = wall_clock_ms();
            for (ConditionId c : run_.config.conditions)
                manifest.conditions.emplace_back(
                    c, RunManifest::ConditionState{0, expected_cells(), false, {}});
        } else if (!resume) {
            // Incomplete run restarted without --resume: start clean so the
            // record files never mix two attempts.
            for (const auto& entry : std::filesystem::directory_iterator(records_dir()))
                std::filesystem::remove(entry.path());
            for (auto& [id, st] : manifest.conditions) st = {0, expected_cells(), false, {}};
            manifest.checksums.clear();
        }

        manifest.updated_at = wall_clock_ms();
        write_text_file(manifest_path(), dump_canonical(manifest.to_json()));

        MemoryStore store = open_store();
        LexiconScorer scorer(run_.lexicon);
        manifest.scorer_id = scorer.id();

        AblationDataset dataset;
        dataset.roster = run_.roster;
        for (ConditionId cid : run_.config.conditions) {
            auto* state = manifest_state(manifest, cid);
            if (!state) {
                manifest.conditions.emplace_back(
                    cid, RunManifest::ConditionState{0, expected_cells(), false, {}});
                state = manifest_state(manifest, cid);
            }
            ConditionDataset cd = run_condition(cid, store, scorer, manifest, *state);
            dataset.conditions.push_back(std::move(cd));
            manifest.updated_at = wall_clock_ms();
            write_text_file(manifest_path(), dump_canonical(manifest.to_json()));
        }

        // Combined score-matrix table across conditions.
        std::vector<ResponseRecord> all;
        for (const auto& c : dataset.conditions)
            all.insert(all.end(), c.records.begin(), c.records.end());
        const std::string csv = records_to_csv(all);
        write_text_file(out_dir_ / "records.csv", csv);
        manifest.checksums["records.csv"] = hex64(fnv1a64(csv));
        manifest.updated_at = wall_clock_ms();
        write_text_file(manifest_path(), dump_canonical(manifest.to_json()));
        dataset.manifest = manifest;
        return dataset;
    }

    // Rebuilds a dataset from persisted records; verifies checksums; no
    // generation happens.
    static AblationDataset load_dataset(const std::filesystem::path& out_dir,
                                        std::vector<AgentProfile> roster = {}) {
        const auto manifest_file = out_dir / "manifest.json";
        if (!std::filesystem::exists(manifest_file))
            throw MissingRunError("no manifest at " + manifest_file.string());
        RunManifest manifest = RunManifest::from_json(
            parse_json(read_text_file(manifest_file), "manifest"), "manifest");

        if (roster.empty()) {
            const auto roster_dir = out_dir / "roster";
            if (!std::filesystem::exists(roster_dir))
                throw MissingRunError("no roster directory at " + roster_dir.string());
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(roster_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) roster.push_back(load_profile_file(f));
        }

        AblationDataset dataset;
        dataset.manifest = manifest;
        dataset.roster = roster;
        for (const auto& [cid, state] : manifest.conditions) {
            if (!state.complete)
                throw IncompleteRunError(std::string("condition \"") + to_string(cid) +
                                             "\" is incomplete (" +
                                             std::to_string(state.completed) + "/" +
                                             std::to_string(state.total) + " cells)",
                                         {});
            const std::string file = std::string(to_string(cid)) + ".jsonl";
            const auto path = out_dir / "records" / file;
            const std::string text = read_text_file(path);
            auto it = manifest.checksums.find(file);
            if (it != manifest.checksums.end() && it->second != hex64(fnv1a64(text)))
                throw ChecksumError("record file " + path.string() +
                                    " does not match its manifest checksum");
            ConditionDataset cd;
            cd.id = cid;
            std::istringstream in(text);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                cd.records.push_back(
                    ResponseRecord::from_json(parse_json(line, path.string()), path.string()));
            }
            sort_records(cd.records);
            cd.matrix = build_score_matrix(cd.records);
            cd.reliability = compute_reliability(
                cd.matrix, roster,
                cd.records.empty() ? std::string() : cd.records.front().scorer_id,
                manifest.global_seed);
            cd.data = data_characteristics(cd.records, cd.matrix);
            dataset.conditions.push_back(std::move(cd));
        }
        return dataset;
    }

private:
    static RunManifest::ConditionState* manifest_state(RunManifest& m, ConditionId id) {
        for (auto& [cid, st] : m.conditions)
            if (cid == id) return &st;
        return nullptr;
    }

    std::size_t expected_cells() const {
        return run_.roster.size() * run_.scenarios.size() *
               static_cast<std::size_t>(run_.config.repetitions);
    }

    void write_roster() {
        for (const auto& p : run_.roster)
            write_text_file(out_dir_ / "roster" / (p.agent_id + ".json"), save_profile(p));
    }

    MemoryStore open_store() {
        MemoryStore store(out_dir_ / "store");
        for (const auto& p : run_.roster) store.register_agent(p.agent_id);
        for (const auto& m : run_.memories) {
            store.register_agent(m.agent_id);
            for (const auto& r : m.episodic)
                if (!r.memory_id.empty() && !store.fetch_episode(r.memory_id))
                    store.store_episode(r);
            for (const auto& r : m.semantic)
                if (!r.fact_id.empty() && !store.fetch_fact(r.fact_id)) store.store_fact(r);
        }
        return store;
    }

    std::unique_ptr<Backend> make_backend(const PipelineConfig& pipeline) {
        if (backend_factory_) return backend_factory_(pipeline, run_);
        if (run_.config.mode == "scripted") {
            auto backend = std::make_unique<ScriptedBackend>(run_.lexicon,
                                                             pipeline.scripted_sigma,
                                                             pipeline.seed);
            for (const auto& p : run_.roster) backend->register_profile(p);
            return backend;
        }
        throw InvalidArgument(
            "http mode requires an HttpBackend factory (CLI wires one in); "
            "scripted mode runs standalone");
    }

    ConditionDataset run_condition(ConditionId cid, MemoryStore& store, LexiconScorer& scorer,
                                   RunManifest& manifest, RunManifest::ConditionState& state) {
        const PipelineConfig pipeline = pipeline_for(cid);
        const std::string file = std::string(to_string(cid)) + ".jsonl";
        const auto path = records_dir() / file;

        std::vector<ResponseRecord> existing;
        std::set<std::string> done;
        if (std::filesystem::exists(path)) {
            std::istringstream in(read_text_file(path));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                ResponseRecord r =
                    ResponseRecord::from_json(parse_json(line, path.string()), path.string());
                if (done.insert(r.cell_key()).second) existing.push_back(std::move(r));
            }
        }
        state.completed = done.size();
        progress(std::string("condition ") + to_string(cid) + ": " +
                 std::to_string(done.size()) + "/" + std::to_string(expected_cells()) +
                 " cells persisted");

        std::unique_ptr<Backend> backend = make_backend(pipeline);
        state.backend_id = backend->id();
        WorkflowOptions wopts;
        wopts.memory_enabled = pipeline.memory_enabled;
        wopts.ccd_enabled = pipeline.ccd_enabled;
        wopts.now = run_.config.reference_time;
        wopts.generation = pipeline.generation;
        WorkflowEngine engine(*backend, &store, wopts);

        std::vector<AgentRuntime> roster;
        roster.reserve(run_.roster.size());
        for (const auto& p : run_.roster) {
            auto it = run_.ccds.find(p.agent_id);
            roster.emplace_back(p, it == run_.ccds.end()
                                       ? std::optional<CcdModel>{}
                                       : std::optional<CcdModel>{it->second});
        }

        BatteryOptions bopts;
        bopts.parallelism = run_.config.parallelism;
        bopts.retry_budget = run_.config.retry_budget;
        bopts.scorer = &scorer;
        bopts.skip_cells = done;
        std::ofstream append(path, std::ios::binary | std::ios::app);
        if (!append) throw StorageError("cannot open " + path.string());
        bopts.on_record = [&](const ResponseRecord& r) {
            append << r.to_json().dump() << "\n";
            append.flush();
            ++generation_calls_;
            state.completed += 1;
        };

        std::vector<ResponseRecord> fresh;
        try {
            fresh = administer_battery(roster, run_.scenarios, run_.config.repetitions, pipeline,
                                       run_.config.global_seed, engine, bopts);
        } catch (const IncompleteRunError&) {
            manifest.updated_at = wall_clock_ms();
            write_text_file(manifest_path(), dump_canonical(manifest.to_json()));
            throw;
        }
        append.close();

        ConditionDataset cd;
        cd.id = cid;
        cd.records = std::move(existing);
        cd.records.insert(cd.records.end(), fresh.begin(), fresh.end());
        sort_records(cd.records);
        if (cd.records.size() != expected_cells())
            throw IncompleteRunError(std::string("condition \"") + to_string(cid) + "\" has " +
                                         std::to_string(cd.records.size()) + " of " +
                                         std::to_string(expected_cells()) + " cells",
                                     {});

        // Finalize: rewrite the table sorted so reruns are byte-identical.
        std::ostringstream sorted;
        for (const auto& r : cd.records) sorted << r.to_json().dump() << "\n";
        write_text_file(path, sorted.str());
        manifest.checksums[file] = hex64(fnv1a64(sorted.str()));
        state.completed = cd.records.size();
        state.total = expected_cells();
        state.complete = true;

        cd.matrix = build_score_matrix(cd.records);
        cd.reliability =
            compute_reliability(cd.matrix, run_.roster, scorer.id(), run_.config.global_seed);
        cd.data = data_characteristics(cd.records, cd.matrix);
        progress(std::string("condition ") + to_string(cid) + ": complete (" +
                 std::to_string(cd.records.size()) + " records, mean alpha " +
                 format_fixed(cd.reliability.alpha.mean, 3) + ")");
        return cd;
    }

    void progress(const std::string& msg) {
        if (progress_) progress_(msg);
    }

    LoadedRun run_;
    std::filesystem::path out_dir_;
    BackendFactory backend_factory_;
    ProgressFn progress_;
    std::size_t generation_calls_ = 0;
};

}  // namespace persim

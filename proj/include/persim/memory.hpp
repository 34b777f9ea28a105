#pragma once
// Three-tier memory: a sliding-window short-term buffer, an embedded
// file-backed long-term store with four relational tables (episodic_memory,
// semantic_memory, belief_updates, dialogue_summaries), and scored context
// retrieval for prompt assembly.

#include "persim/core.hpp"
#include "persim/emotion.hpp"
#include "persim/records.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace persim {

// ---------------------------------------------------------------------------
// Short-term memory

struct DialogueTurn {
    std::string speaker;
    std::string text;
    Millis timestamp = 0;
    double importance = 0.0;  // [0, 1]

    bool operator==(const DialogueTurn&) const = default;
};

class ShortTermMemory {
public:
    explicit ShortTermMemory(std::size_t capacity = 100) : capacity_(capacity) {
        if (capacity_ < 1) throw InvalidArgument("short-term memory: capacity must be >= 1");
    }

    // FIFO with importance-based retention: when full, evict the oldest turn
    // among those with minimum importance. The turn being appended is never
    // the eviction victim.
    void append_turn(DialogueTurn turn) {
        if (!std::isfinite(turn.importance) || turn.importance < 0.0 || turn.importance > 1.0)
            throw RangeError("append_turn: importance outside [0, 1]");
        if (!turns_.empty() && turn.timestamp < turns_.back().timestamp)
            turn.timestamp = turns_.back().timestamp;  // keep order nondecreasing
        turns_.push_back(std::move(turn));
        if (turns_.size() > capacity_) {
            std::size_t victim = 0;
            for (std::size_t i = 1; i + 1 < turns_.size(); ++i)
                if (turns_[i].importance < turns_[victim].importance) victim = i;
            turns_.erase(turns_.begin() + static_cast<std::ptrdiff_t>(victim));
        }
    }

    const std::vector<DialogueTurn>& turns() const { return turns_; }
    std::size_t capacity() const { return capacity_; }

    void set_emotional_state(const EmotionVector& e) {
        emotional_state_ = e.clamped();
        emotional_trail_.push_back(emotional_state_);
    }
    const EmotionVector& emotional_state() const { return emotional_state_; }
    const std::vector<EmotionVector>& emotional_trail() const { return emotional_trail_; }

    void set_active_thoughts(std::vector<std::string> thoughts) {
        active_thoughts_ = std::move(thoughts);
    }
    const std::vector<std::string>& active_thoughts() const { return active_thoughts_; }

    void set_running_summary(std::string s) { running_summary_ = std::move(s); }
    const std::string& running_summary() const { return running_summary_; }

    json to_json() const {
        json j;
        j["capacity"] = capacity_;
        json ts = json::array();
        for (const auto& t : turns_) {
            json e;
            e["speaker"] = t.speaker;
            e["text"] = t.text;
            e["timestamp"] = t.timestamp;
            e["importance"] = t.importance;
            ts.push_back(std::move(e));
        }
        j["turns"] = std::move(ts);
        j["emotional_state"] = emotional_state_.to_json();
        j["active_thoughts"] = active_thoughts_;
        j["running_summary"] = running_summary_;
        return j;
    }

private:
    std::size_t capacity_;
    std::vector<DialogueTurn> turns_;
    EmotionVector emotional_state_;
    std::vector<EmotionVector> emotional_trail_;
    std::vector<std::string> active_thoughts_;
    std::string running_summary_;
};

// ---------------------------------------------------------------------------
// Retrieval bundle

struct ScoredEpisode {
    EpisodicRecord record;
    double score = 0.0;
};

struct ScoredFact {
    SemanticRecord record;
    double score = 0.0;
};

struct MemoryBundle {
    std::vector<ScoredEpisode> episodic;   // descending score
    std::vector<ScoredFact> semantic;      // descending score
    std::optional<DialogueSummary> latest_summary;
};

inline constexpr double kDefaultRecencyLambda = 0.01;  // per day
inline constexpr int kDefaultRetrievalK = 5;

// ---------------------------------------------------------------------------
// Long-term store. One append-only JSONL file per table; the full store is
// loaded at open, so reads are memory-speed and a reopened store sees exactly
// what was persisted. Writers flush per record.

class MemoryStore {
public:
    explicit MemoryStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw StorageError("cannot create store directory " + dir_.string() + ": " +
                                   ec.message());
        load_table("agents.jsonl", [this](const json& j) {
            agents_.insert(require_string(j, "agent_id", "agents table"));
        });
        load_table("episodic_memory.jsonl", [this](const json& j) {
            EpisodicRecord r = EpisodicRecord::from_json(j, "episodic_memory table");
            episodes_[r.memory_id] = std::move(r);
        });
        load_table("semantic_memory.jsonl", [this](const json& j) {
            SemanticRecord r = SemanticRecord::from_json(j, "semantic_memory table");
            facts_[r.fact_id] = std::move(r);
        });
        load_table("belief_updates.jsonl", [this](const json& j) {
            BeliefUpdateRecord r = BeliefUpdateRecord::from_json(j, "belief_updates table");
            belief_updates_[r.update_id] = std::move(r);
        });
        load_table("dialogue_summaries.jsonl", [this](const json& j) {
            DialogueSummary r = DialogueSummary::from_json(j, "dialogue_summaries table");
            summaries_[r.summary_id] = std::move(r);
        });
    }

    const std::filesystem::path& dir() const { return dir_; }

    void register_agent(const std::string& agent_id) {
        if (agent_id.empty()) throw SchemaError("register_agent: agent_id must be non-empty");
        if (agents_.count(agent_id)) return;
        json j;
        j["agent_id"] = agent_id;
        append_line("agents.jsonl", j);
        agents_.insert(agent_id);
    }

    bool has_agent(const std::string& agent_id) const { return agents_.count(agent_id) > 0; }

    std::vector<std::string> agents() const {
        return {agents_.begin(), agents_.end()};
    }

    std::string store_episode(EpisodicRecord rec) {
        rec.validate();
        require_agent(rec.agent_id);
        if (rec.memory_id.empty()) rec.memory_id = next_id("epi", episodes_.size());
        if (episodes_.count(rec.memory_id))
            throw DuplicateIdError("store_episode: duplicate memory_id \"" + rec.memory_id + "\"");
        append_line("episodic_memory.jsonl", rec.to_json());
        const std::string id = rec.memory_id;
        episodes_[id] = std::move(rec);
        return id;
    }

    std::string store_fact(SemanticRecord rec) {
        rec.validate();
        require_agent(rec.agent_id);
        if (rec.fact_id.empty()) rec.fact_id = next_id("fact", facts_.size());
        if (facts_.count(rec.fact_id))
            throw DuplicateIdError("store_fact: duplicate fact_id \"" + rec.fact_id + "\"");
        append_line("semantic_memory.jsonl", rec.to_json());
        const std::string id = rec.fact_id;
        facts_[id] = std::move(rec);
        return id;
    }

    std::string log_belief_update(BeliefUpdateRecord rec) {
        rec.validate();
        require_agent(rec.agent_id);
        if (rec.update_id.empty()) rec.update_id = next_id("upd", belief_updates_.size());
        if (belief_updates_.count(rec.update_id))
            throw DuplicateIdError("log_belief_update: duplicate update_id \"" + rec.update_id +
                                   "\"");
        append_line("belief_updates.jsonl", rec.to_json());
        const std::string id = rec.update_id;
        belief_updates_[id] = std::move(rec);
        return id;
    }

    std::string store_summary(DialogueSummary rec) {
        rec.validate();
        require_agent(rec.agent_id);
        if (rec.summary_id.empty()) rec.summary_id = next_id("sum", summaries_.size());
        if (summaries_.count(rec.summary_id))
            throw DuplicateIdError("store_summary: duplicate summary_id \"" + rec.summary_id +
                                   "\"");
        append_line("dialogue_summaries.jsonl", rec.to_json());
        const std::string id = rec.summary_id;
        summaries_[id] = std::move(rec);
        return id;
    }

    std::optional<EpisodicRecord> fetch_episode(const std::string& id) const {
        auto it = episodes_.find(id);
        if (it == episodes_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<SemanticRecord> fetch_fact(const std::string& id) const {
        auto it = facts_.find(id);
        if (it == facts_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<BeliefUpdateRecord> fetch_belief_update(const std::string& id) const {
        auto it = belief_updates_.find(id);
        if (it == belief_updates_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<DialogueSummary> fetch_summary(const std::string& id) const {
        auto it = summaries_.find(id);
        if (it == summaries_.end()) return std::nullopt;
        return it->second;
    }

    // Episodic rank: importance x exp(-lambda * age_days), newest first on
    // ties, then id order. Semantic rank: confidence over the categories that
    // match the scenario tags (all categories when none match).
    MemoryBundle retrieve_context(const std::string& agent_id,
                                  const std::set<std::string>& scenario_tags, Millis now,
                                  int k, double recency_lambda = kDefaultRecencyLambda) const {
        require_agent(agent_id);
        if (k < 0) throw InvalidArgument("retrieve_context: k must be >= 0");
        MemoryBundle bundle;

        std::vector<ScoredEpisode> episodes;
        for (const auto& [id, rec] : episodes_) {
            if (rec.agent_id != agent_id) continue;
            const double age_days =
                static_cast<double>(now - rec.event_time) / kMillisPerDay;
            episodes.push_back({rec, rec.importance * std::exp(-recency_lambda * age_days)});
        }
        std::sort(episodes.begin(), episodes.end(), [](const ScoredEpisode& a, const ScoredEpisode& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.record.event_time != b.record.event_time)
                return a.record.event_time > b.record.event_time;
            return a.record.memory_id < b.record.memory_id;
        });
        if (episodes.size() > static_cast<std::size_t>(k)) episodes.resize(k);
        bundle.episodic = std::move(episodes);

        std::vector<ScoredFact> facts;
        bool any_category_match = false;
        for (const auto& [id, rec] : facts_) {
            if (rec.agent_id != agent_id) continue;
            if (scenario_tags.count(rec.category)) {
                any_category_match = true;
                break;
            }
        }
        for (const auto& [id, rec] : facts_) {
            if (rec.agent_id != agent_id) continue;
            if (any_category_match && !scenario_tags.count(rec.category)) continue;
            facts.push_back({rec, rec.confidence});
        }
        std::sort(facts.begin(), facts.end(), [](const ScoredFact& a, const ScoredFact& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.record.updated_at != b.record.updated_at)
                return a.record.updated_at > b.record.updated_at;
            return a.record.fact_id < b.record.fact_id;
        });
        if (facts.size() > static_cast<std::size_t>(k)) facts.resize(k);
        bundle.semantic = std::move(facts);

        const DialogueSummary* latest = nullptr;
        for (const auto& [id, rec] : summaries_) {
            if (rec.agent_id != agent_id) continue;
            if (!latest || rec.created_at > latest->created_at ||
                (rec.created_at == latest->created_at && rec.summary_id > latest->summary_id))
                latest = &rec;
        }
        if (latest) bundle.latest_summary = *latest;
        return bundle;
    }

    // Single-document dump of everything known about one agent; fixture and
    // debugging aid.
    std::string export_agent_dump(const std::string& agent_id) const {
        require_agent(agent_id);
        json j;
        j["agent_id"] = agent_id;
        json epi = json::array(), sem = json::array(), upd = json::array(), sum = json::array();
        for (const auto& [id, rec] : episodes_)
            if (rec.agent_id == agent_id) epi.push_back(rec.to_json());
        for (const auto& [id, rec] : facts_)
            if (rec.agent_id == agent_id) sem.push_back(rec.to_json());
        for (const auto& [id, rec] : belief_updates_)
            if (rec.agent_id == agent_id) upd.push_back(rec.to_json());
        for (const auto& [id, rec] : summaries_)
            if (rec.agent_id == agent_id) sum.push_back(rec.to_json());
        j["episodic_memory"] = std::move(epi);
        j["semantic_memory"] = std::move(sem);
        j["belief_updates"] = std::move(upd);
        j["dialogue_summaries"] = std::move(sum);
        return dump_canonical(j);
    }

private:
    void require_agent(const std::string& agent_id) const {
        if (!agents_.count(agent_id))
            throw UnknownAgentError("memory store: unknown agent \"" + agent_id + "\"");
    }

    std::string next_id(const char* prefix, std::size_t count) const {
        // Sequential ids; skip over ids already taken by explicit callers.
        for (std::size_t n = count + 1;; ++n) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_%06zu", prefix, n);
            std::string candidate = buf;
            if (!episodes_.count(candidate) && !facts_.count(candidate) &&
                !belief_updates_.count(candidate) && !summaries_.count(candidate))
                return candidate;
        }
    }

    template <typename Fn>
    void load_table(const char* file, Fn&& consume) {
        const auto path = dir_ / file;
        if (!std::filesystem::exists(path)) return;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw StorageError("cannot open table " + path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw StorageError("corrupt record at " + path.string() + ":" +
                                   std::to_string(line_no));
            consume(j);
        }
    }

    void append_line(const char* file, const json& j) {
        const auto path = dir_ / file;
        std::ofstream out(path, std::ios::binary | std::ios::app);
        if (!out) throw StorageError("cannot open table for append: " + path.string());
        out << j.dump() << "\n";
        out.flush();
        if (!out) throw StorageError("write failed on table: " + path.string());
    }

    std::filesystem::path dir_;
    std::set<std::string> agents_;
    std::map<std::string, EpisodicRecord> episodes_;
    std::map<std::string, SemanticRecord> facts_;
    std::map<std::string, BeliefUpdateRecord> belief_updates_;
    std::map<std::string, DialogueSummary> summaries_;
};

// ---------------------------------------------------------------------------
// Session summarization

struct SessionInfo {
    std::string session_id;
    std::string agent_id;
    std::vector<std::string> tags_seen;  // scenario tags, in first-seen order
    Millis created_at = 0;
};

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual DialogueSummary summarize(const ShortTermMemory& stm, const SessionInfo& info) = 0;
    virtual std::string id() const = 0;
};

// Extractive default: the top-3 turns by importance, emitted in original
// order; runs offline and deterministically.
class ExtractiveSummarizer final : public Summarizer {
public:
    DialogueSummary summarize(const ShortTermMemory& stm, const SessionInfo& info) override {
        if (stm.turns().empty())
            throw EmptySessionError("summarize_session: short-term memory has no turns");
        std::vector<std::size_t> order(stm.turns().size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return stm.turns()[a].importance > stm.turns()[b].importance;
        });
        order.resize(std::min<std::size_t>(3, order.size()));
        std::sort(order.begin(), order.end());

        DialogueSummary s;
        s.session_id = info.session_id;
        s.agent_id = info.agent_id;
        std::string text;
        for (std::size_t idx : order) {
            if (!text.empty()) text += " ";
            text += stm.turns()[idx].text;
        }
        s.summary = std::move(text);
        std::set<std::string> seen;
        for (const auto& tag : info.tags_seen)
            if (seen.insert(tag).second) s.key_topics.push_back(tag);
        s.emotional_trajectory = stm.emotional_trail();
        s.created_at = info.created_at;
        return s;
    }

    std::string id() const override { return "extractive"; }
};

inline DialogueSummary summarize_session(const ShortTermMemory& stm, Summarizer& summarizer,
                                         const SessionInfo& info) {
    return summarizer.summarize(stm, info);
}

// ---------------------------------------------------------------------------
// Prompt rendering

inline std::string render_memory_block(const MemoryBundle& bundle) {
    std::ostringstream out;
    out << "[MEMORY]\n";
    out << "Episodic memories:\n";
    if (bundle.episodic.empty()) {
        out << "- none\n";
    } else {
        for (const auto& e : bundle.episodic)
            out << "- (" << format_timestamp(e.record.event_time).substr(0, 10) << ") "
                << e.record.content << " [importance " << format_fixed(e.record.importance, 2)
                << "]\n";
    }
    out << "Known facts:\n";
    if (bundle.semantic.empty()) {
        out << "- none\n";
    } else {
        for (const auto& f : bundle.semantic)
            out << "- [" << f.record.category << "] " << f.record.content << " (confidence "
                << format_fixed(f.record.confidence, 2) << ")\n";
    }
    out << "Last session summary:\n";
    if (bundle.latest_summary) {
        out << bundle.latest_summary->summary << "\n";
    } else {
        out << "- none\n";
    }
    out << "[/MEMORY]";
    return out.str();
}

}  // namespace persim

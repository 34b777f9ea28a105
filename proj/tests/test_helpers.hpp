#pragma once
// Shared test scaffolding: fixture paths, temp directories, tiny builders.

#include <persim/persim.hpp>

#include <filesystem>
#include <random>
#include <string>

#ifndef PERSIM_FIXTURE_DIR
#define PERSIM_FIXTURE_DIR "fixtures"
#endif
#ifndef PERSIM_CONFIG_DIR
#define PERSIM_CONFIG_DIR "configs"
#endif

namespace testutil {

inline std::filesystem::path fixture_dir() { return PERSIM_FIXTURE_DIR; }
inline std::filesystem::path config_dir() { return PERSIM_CONFIG_DIR; }

inline std::filesystem::path fixture(const std::string& rel) { return fixture_dir() / rel; }

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("persim_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline persim::AgentProfile minimal_profile(const std::string& id = "agent_min") {
    persim::AgentProfile p;
    p.agent_id = id;
    p.demographics = {"unspecified", 0, "unspecified", "unspecified", "unspecified",
                      "unspecified", "unspecified", 0, "unspecified"};
    p.health_status = {{}, "normal", "independent", "moderate"};
    p.personality = {3.0, 3.0, 3.0, 3.0, 3.0};
    p.social_context = {"moderate", "moderate", {}};
    return p;
}

inline persim::AgentProfile listing_profile() {
    return persim::load_profile_file(fixture("profiles/elderly_patient_001.json"));
}

inline persim::OceanVector random_ocean(std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(1.0, 5.0);
    persim::OceanVector v;
    for (std::size_t d = 0; d < persim::kOceanDims; ++d) v[d] = dist(rng);
    return v;
}

inline persim::AgentProfile random_profile(std::mt19937& rng, int index) {
    std::uniform_int_distribution<int> age(0, 99);
    std::uniform_int_distribution<int> children(0, 6);
    std::uniform_int_distribution<int> n_rules(0, 4);
    std::uniform_int_distribution<int> n_cond(0, 3);
    persim::AgentProfile p = minimal_profile("agent_" + std::to_string(index));
    p.demographics.age = age(rng);
    p.demographics.children = children(rng);
    p.demographics.name = "Agent " + std::to_string(index);
    for (int i = 0, n = n_cond(rng); i < n; ++i)
        p.health_status.chronic_conditions.push_back("condition_" + std::to_string(i));
    for (int i = 0, n = n_rules(rng); i < n; ++i)
        p.behavior_constraints.push_back("rule " + std::to_string(i));
    p.personality = random_ocean(rng);
    if (rng() % 2 == 0)
        p.role_type = {persim::RoleCategory::healthcare_provider, "nurse", std::nullopt};
    return p;
}

inline persim::ItemMatrix matrix_from(std::initializer_list<std::initializer_list<double>> rows) {
    persim::ItemMatrix m;
    std::size_t cols = rows.begin()->size();
    m.data.reserve(rows.size() * cols);
    std::size_t r = 0;
    for (const auto& row : rows) {
        m.row_labels.push_back("r" + std::to_string(r++));
        for (double v : row) m.data.push_back(v);
    }
    for (std::size_t c = 0; c < cols; ++c) m.col_labels.push_back("c" + std::to_string(c));
    return m;
}

}  // namespace testutil

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codetopics/evaluation.hpp"

namespace codetopics {

// Inclusive numeric range with a deterministic expansion (start + i*step).
std::vector<double> expand_range(double start, double stop, double step);
std::vector<int> expand_int_range(int start, int stop);

// Flat key/value config with [sections] mirroring the module names. All
// defaults reproduce the hyperparameter grid the tool searches out of the box.
struct PipelineConfig {
    // [corpus]
    std::string corpus_dir;
    std::string external_corpus_dir;

    // [tokenizer]
    std::string tokenizer_mode = "augmented";  // or "standard"
    std::string rules_path;                    // empty: built-in table

    // [grid]
    GridConfig grid = GridConfig::defaults();
    int repeats = 10;
    std::uint64_t base_seed = 42;
    int workers = 1;
    int top_k = 2;

    // [selection]
    int min_docs = 3;
    std::vector<std::vector<int>> merges;  // 0-based topic ids

    // [report]
    double lambda = 0.6;
    int top_n = 30;
    double percentile = 75.0;
    std::uint64_t intruder_seed = 7;

    static PipelineConfig load(const std::string& path);

    // Parses values like "2+4;7+9" (1-based topic ids).
    static std::vector<std::vector<int>> parse_merges(const std::string& text);

    // Canonical serialization used for the manifest's config hash.
    std::string canonical() const;
};

}  // namespace codetopics

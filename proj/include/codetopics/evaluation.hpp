#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "codetopics/factorization.hpp"

namespace codetopics {

// Document-level presence counts. Pair counts are evaluated lazily from
// per-term presence bitsets.
class CooccurrenceStats {
public:
    CooccurrenceStats() = default;
    explicit CooccurrenceStats(const std::vector<TokenDoc>& docs);
    explicit CooccurrenceStats(const DocTermMatrix& m);

    int n_docs() const { return n_docs_; }
    int doc_freq(const std::string& term) const;
    int pair_freq(const std::string& a, const std::string& b) const;
    double p(const std::string& term) const;
    double p(const std::string& a, const std::string& b) const;

private:
    int n_docs_ = 0;
    int n_words_ = 0;  // bitset words per term
    std::map<std::string, std::vector<std::uint64_t>> presence_;
};

constexpr double kCoherenceEpsilon = 0.01;

struct CoherenceResult {
    double value = 0.0;
    int pairs_used = 0;
    int pairs_skipped = 0;
};

// Sum over ordered pairs i != j of ln((P(wi,wj) + eps) / P(wi)). Pairs whose
// first term never occurs are skipped and counted.
CoherenceResult umass_coherence(const std::vector<std::string>& top_terms,
                                const CooccurrenceStats& stats, int n);

// NPMI = ln((P(wi,wj)+eps) / (P(wi)P(wj))) / -ln(P(wi,wj)+eps); undefined when
// P(wi)P(wj) = 0 (pair skipped).
double npmi(const std::string& wi, const std::string& wj, const CooccurrenceStats& stats);
CoherenceResult uci_npmi_coherence(const std::vector<std::string>& top_terms,
                                   const CooccurrenceStats& stats, int n);

enum class CoherenceMetric { Umass, UciNpmi };

struct ModelCoherence {
    double median = 0.0;
    std::vector<double> per_topic;   // scored topics only
    std::vector<int> skipped_topics; // topics with no valid pair
};

// Per-topic top-N terms by topic_term weight; combination score is the median
// of per-topic coherences (even count: mean of the middle two).
ModelCoherence model_coherence(const TopicModel& model, const CooccurrenceStats& stats,
                               int n, CoherenceMetric metric = CoherenceMetric::Umass);

// Ranked term lists straight from topic_term weights (ties: term index).
std::vector<std::string> topic_top_terms(const TopicModel& model, int topic, int n);

struct HyperParams {
    double min_df = 0.05;
    bool binary = false;
    Weighting vectorizer = Weighting::Count;  // count, tfidf or ncut
    Method method = Method::Nmf;
    int k = 2;

    std::string to_string() const;
};

struct GridConfig {
    std::vector<double> min_df_values;
    std::vector<bool> binary_values;
    std::vector<Weighting> vectorizers;
    std::vector<Method> methods;
    int k_min = 2;
    int k_max = 15;

    // 10 min-DF x 2 binary x 3 vectorizers x 2 methods x 14 k = 1680 points.
    static GridConfig defaults();
};

std::vector<HyperParams> enumerate_grid(const GridConfig& config);

struct RunScore {
    std::uint64_t seed = 0;
    double c5 = 0.0;
    double c10 = 0.0;
};

struct GridResult {
    HyperParams params;
    int runs = 0;
    double mean_c5 = 0.0, std_c5 = 0.0;
    double mean_c10 = 0.0, std_c10 = 0.0;
    std::vector<RunScore> per_run;
    std::string error;  // non-empty when the point failed

    bool failed() const { return !error.empty(); }
};

// Fits every grid point `repeats` times with seeds base_seed..base_seed+r-1
// and scores each run with UMass c5/c10 on the training-corpus statistics.
// Failures are recorded per point; the grid keeps going. Results are ordered
// by grid position regardless of worker count.
std::vector<GridResult> run_grid(const std::vector<TokenDoc>& docs,
                                 const std::vector<HyperParams>& grid, int repeats,
                                 std::uint64_t base_seed, int workers = 1);

struct RankedItem {
    int id = 0;
    double score = 0.0;
};

// Fagin's original algorithm over two descending lists covering the same id
// set: alternate sorted access until k ids were seen in both lists, then
// random-access every seen id and aggregate by the mean of the two scores.
// Ties break toward the lower id.
std::vector<RankedItem> fagin_topk(const std::vector<RankedItem>& list_a,
                                   const std::vector<RankedItem>& list_b, int k);

struct MannWhitneyResult {
    double u = 0.0;           // U statistic of the first sample
    double p_two_sided = 1.0;
    bool exact = false;
};

// Rank-sum U with midrank ties. Exact permutation p when n_a + n_b <= 16,
// otherwise normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b);

}  // namespace codetopics

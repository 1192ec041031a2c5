#include "codetopics/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "codetopics/errors.hpp"

namespace codetopics {

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CooccurrenceStats::CooccurrenceStats(const std::vector<TokenDoc>& docs) {
    if (docs.empty()) throw EmptyCorpusError("no documents for co-occurrence statistics");
    n_docs_ = static_cast<int>(docs.size());
    n_words_ = (n_docs_ + 63) / 64;
    for (int i = 0; i < n_docs_; ++i) {
        for (const auto& tok : docs[i].tokens) {
            auto& bits = presence_[tok.lexeme];
            if (bits.empty()) bits.assign(n_words_, 0);
            bits[i / 64] |= (std::uint64_t{1} << (i % 64));
        }
    }
}

CooccurrenceStats::CooccurrenceStats(const DocTermMatrix& m) {
    if (m.n_docs() == 0) throw EmptyCorpusError("empty matrix for co-occurrence statistics");
    n_docs_ = m.n_docs();
    n_words_ = (n_docs_ + 63) / 64;
    for (int i = 0; i < m.entries.outerSize(); ++i) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.entries, i);
             it; ++it) {
            if (it.value() == 0.0) continue;
            auto& bits = presence_[m.vocab.terms[it.col()]];
            if (bits.empty()) bits.assign(n_words_, 0);
            bits[i / 64] |= (std::uint64_t{1} << (i % 64));
        }
    }
}

int CooccurrenceStats::doc_freq(const std::string& term) const {
    auto it = presence_.find(term);
    if (it == presence_.end()) return 0;
    int count = 0;
    for (std::uint64_t w : it->second) count += std::popcount(w);
    return count;
}

int CooccurrenceStats::pair_freq(const std::string& a, const std::string& b) const {
    auto ia = presence_.find(a);
    auto ib = presence_.find(b);
    if (ia == presence_.end() || ib == presence_.end()) return 0;
    int count = 0;
    for (int w = 0; w < n_words_; ++w) {
        count += std::popcount(ia->second[w] & ib->second[w]);
    }
    return count;
}

double CooccurrenceStats::p(const std::string& term) const {
    return static_cast<double>(doc_freq(term)) / n_docs_;
}

double CooccurrenceStats::p(const std::string& a, const std::string& b) const {
    return static_cast<double>(pair_freq(a, b)) / n_docs_;
}

CoherenceResult umass_coherence(const std::vector<std::string>& top_terms,
                                const CooccurrenceStats& stats, int n) {
    n = std::min<int>(n, static_cast<int>(top_terms.size()));
    CoherenceResult result;
    for (int i = 0; i < n; ++i) {
        const double pi = stats.p(top_terms[i]);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (pi == 0.0) {
                ++result.pairs_skipped;
                continue;
            }
            const double joint = stats.p(top_terms[i], top_terms[j]);
            result.value += std::log((joint + kCoherenceEpsilon) / pi);
            ++result.pairs_used;
        }
    }
    if (n > 1 && result.pairs_used == 0) {
        throw NoValidPairsError("every UMass pair was skipped");
    }
    return result;
}

double npmi(const std::string& wi, const std::string& wj, const CooccurrenceStats& stats) {
    const double pi = stats.p(wi);
    const double pj = stats.p(wj);
    if (pi * pj == 0.0) {
        throw NoValidPairsError("NPMI undefined: P(wi)P(wj) = 0");
    }
    const double joint = stats.p(wi, wj) + kCoherenceEpsilon;
    return std::log(joint / (pi * pj)) / -std::log(joint);
}

CoherenceResult uci_npmi_coherence(const std::vector<std::string>& top_terms,
                                   const CooccurrenceStats& stats, int n) {
    n = std::min<int>(n, static_cast<int>(top_terms.size()));
    CoherenceResult result;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (stats.p(top_terms[i]) * stats.p(top_terms[j]) == 0.0) {
                ++result.pairs_skipped;  // UndefinedNPMI: pair skipped
                continue;
            }
            result.value += npmi(top_terms[i], top_terms[j], stats);
            ++result.pairs_used;
        }
    }
    if (n > 1 && result.pairs_used == 0) {
        throw NoValidPairsError("every NPMI pair was undefined");
    }
    return result;
}

std::vector<std::string> topic_top_terms(const TopicModel& model, int topic, int n) {
    const int v = static_cast<int>(model.terms.size());
    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return model.topic_term(topic, a) > model.topic_term(topic, b);
    });
    std::vector<std::string> terms;
    for (int j = 0; j < std::min(n, v); ++j) terms.push_back(model.terms[order[j]]);
    return terms;
}

ModelCoherence model_coherence(const TopicModel& model, const CooccurrenceStats& stats,
                               int n, CoherenceMetric metric) {
    ModelCoherence result;
    for (int t = 0; t < model.k; ++t) {
        const std::vector<std::string> terms = topic_top_terms(model, t, n);
        try {
            const CoherenceResult c = metric == CoherenceMetric::Umass
                                          ? umass_coherence(terms, stats, n)
                                          : uci_npmi_coherence(terms, stats, n);
            result.per_topic.push_back(c.value);
        } catch (const NoValidPairsError&) {
            result.skipped_topics.push_back(t);
        }
    }
    if (result.per_topic.empty()) {
        throw NoValidPairsError("no topic produced a valid coherence score");
    }
    result.median = median_of(result.per_topic);
    return result;
}

std::string HyperParams::to_string() const {
    std::ostringstream ss;
    ss << "min_df=" << min_df << " binary=" << (binary ? "true" : "false")
       << " vectorizer=" << weighting_name(vectorizer) << " method=" << method_name(method)
       << " k=" << k;
    return ss.str();
}

GridConfig GridConfig::defaults() {
    GridConfig config;
    // same expression the config range parser uses, so the doubles agree
    for (int i = 0; i < 10; ++i) config.min_df_values.push_back(0.05 + i * 0.05);
    config.binary_values = {false, true};
    config.vectorizers = {Weighting::Count, Weighting::Tfidf, Weighting::Ncut};
    config.methods = {Method::Nmf, Method::Lda};
    config.k_min = 2;
    config.k_max = 15;
    return config;
}

std::vector<HyperParams> enumerate_grid(const GridConfig& config) {
    std::vector<HyperParams> grid;
    for (double min_df : config.min_df_values) {
        for (bool binary : config.binary_values) {
            for (Weighting vec : config.vectorizers) {
                for (Method method : config.methods) {
                    for (int k = config.k_min; k <= config.k_max; ++k) {
                        grid.push_back(HyperParams{min_df, binary, vec, method, k});
                    }
                }
            }
        }
    }
    return grid;
}

namespace {

struct PreparedMatrix {
    DocTermMatrix matrix;
    std::string error;
};

// min_df/binary/vectorizer combinations are shared across many grid points;
// build each needed matrix once.
std::map<std::tuple<double, bool, Weighting>, PreparedMatrix> prepare_matrices(
    const std::vector<TokenDoc>& docs, const std::vector<HyperParams>& grid) {
    std::map<std::tuple<double, bool, Weighting>, PreparedMatrix> cache;
    std::map<double, std::pair<Vocabulary, std::string>> vocabs;
    std::map<std::pair<double, bool>, DocTermMatrix> bases;
    for (const auto& p : grid) {
        const auto key = std::make_tuple(p.min_df, p.binary, p.vectorizer);
        if (cache.count(key)) continue;
        PreparedMatrix prepared;
        try {
            if (!vocabs.count(p.min_df)) {
                try {
                    vocabs[p.min_df] = {build_vocabulary(docs, p.min_df), ""};
                } catch (const std::exception& e) {
                    vocabs[p.min_df] = {Vocabulary{}, e.what()};
                }
            }
            const auto& [vocab, vocab_error] = vocabs[p.min_df];
            if (!vocab_error.empty()) throw AllTermsFilteredError(vocab_error);

            const auto base_key = std::make_pair(p.min_df, p.binary);
            if (!bases.count(base_key)) {
                bases[base_key] = build_matrix(docs, vocab, p.binary);
            }
            switch (p.vectorizer) {
                case Weighting::Count:
                case Weighting::Binary:
                    prepared.matrix = bases[base_key];
                    break;
                case Weighting::Tfidf:
                    prepared.matrix = weight_tfidf(bases[base_key]);
                    break;
                case Weighting::Ncut:
                    prepared.matrix = weight_ncut(bases[base_key]);
                    break;
            }
        } catch (const std::exception& e) {
            prepared.error = e.what();
        }
        cache.emplace(key, std::move(prepared));
    }
    return cache;
}

void summarize(GridResult& result) {
    const int n = static_cast<int>(result.per_run.size());
    result.runs = n;
    if (n == 0) return;
    double m5 = 0.0, m10 = 0.0;
    for (const auto& r : result.per_run) {
        m5 += r.c5;
        m10 += r.c10;
    }
    m5 /= n;
    m10 /= n;
    double v5 = 0.0, v10 = 0.0;
    for (const auto& r : result.per_run) {
        v5 += (r.c5 - m5) * (r.c5 - m5);
        v10 += (r.c10 - m10) * (r.c10 - m10);
    }
    result.mean_c5 = m5;
    result.std_c5 = std::sqrt(v5 / n);  // population std
    result.mean_c10 = m10;
    result.std_c10 = std::sqrt(v10 / n);
}

}  // namespace

std::vector<GridResult> run_grid(const std::vector<TokenDoc>& docs,
                                 const std::vector<HyperParams>& grid, int repeats,
                                 std::uint64_t base_seed, int workers) {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    const CooccurrenceStats stats(docs);
    const auto matrices = prepare_matrices(docs, grid);

    std::vector<GridResult> results(grid.size());
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            GridResult& result = results[i];
            result.params = grid[i];
            const auto& prepared =
                matrices.at(std::make_tuple(grid[i].min_df, grid[i].binary, grid[i].vectorizer));
            if (!prepared.error.empty()) {
                result.error = prepared.error;
                continue;
            }
            try {
                for (int r = 0; r < repeats; ++r) {
                    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
                    const TopicModel model =
                        grid[i].method == Method::Nmf
                            ? fit_nmf(prepared.matrix, grid[i].k, seed)
                            : fit_lda(prepared.matrix, grid[i].k, seed);
                    RunScore score;
                    score.seed = seed;
                    score.c5 = model_coherence(model, stats, 5).median;
                    score.c10 = model_coherence(model, stats, 10).median;
                    result.per_run.push_back(score);
                }
            } catch (const std::exception& e) {
                result.error = e.what();
            }
            summarize(result);
        }
    };

    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return results;
}

std::vector<RankedItem> fagin_topk(const std::vector<RankedItem>& list_a,
                                   const std::vector<RankedItem>& list_b, int k) {
    if (list_a.size() != list_b.size()) {
        throw std::invalid_argument("fagin_topk: lists must rank the same id set");
    }
    const int n = static_cast<int>(list_a.size());
    if (k > n) throw KTooLargeError("fagin_topk: k exceeds the number of items");
    if (k <= 0) return {};

    auto sorted_desc = [](std::vector<RankedItem> v) {
        std::sort(v.begin(), v.end(), [](const RankedItem& x, const RankedItem& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.id < y.id;
        });
        return v;
    };
    const std::vector<RankedItem> a = sorted_desc(list_a);
    const std::vector<RankedItem> b = sorted_desc(list_b);

    std::unordered_map<int, double> score_a, score_b;
    score_a.reserve(n);
    score_b.reserve(n);
    for (const auto& item : list_a) score_a[item.id] = item.score;
    for (const auto& item : list_b) score_b[item.id] = item.score;

    // Sorted access phase: alternate lists until k ids were seen in both.
    std::unordered_set<int> seen_a, seen_b;
    std::vector<int> seen_order;
    int in_both = 0;
    for (int depth = 0; depth < n && in_both < k; ++depth) {
        for (const auto* list : {&a, &b}) {
            const RankedItem& item = (*list)[depth];
            auto& mine = list == &a ? seen_a : seen_b;
            auto& other = list == &a ? seen_b : seen_a;
            if (mine.insert(item.id).second && !other.count(item.id)) {
                seen_order.push_back(item.id);
            }
            if (mine.count(item.id) && other.count(item.id)) ++in_both;
        }
    }

    // Random access for every seen id, then rank by the mean of both scores.
    std::vector<RankedItem> aggregated;
    for (int id : seen_order) {
        aggregated.push_back(RankedItem{id, 0.5 * (score_a.at(id) + score_b.at(id))});
    }
    std::sort(aggregated.begin(), aggregated.end(),
              [](const RankedItem& x, const RankedItem& y) {
                  if (x.score != y.score) return x.score > y.score;
                  return x.id < y.id;
              });
    aggregated.resize(std::min<std::size_t>(aggregated.size(), k));
    return aggregated;
}

namespace {

// Midranks over the pooled sample, doubled so ties stay integral.
std::vector<long long> doubled_midranks(const std::vector<double>& pooled) {
    const int n = static_cast<int>(pooled.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return pooled[i] < pooled[j]; });
    std::vector<long long> rank2(n, 0);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const long long doubled = (i + 1) + (j + 1);  // lo + hi of the 1-based range
        for (int t = i; t <= j; ++t) rank2[order[t]] = doubled;
        i = j + 1;
    }
    return rank2;
}

double normal_two_sided_p(double z) {
    return std::erfc(z / std::sqrt(2.0));
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b) {
    if (sample_a.empty() || sample_b.empty()) {
        throw std::invalid_argument("mann_whitney_u: samples must be non-empty");
    }
    const int na = static_cast<int>(sample_a.size());
    const int nb = static_cast<int>(sample_b.size());
    const int n = na + nb;

    std::vector<double> pooled = sample_a;
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    if (std::all_of(pooled.begin(), pooled.end(),
                    [&](double v) { return v == pooled[0]; })) {
        throw DegenerateSamplesError("all values identical across both samples");
    }

    const std::vector<long long> rank2 = doubled_midranks(pooled);
    long long r2a = 0;
    for (int i = 0; i < na; ++i) r2a += rank2[i];
    const long long u2 = r2a - static_cast<long long>(na) * (na + 1);  // doubled U_A
    const long long mu2 = static_cast<long long>(na) * nb;             // doubled mean

    MannWhitneyResult result;
    result.u = 0.5 * static_cast<double>(u2);

    if (n <= 16) {
        // Exact permutation distribution of the doubled rank sum via DP.
        const long long max_sum = static_cast<long long>(n) * (n + 1);
        std::vector<std::vector<double>> ways(
            na + 1, std::vector<double>(max_sum + 1, 0.0));
        ways[0][0] = 1.0;
        for (int i = 0; i < n; ++i) {
            const long long r = rank2[i];
            for (int c = std::min(i + 1, na); c >= 1; --c) {
                for (long long s = max_sum; s >= r; --s) {
                    if (ways[c - 1][s - r] > 0.0) ways[c][s] += ways[c - 1][s - r];
                }
            }
        }
        const long long observed = std::llabs(u2 - mu2);
        double extreme = 0.0, total = 0.0;
        for (long long s = 0; s <= max_sum; ++s) {
            if (ways[na][s] == 0.0) continue;
            total += ways[na][s];
            const long long u2s = s - static_cast<long long>(na) * (na + 1);
            if (std::llabs(u2s - mu2) >= observed) extreme += ways[na][s];
        }
        result.p_two_sided = extreme / total;
        result.exact = true;
        return result;
    }

    // Normal approximation with tie and continuity corrections.
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            const double t = j - i + 1;
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double mu = 0.5 * na * nb;
    const double sigma2 =
        (static_cast<double>(na) * nb / 12.0) *
        ((n + 1) - tie_term / (static_cast<double>(n) * (n - 1)));
    if (sigma2 <= 0.0) {
        throw DegenerateSamplesError("zero variance rank distribution");
    }
    const double z = std::max(0.0, std::abs(result.u - mu) - 0.5) / std::sqrt(sigma2);
    result.p_two_sided = std::min(1.0, normal_two_sided_p(z));
    result.exact = false;
    return result;
}

}  // namespace codetopics

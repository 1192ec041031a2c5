#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codetopics/factorization.hpp"

namespace codetopics {

struct Assignment {
    std::vector<int> topic_of_doc;   // -1 for unassigned (all-zero weight row)
    std::vector<int> docs_per_topic; // size k
    std::vector<int> unassigned;     // flagged zero rows
};

// Argmax per doc_topic row; ties break toward the lowest topic id.
Assignment hard_assign(const TopicModel& model);

struct TopicSelection {
    std::vector<int> kept;                      // merged groups appear once, by lowest id
    std::vector<std::vector<int>> merged;       // applied merge groups
    std::vector<int> removed_empty;
    std::vector<int> removed_small;
    int min_docs = 3;
    std::vector<int> kept_docs_per_topic;       // aligned with kept (post-merge counts)
};

// Removes empty topics, applies user-declared merge groups, then removes
// topics with fewer than min_docs documents. Merged groups are counted and
// filtered as one topic.
TopicSelection filter_topics(const TopicModel& model, const Assignment& assignment,
                             int min_docs, const std::vector<std::vector<int>>& merges);

// Model with the merge groups collapsed: doc_topic columns summed; topic_term
// rows summed (NMF) or averaged and renormalized (LDA). Topic order: kept
// selection order.
TopicModel apply_selection(const TopicModel& model, const TopicSelection& selection);

struct TermImportance {
    double threshold = 0.0;                  // pct-percentile of all weights
    std::vector<std::vector<bool>> important; // [topic][term], weight > threshold
    std::vector<bool> exclusive;              // term important in exactly one topic
};

// Percentile over all topic-term weights (linear interpolation); a term is
// important when strictly above it.
TermImportance important_terms_percentile(const TopicModel& model, double pct = 75.0);

// relevance(w, t) = lambda*ln p(w|t) + (1-lambda)*ln(p(w|t)/p(w)), with the
// empirical p(w) taken from the matrix column masses.
std::vector<std::vector<std::string>> relevance_terms(const TopicModel& model,
                                                      const DocTermMatrix& matrix,
                                                      double lambda, int n);

// Pairwise Jensen-Shannon divergence (natural log) between topic-term rows.
Eigen::MatrixXd topic_distance_matrix(const TopicModel& model);

// Classical MDS: double-center -0.5*J*D^2*J, top-2 eigenpairs. Negative
// eigenvalues are clamped to zero.
struct Pcoa2d {
    Eigen::MatrixXd coords;  // k x 2
    std::vector<double> eigenvalues;
    bool clamped = false;
};
Pcoa2d pcoa_2d(const Eigen::MatrixXd& dist);

// Column-center, project on the top-2 right singular directions. Sign fixed
// so each direction's largest-magnitude loading is positive.
Eigen::MatrixXd pca_2d(const DocTermMatrix& matrix);

// Share of terms whose heaviest topic is this one (intertopic map circle
// areas), for the kept/merged model.
std::vector<double> topic_term_shares(const TopicModel& model);

struct IntruderTask {
    int task_id = 0;
    int topic = 0;                      // home topic id (original numbering)
    std::vector<std::string> member_docs;  // 3 docs from the home topic
    std::string intruder_doc;
    int intruder_topic = 0;
    std::vector<std::string> shuffled;  // presentation order of all 4 docs
    int answer_index = 0;               // index of the intruder in shuffled
};

// One task per kept topic; seeded sampling without replacement.
std::vector<IntruderTask> make_intruder_tasks(const Assignment& assignment,
                                              const TopicSelection& selection,
                                              const std::vector<std::string>& doc_ids,
                                              std::uint64_t seed);

// answers[i] = index into tasks[i].shuffled that the rater picked. A correct
// answer lands on the diagonal; a miss is charged to the column of the
// intruder's true topic. Rows are normalized over the kept topic order.
Eigen::MatrixXd score_intruder_answers(const std::vector<IntruderTask>& tasks,
                                       const std::vector<int>& answers,
                                       const TopicSelection& selection);

}  // namespace codetopics

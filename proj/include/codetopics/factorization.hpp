#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "codetopics/corpus.hpp"

namespace codetopics {

enum class Method { Nmf, Lda };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct FitDiagnostics {
    double objective = 0.0;  // final Frobenius residual (NMF) or ELBO (LDA)
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // one value per iteration/pass
};

struct TopicModel {
    Method method = Method::Nmf;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> doc_ids;
    std::vector<std::string> terms;
    Eigen::MatrixXd doc_topic;   // docs x k (W for NMF, normalized gamma for LDA)
    Eigen::MatrixXd topic_term;  // k x terms (H for NMF, expected beta for LDA)
    FitDiagnostics diagnostics;
};

struct NmfOptions {
    int max_iterations = 200;
    double tolerance = 1e-4;  // relative objective improvement
};

struct LdaOptions {
    int max_passes = 100;
    double tolerance = 1e-3;  // relative ELBO change between passes
    int max_doc_iterations = 100;
    double doc_tolerance = 1e-5;  // mean absolute gamma change
};

// ||D - WH||_F minimized by multiplicative updates; W rows are seeded from
// hashed doc ids so permuting documents permutes the factors with them.
TopicModel fit_nmf(const DocTermMatrix& m, int k, std::uint64_t seed,
                   const NmfOptions& opts = {});

// Mean-field variational inference with symmetric priors alpha = eta = 1/k.
// Accepts fractional pseudo-counts, so it composes with TF-IDF/NCut weighting.
TopicModel fit_lda(const DocTermMatrix& m, int k, std::uint64_t seed,
                   const LdaOptions& opts = {});

struct InferResult {
    Eigen::MatrixXd doc_topic;
    std::vector<int> zero_rows;  // rows with no in-vocabulary mass
};

// Fold-in: topic_term held fixed. NMF solves a nonnegative least-squares
// problem per row; LDA runs per-document variational updates.
InferResult infer_new_docs(const TopicModel& model, const DocTermMatrix& m_new);

struct ClusterModel {
    int k = 0;
    Eigen::MatrixXd centroids;  // k x terms
    std::vector<int> labels;    // doc -> cluster
    std::vector<std::vector<std::string>> top_terms;  // filled by logreg ranking
    double inertia = 0.0;
    int iterations = 0;
};

// Lloyd's algorithm from k-means++ style seeding.
ClusterModel fit_kmeans(const DocTermMatrix& m, int k, std::uint64_t seed);

// One-vs-rest L2-regularized logistic regression; a cluster's top terms are
// the largest positive coefficients.
std::vector<std::vector<std::string>> cluster_top_terms_logreg(const DocTermMatrix& m,
                                                               const std::vector<int>& labels,
                                                               int n_terms);

// Text export with full double precision; reload round-trips exactly.
void save_model(const TopicModel& model, const std::string& path);
TopicModel load_model(const std::string& path);

}  // namespace codetopics

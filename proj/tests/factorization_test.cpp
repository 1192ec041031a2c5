#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "codetopics/errors.hpp"
#include "codetopics/evaluation.hpp"
#include "codetopics/rng.hpp"
#include "codetopics/topics.hpp"
#include "test_support.hpp"

using namespace codetopics;

namespace {

Eigen::MatrixXd random_nonneg(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform();
    }
    return m;
}

// Two disjoint vocabulary blocks; doc i uses only its block's terms.
DocTermMatrix planted_blocks(int docs_per_block, int terms_per_block,
                             std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd d =
        Eigen::MatrixXd::Zero(2 * docs_per_block, 2 * terms_per_block);
    for (int i = 0; i < 2 * docs_per_block; ++i) {
        const int block = i < docs_per_block ? 0 : 1;
        for (int n = 0; n < 3 * terms_per_block; ++n) {
            const int j = block * terms_per_block +
                          static_cast<int>(rng.uniform_index(terms_per_block));
            d(i, j) += 1.0;
        }
    }
    return testing::make_dtm(d);
}

}  // namespace

TEST_CASE("nmf recovers an exactly factorizable matrix") {
    Rng rng(4242);
    const int k = 2;
    Eigen::MatrixXd w0(30, k), h0(k, 40);
    for (int i = 0; i < w0.rows(); ++i) {
        for (int j = 0; j < k; ++j) w0(i, j) = rng.uniform();
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < h0.cols(); ++j) h0(i, j) = rng.uniform();
    }
    const Eigen::MatrixXd d = w0 * h0;
    const auto m = testing::make_dtm(d);
    const auto model = fit_nmf(m, k, 11, NmfOptions{2000, 0.0});
    const double residual = (d - model.doc_topic * model.topic_term).norm();
    CHECK(residual <= 1e-3 * d.norm());
}

TEST_CASE("nmf k=1 reconstructs a constant matrix exactly") {
    const Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 5, 2.0);
    const auto model = fit_nmf(testing::make_dtm(d), 1, 3);
    const double residual = (d - model.doc_topic * model.topic_term).norm();
    CHECK(residual <= 1e-9 * d.norm());
}

TEST_CASE("nmf is deterministic for a fixed seed") {
    const auto m = testing::make_dtm(random_nonneg(20, 15, 9));
    const auto a = fit_nmf(m, 4, 123);
    const auto b = fit_nmf(m, 4, 123);
    CHECK((a.doc_topic - b.doc_topic).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.topic_term - b.topic_term).cwiseAbs().maxCoeff() == 0.0);
    const auto c = fit_nmf(m, 4, 124);
    CHECK((a.doc_topic - c.doc_topic).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("nmf objective is monotone non-increasing and factors stay nonnegative") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = testing::make_dtm(random_nonneg(25, 30, 100 + seed));
        const auto model = fit_nmf(m, 4, seed);
        const auto& trace = model.diagnostics.objective_trace;
        for (std::size_t t = 1; t < trace.size(); ++t) {
            CHECK(trace[t] <= trace[t - 1] * (1.0 + 1e-12));
        }
        CHECK(model.doc_topic.minCoeff() >= 0.0);
        CHECK(model.topic_term.minCoeff() >= 0.0);
    }
}

TEST_CASE("nmf rejects degenerate input") {
    const auto zero = testing::make_dtm(Eigen::MatrixXd::Zero(5, 4));
    CHECK_THROWS_AS(fit_nmf(zero, 2, 1), DegenerateMatrixError);
    Eigen::MatrixXd one_row = Eigen::MatrixXd::Zero(5, 4);
    one_row(0, 0) = 1.0;
    CHECK_THROWS_AS(fit_nmf(testing::make_dtm(one_row), 3, 1), DegenerateMatrixError);
}

TEST_CASE("nmf permutation equivariance via hashed per-document seeding") {
    const Eigen::MatrixXd d = random_nonneg(12, 9, 5);
    auto m = testing::make_dtm(d);
    const auto base = fit_nmf(m, 3, 77);

    // reverse the document order
    Eigen::MatrixXd rev = d.colwise().reverse();
    auto mr = testing::make_dtm(rev);
    for (int i = 0; i < 12; ++i) mr.rows[i] = m.rows[11 - i];
    const auto flipped = fit_nmf(mr, 3, 77);

    const Eigen::MatrixXd back = flipped.doc_topic.colwise().reverse();
    CHECK((base.doc_topic - back).cwiseAbs().maxCoeff() <
          1e-9 * std::max(1.0, base.doc_topic.maxCoeff()));
}

TEST_CASE("lda permutation equivariance") {
    const Eigen::MatrixXd d = random_nonneg(12, 9, 6);
    auto m = testing::make_dtm(d);
    const auto base = fit_lda(m, 3, 7);

    Eigen::MatrixXd rev = d.colwise().reverse();
    auto mr = testing::make_dtm(rev);
    for (int i = 0; i < 12; ++i) mr.rows[i] = m.rows[11 - i];
    const auto flipped = fit_lda(mr, 3, 7);

    const Eigen::MatrixXd back = flipped.doc_topic.colwise().reverse();
    CHECK((base.doc_topic - back).cwiseAbs().maxCoeff() < 1e-9);
    // same sorted argmax multiset either way
    const auto assign = [](const TopicModel& model) {
        std::vector<int> labels;
        for (int i = 0; i < model.doc_topic.rows(); ++i) {
            int best = 0;
            for (int j = 1; j < model.k; ++j) {
                if (model.doc_topic(i, j) > model.doc_topic(i, best)) best = j;
            }
            labels.push_back(best);
        }
        return labels;
    };
    auto la = assign(base);
    auto lb = assign(flipped);
    std::reverse(lb.begin(), lb.end());
    CHECK(la == lb);
}

TEST_CASE("lda separates planted blocks at k=2") {
    const auto m = planted_blocks(12, 8, 31);
    const auto model = fit_lda(m, 2, 3);

    // argmax assignment purity against the planted split
    int match[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < m.n_docs(); ++i) {
        const int cluster = model.doc_topic(i, 0) > model.doc_topic(i, 1) ? 0 : 1;
        ++match[cluster][i < 12 ? 0 : 1];
    }
    const int direct = match[0][0] + match[1][1];
    const int swapped = match[0][1] + match[1][0];
    CHECK(std::max(direct, swapped) >= static_cast<int>(0.9 * m.n_docs()));

    // each topic's top terms stay within one block
    for (int t = 0; t < 2; ++t) {
        const auto top = topic_top_terms(model, t, 5);
        int low = 0, high = 0;
        for (const auto& term : top) {
            const int j = m.vocab.find(term);
            (j < 8 ? low : high)++;
        }
        CHECK((low == 5 || high == 5));
    }
}

TEST_CASE("lda rows are probability vectors and identical docs get identical rows") {
    Eigen::MatrixXd d(4, 6);
    d << 1, 2, 0, 0, 1, 0,
         1, 2, 0, 0, 1, 0,
         1, 2, 0, 0, 1, 0,
         1, 2, 0, 0, 1, 0;
    const auto model = fit_lda(testing::make_dtm(d), 2, 5);
    for (int i = 0; i < 4; ++i) {
        CHECK(model.doc_topic.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK((model.doc_topic.row(i) - model.doc_topic.row(0)).cwiseAbs().maxCoeff() <
              1e-12);
    }
    for (int t = 0; t < 2; ++t) {
        CHECK(model.topic_term.row(t).sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("lda is deterministic and rejects an all-zero matrix") {
    const auto m = planted_blocks(6, 5, 17);
    const auto a = fit_lda(m, 3, 99);
    const auto b = fit_lda(m, 3, 99);
    CHECK((a.doc_topic - b.doc_topic).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.topic_term - b.topic_term).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(fit_lda(testing::make_dtm(Eigen::MatrixXd::Zero(3, 3)), 2, 1),
                    DegenerateMatrixError);
}

TEST_CASE("lda ELBO is non-decreasing across passes") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = planted_blocks(8, 6, 200 + seed);
        const auto model = fit_lda(m, 4, seed);
        const auto& trace = model.diagnostics.objective_trace;
        REQUIRE(trace.size() >= 2);
        for (std::size_t t = 1; t < trace.size(); ++t) {
            CHECK(trace[t] >= trace[t - 1] - 1e-6 * std::abs(trace[t - 1]));
        }
    }
}

TEST_CASE("fold-in reproduces training assignments on factorizable data") {
    Rng rng(77);
    const int k = 3;
    Eigen::MatrixXd w0(30, k), h0(k, 40);
    for (int i = 0; i < w0.rows(); ++i) {
        for (int j = 0; j < k; ++j) w0(i, j) = rng.uniform() * (j == i % k ? 3.0 : 0.3);
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < h0.cols(); ++j) h0(i, j) = rng.uniform();
    }
    const Eigen::MatrixXd d = w0 * h0;
    const auto m = testing::make_dtm(d);
    const auto model = fit_nmf(m, k, 5, NmfOptions{5000, 1e-10});
    const auto inferred = infer_new_docs(model, m);

    int agree = 0;
    for (int i = 0; i < m.n_docs(); ++i) {
        int a = 0, b = 0;
        for (int j = 1; j < k; ++j) {
            if (model.doc_topic(i, j) > model.doc_topic(i, a)) a = j;
            if (inferred.doc_topic(i, j) > inferred.doc_topic(i, b)) b = j;
        }
        agree += a == b;
    }
    CHECK(agree >= static_cast<int>(0.95 * m.n_docs()));
}

TEST_CASE("fold-in flags zero rows: uniform for lda, zero for nmf") {
    const auto m = planted_blocks(6, 5, 88);
    Eigen::MatrixXd with_zero = m.dense();
    with_zero.row(3).setZero();
    const auto m_new = testing::make_dtm(with_zero);

    const auto lda = fit_lda(m, 2, 4);
    const auto r = infer_new_docs(lda, m_new);
    CHECK(r.zero_rows == std::vector<int>{3});
    CHECK(r.doc_topic(3, 0) == doctest::Approx(0.5));
    CHECK(r.doc_topic(3, 1) == doctest::Approx(0.5));

    const auto nmf = fit_nmf(m, 2, 4);
    const auto rn = infer_new_docs(nmf, m_new);
    CHECK(rn.zero_rows == std::vector<int>{3});
    CHECK(rn.doc_topic.row(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fold-in requires a shared vocabulary") {
    const auto m = planted_blocks(4, 4, 12);
    const auto model = fit_nmf(m, 2, 1);
    const auto other = testing::make_dtm(Eigen::MatrixXd::Ones(3, 2),
                                         {"unrelated_a", "unrelated_b"});
    CHECK_THROWS_AS(infer_new_docs(model, other), VocabularyMismatchError);
}

TEST_CASE("kmeans splits well-separated clouds") {
    Rng rng(64);
    Eigen::MatrixXd d(20, 4);
    for (int i = 0; i < 20; ++i) {
        const double center = i < 10 ? 0.0 : 50.0;
        for (int j = 0; j < 4; ++j) d(i, j) = center + rng.normal();
    }
    d = d.cwiseAbs();  // DocTermMatrix entries are nonnegative
    const auto cm = fit_kmeans(testing::make_dtm(d), 2, 9);
    for (int i = 1; i < 10; ++i) CHECK(cm.labels[i] == cm.labels[0]);
    for (int i = 11; i < 20; ++i) CHECK(cm.labels[i] == cm.labels[10]);
    CHECK(cm.labels[0] != cm.labels[10]);
}

TEST_CASE("kmeans with k equal to the document count isolates every doc") {
    Eigen::MatrixXd d(5, 3);
    d << 1, 0, 0, 0, 1, 0, 0, 0, 1, 2, 2, 0, 0, 2, 2;
    const auto cm = fit_kmeans(testing::make_dtm(d), 5, 21);
    CHECK(cm.inertia == doctest::Approx(0.0));
    std::set<int> labels(cm.labels.begin(), cm.labels.end());
    CHECK(labels.size() == 5);
}

TEST_CASE("kmeans is deterministic and validates k") {
    const auto m = testing::make_dtm(random_nonneg(12, 6, 3));
    const auto a = fit_kmeans(m, 3, 5);
    const auto b = fit_kmeans(m, 3, 5);
    CHECK(a.labels == b.labels);
    CHECK_THROWS_AS(fit_kmeans(m, 13, 5), TooFewDocumentsError);
}

TEST_CASE("logreg ranks a cluster's exclusive term first") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(12, 5);
    std::vector<int> labels(12);
    Rng rng(41);
    for (int i = 0; i < 12; ++i) {
        labels[i] = i < 6 ? 0 : 1;
        d(i, 4) = 1.0 + rng.uniform();             // shared balanced term
        d(i, labels[i] == 0 ? 0 : 1) = 2.0;        // exclusive marker
        d(i, 2 + labels[i]) = 0.5 + rng.uniform(); // weaker block term
    }
    const auto m = testing::make_dtm(d);
    const auto top = cluster_top_terms_logreg(m, labels, 3);
    CHECK(top[0][0] == "t0");
    CHECK(top[1][0] == "t1");
}

TEST_CASE("logreg gives a balanced uninformative term a near-zero coefficient") {
    // ranking: the shared term must sit below both exclusive markers
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(10, 3);
    std::vector<int> labels(10);
    for (int i = 0; i < 10; ++i) {
        labels[i] = i % 2;
        d(i, labels[i]) = 1.0;
        d(i, 2) = 1.0;  // same value everywhere
    }
    const auto top = cluster_top_terms_logreg(testing::make_dtm(d), labels, 3);
    CHECK(top[0][0] == "t0");
    CHECK(top[1][0] == "t1");
    CHECK(top[0][2] == "t1");  // the opposite marker ranks last, below the constant
}

TEST_CASE("logreg clamps n_terms and rejects single-class labelings") {
    Eigen::MatrixXd d = random_nonneg(8, 4, 2);
    std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
    const auto top = cluster_top_terms_logreg(testing::make_dtm(d), labels, 99);
    CHECK(top[0].size() == 4);  // full ranked vocabulary
    CHECK_THROWS_AS(
        cluster_top_terms_logreg(testing::make_dtm(d), std::vector<int>(8, 0), 3),
        SingleClassError);
}

TEST_CASE("model files round-trip exactly") {
    const auto m = planted_blocks(5, 4, 1);
    for (auto method : {Method::Nmf, Method::Lda}) {
        const auto model = method == Method::Nmf ? fit_nmf(m, 2, 42) : fit_lda(m, 2, 42);
        const std::string path =
            (std::filesystem::temp_directory_path() /
             ("codetopics_model_" + std::to_string(::getpid()) + ".txt"))
                .string();
        save_model(model, path);
        const auto loaded = load_model(path);
        CHECK(loaded.method == model.method);
        CHECK(loaded.k == model.k);
        CHECK(loaded.seed == model.seed);
        CHECK(loaded.doc_ids == model.doc_ids);
        CHECK(loaded.terms == model.terms);
        CHECK((loaded.doc_topic - model.doc_topic).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded.topic_term - model.topic_term).cwiseAbs().maxCoeff() == 0.0);
        CHECK(loaded.diagnostics.objective == model.diagnostics.objective);
        std::filesystem::remove(path);
    }
}

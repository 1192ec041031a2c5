#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "codetopics/corpus.hpp"
#include "codetopics/errors.hpp"
#include "codetopics/rng.hpp"
#include "test_support.hpp"

using namespace codetopics;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("codetopics_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& rel, const std::string& text) const {
        const fs::path p = path / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p) << text;
    }
};

}  // namespace

TEST_CASE("load_corpus orders documents lexicographically by relative path") {
    TempDir dir("load");
    dir.write("b.py", "x = 2\n");
    dir.write("a.py", "x = 1\n");
    dir.write("sub/c.py", "x = 3\n");
    const auto docs = load_corpus(dir.path.string());
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].id == "a.py");
    CHECK(docs[1].id == "b.py");
    CHECK(docs[2].id == "sub/c.py");
}

TEST_CASE("load_corpus rejects empty directories and skips blank files") {
    TempDir dir("empty");
    CHECK_THROWS_AS(load_corpus(dir.path.string()), EmptyCorpusError);
    dir.write("blank.py", "   \n\n");
    CHECK_THROWS_AS(load_corpus(dir.path.string()), EmptyCorpusError);
    CHECK_THROWS_AS(load_corpus((dir.path / "missing").string()), IoError);
}

TEST_CASE("build_vocabulary applies the min-df threshold") {
    const std::vector<TokenDoc> docs = {
        testing::make_token_doc("d1", {"alpha", "rare"}),
        testing::make_token_doc("d2", {"alpha"}),
        testing::make_token_doc("d3", {"alpha"}),
    };
    const auto vocab = build_vocabulary(docs, 0.35);
    CHECK(vocab.terms == std::vector<std::string>{"alpha"});  // 1/3 < 0.35 removed

    const auto all = build_vocabulary(docs, 0.0);
    CHECK(all.terms == std::vector<std::string>{"alpha", "rare"});
    CHECK(all.doc_freq == std::vector<int>{3, 1});

    CHECK_THROWS_AS(build_vocabulary(docs, 1.5), AllTermsFilteredError);
}

TEST_CASE("vocabulary terms are sorted and min-df is monotone") {
    const auto docs = testing::load_synthetic();
    const auto loose = build_vocabulary(docs, 0.05);
    CHECK(std::is_sorted(loose.terms.begin(), loose.terms.end()));
    const auto tight = build_vocabulary(docs, 0.30);
    for (const auto& t : tight.terms) {
        CHECK(loose.find(t) >= 0);  // vocab(0.05) contains vocab(0.30)
    }
    CHECK(tight.size() < loose.size());
}

TEST_CASE("build_matrix counts terms, binary marks presence") {
    const std::vector<TokenDoc> docs = {
        testing::make_token_doc("d1", {"x", "x", "x", "y"}),
        testing::make_token_doc("d2", {"y"}),
        testing::make_token_doc("d3", {"dropped"}),
    };
    const auto full = build_vocabulary(docs, 0.0);
    auto m = build_matrix(docs, full, false);
    CHECK(m.entries.coeff(0, full.find("x")) == doctest::Approx(3.0));
    CHECK(m.entries.coeff(0, full.find("y")) == doctest::Approx(1.0));
    CHECK(m.empty_rows.empty());

    auto mb = build_matrix(docs, full, true);
    CHECK(mb.entries.coeff(0, full.find("x")) == doctest::Approx(1.0));
    CHECK(mb.binary_applied);

    // per column, the nonzero count equals the term's document frequency
    for (int j = 0; j < full.size(); ++j) {
        int nnz = 0;
        for (int i = 0; i < m.n_docs(); ++i) nnz += m.entries.coeff(i, j) != 0.0;
        CHECK(nnz == full.doc_freq[j]);
    }

    // binary equals the elementwise sign of counts
    const Eigen::MatrixXd c = m.dense();
    const Eigen::MatrixXd b = mb.dense();
    for (int i = 0; i < c.rows(); ++i) {
        for (int j = 0; j < c.cols(); ++j) {
            CHECK(b(i, j) == doctest::Approx(c(i, j) > 0.0 ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("documents whose every token was filtered become flagged empty rows") {
    const std::vector<TokenDoc> docs = {
        testing::make_token_doc("d1", {"x", "y"}),
        testing::make_token_doc("d2", {"x"}),
        testing::make_token_doc("d3", {"ghost"}),
    };
    const auto vocab = build_vocabulary(docs, 0.6);  // only x survives
    const auto m = build_matrix(docs, vocab, false);
    CHECK(m.empty_rows == std::vector<int>{2});
}

TEST_CASE("tfidf weighting matches the hand-computed example") {
    // 4 docs; term appears in 2 of them, tf 3 in the first
    Eigen::MatrixXd d(4, 2);
    d << 3, 1, 0, 1, 3, 1, 0, 1;
    auto m = testing::make_dtm(d);
    m.vocab.n_docs = 4;
    const auto w = weight_tfidf(m);
    CHECK(w.entries.coeff(0, 0) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(w.entries.coeff(0, 0) == doctest::Approx(2.0794).epsilon(1e-4));
    // df == n_docs: weight collapses to zero
    CHECK(w.entries.coeff(0, 1) == doctest::Approx(0.0));
    CHECK(w.weighting == Weighting::Tfidf);
}

TEST_CASE("ncut weighting matches the hand-computed example") {
    Eigen::MatrixXd d(2, 2);
    d << 1, 1, 1, 0;
    const auto m = testing::make_dtm(d);
    const auto w = weight_ncut(m);
    const double scale = 1.0 / std::sqrt(1.0 + 1.0 / std::sqrt(2.0));
    CHECK(scale == doctest::Approx(0.7654).epsilon(1e-4));
    CHECK(w.entries.coeff(0, 0) == doctest::Approx(scale).epsilon(1e-12));
    CHECK(w.entries.coeff(0, 1) == doctest::Approx(scale).epsilon(1e-12));
    CHECK(w.entries.coeff(1, 0) == doctest::Approx(scale).epsilon(1e-12));
    CHECK(w.entries.coeff(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("ncut: identical columns share a scale, orthogonal columns keep theirs") {
    Eigen::MatrixXd ident(3, 2);
    ident << 2, 1, 0, 0, 5, 1;
    const auto wi = weight_ncut(testing::make_dtm(ident));
    // both columns have the same binarized pattern, so the same degree
    CHECK(wi.entries.coeff(0, 0) / 2.0 ==
          doctest::Approx(wi.entries.coeff(0, 1) / 1.0).epsilon(1e-12));

    Eigen::MatrixXd ortho(2, 2);
    ortho << 4, 0, 0, 9;
    const auto wo = weight_ncut(testing::make_dtm(ortho));
    CHECK(wo.entries.coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(wo.entries.coeff(1, 1) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("property: weighting preserves the sparsity pattern") {
    Rng rng(31337);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 3 + static_cast<int>(rng.uniform_index(8));
        const int cols = 2 + static_cast<int>(rng.uniform_index(10));
        Eigen::MatrixXd d(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                d(i, j) = rng.uniform() < 0.4 ? 1.0 + rng.uniform_index(4) : 0.0;
            }
        }
        // every column needs at least one nonzero to be a valid matrix
        for (int j = 0; j < cols; ++j) {
            if (d.col(j).sum() == 0.0) d(static_cast<int>(rng.uniform_index(rows)), j) = 1.0;
        }
        const auto m = testing::make_dtm(d);

        const auto nc = weight_ncut(m).dense();
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                CHECK((nc(i, j) == 0.0) == (d(i, j) == 0.0));
            }
        }
        const auto tf = weight_tfidf(m).dense();
        for (int j = 0; j < cols; ++j) {
            if (m.vocab.doc_freq[j] == rows) continue;  // df == n collapses the column
            for (int i = 0; i < rows; ++i) {
                CHECK((tf(i, j) == 0.0) == (d(i, j) == 0.0));
            }
        }
    }
}

TEST_CASE("property: ncut scales lie in (0,1] and are permutation-equivariant") {
    Rng rng(4012);
    Eigen::MatrixXd d(6, 5);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 5; ++j) {
            d(i, j) = rng.uniform() < 0.5 ? 1.0 + rng.uniform_index(3) : 0.0;
        }
    }
    for (int j = 0; j < 5; ++j) {
        if (d.col(j).sum() == 0.0) d(0, j) = 1.0;
    }
    const auto w = weight_ncut(testing::make_dtm(d)).dense();
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 6; ++i) {
            if (d(i, j) == 0.0) continue;
            const double scale = w(i, j) / d(i, j);
            CHECK(scale > 0.0);
            CHECK(scale <= 1.0 + 1e-12);
        }
    }
    // reverse the column order: scales must follow their terms
    Eigen::MatrixXd rev = d.rowwise().reverse();
    const auto wr = weight_ncut(testing::make_dtm(rev)).dense();
    CHECK((wr.rowwise().reverse() - w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matrix and vocabulary files round-trip") {
    TempDir dir("roundtrip");
    const auto docs = testing::load_synthetic();
    const auto vocab = build_vocabulary(docs, 0.2);
    const auto m = weight_tfidf(build_matrix(docs, vocab, false));

    const std::string mp = (dir.path / "m.txt").string();
    const std::string vp = (dir.path / "v.txt").string();
    save_doc_term_matrix(m, mp, vp);
    const auto loaded = load_doc_term_matrix(mp, vp);

    CHECK(loaded.rows == m.rows);
    CHECK(loaded.vocab.terms == m.vocab.terms);
    CHECK(loaded.vocab.doc_freq == m.vocab.doc_freq);
    CHECK(loaded.vocab.n_docs == m.vocab.n_docs);
    CHECK(loaded.weighting == m.weighting);
    CHECK(loaded.binary_applied == m.binary_applied);
    CHECK((loaded.dense() - m.dense()).cwiseAbs().maxCoeff() == 0.0);  // bit-exact
}

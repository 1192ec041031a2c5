#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <unordered_map>
#include <vector>

#include "codetopics/tokenizer.hpp"

namespace codetopics {

struct Vocabulary {
    std::vector<std::string> terms;  // sorted lexicographically
    std::unordered_map<std::string, int> index;
    std::vector<int> doc_freq;  // aligned with terms
    int n_docs = 0;

    int size() const { return static_cast<int>(terms.size()); }
    int find(const std::string& term) const {
        auto it = index.find(term);
        return it == index.end() ? -1 : it->second;
    }
};

enum class Weighting { Count, Binary, Tfidf, Ncut };

const char* weighting_name(Weighting w);
Weighting weighting_from_name(const std::string& name);

struct DocTermMatrix {
    std::vector<std::string> rows;  // doc ids
    Vocabulary vocab;
    Eigen::SparseMatrix<double, Eigen::RowMajor> entries;  // docs x terms
    Weighting weighting = Weighting::Count;
    bool binary_applied = false;
    std::vector<int> empty_rows;  // docs whose every token was filtered

    int n_docs() const { return static_cast<int>(entries.rows()); }
    int n_terms() const { return static_cast<int>(entries.cols()); }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(entries); }
};

// Reads every regular file under dir (recursively); id = relative path,
// deterministic lexicographic order. Files that are empty after trimming
// whitespace are skipped.
std::vector<SourceDoc> load_corpus(const std::string& dir);

// Retains a term iff doc_freq / n_docs >= min_df.
Vocabulary build_vocabulary(const std::vector<TokenDoc>& docs, double min_df);

// Term counts per document (or presence when binary). Out-of-vocabulary
// tokens are ignored; documents with no retained token become empty rows and
// are flagged.
DocTermMatrix build_matrix(const std::vector<TokenDoc>& docs, const Vocabulary& vocab,
                           bool binary);

// D'_ij = D_ij * ln(n_docs / doc_freq_j).
DocTermMatrix weight_tfidf(const DocTermMatrix& m);

// Term affinity A = cosine similarity over binarized term columns (A_jj = 1);
// column j is scaled by 1/sqrt(sum_k A_jk).
DocTermMatrix weight_ncut(const DocTermMatrix& m);

// Sparse triplet format: header "docs terms nnz", then "row col value" lines.
void save_matrix(const DocTermMatrix& m, const std::string& path);
Eigen::SparseMatrix<double, Eigen::RowMajor> load_matrix_entries(const std::string& path);

// One "term doc_freq" line per term; '#' comment lines carry n_docs, the
// weighting tag and row ids so a DocTermMatrix round-trips.
void save_vocabulary(const Vocabulary& v, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

void save_doc_term_matrix(const DocTermMatrix& m, const std::string& matrix_path,
                          const std::string& vocab_path);
DocTermMatrix load_doc_term_matrix(const std::string& matrix_path,
                                   const std::string& vocab_path);

}  // namespace codetopics

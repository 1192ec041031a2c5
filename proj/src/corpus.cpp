#include "codetopics/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "codetopics/errors.hpp"

namespace fs = std::filesystem;

namespace codetopics {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool trimmed_empty(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

const char* weighting_name(Weighting w) {
    switch (w) {
        case Weighting::Count: return "count";
        case Weighting::Binary: return "binary";
        case Weighting::Tfidf: return "tfidf";
        case Weighting::Ncut: return "ncut";
    }
    return "count";
}

Weighting weighting_from_name(const std::string& name) {
    if (name == "count") return Weighting::Count;
    if (name == "binary") return Weighting::Binary;
    if (name == "tfidf") return Weighting::Tfidf;
    if (name == "ncut") return Weighting::Ncut;
    throw Error("unknown weighting: " + name);
}

std::vector<SourceDoc> load_corpus(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw IoError("not a directory: " + dir);
    }
    std::vector<SourceDoc> docs;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir).generic_string();
        if (rel.starts_with(".") || rel.find("/.") != std::string::npos) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) throw IoError("cannot read " + entry.path().string());
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        if (trimmed_empty(text)) continue;
        SourceDoc doc;
        doc.id = fs::relative(entry.path(), dir).generic_string();
        doc.path = entry.path().string();
        doc.text = std::move(text);
        docs.push_back(std::move(doc));
    }
    std::sort(docs.begin(), docs.end(),
              [](const SourceDoc& a, const SourceDoc& b) { return a.id < b.id; });
    if (docs.empty()) throw EmptyCorpusError("no readable source files in " + dir);
    return docs;
}

Vocabulary build_vocabulary(const std::vector<TokenDoc>& docs, double min_df) {
    if (docs.empty()) throw EmptyCorpusError("no documents");
    const int n = static_cast<int>(docs.size());

    std::map<std::string, int> df;  // ordered: terms come out sorted
    for (const auto& doc : docs) {
        std::map<std::string, int> seen;
        for (const auto& tok : doc.tokens) seen[tok.lexeme] = 1;
        for (const auto& [term, _] : seen) ++df[term];
    }

    Vocabulary vocab;
    vocab.n_docs = n;
    for (const auto& [term, freq] : df) {
        if (static_cast<double>(freq) / n >= min_df) {
            vocab.index[term] = static_cast<int>(vocab.terms.size());
            vocab.terms.push_back(term);
            vocab.doc_freq.push_back(freq);
        }
    }
    if (vocab.terms.empty()) {
        throw AllTermsFilteredError("no term reaches min_df = " + std::to_string(min_df));
    }
    return vocab;
}

DocTermMatrix build_matrix(const std::vector<TokenDoc>& docs, const Vocabulary& vocab,
                           bool binary) {
    DocTermMatrix m;
    m.vocab = vocab;
    m.weighting = binary ? Weighting::Binary : Weighting::Count;
    m.binary_applied = binary;

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        m.rows.push_back(docs[i].doc_id);
        std::map<int, double> counts;
        for (const auto& tok : docs[i].tokens) {
            const int col = vocab.find(tok.lexeme);
            if (col >= 0) counts[col] += 1.0;
        }
        if (counts.empty()) {
            m.empty_rows.push_back(static_cast<int>(i));
            continue;
        }
        for (const auto& [col, cnt] : counts) {
            triplets.emplace_back(static_cast<int>(i), col, binary ? 1.0 : cnt);
        }
    }
    m.entries.resize(static_cast<int>(docs.size()), vocab.size());
    m.entries.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

DocTermMatrix weight_tfidf(const DocTermMatrix& m) {
    if (m.weighting != Weighting::Count && m.weighting != Weighting::Binary) {
        throw Error("tfidf expects a count or binary matrix");
    }
    DocTermMatrix out = m;
    const double n = m.vocab.n_docs;
    for (int row = 0; row < out.entries.outerSize(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(out.entries, row);
             it; ++it) {
            it.valueRef() *= std::log(n / m.vocab.doc_freq[it.col()]);
        }
    }
    out.entries.prune(0.0, 0.0);  // df == n_docs columns become structurally empty
    out.weighting = Weighting::Tfidf;
    return out;
}

DocTermMatrix weight_ncut(const DocTermMatrix& m) {
    if (m.weighting != Weighting::Count && m.weighting != Weighting::Binary) {
        throw Error("ncut expects a count or binary matrix");
    }
    const int n_terms = m.n_terms();
    if (n_terms < 2) throw Error("ncut needs at least 2 terms");

    // Binarized columns as sets of doc indices; cosine over binary vectors is
    // |intersection| / sqrt(|a| |b|).
    Eigen::SparseMatrix<double> cols = m.entries;  // column-major copy
    std::vector<std::vector<int>> posting(n_terms);
    for (int j = 0; j < n_terms; ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(cols, j); it; ++it) {
            if (it.value() != 0.0) posting[j].push_back(static_cast<int>(it.row()));
        }
    }

    Eigen::VectorXd degree = Eigen::VectorXd::Zero(n_terms);
    for (int j = 0; j < n_terms; ++j) {
        degree[j] += 1.0;  // self similarity
        for (int k = j + 1; k < n_terms; ++k) {
            std::size_t a = 0, b = 0, inter = 0;
            while (a < posting[j].size() && b < posting[k].size()) {
                if (posting[j][a] < posting[k][b]) {
                    ++a;
                } else if (posting[j][a] > posting[k][b]) {
                    ++b;
                } else {
                    ++inter;
                    ++a;
                    ++b;
                }
            }
            if (inter == 0) continue;
            const double sim = static_cast<double>(inter) /
                               std::sqrt(static_cast<double>(posting[j].size()) *
                                         static_cast<double>(posting[k].size()));
            degree[j] += sim;
            degree[k] += sim;
        }
    }

    DocTermMatrix out = m;
    for (int row = 0; row < out.entries.outerSize(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(out.entries, row);
             it; ++it) {
            it.valueRef() /= std::sqrt(degree[it.col()]);
        }
    }
    out.weighting = Weighting::Ncut;
    return out;
}

void save_matrix(const DocTermMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# weighting " << weighting_name(m.weighting) << "\n";
    out << "# binary " << (m.binary_applied ? 1 : 0) << "\n";
    for (const auto& id : m.rows) out << "# doc " << id << "\n";
    out << m.n_docs() << " " << m.n_terms() << " " << m.entries.nonZeros() << "\n";
    for (int row = 0; row < m.entries.outerSize(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.entries, row);
             it; ++it) {
            out << row << " " << it.col() << " " << format_double(it.value()) << "\n";
        }
    }
}

Eigen::SparseMatrix<double, Eigen::RowMajor> load_matrix_entries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    long docs = -1, terms = -1, nnz = -1;
    std::vector<Eigen::Triplet<double>> triplets;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        if (docs < 0) {
            if (!(ss >> docs >> terms >> nnz)) throw IoError("bad header in " + path);
            continue;
        }
        long r, c;
        double v;
        if (!(ss >> r >> c >> v)) throw IoError("bad triplet in " + path);
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
    if (docs < 0) throw IoError("missing header in " + path);
    if (static_cast<long>(triplets.size()) != nnz) {
        throw IoError("triplet count mismatch in " + path);
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> entries(docs, terms);
    entries.setFromTriplets(triplets.begin(), triplets.end());
    return entries;
}

void save_vocabulary(const Vocabulary& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# docs " << v.n_docs << "\n";
    for (int j = 0; j < v.size(); ++j) {
        out << v.terms[j] << " " << v.doc_freq[j] << "\n";
    }
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line);
            std::string hash, key;
            ss >> hash >> key;
            if (key == "docs") ss >> v.n_docs;
            continue;
        }
        // the term may contain spaces (n-grams): doc_freq is the last field
        const std::size_t cut = line.find_last_of(' ');
        if (cut == std::string::npos) throw IoError("bad vocabulary line: " + line);
        const std::string term = line.substr(0, cut);
        v.index[term] = static_cast<int>(v.terms.size());
        v.terms.push_back(term);
        v.doc_freq.push_back(std::stoi(line.substr(cut + 1)));
    }
    if (v.terms.empty()) throw IoError("empty vocabulary file: " + path);
    return v;
}

void save_doc_term_matrix(const DocTermMatrix& m, const std::string& matrix_path,
                          const std::string& vocab_path) {
    save_matrix(m, matrix_path);
    save_vocabulary(m.vocab, vocab_path);
}

DocTermMatrix load_doc_term_matrix(const std::string& matrix_path,
                                   const std::string& vocab_path) {
    DocTermMatrix m;
    m.vocab = load_vocabulary(vocab_path);
    m.entries = load_matrix_entries(matrix_path);

    std::ifstream in(matrix_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '#') break;
        std::istringstream ss(line);
        std::string hash, key;
        ss >> hash >> key;
        if (key == "weighting") {
            std::string w;
            ss >> w;
            m.weighting = weighting_from_name(w);
        } else if (key == "binary") {
            int b = 0;
            ss >> b;
            m.binary_applied = b != 0;
        } else if (key == "doc") {
            std::string rest;
            std::getline(ss, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            m.rows.push_back(rest);
        }
    }
    if (static_cast<int>(m.rows.size()) != m.n_docs()) {
        throw IoError("doc id count does not match matrix rows in " + matrix_path);
    }
    if (m.vocab.size() != m.n_terms()) {
        throw IoError("vocabulary size does not match matrix columns");
    }
    if (m.vocab.n_docs == 0) m.vocab.n_docs = m.n_docs();  // header-less vocab file
    for (int i = 0; i < m.n_docs(); ++i) {
        if (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator(m.entries, i)) continue;
        m.empty_rows.push_back(i);
    }
    return m;
}

}  // namespace codetopics

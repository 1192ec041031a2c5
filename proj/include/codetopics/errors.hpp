#pragma once

#include <stdexcept>
#include <string>

namespace codetopics {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// tokenizer
struct EmptyDocumentError : Error {
    explicit EmptyDocumentError(const std::string& doc_id)
        : Error("document produced no tokens: " + doc_id) {}
};
struct LexError : Error {
    int line;
    LexError(int line_no, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// corpus
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};
struct EmptyCorpusError : Error {
    explicit EmptyCorpusError(const std::string& msg) : Error(msg) {}
};
struct AllTermsFilteredError : Error {
    explicit AllTermsFilteredError(const std::string& msg) : Error(msg) {}
};

// factorization
struct DegenerateMatrixError : Error {
    explicit DegenerateMatrixError(const std::string& msg) : Error(msg) {}
};
struct VocabularyMismatchError : Error {
    explicit VocabularyMismatchError(const std::string& msg) : Error(msg) {}
};
struct TooFewDocumentsError : Error {
    explicit TooFewDocumentsError(const std::string& msg) : Error(msg) {}
};
struct SingleClassError : Error {
    explicit SingleClassError(const std::string& msg) : Error(msg) {}
};

// evaluation
struct NoValidPairsError : Error {
    explicit NoValidPairsError(const std::string& msg) : Error(msg) {}
};
struct KTooLargeError : Error {
    explicit KTooLargeError(const std::string& msg) : Error(msg) {}
};
struct DegenerateSamplesError : Error {
    explicit DegenerateSamplesError(const std::string& msg) : Error(msg) {}
};

// topics
struct MergeOverlapError : Error {
    explicit MergeOverlapError(const std::string& msg) : Error(msg) {}
};
struct TooFewDocsError : Error {
    explicit TooFewDocsError(const std::string& msg) : Error(msg) {}
};
struct DegenerateSpectrumError : Error {
    explicit DegenerateSpectrumError(const std::string& msg) : Error(msg) {}
};
struct DegenerateDataError : Error {
    explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

// cli
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};
struct MissingInputError : Error {
    explicit MissingInputError(const std::string& msg) : Error(msg) {}
};

}  // namespace codetopics

#pragma once

#include <string>
#include <vector>

namespace codetopics {

struct SourceDoc {
    std::string id;    // unique within a corpus
    std::string path;  // origin file path
    std::string text;  // raw source code, UTF-8
};

enum class TokenKind { Word, ReservedWord, Annotation, MethodName, Bigram, Trigram };

const char* token_kind_name(TokenKind k);
TokenKind token_kind_from_name(const std::string& name);

struct Token {
    std::string lexeme;
    TokenKind kind;
    int line;  // 1-based source line the token came from

    bool operator==(const Token&) const = default;
};

struct TokenDoc {
    std::string doc_id;
    std::vector<Token> tokens;
    std::vector<std::string> warnings;  // e.g. unbalanced brackets, tolerated
};

// Lexing rule tables for the augmented tokenizer. Reserved words are emitted
// verbatim; everything else an identifier could be is dropped. The keywords
// `and`, `or`, `not` are handled as logical operators before this list is
// consulted, so they never appear verbatim.
struct LexRules {
    std::vector<std::string> reserved_words;

    bool is_reserved(const std::string& w) const;

    // Python 3 keywords plus the builtins len, range, print; minus the
    // operator keywords and/or/not.
    static LexRules defaults();

    // One lexeme per line, '#' starts a comment.
    static LexRules load(const std::string& path);
};

// Split the text into maximal runs of [A-Za-z0-9_], kept verbatim.
TokenDoc tokenize_standard(const SourceDoc& doc);

// Structural tokenizer: per line emits indentation/block/annotation/reserved
// tokens, then appends all bigrams and trigrams of that line's sequence.
TokenDoc tokenize_augmented(const SourceDoc& doc, const LexRules& rules);

inline TokenDoc tokenize_augmented(const SourceDoc& doc) {
    return tokenize_augmented(doc, LexRules::defaults());
}

// Closed set of annotation lexemes the augmented tokenizer may emit.
const std::vector<std::string>& annotation_lexemes();

}  // namespace codetopics

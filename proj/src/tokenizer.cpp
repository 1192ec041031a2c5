#include "codetopics/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "codetopics/errors.hpp"

namespace codetopics {

namespace {

const char* kAnnIndent = "is_indent";
const char* kAnnBlock = "is_block";
const char* kAnnNumber = "is_number";
const char* kAnnString = "is_string";
const char* kAnnList = "is_list";
const char* kAnnDict = "is_dict";
const char* kAnnTuple = "is_tuple";
const char* kAnnOpLogic = "is_op_logic";
const char* kAnnOpArit = "is_op_arit";
const char* kAnnAttribution = "is_attribution";

bool is_ident_start(char c) {
    return c == '_' || std::isalpha(static_cast<unsigned char>(c));
}
bool is_ident_char(char c) {
    return c == '_' || std::isalnum(static_cast<unsigned char>(c));
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// What the previous significant token was, for '(' disambiguation: a paren
// right after a value-like token is a call or grouping of an index result,
// anything else may open a tuple literal.
enum class PrevTok { None, ValueLike, Other };

struct Op {
    const char* text;
    const char* annotation;  // nullptr = dropped
};

// Longest match first.
const Op kOps[] = {
    {"**=", kAnnAttribution}, {"//=", kAnnAttribution}, {">>=", nullptr},
    {"<<=", nullptr},         {"->", nullptr},          {"**", kAnnOpArit},
    {"//", kAnnOpArit},       {"==", kAnnOpLogic},      {"!=", kAnnOpLogic},
    {"<=", kAnnOpLogic},      {">=", kAnnOpLogic},      {"+=", kAnnAttribution},
    {"-=", kAnnAttribution},  {"*=", kAnnAttribution},  {"/=", kAnnAttribution},
    {"%=", kAnnAttribution},  {"&=", nullptr},          {"|=", nullptr},
    {"^=", nullptr},          {"<<", nullptr},          {">>", nullptr},
    {"<", kAnnOpLogic},       {">", kAnnOpLogic},       {"=", kAnnAttribution},
    {"+", kAnnOpArit},        {"-", kAnnOpArit},        {"*", kAnnOpArit},
    {"/", kAnnOpArit},        {"%", kAnnOpArit},        {"&", nullptr},
    {"|", nullptr},           {"^", nullptr},           {"~", nullptr},
    {"@", nullptr},           {",", nullptr},           {";", nullptr},
    {":", nullptr},           {")", nullptr},           {"]", nullptr},
    {"}", nullptr},           {"\\", nullptr},
};

struct LineLexer {
    const std::string& line;
    int line_no;
    const LexRules& rules;
    std::vector<Token>& out;
    std::vector<std::string>& warnings;

    std::size_t pos = 0;
    char last_sig = '\0';          // last significant char outside comments
    PrevTok prev = PrevTok::None;  // previous token class
    bool prev_dot = false;         // a '.' was just consumed
    int open_parens = 0, open_brackets = 0, open_braces = 0;

    void emit(const std::string& lexeme, TokenKind kind) {
        out.push_back(Token{lexeme, kind, line_no});
    }

    // Returns false when the line opened a triple-quoted string that does not
    // close before the end of the line.
    bool run() {
        while (pos < line.size()) {
            const char c = line[pos];
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos;
                continue;
            }
            if (c == '#') break;  // comment: rest of line ignored
            if (c == '\'' || c == '"') {
                if (!lex_string()) return false;
                continue;
            }
            if (is_ident_start(c)) {
                lex_identifier();
                continue;
            }
            if (is_digit(c) || (c == '.' && pos + 1 < line.size() && is_digit(line[pos + 1]))) {
                lex_number();
                continue;
            }
            if (c == '.') {
                last_sig = c;
                prev_dot = true;
                prev = PrevTok::Other;
                ++pos;
                continue;
            }
            if (c == '(') {
                lex_paren();
                continue;
            }
            if (c == '[') {
                ++open_brackets;
                last_sig = c;
                prev = PrevTok::Other;
                prev_dot = false;
                emit(kAnnList, TokenKind::Annotation);
                ++pos;
                continue;
            }
            if (c == '{') {
                ++open_braces;
                last_sig = c;
                prev = PrevTok::Other;
                prev_dot = false;
                emit(kAnnDict, TokenKind::Annotation);
                ++pos;
                continue;
            }
            if (!lex_operator()) {
                throw LexError(line_no, std::string("untokenizable byte '") + c + "'");
            }
        }
        if (open_parens != 0 || open_brackets != 0 || open_braces != 0) {
            warnings.push_back("line " + std::to_string(line_no) + ": unbalanced brackets");
        }
        return true;
    }

    bool lex_operator() {
        for (const Op& op : kOps) {
            const std::size_t n = std::strlen(op.text);
            if (line.compare(pos, n, op.text) == 0) {
                if (op.text[0] == ')') {
                    --open_parens;
                    prev = PrevTok::ValueLike;
                } else if (op.text[0] == ']') {
                    --open_brackets;
                    prev = PrevTok::ValueLike;
                } else if (op.text[0] == '}') {
                    --open_braces;
                    prev = PrevTok::ValueLike;
                } else {
                    prev = PrevTok::Other;
                }
                last_sig = op.text[n - 1];
                prev_dot = false;
                if (op.annotation != nullptr) emit(op.annotation, TokenKind::Annotation);
                pos += n;
                return true;
            }
        }
        return false;
    }

    void lex_identifier() {
        const std::size_t start = pos;
        while (pos < line.size() && is_ident_char(line[pos])) ++pos;
        const std::string word = line.substr(start, pos - start);
        const bool after_dot = prev_dot;
        prev_dot = false;
        last_sig = word.back();

        if (word == "and" || word == "or" || word == "not") {
            emit(kAnnOpLogic, TokenKind::Annotation);
            prev = PrevTok::Other;
            return;
        }
        if (rules.is_reserved(word)) {
            emit(word, TokenKind::ReservedWord);
            prev = PrevTok::Other;
            return;
        }
        if (after_dot && next_significant_is('(')) {
            emit(word, TokenKind::MethodName);
            prev = PrevTok::ValueLike;
            return;
        }
        // bare identifier: dropped
        prev = PrevTok::ValueLike;
    }

    bool next_significant_is(char c) const {
        std::size_t p = pos;
        while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
        return p < line.size() && line[p] == c;
    }

    void lex_number() {
        if (line[pos] == '0' && pos + 1 < line.size() &&
            (line[pos + 1] == 'x' || line[pos + 1] == 'X' || line[pos + 1] == 'b' ||
             line[pos + 1] == 'B' || line[pos + 1] == 'o' || line[pos + 1] == 'O')) {
            pos += 2;
            while (pos < line.size() &&
                   (std::isxdigit(static_cast<unsigned char>(line[pos])) || line[pos] == '_')) {
                ++pos;
            }
        } else {
            while (pos < line.size() && (is_digit(line[pos]) || line[pos] == '_')) ++pos;
            if (pos < line.size() && line[pos] == '.') {
                ++pos;
                while (pos < line.size() && (is_digit(line[pos]) || line[pos] == '_')) ++pos;
            }
            if (pos < line.size() && (line[pos] == 'e' || line[pos] == 'E')) {
                std::size_t mark = pos + 1;
                if (mark < line.size() && (line[mark] == '+' || line[mark] == '-')) ++mark;
                if (mark < line.size() && is_digit(line[mark])) {
                    pos = mark;
                    while (pos < line.size() && is_digit(line[pos])) ++pos;
                }
            }
        }
        last_sig = line[pos - 1];
        prev = PrevTok::ValueLike;
        prev_dot = false;
        emit(kAnnNumber, TokenKind::Annotation);
    }

    // Returns false when an unterminated triple-quoted string begins here.
    bool lex_string() {
        const char quote = line[pos];
        prev_dot = false;
        if (line.compare(pos, 3, std::string(3, quote)) == 0) {
            emit(kAnnString, TokenKind::Annotation);
            const std::size_t close = line.find(std::string(3, quote), pos + 3);
            if (close == std::string::npos) {
                last_sig = quote;
                prev = PrevTok::ValueLike;
                return false;  // spans lines
            }
            pos = close + 3;
            last_sig = quote;
            prev = PrevTok::ValueLike;
            return true;
        }
        ++pos;
        while (pos < line.size()) {
            if (line[pos] == '\\') {
                pos += 2;
                continue;
            }
            if (line[pos] == quote) {
                ++pos;
                last_sig = quote;
                prev = PrevTok::ValueLike;
                emit(kAnnString, TokenKind::Annotation);
                return true;
            }
            ++pos;
        }
        throw LexError(line_no, "unterminated string literal");
    }

    void lex_paren() {
        const bool call_like = (prev == PrevTok::ValueLike);
        ++open_parens;
        last_sig = '(';
        prev_dot = false;
        prev = PrevTok::Other;
        if (!call_like && paren_encloses_comma()) {
            emit(kAnnTuple, TokenKind::Annotation);
        }
        ++pos;
    }

    // Looks ahead for a comma at depth 1 before the matching ')' on this
    // line. String contents are skipped so commas inside literals don't count.
    bool paren_encloses_comma() const {
        int depth = 0;
        std::size_t p = pos;
        while (p < line.size()) {
            const char c = line[p];
            if (c == '\'' || c == '"') {
                const char q = c;
                ++p;
                while (p < line.size() && line[p] != q) {
                    if (line[p] == '\\') ++p;
                    ++p;
                }
                ++p;
                continue;
            }
            if (c == '#') return false;
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') {
                --depth;
                if (depth == 0) return false;
            }
            if (c == ',' && depth == 1) return true;
            ++p;
        }
        return false;
    }
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

int indent_level(const std::string& line) {
    int spaces = 0;
    for (char c : line) {
        if (c == ' ') {
            ++spaces;
        } else if (c == '\t') {
            spaces += 4;
        } else {
            break;
        }
    }
    return spaces / 4;
}

bool blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

void append_ngrams(std::vector<Token>& out, const std::vector<Token>& unigrams, int line_no) {
    for (std::size_t i = 0; i + 1 < unigrams.size(); ++i) {
        out.push_back(Token{unigrams[i].lexeme + " " + unigrams[i + 1].lexeme,
                            TokenKind::Bigram, line_no});
    }
    for (std::size_t i = 0; i + 2 < unigrams.size(); ++i) {
        out.push_back(Token{unigrams[i].lexeme + " " + unigrams[i + 1].lexeme + " " +
                                unigrams[i + 2].lexeme,
                            TokenKind::Trigram, line_no});
    }
}

}  // namespace

const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Word: return "word";
        case TokenKind::ReservedWord: return "reserved-word";
        case TokenKind::Annotation: return "annotation";
        case TokenKind::MethodName: return "method-name";
        case TokenKind::Bigram: return "bigram";
        case TokenKind::Trigram: return "trigram";
    }
    return "word";
}

TokenKind token_kind_from_name(const std::string& name) {
    if (name == "word") return TokenKind::Word;
    if (name == "reserved-word") return TokenKind::ReservedWord;
    if (name == "annotation") return TokenKind::Annotation;
    if (name == "method-name") return TokenKind::MethodName;
    if (name == "bigram") return TokenKind::Bigram;
    if (name == "trigram") return TokenKind::Trigram;
    throw Error("unknown token kind: " + name);
}

const std::vector<std::string>& annotation_lexemes() {
    static const std::vector<std::string> kSet = {
        kAnnIndent, kAnnBlock,  kAnnNumber,  kAnnString,  kAnnList,
        kAnnDict,   kAnnTuple,  kAnnOpLogic, kAnnOpArit,  kAnnAttribution,
    };
    return kSet;
}

bool LexRules::is_reserved(const std::string& w) const {
    return std::binary_search(reserved_words.begin(), reserved_words.end(), w);
}

LexRules LexRules::defaults() {
    LexRules rules;
    rules.reserved_words = {
        "False",  "None",   "True",   "assert", "break",  "class",  "continue",
        "def",    "del",    "elif",   "else",   "except", "finally", "for",
        "from",   "global", "if",     "import", "in",     "is",     "lambda",
        "len",    "nonlocal", "pass", "print",  "raise",  "range",  "return",
        "try",    "while",  "with",   "yield",
    };
    std::sort(rules.reserved_words.begin(), rules.reserved_words.end());
    return rules;
}

LexRules LexRules::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rules file: " + path);
    LexRules rules;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string word;
        if (ss >> word) rules.reserved_words.push_back(word);
    }
    std::sort(rules.reserved_words.begin(), rules.reserved_words.end());
    rules.reserved_words.erase(
        std::unique(rules.reserved_words.begin(), rules.reserved_words.end()),
        rules.reserved_words.end());
    return rules;
}

TokenDoc tokenize_standard(const SourceDoc& doc) {
    TokenDoc result;
    result.doc_id = doc.id;
    int line_no = 1;
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            result.tokens.push_back(Token{cur, TokenKind::Word, line_no});
            cur.clear();
        }
    };
    for (char c : doc.text) {
        if (is_ident_char(c)) {
            cur += c;
        } else {
            flush();
            if (c == '\n') ++line_no;
        }
    }
    flush();
    if (result.tokens.empty()) throw EmptyDocumentError(doc.id);
    return result;
}

TokenDoc tokenize_augmented(const SourceDoc& doc, const LexRules& rules) {
    TokenDoc result;
    result.doc_id = doc.id;

    const std::vector<std::string> lines = split_lines(doc.text);
    char triple_quote = '\0';  // nonzero while inside a multi-line string

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        std::string line = lines[i];

        if (triple_quote != '\0') {
            const std::size_t close = line.find(std::string(3, triple_quote));
            if (close == std::string::npos) continue;  // still inside the string
            line = line.substr(close + 3);
            triple_quote = '\0';
            if (blank_or_comment(line)) continue;
            // lex the remainder, without indent tokens
            std::vector<Token> unigrams;
            LineLexer lexer{line, line_no, rules, unigrams, result.warnings};
            const bool terminated = lexer.run();
            if (!terminated) triple_quote = lexer.last_sig;
            if (terminated && lexer.last_sig == ':') {
                unigrams.push_back(Token{kAnnBlock, TokenKind::Annotation, line_no});
            }
            result.tokens.insert(result.tokens.end(), unigrams.begin(), unigrams.end());
            append_ngrams(result.tokens, unigrams, line_no);
            continue;
        }

        if (blank_or_comment(line)) continue;

        std::vector<Token> unigrams;
        for (int level = 0; level < indent_level(line); ++level) {
            unigrams.push_back(Token{kAnnIndent, TokenKind::Annotation, line_no});
        }
        LineLexer lexer{line, line_no, rules, unigrams, result.warnings};
        const bool terminated = lexer.run();
        if (!terminated) {
            // last_sig holds the quote char of the string that spans lines
            triple_quote = lexer.last_sig;
        }
        if (terminated && lexer.last_sig == ':') {
            unigrams.push_back(Token{kAnnBlock, TokenKind::Annotation, line_no});
        }
        result.tokens.insert(result.tokens.end(), unigrams.begin(), unigrams.end());
        append_ngrams(result.tokens, unigrams, line_no);
    }

    if (result.tokens.empty()) throw EmptyDocumentError(doc.id);
    return result;
}

}  // namespace codetopics

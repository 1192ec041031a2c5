#include "codetopics/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "codetopics/errors.hpp"

namespace codetopics {

std::vector<double> expand_range(double start, double stop, double step) {
    if (step <= 0.0) throw ConfigError("range step must be positive");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = start + i * step;
        if (v > stop + step * 1e-9) break;
        out.push_back(v);
    }
    return out;
}

std::vector<int> expand_int_range(int start, int stop) {
    std::vector<int> out;
    for (int v = start; v <= stop; ++v) out.push_back(v);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

// "a:b:c" expands start:stop:step, otherwise a comma list.
std::vector<double> parse_double_list(const std::string& value) {
    if (value.find(':') != std::string::npos) {
        const auto parts = split(value, ':');
        if (parts.size() != 3) throw ConfigError("expected start:stop:step in '" + value + "'");
        return expand_range(std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]));
    }
    std::vector<double> out;
    for (const auto& p : split(value, ',')) {
        if (!p.empty()) out.push_back(std::stod(p));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& value) {
    if (value.find(':') != std::string::npos) {
        const auto parts = split(value, ':');
        if (parts.size() != 2) throw ConfigError("expected start:stop in '" + value + "'");
        return expand_int_range(std::stoi(parts[0]), std::stoi(parts[1]));
    }
    std::vector<int> out;
    for (const auto& p : split(value, ',')) {
        if (!p.empty()) out.push_back(std::stoi(p));
    }
    return out;
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("not a boolean: '" + value + "'");
}

}  // namespace

std::vector<std::vector<int>> PipelineConfig::parse_merges(const std::string& text) {
    std::vector<std::vector<int>> merges;
    for (const auto& group : split(text, ';')) {
        if (group.empty()) continue;
        std::vector<int> ids;
        for (const auto& part : split(group, '+')) {
            if (part.empty()) continue;
            const int one_based = std::stoi(part);
            if (one_based < 1) throw ConfigError("merge topic ids are 1-based");
            ids.push_back(one_based - 1);
        }
        if (ids.size() < 2) throw ConfigError("merge group needs at least 2 topics: " + group);
        merges.push_back(std::move(ids));
    }
    return merges;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    PipelineConfig config;
    std::string section, line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (section == "corpus") {
                if (key == "dir") config.corpus_dir = value;
                else if (key == "external_dir") config.external_corpus_dir = value;
                else throw ConfigError("unknown key");
            } else if (section == "tokenizer") {
                if (key == "mode") config.tokenizer_mode = value;
                else if (key == "rules") config.rules_path = value;
                else throw ConfigError("unknown key");
            } else if (section == "grid") {
                if (key == "min_df") config.grid.min_df_values = parse_double_list(value);
                else if (key == "binary") {
                    config.grid.binary_values.clear();
                    for (const auto& p : split(value, ','))
                        if (!p.empty()) config.grid.binary_values.push_back(parse_bool(p));
                } else if (key == "vectorizer") {
                    config.grid.vectorizers.clear();
                    for (const auto& p : split(value, ','))
                        if (!p.empty())
                            config.grid.vectorizers.push_back(weighting_from_name(p));
                } else if (key == "method") {
                    config.grid.methods.clear();
                    for (const auto& p : split(value, ','))
                        if (!p.empty()) config.grid.methods.push_back(method_from_name(p));
                } else if (key == "k") {
                    const auto ks = parse_int_list(value);
                    if (ks.empty()) throw ConfigError("empty k range");
                    config.grid.k_min = *std::min_element(ks.begin(), ks.end());
                    config.grid.k_max = *std::max_element(ks.begin(), ks.end());
                } else if (key == "repeats") {
                    config.repeats = std::stoi(value);
                } else if (key == "base_seed") {
                    config.base_seed = std::stoull(value);
                } else if (key == "workers") {
                    config.workers = std::stoi(value);
                } else if (key == "top_k") {
                    config.top_k = std::stoi(value);
                } else {
                    throw ConfigError("unknown key");
                }
            } else if (section == "selection") {
                if (key == "min_docs") config.min_docs = std::stoi(value);
                else if (key == "merges") config.merges = parse_merges(value);
                else throw ConfigError("unknown key");
            } else if (section == "report") {
                if (key == "lambda") config.lambda = std::stod(value);
                else if (key == "top_n") config.top_n = std::stoi(value);
                else if (key == "percentile") config.percentile = std::stod(value);
                else if (key == "intruder_seed") config.intruder_seed = std::stoull(value);
                else throw ConfigError("unknown key");
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what() +
                              " ('" + key + "')");
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": bad value for '" +
                              key + "': " + e.what());
        }
    }
    return config;
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "[corpus]\ndir = " << corpus_dir << "\nexternal_dir = " << external_corpus_dir
        << "\n[tokenizer]\nmode = " << tokenizer_mode << "\nrules = " << rules_path
        << "\n[grid]\nmin_df =";
    for (double v : grid.min_df_values) out << " " << v;
    out << "\nbinary =";
    for (bool b : grid.binary_values) out << " " << (b ? "true" : "false");
    out << "\nvectorizer =";
    for (auto v : grid.vectorizers) out << " " << weighting_name(v);
    out << "\nmethod =";
    for (auto m : grid.methods) out << " " << method_name(m);
    out << "\nk = " << grid.k_min << ":" << grid.k_max << "\nrepeats = " << repeats
        << "\nbase_seed = " << base_seed << "\ntop_k = " << top_k
        << "\n[selection]\nmin_docs = " << min_docs << "\nmerges =";
    for (const auto& g : merges) {
        out << " ";
        for (std::size_t i = 0; i < g.size(); ++i) out << (i ? "+" : "") << g[i] + 1;
    }
    out << "\n[report]\nlambda = " << lambda << "\ntop_n = " << top_n
        << "\npercentile = " << percentile << "\nintruder_seed = " << intruder_seed << "\n";
    return out.str();
}

}  // namespace codetopics

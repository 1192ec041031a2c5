#include "codetopics/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "codetopics/config.hpp"
#include "codetopics/errors.hpp"
#include "codetopics/evaluation.hpp"
#include "codetopics/manifest.hpp"
#include "codetopics/sha256.hpp"
#include "codetopics/topics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace codetopics {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_stat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

// ---- token stream serialization ------------------------------------------

void save_tokens_jsonl(const std::vector<TokenDoc>& docs, const std::string& path) {
    std::ofstream out = open_out(path);
    for (const auto& doc : docs) {
        json j;
        j["doc_id"] = doc.doc_id;
        json toks = json::array();
        for (const auto& t : doc.tokens) {
            toks.push_back({t.lexeme, token_kind_name(t.kind), t.line});
        }
        j["tokens"] = std::move(toks);
        if (!doc.warnings.empty()) j["warnings"] = doc.warnings;
        out << j.dump() << "\n";
    }
}

std::vector<TokenDoc> load_tokens_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open token file: " + path);
    std::vector<TokenDoc> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        TokenDoc doc;
        doc.doc_id = j.at("doc_id").get<std::string>();
        for (const auto& t : j.at("tokens")) {
            doc.tokens.push_back(Token{t.at(0).get<std::string>(),
                                       token_kind_from_name(t.at(1).get<std::string>()),
                                       t.at(2).get<int>()});
        }
        if (j.contains("warnings")) {
            doc.warnings = j.at("warnings").get<std::vector<std::string>>();
        }
        docs.push_back(std::move(doc));
    }
    if (docs.empty()) throw MissingInputError("no token documents in " + path);
    return docs;
}

std::vector<TokenDoc> tokenize_corpus(const std::string& dir, const std::string& mode,
                                      const std::string& rules_path) {
    const std::vector<SourceDoc> sources = load_corpus(dir);
    const LexRules rules =
        rules_path.empty() ? LexRules::defaults() : LexRules::load(rules_path);
    std::vector<TokenDoc> docs;
    for (const auto& src : sources) {
        if (mode == "standard") {
            docs.push_back(tokenize_standard(src));
        } else if (mode == "augmented") {
            docs.push_back(tokenize_augmented(src, rules));
        } else {
            throw ConfigError("unknown tokenizer mode: " + mode);
        }
    }
    return docs;
}

DocTermMatrix build_weighted_matrix(const std::vector<TokenDoc>& docs, double min_df,
                                    bool binary, Weighting vectorizer) {
    if (vectorizer == Weighting::Binary) {
        throw ConfigError("binary is a counting flag, not a vectorizer; use --binary");
    }
    const Vocabulary vocab = build_vocabulary(docs, min_df);
    DocTermMatrix m = build_matrix(docs, vocab, binary);
    switch (vectorizer) {
        case Weighting::Count:
        case Weighting::Binary:
            return m;
        case Weighting::Tfidf:
            return weight_tfidf(m);
        case Weighting::Ncut:
            return weight_ncut(m);
    }
    return m;
}

// ---- model spec strings ("min_df=0.35,binary=true,...") --------------------

struct ModelSpec {
    double min_df = 0.05;
    bool binary = false;
    Weighting vectorizer = Weighting::Count;
    std::string method = "nmf";  // nmf, lda or kmeans
    int k = 2;

    json to_json() const {
        return {{"min_df", min_df},
                {"binary", binary},
                {"vectorizer", weighting_name(vectorizer)},
                {"method", method},
                {"k", k}};
    }
};

ModelSpec parse_model_spec(const std::string& text) {
    ModelSpec spec;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("bad model spec item: " + item);
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "min_df") spec.min_df = std::stod(value);
        else if (key == "binary") spec.binary = (value == "true" || value == "1");
        else if (key == "vectorizer") spec.vectorizer = weighting_from_name(value);
        else if (key == "method") spec.method = value;
        else if (key == "k") spec.k = std::stoi(value);
        else throw ConfigError("unknown model spec key: " + key);
    }
    if (spec.method != "nmf" && spec.method != "lda" && spec.method != "kmeans") {
        throw ConfigError("model spec method must be nmf, lda or kmeans");
    }
    return spec;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median UCI-NPMI over per-topic term lists; nullopt when no topic scores.
std::optional<double> median_uci(const std::vector<std::vector<std::string>>& term_lists,
                                 const CooccurrenceStats& stats, int n) {
    std::vector<double> scores;
    for (const auto& terms : term_lists) {
        if (terms.empty()) continue;
        try {
            scores.push_back(uci_npmi_coherence(terms, stats, n).value);
        } catch (const NoValidPairsError&) {
        }
    }
    if (scores.empty()) return std::nullopt;
    return median_of(std::move(scores));
}

// ---- subcommand state ------------------------------------------------------

struct TokenizeCmd {
    std::string corpus, mode = "augmented", rules, out;
};

struct MatrixCmd {
    std::string tokens, vectorizer = "count", out_matrix, out_vocab;
    double min_df = 0.0;
    bool binary = false;
};

struct FitCmd {
    std::string matrix, vocab, method = "nmf", out;
    int k = 2;
    std::uint64_t seed = 42;
};

struct GridCmd {
    std::string corpus, config, mode, rules;
    std::string out_csv = "grid.csv", out_jsonl = "grid_runs.jsonl", out_best = "best_models.txt";
    std::string out_manifest = "grid_manifest.json";
    int repeats = -1, workers = -1, top_k = -1;
    std::int64_t base_seed = -1;
};

struct SelectCmd {
    std::string model, merges, out;
    int min_docs = 3;
};

struct ReportCmd {
    std::string model, matrix, vocab, test_matrix, test_vocab, merges, out_dir, config;
    int min_docs = 3;
    double lambda = 0.6;
    int top_n = 30;
    double percentile = 75.0;
    std::uint64_t seed = 7;
};

struct EvaluateCmd {
    std::string corpus, external, mode = "augmented", rules, model_a, model_b, out, config;
    int repeats = 10;
    std::uint64_t base_seed = 42;
};

struct IntruderCmd {
    std::string model, merges, out_tasks = "intruder_tasks.json", out_key = "intruder_key.json";
    std::string tasks, key, answers, out;
    int min_docs = 3;
    std::uint64_t seed = 7;
    bool score = false;
};

// ---- tokenize / matrix / fit -----------------------------------------------

void cmd_tokenize(const TokenizeCmd& cmd) {
    save_tokens_jsonl(tokenize_corpus(cmd.corpus, cmd.mode, cmd.rules), cmd.out);
}

void cmd_matrix(const MatrixCmd& cmd) {
    const auto docs = load_tokens_jsonl(cmd.tokens);
    const DocTermMatrix m =
        build_weighted_matrix(docs, cmd.min_df, cmd.binary, weighting_from_name(cmd.vectorizer));
    save_doc_term_matrix(m, cmd.out_matrix, cmd.out_vocab);
}

void cmd_fit(const FitCmd& cmd) {
    const DocTermMatrix m = load_doc_term_matrix(cmd.matrix, cmd.vocab);
    const TopicModel model = method_from_name(cmd.method) == Method::Nmf
                                 ? fit_nmf(m, cmd.k, cmd.seed)
                                 : fit_lda(m, cmd.k, cmd.seed);
    save_model(model, cmd.out);
}

// ---- grid -------------------------------------------------------------------

void cmd_grid(const GridCmd& cmd) {
    PipelineConfig config;
    if (!cmd.config.empty()) config = PipelineConfig::load(cmd.config);
    if (!cmd.corpus.empty()) config.corpus_dir = cmd.corpus;
    if (!cmd.mode.empty()) config.tokenizer_mode = cmd.mode;
    if (!cmd.rules.empty()) config.rules_path = cmd.rules;
    if (cmd.repeats > 0) config.repeats = cmd.repeats;
    if (cmd.workers > 0) config.workers = cmd.workers;
    if (cmd.top_k > 0) config.top_k = cmd.top_k;
    if (cmd.base_seed >= 0) config.base_seed = static_cast<std::uint64_t>(cmd.base_seed);
    if (config.corpus_dir.empty()) throw ConfigError("grid needs a corpus directory");

    const auto docs =
        tokenize_corpus(config.corpus_dir, config.tokenizer_mode, config.rules_path);
    const auto grid = enumerate_grid(config.grid);
    const auto results =
        run_grid(docs, grid, config.repeats, config.base_seed, config.workers);

    {
        std::ofstream out = open_out(cmd.out_csv);
        out << "# std=population (divide by n); coherence=UMass on the training corpus\n";
        out << "min_df,binary,vectorizer,method,k,runs,mean_c5,std_c5,mean_c10,std_c10\n";
        for (const auto& r : results) {
            out << format_stat(r.params.min_df) << "," << (r.params.binary ? "true" : "false")
                << "," << weighting_name(r.params.vectorizer) << ","
                << method_name(r.params.method) << "," << r.params.k << "," << r.runs << ",";
            if (r.failed()) {
                out << ",,,\n";
            } else {
                out << format_stat(r.mean_c5) << "," << format_stat(r.std_c5) << ","
                    << format_stat(r.mean_c10) << "," << format_stat(r.std_c10) << "\n";
            }
        }
    }
    {
        std::ofstream out = open_out(cmd.out_jsonl);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            json base = {{"grid_index", i},
                         {"min_df", r.params.min_df},
                         {"binary", r.params.binary},
                         {"vectorizer", weighting_name(r.params.vectorizer)},
                         {"method", method_name(r.params.method)},
                         {"k", r.params.k}};
            if (r.failed()) {
                json j = base;
                j["error"] = r.error;
                out << j.dump() << "\n";
                continue;
            }
            for (const auto& run : r.per_run) {
                json j = base;
                j["seed"] = run.seed;
                j["c5"] = run.c5;
                j["c10"] = run.c10;
                out << j.dump() << "\n";
            }
        }
    }
    {
        std::vector<RankedItem> by_c5, by_c10;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].failed()) continue;
            by_c5.push_back({static_cast<int>(i), results[i].mean_c5});
            by_c10.push_back({static_cast<int>(i), results[i].mean_c10});
        }
        std::ofstream out = open_out(cmd.out_best);
        out << "# Fagin top-k over the mean_c5 and mean_c10 rankings; aggregate = mean\n";
        out << "# rank aggregate min_df binary vectorizer method k mean_c5 mean_c10\n";
        if (!by_c5.empty()) {
            const int top_k = std::min<int>(config.top_k, static_cast<int>(by_c5.size()));
            const auto best = fagin_topk(by_c5, by_c10, top_k);
            for (std::size_t rank = 0; rank < best.size(); ++rank) {
                const auto& r = results[best[rank].id];
                out << (rank + 1) << " " << format_stat(best[rank].score) << " "
                    << format_stat(r.params.min_df) << " "
                    << (r.params.binary ? "true" : "false") << " "
                    << weighting_name(r.params.vectorizer) << " "
                    << method_name(r.params.method) << " " << r.params.k << " "
                    << format_stat(r.mean_c5) << " " << format_stat(r.mean_c10) << "\n";
            }
        }
    }

    RunManifest manifest;
    manifest.command = "grid";
    manifest.config_hash = sha256_hex(config.canonical());
    manifest.created_utc = RunManifest::now_utc();
    manifest.base_seed = config.base_seed;
    manifest.repeats = config.repeats;
    manifest.add_output(cmd.out_csv);
    manifest.add_output(cmd.out_jsonl);
    manifest.add_output(cmd.out_best);
    manifest.save(cmd.out_manifest);
}

// ---- select -----------------------------------------------------------------

json selection_to_json(const TopicSelection& sel, const Assignment& assignment) {
    auto one_based = [](const std::vector<int>& v) {
        std::vector<int> out;
        for (int t : v) out.push_back(t + 1);
        return out;
    };
    json j;
    j["min_docs"] = sel.min_docs;
    j["kept"] = one_based(sel.kept);
    json merged = json::array();
    for (const auto& group : sel.merged) merged.push_back(one_based(group));
    j["merged"] = merged;
    j["removed_empty"] = one_based(sel.removed_empty);
    j["removed_small"] = one_based(sel.removed_small);
    j["kept_docs_per_topic"] = sel.kept_docs_per_topic;
    j["topic_counts"] = assignment.docs_per_topic;
    j["unassigned_docs"] = static_cast<int>(assignment.unassigned.size());
    return j;
}

void cmd_select(const SelectCmd& cmd) {
    const TopicModel model = load_model(cmd.model);
    const Assignment assignment = hard_assign(model);
    const TopicSelection sel = filter_topics(model, assignment, cmd.min_docs,
                                             PipelineConfig::parse_merges(cmd.merges));
    std::ofstream out = open_out(cmd.out);
    out << selection_to_json(sel, assignment).dump(2) << "\n";
}

// ---- report -----------------------------------------------------------------

void cmd_report(const ReportCmd& cmd) {
    const TopicModel model = load_model(cmd.model);
    const DocTermMatrix dtm = load_doc_term_matrix(cmd.matrix, cmd.vocab);
    const Assignment assignment = hard_assign(model);
    const TopicSelection selection = filter_topics(
        model, assignment, cmd.min_docs, PipelineConfig::parse_merges(cmd.merges));
    if (selection.kept.empty()) {
        throw Error("selection removed every topic; lower --min-docs or adjust merges");
    }
    const TopicModel selected = apply_selection(model, selection);

    fs::create_directories(cmd.out_dir);
    const auto path = [&](const std::string& name) {
        return (fs::path(cmd.out_dir) / name).string();
    };

    json report;
    report["model"] = {{"method", method_name(model.method)},
                       {"k", model.k},
                       {"seed", model.seed}};
    report["selection"] = selection_to_json(selection, assignment);

    // per-document assignments (1-based topics; 0 = unassigned/dropped)
    std::map<int, int> slot_of;  // original topic -> kept slot
    for (std::size_t i = 0; i < selection.kept.size(); ++i) {
        slot_of[selection.kept[i]] = static_cast<int>(i);
    }
    for (const auto& group : selection.merged) {
        const int repr = *std::min_element(group.begin(), group.end());
        if (slot_of.count(repr)) {
            for (int t : group) slot_of[t] = slot_of.at(repr);
        }
    }
    {
        json rows = json::array();
        std::ofstream csv = open_out(path("assignments.csv"));
        csv << "doc,topic,kept_topic,weight\n";
        for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
            const int t = assignment.topic_of_doc[d];
            const double w = t >= 0 ? model.doc_topic(d, t) : 0.0;
            const int kept = t >= 0 && slot_of.count(t) ? selection.kept[slot_of.at(t)] + 1 : 0;
            rows.push_back({{"doc", model.doc_ids[d]},
                            {"topic", t + 1},
                            {"kept_topic", kept},
                            {"weight", w}});
            csv << csv_escape(model.doc_ids[d]) << "," << (t + 1) << "," << kept << ","
                << format_double(w) << "\n";
        }
        report["assignments"] = std::move(rows);
    }
    {
        std::ofstream csv = open_out(path("topic_counts.csv"));
        csv << "topic,docs,status\n";
        for (int t = 0; t < model.k; ++t) {
            std::string status = "kept";
            if (std::count(selection.removed_empty.begin(), selection.removed_empty.end(), t)) {
                status = "removed_empty";
            } else if (std::count(selection.removed_small.begin(), selection.removed_small.end(),
                                  t)) {
                status = "removed_small";
            } else if (slot_of.count(t) && selection.kept[slot_of.at(t)] != t) {
                status = "merged_into_" + std::to_string(selection.kept[slot_of.at(t)] + 1);
            }
            csv << (t + 1) << "," << assignment.docs_per_topic[t] << "," << status << "\n";
        }
    }

    // top terms and relevance for the kept topics
    {
        json top = json::object();
        std::ofstream csv = open_out(path("top_terms.csv"));
        csv << "topic,rank,term,weight\n";
        for (int slot = 0; slot < selected.k; ++slot) {
            const int label = selection.kept[slot] + 1;
            const auto terms = topic_top_terms(selected, slot, cmd.top_n);
            json list = json::array();
            for (std::size_t r = 0; r < terms.size(); ++r) {
                const int col = static_cast<int>(
                    std::find(selected.terms.begin(), selected.terms.end(), terms[r]) -
                    selected.terms.begin());
                list.push_back(terms[r]);
                csv << label << "," << (r + 1) << "," << csv_escape(terms[r]) << ","
                    << format_double(selected.topic_term(slot, col)) << "\n";
            }
            top["topic_" + std::to_string(label)] = std::move(list);
        }
        report["top_terms"] = std::move(top);
    }
    {
        const auto relevance = relevance_terms(selected, dtm, cmd.lambda, cmd.top_n);
        json rel = json::object();
        std::ofstream csv = open_out(path("relevance.csv"));
        csv << "topic,rank,term\n";
        for (int slot = 0; slot < selected.k; ++slot) {
            const int label = selection.kept[slot] + 1;
            rel["topic_" + std::to_string(label)] = relevance[slot];
            for (std::size_t r = 0; r < relevance[slot].size(); ++r) {
                csv << label << "," << (r + 1) << "," << csv_escape(relevance[slot][r]) << "\n";
            }
        }
        report["relevance"] = {{"lambda", cmd.lambda}, {"terms", std::move(rel)}};
    }
    {
        const TermImportance imp = important_terms_percentile(selected, cmd.percentile);
        json topics = json::object();
        std::ofstream csv = open_out(path("importance.csv"));
        csv << "topic,term,weight,exclusive\n";
        for (int slot = 0; slot < selected.k; ++slot) {
            const int label = selection.kept[slot] + 1;
            json list = json::array();
            for (std::size_t j = 0; j < selected.terms.size(); ++j) {
                if (!imp.important[slot][j]) continue;
                list.push_back({{"term", selected.terms[j]},
                                {"weight", selected.topic_term(slot, j)},
                                {"exclusive", static_cast<bool>(imp.exclusive[j])}});
                csv << label << "," << csv_escape(selected.terms[j]) << ","
                    << format_double(selected.topic_term(slot, j)) << ","
                    << (imp.exclusive[j] ? 1 : 0) << "\n";
            }
            topics["topic_" + std::to_string(label)] = std::move(list);
        }
        report["importance"] = {{"percentile", cmd.percentile},
                                {"threshold", imp.threshold},
                                {"topics", std::move(topics)}};
    }

    // distances + projections
    {
        const Eigen::MatrixXd dist = topic_distance_matrix(selected);
        json matrix = json::array();
        std::ofstream csv = open_out(path("distances.csv"));
        csv << "topic";
        for (int t = 0; t < selected.k; ++t) csv << ",topic_" << selection.kept[t] + 1;
        csv << "\n";
        for (int a = 0; a < selected.k; ++a) {
            json row = json::array();
            csv << "topic_" << selection.kept[a] + 1;
            for (int b = 0; b < selected.k; ++b) {
                row.push_back(dist(a, b));
                csv << "," << format_double(dist(a, b));
            }
            csv << "\n";
            matrix.push_back(std::move(row));
        }
        report["distance_matrix"] = std::move(matrix);

        if (selected.k >= 2) {
            const Pcoa2d pcoa = pcoa_2d(dist);
            const auto shares = topic_term_shares(selected);
            json points = json::array();
            std::ofstream pcsv = open_out(path("intertopic.csv"));
            pcsv << "topic,x,y,term_share,docs\n";
            for (int t = 0; t < selected.k; ++t) {
                points.push_back({{"topic", selection.kept[t] + 1},
                                  {"x", pcoa.coords(t, 0)},
                                  {"y", pcoa.coords(t, 1)},
                                  {"term_share", shares[t]},
                                  {"docs", selection.kept_docs_per_topic[t]}});
                pcsv << selection.kept[t] + 1 << "," << format_double(pcoa.coords(t, 0)) << ","
                     << format_double(pcoa.coords(t, 1)) << "," << format_double(shares[t])
                     << "," << selection.kept_docs_per_topic[t] << "\n";
            }
            report["intertopic"] = {{"points", std::move(points)},
                                    {"eigenvalues", pcoa.eigenvalues},
                                    {"negative_eigenvalues_clamped", pcoa.clamped}};
        }
    }
    {
        const Eigen::MatrixXd coords = pca_2d(dtm);
        json points = json::array();
        std::ofstream csv = open_out(path("pca.csv"));
        csv << "doc,x,y,topic\n";
        for (int d = 0; d < coords.rows(); ++d) {
            points.push_back({{"doc", dtm.rows[d]},
                              {"x", coords(d, 0)},
                              {"y", coords(d, 1)},
                              {"topic", assignment.topic_of_doc[d] + 1}});
            csv << csv_escape(dtm.rows[d]) << "," << format_double(coords(d, 0)) << ","
                << format_double(coords(d, 1)) << "," << assignment.topic_of_doc[d] + 1 << "\n";
        }
        report["pca"] = std::move(points);
    }

    // intruder tasks; the answer key goes to a separate file
    try {
        const auto tasks =
            make_intruder_tasks(assignment, selection, model.doc_ids, cmd.seed);
        json tasks_json = json::array();
        json key_json = json::array();
        for (const auto& task : tasks) {
            tasks_json.push_back({{"task_id", task.task_id},
                                  {"topic", task.topic + 1},
                                  {"documents", task.shuffled}});
            key_json.push_back({{"task_id", task.task_id},
                                {"intruder_index", task.answer_index},
                                {"intruder_doc", task.intruder_doc},
                                {"intruder_topic", task.intruder_topic + 1}});
        }
        report["intruder_tasks"] = tasks_json;
        std::ofstream key = open_out(path("intruder_key.json"));
        json key_file = {{"seed", cmd.seed},
                         {"answers", key_json},
                         {"selection", selection_to_json(selection, assignment)}};
        key << key_file.dump(2) << "\n";
    } catch (const TooFewDocsError& e) {
        report["intruder_tasks"] = nullptr;
        report["intruder_note"] = e.what();
    }

    // optional fold-in of a held-out matrix
    if (!cmd.test_matrix.empty()) {
        const DocTermMatrix test = load_doc_term_matrix(cmd.test_matrix, cmd.test_vocab);
        const InferResult inferred = infer_new_docs(model, test);
        std::vector<int> counts(model.k, 0);
        json rows = json::array();
        std::ofstream csv = open_out(path("test_assignments.csv"));
        csv << "doc,topic,weight\n";
        for (int d = 0; d < inferred.doc_topic.rows(); ++d) {
            int best = 0;
            for (int t = 1; t < model.k; ++t) {
                if (inferred.doc_topic(d, t) > inferred.doc_topic(d, best)) best = t;
            }
            const bool zero =
                std::count(inferred.zero_rows.begin(), inferred.zero_rows.end(), d) > 0;
            if (!zero) ++counts[best];
            rows.push_back({{"doc", test.rows[d]},
                            {"topic", zero ? 0 : best + 1},
                            {"weight", zero ? 0.0 : inferred.doc_topic(d, best)}});
            csv << csv_escape(test.rows[d]) << "," << (zero ? 0 : best + 1) << ","
                << format_double(zero ? 0.0 : inferred.doc_topic(d, best)) << "\n";
        }
        report["test_fold_in"] = {{"assignments", std::move(rows)},
                                  {"topic_counts", counts}};
    }

    {
        std::ofstream out = open_out(path("report.json"));
        out << report.dump(2) << "\n";
    }

    RunManifest manifest;
    manifest.command = "report";
    std::ostringstream params;  // input content, not paths, so location can't matter
    params << "model=" << sha256_file(cmd.model) << " matrix=" << sha256_file(cmd.matrix)
           << " vocab=" << sha256_file(cmd.vocab)
           << " test=" << (cmd.test_matrix.empty() ? "-" : sha256_file(cmd.test_matrix))
           << " min_docs=" << cmd.min_docs << " merges=" << cmd.merges
           << " lambda=" << cmd.lambda << " top_n=" << cmd.top_n
           << " percentile=" << cmd.percentile << " seed=" << cmd.seed;
    manifest.config_hash = sha256_hex(params.str());
    manifest.created_utc = RunManifest::now_utc();
    manifest.base_seed = cmd.seed;
    for (const auto& entry : fs::directory_iterator(cmd.out_dir)) {
        if (entry.path().filename() == "manifest.json") continue;
        if (entry.is_regular_file()) manifest.add_output(entry.path().string());
    }
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    manifest.save(path("manifest.json"));
}

// ---- evaluate ---------------------------------------------------------------

json evaluate_one(const ModelSpec& spec, const std::vector<TokenDoc>& train_docs,
                  const CooccurrenceStats& external_stats, int repeats,
                  std::uint64_t base_seed, std::vector<double>& c5_sample,
                  std::vector<double>& c10_sample) {
    const DocTermMatrix matrix =
        build_weighted_matrix(train_docs, spec.min_df, spec.binary, spec.vectorizer);

    int measured5 = 0, measured10 = 0;
    for (int r = 0; r < repeats; ++r) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
        std::vector<std::vector<std::string>> lists10;
        if (spec.method == "kmeans") {
            const ClusterModel cm = fit_kmeans(matrix, spec.k, seed);
            lists10 = cluster_top_terms_logreg(matrix, cm.labels, 10);
        } else {
            const TopicModel model = spec.method == "nmf" ? fit_nmf(matrix, spec.k, seed)
                                                          : fit_lda(matrix, spec.k, seed);
            for (int t = 0; t < model.k; ++t) {
                lists10.push_back(topic_top_terms(model, t, 10));
            }
        }
        std::vector<std::vector<std::string>> lists5;
        for (const auto& l : lists10) {
            lists5.emplace_back(l.begin(), l.begin() + std::min<std::size_t>(5, l.size()));
        }
        if (const auto c5 = median_uci(lists5, external_stats, 5)) {
            c5_sample.push_back(*c5);
            ++measured5;
        }
        if (const auto c10 = median_uci(lists10, external_stats, 10)) {
            c10_sample.push_back(*c10);
            ++measured10;
        }
    }

    auto stats_json = [&](const std::vector<double>& sample, int measured) -> json {
        if (sample.empty()) return nullptr;  // not measurable (no valid pairs)
        double mean = 0.0;
        for (double v : sample) mean += v;
        mean /= sample.size();
        double var = 0.0;
        for (double v : sample) var += (v - mean) * (v - mean);
        var /= sample.size();
        return {{"mean", mean}, {"std", std::sqrt(var)}, {"runs_measured", measured}};
    };
    json j = spec.to_json();
    j["runs"] = repeats;
    j["c5"] = stats_json(c5_sample, measured5);
    j["c10"] = stats_json(c10_sample, measured10);
    return j;
}

json mwu_json(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        return {{"p_two_sided", nullptr}, {"note", "a sample was not measurable"}};
    }
    try {
        const MannWhitneyResult r = mann_whitney_u(a, b);
        return {{"u", r.u}, {"p_two_sided", r.p_two_sided}, {"exact", r.exact}};
    } catch (const DegenerateSamplesError& e) {
        return {{"p_two_sided", nullptr}, {"note", e.what()}};
    }
}

void cmd_evaluate(const EvaluateCmd& cmd) {
    const auto train_docs = tokenize_corpus(cmd.corpus, cmd.mode, cmd.rules);
    const auto external_docs = tokenize_corpus(cmd.external, cmd.mode, cmd.rules);
    const CooccurrenceStats external_stats(external_docs);

    const ModelSpec spec_a = parse_model_spec(cmd.model_a);
    const ModelSpec spec_b = parse_model_spec(cmd.model_b);

    std::vector<double> a5, a10, b5, b10;
    json result;
    result["metric"] = "uci_npmi";
    result["external_docs"] = external_stats.n_docs();
    result["repeats"] = cmd.repeats;
    result["base_seed"] = cmd.base_seed;
    result["model_a"] =
        evaluate_one(spec_a, train_docs, external_stats, cmd.repeats, cmd.base_seed, a5, a10);
    result["model_b"] =
        evaluate_one(spec_b, train_docs, external_stats, cmd.repeats, cmd.base_seed, b5, b10);
    result["mann_whitney"] = {{"c5", mwu_json(a5, b5)}, {"c10", mwu_json(a10, b10)}};

    std::ofstream out = open_out(cmd.out);
    out << result.dump(2) << "\n";
}

// ---- intruder ---------------------------------------------------------------

void cmd_intruder(const IntruderCmd& cmd) {
    if (!cmd.score) {
        const TopicModel model = load_model(cmd.model);
        const Assignment assignment = hard_assign(model);
        const TopicSelection selection = filter_topics(
            model, assignment, cmd.min_docs, PipelineConfig::parse_merges(cmd.merges));
        const auto tasks =
            make_intruder_tasks(assignment, selection, model.doc_ids, cmd.seed);

        json tasks_json = json::array();
        json key_json = json::array();
        for (const auto& task : tasks) {
            tasks_json.push_back({{"task_id", task.task_id},
                                  {"topic", task.topic + 1},
                                  {"documents", task.shuffled}});
            key_json.push_back({{"task_id", task.task_id},
                                {"intruder_index", task.answer_index},
                                {"intruder_doc", task.intruder_doc},
                                {"intruder_topic", task.intruder_topic + 1}});
        }
        std::ofstream tasks_out = open_out(cmd.out_tasks);
        tasks_out << json{{"tasks", tasks_json}}.dump(2) << "\n";
        std::ofstream key_out = open_out(cmd.out_key);
        json key_file = {{"seed", cmd.seed},
                         {"answers", key_json},
                         {"selection", selection_to_json(selection, assignment)}};
        key_out << key_file.dump(2) << "\n";
        return;
    }

    // scoring mode: rebuild the tasks from tasks + key files
    auto read_json = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw MissingInputError("cannot open " + p);
        json j;
        in >> j;
        return j;
    };
    const json tasks_file = read_json(cmd.tasks);
    const json key_file = read_json(cmd.key);
    const json answers_file = read_json(cmd.answers);

    TopicSelection selection;
    selection.min_docs = key_file.at("selection").at("min_docs").get<int>();
    for (int t : key_file.at("selection").at("kept")) selection.kept.push_back(t - 1);
    for (const auto& group : key_file.at("selection").at("merged")) {
        std::vector<int> g;
        for (int t : group) g.push_back(t - 1);
        selection.merged.push_back(std::move(g));
    }

    std::vector<IntruderTask> tasks;
    const auto& tlist = tasks_file.at("tasks");
    const auto& klist = key_file.at("answers");
    if (tlist.size() != klist.size()) throw ConfigError("tasks/key size mismatch");
    for (std::size_t i = 0; i < tlist.size(); ++i) {
        IntruderTask task;
        task.task_id = tlist[i].at("task_id").get<int>();
        task.topic = tlist[i].at("topic").get<int>() - 1;
        task.shuffled = tlist[i].at("documents").get<std::vector<std::string>>();
        task.answer_index = klist[i].at("intruder_index").get<int>();
        task.intruder_doc = klist[i].at("intruder_doc").get<std::string>();
        task.intruder_topic = klist[i].at("intruder_topic").get<int>() - 1;
        tasks.push_back(std::move(task));
    }
    const std::vector<int> answers = answers_file.at("answers").get<std::vector<int>>();

    const Eigen::MatrixXd confusion = score_intruder_answers(tasks, answers, selection);
    json matrix = json::array();
    for (int r = 0; r < confusion.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < confusion.cols(); ++c) row.push_back(confusion(r, c));
        matrix.push_back(std::move(row));
    }
    std::vector<int> kept_one_based;
    for (int t : selection.kept) kept_one_based.push_back(t + 1);
    std::ofstream out = open_out(cmd.out);
    out << json{{"topics", kept_one_based}, {"confusion", matrix}}.dump(2) << "\n";
}

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const EmptyDocumentError*>(&e)) return "EmptyDocument";
    if (dynamic_cast<const LexError*>(&e)) return "LexError";
    if (dynamic_cast<const EmptyCorpusError*>(&e)) return "EmptyCorpus";
    if (dynamic_cast<const AllTermsFilteredError*>(&e)) return "AllTermsFiltered";
    if (dynamic_cast<const DegenerateMatrixError*>(&e)) return "DegenerateMatrix";
    if (dynamic_cast<const VocabularyMismatchError*>(&e)) return "VocabularyMismatch";
    if (dynamic_cast<const TooFewDocumentsError*>(&e)) return "TooFewDocuments";
    if (dynamic_cast<const SingleClassError*>(&e)) return "SingleClass";
    if (dynamic_cast<const NoValidPairsError*>(&e)) return "NoValidPairs";
    if (dynamic_cast<const KTooLargeError*>(&e)) return "KTooLarge";
    if (dynamic_cast<const DegenerateSamplesError*>(&e)) return "DegenerateSamples";
    if (dynamic_cast<const MergeOverlapError*>(&e)) return "MergeOverlap";
    if (dynamic_cast<const TooFewDocsError*>(&e)) return "TooFewDocs";
    if (dynamic_cast<const DegenerateSpectrumError*>(&e)) return "DegenerateSpectrum";
    if (dynamic_cast<const DegenerateDataError*>(&e)) return "DegenerateData";
    if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const MissingInputError*>(&e)) return "MissingInput";
    if (dynamic_cast<const IoError*>(&e)) return "IoError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "InternalError";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"code topic clustering pipeline"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    TokenizeCmd tok;
    auto* tokenize = app.add_subcommand("tokenize", "tokenize a corpus directory");
    tokenize->add_option("--corpus", tok.corpus, "corpus directory")->required();
    tokenize->add_option("--mode", tok.mode, "standard or augmented");
    tokenize->add_option("--rules", tok.rules, "reserved word table (one lexeme per line)");
    tokenize->add_option("--out", tok.out, "output token JSONL")->required();

    MatrixCmd mat;
    auto* matrix = app.add_subcommand("matrix", "build a weighted document-term matrix");
    matrix->add_option("--tokens", mat.tokens, "token JSONL from 'tokenize'")->required();
    matrix->add_option("--min-df", mat.min_df, "minimum document frequency fraction");
    matrix->add_flag("--binary", mat.binary, "count each term once per document");
    matrix->add_option("--vectorizer", mat.vectorizer, "count, tfidf or ncut");
    matrix->add_option("--out-matrix", mat.out_matrix, "sparse triplet output")->required();
    matrix->add_option("--out-vocab", mat.out_vocab, "vocabulary output")->required();

    FitCmd fit;
    auto* fitcmd = app.add_subcommand("fit", "fit one topic model");
    fitcmd->add_option("--matrix", fit.matrix, "matrix file")->required();
    fitcmd->add_option("--vocab", fit.vocab, "vocabulary file")->required();
    fitcmd->add_option("--method", fit.method, "nmf or lda");
    fitcmd->add_option("--k", fit.k, "number of topics")->required();
    fitcmd->add_option("--seed", fit.seed, "RNG seed");
    fitcmd->add_option("--out", fit.out, "model output file")->required();

    GridCmd grid;
    auto* gridcmd = app.add_subcommand("grid", "hyperparameter grid search");
    gridcmd->add_option("--corpus", grid.corpus, "corpus directory");
    gridcmd->add_option("--config", grid.config, "pipeline config file")
        ->envname("CODETOPICS_CONFIG");
    gridcmd->add_option("--mode", grid.mode, "tokenizer mode override");
    gridcmd->add_option("--rules", grid.rules, "reserved word table");
    gridcmd->add_option("--repeats", grid.repeats, "fits per grid point");
    gridcmd->add_option("--base-seed", grid.base_seed, "first seed of each point");
    gridcmd->add_option("--workers", grid.workers, "worker threads");
    gridcmd->add_option("--top-k", grid.top_k, "best models to keep");
    gridcmd->add_option("--out-csv", grid.out_csv, "grid report CSV");
    gridcmd->add_option("--out-jsonl", grid.out_jsonl, "per-run audit JSONL");
    gridcmd->add_option("--out-best", grid.out_best, "best-models file");
    gridcmd->add_option("--out-manifest", grid.out_manifest, "run manifest");

    SelectCmd sel;
    auto* selcmd = app.add_subcommand("select", "topic filtering and merging");
    selcmd->add_option("--model", sel.model, "model file")->required();
    selcmd->add_option("--min-docs", sel.min_docs, "minimum documents per topic");
    selcmd->add_option("--merges", sel.merges, "merge groups, e.g. \"2+4;7+9\" (1-based)");
    selcmd->add_option("--out", sel.out, "selection JSON output")->required();

    ReportCmd rep;
    auto* repcmd = app.add_subcommand("report", "emit the full report bundle");
    repcmd->add_option("--model", rep.model, "model file")->required();
    repcmd->add_option("--matrix", rep.matrix, "training matrix file")->required();
    repcmd->add_option("--vocab", rep.vocab, "training vocabulary file")->required();
    repcmd->add_option("--test-matrix", rep.test_matrix, "held-out matrix to fold in");
    repcmd->add_option("--test-vocab", rep.test_vocab, "held-out vocabulary");
    repcmd->add_option("--config", rep.config, "pipeline config file")
        ->envname("CODETOPICS_CONFIG");
    auto* rep_min_docs = repcmd->add_option("--min-docs", rep.min_docs,
                                            "minimum documents per topic");
    auto* rep_merges = repcmd->add_option("--merges", rep.merges, "merge groups (1-based)");
    auto* rep_lambda =
        repcmd->add_option("--lambda", rep.lambda, "relevance interpolation weight");
    auto* rep_top_n = repcmd->add_option("--top-n", rep.top_n, "terms per topic in reports");
    auto* rep_pct =
        repcmd->add_option("--percentile", rep.percentile, "importance percentile");
    auto* rep_seed = repcmd->add_option("--seed", rep.seed, "intruder task seed");
    repcmd->add_option("--out-dir", rep.out_dir, "report bundle directory")->required();

    EvaluateCmd eval;
    auto* evalcmd = app.add_subcommand("evaluate", "UCI-NPMI comparison of two model specs");
    auto* eval_corpus =
        evalcmd->add_option("--corpus", eval.corpus, "training corpus directory");
    auto* eval_external =
        evalcmd->add_option("--external", eval.external, "external corpus directory");
    auto* eval_mode = evalcmd->add_option("--mode", eval.mode, "tokenizer mode");
    auto* eval_rules = evalcmd->add_option("--rules", eval.rules, "reserved word table");
    evalcmd->add_option("--config", eval.config, "pipeline config file")
        ->envname("CODETOPICS_CONFIG");
    evalcmd->add_option("--model-a", eval.model_a, "spec, e.g. min_df=0.35,binary=true,vectorizer=ncut,method=nmf,k=7")
        ->required();
    evalcmd->add_option("--model-b", eval.model_b, "second spec")->required();
    auto* eval_repeats = evalcmd->add_option("--repeats", eval.repeats, "runs per spec");
    auto* eval_seed = evalcmd->add_option("--base-seed", eval.base_seed, "first seed");
    evalcmd->add_option("--out", eval.out, "evaluation JSON output")->required();

    IntruderCmd intr;
    auto* intrcmd = app.add_subcommand("intruder", "generate or score intruder tasks");
    intrcmd->add_option("--model", intr.model, "model file (generation)");
    intrcmd->add_option("--min-docs", intr.min_docs, "minimum documents per topic");
    intrcmd->add_option("--merges", intr.merges, "merge groups (1-based)");
    intrcmd->add_option("--seed", intr.seed, "sampling seed");
    intrcmd->add_option("--out-tasks", intr.out_tasks, "tasks JSON (generation)");
    intrcmd->add_option("--out-key", intr.out_key, "answer key JSON (generation)");
    intrcmd->add_flag("--score", intr.score, "score answers instead of generating");
    intrcmd->add_option("--tasks", intr.tasks, "tasks JSON (scoring)");
    intrcmd->add_option("--key", intr.key, "answer key JSON (scoring)");
    intrcmd->add_option("--answers", intr.answers, "rater answers JSON (scoring)");
    intrcmd->add_option("--out", intr.out, "confusion matrix JSON (scoring)");

    std::vector<const char*> argv;
    argv.push_back("codetopics");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        // config-file values fill in whatever the command line left unset
        if (*repcmd && !rep.config.empty()) {
            const PipelineConfig c = PipelineConfig::load(rep.config);
            if (!rep_min_docs->count()) rep.min_docs = c.min_docs;
            if (!rep_merges->count() && !c.merges.empty()) {
                std::ostringstream ss;
                for (std::size_t g = 0; g < c.merges.size(); ++g) {
                    if (g) ss << ";";
                    for (std::size_t i = 0; i < c.merges[g].size(); ++i) {
                        ss << (i ? "+" : "") << c.merges[g][i] + 1;
                    }
                }
                rep.merges = ss.str();
            }
            if (!rep_lambda->count()) rep.lambda = c.lambda;
            if (!rep_top_n->count()) rep.top_n = c.top_n;
            if (!rep_pct->count()) rep.percentile = c.percentile;
            if (!rep_seed->count()) rep.seed = c.intruder_seed;
        }
        if (*evalcmd && !eval.config.empty()) {
            const PipelineConfig c = PipelineConfig::load(eval.config);
            if (!eval_corpus->count()) eval.corpus = c.corpus_dir;
            if (!eval_external->count()) eval.external = c.external_corpus_dir;
            if (!eval_mode->count()) eval.mode = c.tokenizer_mode;
            if (!eval_rules->count()) eval.rules = c.rules_path;
            if (!eval_repeats->count()) eval.repeats = c.repeats;
            if (!eval_seed->count()) eval.base_seed = c.base_seed;
        }
        if (*evalcmd && (eval.corpus.empty() || eval.external.empty())) {
            throw ConfigError("evaluate needs --corpus and --external (or a config)");
        }
        if (*tokenize) cmd_tokenize(tok);
        if (*matrix) cmd_matrix(mat);
        if (*fitcmd) cmd_fit(fit);
        if (*gridcmd) cmd_grid(grid);
        if (*selcmd) cmd_select(sel);
        if (*repcmd) cmd_report(rep);
        if (*evalcmd) cmd_evaluate(eval);
        if (*intrcmd) cmd_intruder(intr);
    } catch (const std::exception& e) {
        const json err = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}

}  // namespace codetopics

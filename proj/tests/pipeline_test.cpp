#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "codetopics/cli.hpp"
#include "codetopics/config.hpp"
#include "codetopics/errors.hpp"
#include "codetopics/sha256.hpp"
#include "test_support.hpp"

using namespace codetopics;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("codetopics_pipe_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    json j;
    in >> j;
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kCorpus = testing::data_dir() + "/synthetic_corpus";
const std::string kExternal = testing::data_dir() + "/synthetic_external";

}  // namespace

TEST_CASE("pipeline: tokenize -> matrix -> fit -> report") {
    TempDir dir("chain");
    CHECK(run_cli({"tokenize", "--corpus", kCorpus, "--mode", "augmented", "--out",
                   dir.file("tokens.jsonl")}) == 0);
    CHECK(run_cli({"matrix", "--tokens", dir.file("tokens.jsonl"), "--min-df", "0.1",
                   "--vectorizer", "count", "--out-matrix", dir.file("dtm.txt"),
                   "--out-vocab", dir.file("vocab.txt")}) == 0);
    CHECK(run_cli({"fit", "--matrix", dir.file("dtm.txt"), "--vocab", dir.file("vocab.txt"),
                   "--method", "nmf", "--k", "2", "--seed", "42", "--out",
                   dir.file("model.txt")}) == 0);
    CHECK(run_cli({"report", "--model", dir.file("model.txt"), "--matrix",
                   dir.file("dtm.txt"), "--vocab", dir.file("vocab.txt"), "--out-dir",
                   dir.file("report"), "--seed", "9"}) == 0);

    const json report = read_json(dir.file("report/report.json"));
    CHECK(report.at("model").at("method") == "nmf");
    CHECK(report.at("assignments").size() == 40);
    CHECK(report.at("selection").at("kept").size() == 2);
    CHECK(report.at("distance_matrix").size() == 2);
    CHECK(report.at("pca").size() == 40);
    CHECK(report.at("intruder_tasks").size() == 2);
    CHECK(report.at("top_terms").size() == 2);

    // the bundle mirrors to CSV and carries a manifest with hashes
    for (const char* name :
         {"assignments.csv", "topic_counts.csv", "top_terms.csv", "relevance.csv",
          "importance.csv", "distances.csv", "intertopic.csv", "pca.csv",
          "intruder_key.json", "manifest.json"}) {
        CHECK(fs::exists(dir.path / "report" / name));
    }
    const json manifest = read_json(dir.file("report/manifest.json"));
    for (const auto& [name, hash] : manifest.at("outputs").items()) {
        CHECK(hash.get<std::string>() ==
              sha256_file((dir.path / "report" / name).string()));
    }
}

TEST_CASE("fit is byte-identical for the same seed") {
    TempDir dir("fitdet");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    for (const char* method : {"nmf", "lda"}) {
        REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                         "--method", method, "--k", "3", "--seed", "7", "--out",
                         dir.file("a.txt")}) == 0);
        REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                         "--method", method, "--k", "3", "--seed", "7", "--out",
                         dir.file("b.txt")}) == 0);
        CHECK(read_file(dir.file("a.txt")) == read_file(dir.file("b.txt")));
    }
}

TEST_CASE("report bundles are reproducible; manifests agree on every artifact hash") {
    TempDir dir("repro");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                     "--method", "lda", "--k", "2", "--seed", "3", "--out",
                     dir.file("model.txt")}) == 0);
    for (const char* out : {"r1", "r2"}) {
        REQUIRE(run_cli({"report", "--model", dir.file("model.txt"), "--matrix",
                         dir.file("m.txt"), "--vocab", dir.file("v.txt"), "--out-dir",
                         dir.file(out), "--seed", "5"}) == 0);
    }
    for (const auto& entry : fs::directory_iterator(dir.file("r1"))) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;  // carries the timestamp
        CHECK(read_file(entry.path().string()) ==
              read_file((dir.path / "r2" / name).string()));
    }
    const json m1 = read_json(dir.file("r1/manifest.json"));
    const json m2 = read_json(dir.file("r2/manifest.json"));
    CHECK(m1.at("outputs") == m2.at("outputs"));
    CHECK(m1.at("config_hash") == m2.at("config_hash"));
}

TEST_CASE("select emits the selection summary") {
    TempDir dir("select");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                     "--method", "nmf", "--k", "4", "--seed", "2", "--out",
                     dir.file("model.txt")}) == 0);
    REQUIRE(run_cli({"select", "--model", dir.file("model.txt"), "--min-docs", "3",
                     "--out", dir.file("sel.json")}) == 0);
    const json sel = read_json(dir.file("sel.json"));
    CHECK(sel.at("min_docs") == 3);
    CHECK(sel.at("topic_counts").size() == 4);

    // 1-based merge groups flow through the CLI
    REQUIRE(run_cli({"select", "--model", dir.file("model.txt"), "--min-docs", "0",
                     "--merges", "1+2", "--out", dir.file("sel2.json")}) == 0);
    const json merged = read_json(dir.file("sel2.json"));
    CHECK(merged.at("merged")[0] == json::array({1, 2}));
    CHECK(merged.at("kept").size() == 3);  // 1&2 collapse into one topic

    // binary is a counting flag, not a vectorizer name
    CHECK(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                   "--vectorizer", "binary", "--out-matrix", dir.file("m2.txt"),
                   "--out-vocab", dir.file("v2.txt")}) != 0);
}

TEST_CASE("grid command writes the CSV, audit log, and fagin best file") {
    TempDir dir("grid");
    const std::string cfg = dir.file("grid.cfg");
    {
        std::ofstream out(cfg);
        out << "[corpus]\ndir = " << kCorpus << "\n"
            << "[grid]\nmin_df = 0.1,0.2\nbinary = false\nvectorizer = count,tfidf\n"
            << "method = nmf\nk = 2:3\nrepeats = 2\nbase_seed = 5\ntop_k = 3\n";
    }
    CHECK(run_cli({"grid", "--config", cfg, "--out-csv", dir.file("grid.csv"),
                   "--out-jsonl", dir.file("runs.jsonl"), "--out-best",
                   dir.file("best.txt"), "--out-manifest", dir.file("manifest.json")}) == 0);

    // 2 min_df x 1 binary x 2 vectorizers x 1 method x 2 k = 8 points
    std::ifstream csv(dir.file("grid.csv"));
    std::string line;
    int rows = 0, header = 0;
    while (std::getline(csv, line)) {
        if (line.rfind("#", 0) == 0) continue;
        if (line.rfind("min_df", 0) == 0) {
            ++header;
            CHECK(line ==
                  "min_df,binary,vectorizer,method,k,runs,mean_c5,std_c5,mean_c10,std_c10");
            continue;
        }
        if (!line.empty()) ++rows;
    }
    CHECK(header == 1);
    CHECK(rows == 8);

    int run_lines = 0;
    std::ifstream jsonl(dir.file("runs.jsonl"));
    while (std::getline(jsonl, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        CHECK(j.contains("seed"));
        ++run_lines;
    }
    CHECK(run_lines == 16);  // 8 points x 2 repeats

    int best_lines = 0;
    std::ifstream best(dir.file("best.txt"));
    while (std::getline(best, line)) {
        if (!line.empty() && line[0] != '#') ++best_lines;
    }
    CHECK(best_lines == 3);
}

TEST_CASE("evaluate compares two specs against the external corpus") {
    TempDir dir("eval");
    CHECK(run_cli({"evaluate", "--corpus", kCorpus, "--external", kExternal,
                   "--model-a", "min_df=0.1,binary=false,vectorizer=count,method=lda,k=8",
                   "--model-b", "min_df=0.1,binary=false,vectorizer=count,method=lda,k=8",
                   "--repeats", "6", "--base-seed", "11", "--out",
                   dir.file("eval.json")}) == 0);
    const json eval = read_json(dir.file("eval.json"));
    CHECK(eval.at("model_a").at("c5").at("mean") == eval.at("model_b").at("c5").at("mean"));
    // identical result sets: the test statistic sits at the p = 1 region
    CHECK(eval.at("mann_whitney").at("c5").at("p_two_sided").get<double>() ==
          doctest::Approx(1.0));
}

TEST_CASE("evaluate supports the kmeans + logistic regression baseline") {
    TempDir dir("evalkm");
    CHECK(run_cli({"evaluate", "--corpus", kCorpus, "--external", kExternal,
                   "--model-a", "min_df=0.1,binary=false,vectorizer=count,method=lda,k=5",
                   "--model-b", "min_df=0.1,binary=false,vectorizer=count,method=kmeans,k=5",
                   "--repeats", "3", "--base-seed", "4", "--out",
                   dir.file("eval.json")}) == 0);
    const json eval = read_json(dir.file("eval.json"));
    CHECK(eval.at("model_b").at("method") == "kmeans");
    CHECK(eval.at("model_b").at("c5").is_object());
}

TEST_CASE("intruder generation and scoring round-trip") {
    TempDir dir("intruder");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                     "--method", "nmf", "--k", "2", "--seed", "1", "--out",
                     dir.file("model.txt")}) == 0);
    REQUIRE(run_cli({"intruder", "--model", dir.file("model.txt"), "--seed", "3",
                     "--out-tasks", dir.file("tasks.json"), "--out-key",
                     dir.file("key.json")}) == 0);

    const json tasks = read_json(dir.file("tasks.json"));
    const json key = read_json(dir.file("key.json"));
    REQUIRE(tasks.at("tasks").size() == 2);
    CHECK(tasks.dump().find("intruder") == std::string::npos);  // no answer leak

    json answers = json::object();
    answers["answers"] = json::array();
    for (const auto& entry : key.at("answers")) {
        answers["answers"].push_back(entry.at("intruder_index").get<int>());
    }
    {
        std::ofstream out(dir.file("answers.json"));
        out << answers.dump();
    }
    REQUIRE(run_cli({"intruder", "--score", "--tasks", dir.file("tasks.json"), "--key",
                     dir.file("key.json"), "--answers", dir.file("answers.json"), "--out",
                     dir.file("confusion.json")}) == 0);
    const json confusion = read_json(dir.file("confusion.json"));
    CHECK(confusion.at("confusion")[0][0] == doctest::Approx(1.0));
    CHECK(confusion.at("confusion")[1][1] == doctest::Approx(1.0));
}

TEST_CASE("report folds a held-out matrix into the trained model") {
    TempDir dir("foldin");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                     "--method", "lda", "--k", "2", "--seed", "6", "--out",
                     dir.file("model.txt")}) == 0);
    REQUIRE(run_cli({"tokenize", "--corpus", kExternal, "--out", dir.file("te.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("te.jsonl"), "--min-df", "0",
                     "--out-matrix", dir.file("me.txt"), "--out-vocab",
                     dir.file("ve.txt")}) == 0);
    REQUIRE(run_cli({"report", "--model", dir.file("model.txt"), "--matrix",
                     dir.file("m.txt"), "--vocab", dir.file("v.txt"), "--test-matrix",
                     dir.file("me.txt"), "--test-vocab", dir.file("ve.txt"), "--out-dir",
                     dir.file("report")}) == 0);

    const json report = read_json(dir.file("report/report.json"));
    const auto& fold = report.at("test_fold_in");
    CHECK(fold.at("assignments").size() == 16);
    int total = 0;
    for (const auto& c : fold.at("topic_counts")) total += c.get<int>();
    CHECK(total == 16);  // every external doc lands in a topic
    CHECK(fs::exists(dir.path / "report" / "test_assignments.csv"));

    // the planted split carries over: counts concentrate on both topics
    const auto& counts = fold.at("topic_counts");
    CHECK(counts[0].get<int>() > 0);
    CHECK(counts[1].get<int>() > 0);
}

TEST_CASE("standard tokenizer mode flows through the pipeline") {
    TempDir dir("standard");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--mode", "standard", "--out",
                     dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--binary", "--vectorizer", "tfidf", "--out-matrix",
                     dir.file("m.txt"), "--out-vocab", dir.file("v.txt")}) == 0);
    std::ifstream vocab(dir.file("v.txt"));
    std::string line;
    bool has_annotation = false;
    while (std::getline(vocab, line)) {
        if (line.rfind("is_", 0) == 0) has_annotation = true;
    }
    CHECK(!has_annotation);  // split words only
}

TEST_CASE("cli reports machine-readable errors and nonzero exit codes") {
    TempDir dir("err");
    CHECK(run_cli({"tokenize", "--corpus", dir.file("missing"), "--out",
                   dir.file("t.jsonl")}) != 0);
    CHECK(run_cli({"fit", "--matrix", dir.file("nope.txt"), "--vocab", dir.file("v.txt"),
                   "--k", "2", "--out", dir.file("m.txt")}) != 0);
}

TEST_CASE("report takes selection and report settings from a config file") {
    TempDir dir("repcfg");
    REQUIRE(run_cli({"tokenize", "--corpus", kCorpus, "--out", dir.file("t.jsonl")}) == 0);
    REQUIRE(run_cli({"matrix", "--tokens", dir.file("t.jsonl"), "--min-df", "0.1",
                     "--out-matrix", dir.file("m.txt"), "--out-vocab",
                     dir.file("v.txt")}) == 0);
    REQUIRE(run_cli({"fit", "--matrix", dir.file("m.txt"), "--vocab", dir.file("v.txt"),
                     "--method", "nmf", "--k", "3", "--seed", "2", "--out",
                     dir.file("model.txt")}) == 0);
    const std::string cfg = dir.file("r.cfg");
    {
        std::ofstream out(cfg);
        out << "[selection]\nmin_docs = 0\nmerges = 1+2\n"
            << "[report]\nlambda = 0.3\ntop_n = 7\nintruder_seed = 12\n";
    }
    REQUIRE(run_cli({"report", "--model", dir.file("model.txt"), "--matrix",
                     dir.file("m.txt"), "--vocab", dir.file("v.txt"), "--config", cfg,
                     "--out-dir", dir.file("rep")}) == 0);
    const json report = read_json(dir.file("rep/report.json"));
    CHECK(report.at("selection").at("merged")[0] == json::array({1, 2}));
    CHECK(report.at("relevance").at("lambda") == doctest::Approx(0.3));
    // command line still wins over the config
    REQUIRE(run_cli({"report", "--model", dir.file("model.txt"), "--matrix",
                     dir.file("m.txt"), "--vocab", dir.file("v.txt"), "--config", cfg,
                     "--lambda", "0.9", "--out-dir", dir.file("rep2")}) == 0);
    const json report2 = read_json(dir.file("rep2/report.json"));
    CHECK(report2.at("relevance").at("lambda") == doctest::Approx(0.9));
}

TEST_CASE("config defaults reproduce the full grid shape") {
    const PipelineConfig config;
    CHECK(enumerate_grid(config.grid).size() == 1680);
    CHECK(config.repeats == 10);
    CHECK(config.min_docs == 3);
    CHECK(config.lambda == doctest::Approx(0.6));
    CHECK(config.percentile == doctest::Approx(75.0));
}

TEST_CASE("config files parse ranges, merges, and overrides") {
    TempDir dir("cfg");
    const std::string path = dir.file("pipeline.cfg");
    {
        std::ofstream out(path);
        out << "# comment\n"
            << "[corpus]\ndir = /tmp/corpus\nexternal_dir = /tmp/ext\n"
            << "[tokenizer]\nmode = standard\n"
            << "[grid]\nmin_df = 0.05:0.50:0.05\nbinary = false,true\n"
            << "vectorizer = count,tfidf,ncut\nmethod = nmf,lda\nk = 2:15\n"
            << "repeats = 10\nbase_seed = 42\n"
            << "[selection]\nmin_docs = 3\nmerges = 2+4;7+9\n"
            << "[report]\nlambda = 0.4\ntop_n = 30\npercentile = 75\n";
    }
    const auto config = PipelineConfig::load(path);
    CHECK(config.corpus_dir == "/tmp/corpus");
    CHECK(config.tokenizer_mode == "standard");
    CHECK(enumerate_grid(config.grid).size() == 1680);
    CHECK(config.merges == std::vector<std::vector<int>>{{1, 3}, {6, 8}});
    CHECK(config.lambda == doctest::Approx(0.4));

    {
        std::ofstream out(path);
        out << "[grid]\nbogus_key = 1\n";
    }
    CHECK_THROWS_AS(PipelineConfig::load(path), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse_merges("2"), ConfigError);
}

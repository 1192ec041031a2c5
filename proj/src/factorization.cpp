#include "codetopics/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "codetopics/errors.hpp"
#include "codetopics/rng.hpp"

namespace codetopics {

namespace {

constexpr double kEps = 1e-12;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Asymptotic series after shifting the argument above 6.
double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double t = 1.0 / (x * x);
    result += std::log(x) - 0.5 / x -
              t * (1.0 / 12.0 - t * (1.0 / 120.0 - t * (1.0 / 252.0 - t * (1.0 / 240.0))));
    return result;
}

int count_nonzero_rows(const Eigen::MatrixXd& d) {
    int n = 0;
    for (int i = 0; i < d.rows(); ++i) {
        if (d.row(i).cwiseAbs().sum() > 0.0) ++n;
    }
    return n;
}

// Per-document term postings, so the LDA inner loop touches only the
// document's own nonzeros.
struct DocPostings {
    std::vector<int> term;
    std::vector<double> count;
    double total = 0.0;
};

std::vector<DocPostings> collect_postings(const DocTermMatrix& m) {
    std::vector<DocPostings> docs(m.n_docs());
    for (int i = 0; i < m.entries.outerSize(); ++i) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.entries, i);
             it; ++it) {
            if (it.value() == 0.0) continue;
            docs[i].term.push_back(static_cast<int>(it.col()));
            docs[i].count.push_back(it.value());
            docs[i].total += it.value();
        }
    }
    return docs;
}

}  // namespace

const char* method_name(Method m) { return m == Method::Nmf ? "nmf" : "lda"; }

Method method_from_name(const std::string& name) {
    if (name == "nmf") return Method::Nmf;
    if (name == "lda") return Method::Lda;
    throw Error("unknown method: " + name);
}

TopicModel fit_nmf(const DocTermMatrix& m, int k, std::uint64_t seed, const NmfOptions& opts) {
    if (k < 1) throw std::invalid_argument("fit_nmf: k must be >= 1");
    const Eigen::MatrixXd d = m.dense();
    const int n_docs = static_cast<int>(d.rows());
    const int n_terms = static_cast<int>(d.cols());
    if (d.sum() <= 0.0) throw DegenerateMatrixError("fit_nmf: matrix is all-zero");
    if (count_nonzero_rows(d) < k) {
        throw DegenerateMatrixError("fit_nmf: fewer nonzero rows than k");
    }

    const double scale = std::sqrt(d.mean() / k);
    Eigen::MatrixXd w(n_docs, k);
    for (int i = 0; i < n_docs; ++i) {
        Rng rng(mix_seed(seed, fnv1a64(m.rows[i])));
        for (int j = 0; j < k; ++j) w(i, j) = scale * rng.uniform();
    }
    Eigen::MatrixXd h(k, n_terms);
    {
        Rng rng(mix_seed(seed, fnv1a64("nmf::H")));
        for (int j = 0; j < k; ++j) {
            for (int t = 0; t < n_terms; ++t) h(j, t) = scale * rng.uniform();
        }
    }

    TopicModel model;
    model.method = Method::Nmf;
    model.k = k;
    model.seed = seed;
    model.doc_ids = m.rows;
    model.terms = m.vocab.terms;

    double prev = (d - w * h).norm();
    model.diagnostics.objective_trace.push_back(prev);
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        h = h.cwiseProduct(w.transpose() * d)
                .cwiseQuotient(((w.transpose() * w) * h).cwiseMax(kEps));
        w = w.cwiseProduct(d * h.transpose())
                .cwiseQuotient((w * (h * h.transpose())).cwiseMax(kEps));
        const double obj = (d - w * h).norm();
        model.diagnostics.objective_trace.push_back(obj);
        const double rel = (prev - obj) / std::max(prev, kEps);
        prev = obj;
        if (rel < opts.tolerance) {
            ++iter;
            model.diagnostics.converged = true;
            break;
        }
    }
    model.diagnostics.iterations = iter;
    model.diagnostics.objective = prev;
    model.doc_topic = std::move(w);
    model.topic_term = std::move(h);
    return model;
}

TopicModel fit_lda(const DocTermMatrix& m, int k, std::uint64_t seed, const LdaOptions& opts) {
    if (k < 1) throw std::invalid_argument("fit_lda: k must be >= 1");
    const int n_docs = m.n_docs();
    const int n_terms = m.n_terms();
    const std::vector<DocPostings> docs = collect_postings(m);
    const double total_mass =
        std::accumulate(docs.begin(), docs.end(), 0.0,
                        [](double acc, const DocPostings& d) { return acc + d.total; });
    if (total_mass <= 0.0) throw DegenerateMatrixError("fit_lda: matrix is all-zero");

    const double alpha = 1.0 / k;
    const double eta = 1.0 / k;

    Eigen::MatrixXd lambda(k, n_terms);
    {
        Rng rng(mix_seed(seed, fnv1a64("lda::lambda")));
        for (int j = 0; j < k; ++j) {
            for (int t = 0; t < n_terms; ++t) lambda(j, t) = eta + rng.uniform(0.5, 1.5);
        }
    }
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n_docs, k);

    TopicModel model;
    model.method = Method::Lda;
    model.k = k;
    model.seed = seed;
    model.doc_ids = m.rows;
    model.terms = m.vocab.terms;

    const double lgamma_k_alpha = std::lgamma(k * alpha);
    const double lgamma_alpha = std::lgamma(alpha);
    const double lgamma_v_eta = std::lgamma(n_terms * eta);
    const double lgamma_eta = std::lgamma(eta);

    Eigen::MatrixXd elog_beta(k, n_terms);
    double prev_bound = -std::numeric_limits<double>::infinity();
    int pass = 0;
    for (; pass < opts.max_passes; ++pass) {
        for (int j = 0; j < k; ++j) {
            const double dig_total = digamma(lambda.row(j).sum());
            for (int t = 0; t < n_terms; ++t) {
                elog_beta(j, t) = digamma(lambda(j, t)) - dig_total;
            }
        }
        const Eigen::MatrixXd exp_elog_beta = elog_beta.array().exp();

        Eigen::MatrixXd sstats = Eigen::MatrixXd::Zero(k, n_terms);
        double doc_bound = 0.0;

        Eigen::VectorXd g(k), elog_theta(k), exp_elog_theta(k), weighted(k);
        for (int d = 0; d < n_docs; ++d) {
            const DocPostings& doc = docs[d];
            g.setConstant(alpha + doc.total / k);
            const int nnz = static_cast<int>(doc.term.size());
            std::vector<double> phinorm(nnz);

            auto refresh_theta = [&]() {
                const double dig_total = digamma(g.sum());
                for (int j = 0; j < k; ++j) elog_theta[j] = digamma(g[j]) - dig_total;
                exp_elog_theta = elog_theta.array().exp();
            };
            auto refresh_phinorm = [&]() {
                for (int w = 0; w < nnz; ++w) {
                    phinorm[w] =
                        exp_elog_theta.dot(exp_elog_beta.col(doc.term[w])) + 1e-100;
                }
            };

            refresh_theta();
            for (int it = 0; it < opts.max_doc_iterations; ++it) {
                refresh_phinorm();
                weighted.setZero();
                for (int w = 0; w < nnz; ++w) {
                    weighted += (doc.count[w] / phinorm[w]) * exp_elog_beta.col(doc.term[w]);
                }
                const Eigen::VectorXd g_new =
                    Eigen::VectorXd::Constant(k, alpha) +
                    exp_elog_theta.cwiseProduct(weighted);
                const double change = (g_new - g).cwiseAbs().mean();
                g = g_new;
                refresh_theta();
                if (change < opts.doc_tolerance) break;
            }
            refresh_phinorm();
            for (int w = 0; w < nnz; ++w) {
                sstats.col(doc.term[w]) +=
                    (doc.count[w] / phinorm[w]) * exp_elog_theta;
                doc_bound += doc.count[w] * std::log(phinorm[w]);
            }
            // E[log p(theta | alpha)] - E[log q(theta | gamma)]
            doc_bound += lgamma_k_alpha - k * lgamma_alpha;
            doc_bound -= std::lgamma(g.sum());
            for (int j = 0; j < k; ++j) {
                doc_bound += (alpha - g[j]) * elog_theta[j] + std::lgamma(g[j]);
            }
            gamma.row(d) = g.transpose();
        }
        // sstats currently hold phi without the exp_elog_beta factor
        const Eigen::MatrixXd counts_phi = sstats.cwiseProduct(exp_elog_beta);

        lambda = counts_phi.array() + eta;

        // Bound terms that involve beta, evaluated at the updated lambda. The
        // phinorm sum above embeds Elog(beta_old), so swap it for the new one.
        Eigen::MatrixXd elog_beta_new(k, n_terms);
        double beta_bound = 0.0;
        for (int j = 0; j < k; ++j) {
            const double dig_total = digamma(lambda.row(j).sum());
            beta_bound += lgamma_v_eta - n_terms * lgamma_eta;
            beta_bound -= std::lgamma(lambda.row(j).sum());
            for (int t = 0; t < n_terms; ++t) {
                elog_beta_new(j, t) = digamma(lambda(j, t)) - dig_total;
                beta_bound += (eta - lambda(j, t)) * elog_beta_new(j, t) +
                              std::lgamma(lambda(j, t));
            }
        }
        const double bound = doc_bound +
                             counts_phi.cwiseProduct(elog_beta_new - elog_beta).sum() +
                             beta_bound;
        model.diagnostics.objective_trace.push_back(bound);

        const double rel = std::abs(bound - prev_bound) /
                           std::max(std::abs(prev_bound), kEps);
        const bool done = pass > 0 && rel < opts.tolerance;
        prev_bound = bound;
        if (done) {
            ++pass;
            model.diagnostics.converged = true;
            break;
        }
    }

    model.diagnostics.iterations = pass;
    model.diagnostics.objective = prev_bound;
    model.doc_topic.resize(n_docs, k);
    for (int d = 0; d < n_docs; ++d) {
        model.doc_topic.row(d) = gamma.row(d) / gamma.row(d).sum();
    }
    model.topic_term.resize(k, n_terms);
    for (int j = 0; j < k; ++j) {
        model.topic_term.row(j) = lambda.row(j) / lambda.row(j).sum();
    }
    return model;
}

InferResult infer_new_docs(const TopicModel& model, const DocTermMatrix& m_new) {
    const int k = model.k;
    const int n_model_terms = static_cast<int>(model.terms.size());

    // Map model term columns onto the new matrix's vocabulary.
    std::vector<int> new_col(n_model_terms, -1);
    int shared = 0;
    for (int j = 0; j < n_model_terms; ++j) {
        new_col[j] = m_new.vocab.find(model.terms[j]);
        if (new_col[j] >= 0) ++shared;
    }
    if (shared == 0) {
        throw VocabularyMismatchError("no terms shared with the model vocabulary");
    }

    const Eigen::MatrixXd d_new = m_new.dense();
    const int n_docs = m_new.n_docs();
    Eigen::MatrixXd aligned = Eigen::MatrixXd::Zero(n_docs, n_model_terms);
    for (int j = 0; j < n_model_terms; ++j) {
        if (new_col[j] >= 0) aligned.col(j) = d_new.col(new_col[j]);
    }

    InferResult result;
    result.doc_topic.resize(n_docs, k);

    if (model.method == Method::Nmf) {
        const Eigen::MatrixXd& h = model.topic_term;
        const Eigen::MatrixXd hht = h * h.transpose();
        for (int i = 0; i < n_docs; ++i) {
            const Eigen::RowVectorXd x = aligned.row(i);
            if (x.sum() <= 0.0) {
                result.doc_topic.row(i).setZero();
                result.zero_rows.push_back(i);
                continue;
            }
            const Eigen::RowVectorXd xht = x * h.transpose();
            Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(k);
            double prev = (x - w * h).squaredNorm();
            for (int it = 0; it < 500; ++it) {
                w = w.cwiseProduct(xht).cwiseQuotient((w * hht).cwiseMax(kEps));
                const double obj = (x - w * h).squaredNorm();
                if (std::abs(prev - obj) < 1e-8 * std::max(prev, kEps)) break;
                prev = obj;
            }
            result.doc_topic.row(i) = w;
        }
    } else {
        const double alpha = 1.0 / k;
        // Point-estimate fold-in over the expected topic-term distribution.
        const Eigen::MatrixXd beta = model.topic_term.cwiseMax(1e-100);
        for (int i = 0; i < n_docs; ++i) {
            const Eigen::RowVectorXd x = aligned.row(i);
            const double total = x.sum();
            if (total <= 0.0) {
                result.doc_topic.row(i).setConstant(1.0 / k);
                result.zero_rows.push_back(i);
                continue;
            }
            Eigen::VectorXd g = Eigen::VectorXd::Constant(k, alpha + total / k);
            Eigen::VectorXd exp_elog_theta(k);
            for (int it = 0; it < 100; ++it) {
                const double dig_total = digamma(g.sum());
                for (int j = 0; j < k; ++j) {
                    exp_elog_theta[j] = std::exp(digamma(g[j]) - dig_total);
                }
                Eigen::VectorXd weighted = Eigen::VectorXd::Zero(k);
                for (int t = 0; t < static_cast<int>(x.size()); ++t) {
                    if (x[t] == 0.0) continue;
                    const double phinorm = exp_elog_theta.dot(beta.col(t)) + 1e-100;
                    weighted += (x[t] / phinorm) * beta.col(t);
                }
                const Eigen::VectorXd g_new = Eigen::VectorXd::Constant(k, alpha) +
                                              exp_elog_theta.cwiseProduct(weighted);
                const double change = (g_new - g).cwiseAbs().mean();
                g = g_new;
                if (change < 1e-6) break;
            }
            result.doc_topic.row(i) = (g / g.sum()).transpose();
        }
    }
    return result;
}

ClusterModel fit_kmeans(const DocTermMatrix& m, int k, std::uint64_t seed) {
    const Eigen::MatrixXd x = m.dense();
    const int n = static_cast<int>(x.rows());
    if (k < 2) throw std::invalid_argument("fit_kmeans: k must be >= 2");
    if (k > n) throw TooFewDocumentsError("fit_kmeans: k exceeds number of documents");

    Rng rng(mix_seed(seed, fnv1a64("kmeans")));

    // k-means++ seeding
    Eigen::MatrixXd centroids(k, x.cols());
    std::vector<bool> chosen(n, false);
    {
        const int first = static_cast<int>(rng.uniform_index(n));
        centroids.row(0) = x.row(first);
        chosen[first] = true;
        Eigen::VectorXd dist2(n);
        for (int i = 0; i < n; ++i) {
            dist2[i] = (x.row(i) - centroids.row(0)).squaredNorm();
        }
        for (int c = 1; c < k; ++c) {
            const double total = dist2.sum();
            int pick = -1;
            if (total > 0.0) {
                const double target = rng.uniform() * total;
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += dist2[i];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0) pick = n - 1;
            } else {
                for (int i = 0; i < n; ++i) {
                    if (!chosen[i]) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0) pick = 0;
            }
            centroids.row(c) = x.row(pick);
            chosen[pick] = true;
            for (int i = 0; i < n; ++i) {
                dist2[i] = std::min(dist2[i], (x.row(i) - centroids.row(c)).squaredNorm());
            }
        }
    }

    std::vector<int> labels(n, -1);
    int iter = 0;
    for (; iter < 300; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (x.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        centroids.setZero();
        std::vector<int> sizes(k, 0);
        for (int i = 0; i < n; ++i) {
            centroids.row(labels[i]) += x.row(i);
            ++sizes[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                centroids.row(c) /= sizes[c];
            } else {
                // adopt the point farthest from its assigned centroid
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = (x.row(i) - centroids.row(labels[i])).squaredNorm();
                    if (d > far_d && sizes[labels[i]] > 1) {
                        far_d = d;
                        far_i = i;
                    }
                }
                centroids.row(c) = x.row(far_i);
            }
        }
    }

    ClusterModel model;
    model.k = k;
    model.centroids = std::move(centroids);
    model.labels = std::move(labels);
    model.iterations = iter;
    model.inertia = 0.0;
    for (int i = 0; i < n; ++i) {
        model.inertia += (x.row(i) - model.centroids.row(model.labels[i])).squaredNorm();
    }
    return model;
}

std::vector<std::vector<std::string>> cluster_top_terms_logreg(const DocTermMatrix& m,
                                                               const std::vector<int>& labels,
                                                               int n_terms) {
    const Eigen::MatrixXd x = m.dense();
    const int n = static_cast<int>(x.rows());
    const int v = static_cast<int>(x.cols());
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("labels size must match document count");
    }
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> sizes(std::max(k, 1), 0);
    for (int l : labels) {
        if (l < 0) throw std::invalid_argument("negative cluster label");
        ++sizes[l];
    }
    if (std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; }) < 2) {
        throw SingleClassError("need at least 2 non-empty clusters");
    }

    // Lipschitz constant of the logistic loss gradient, with the intercept
    // column included: L = sigma_max([X 1])^2 / 4 + lambda.
    Eigen::MatrixXd xa(n, v + 1);
    xa.leftCols(v) = x;
    xa.col(v).setOnes();
    double sigma2;
    {
        Eigen::VectorXd vvec = Eigen::VectorXd::Ones(v + 1).normalized();
        for (int it = 0; it < 100; ++it) {
            Eigen::VectorXd next = xa.transpose() * (xa * vvec);
            const double norm = next.norm();
            if (norm <= 0.0) break;
            vvec = next / norm;
        }
        sigma2 = (xa * vvec).squaredNorm();
    }
    const double reg = 1.0;
    const double step = 1.0 / (0.25 * sigma2 + reg);

    std::vector<std::vector<std::string>> result(k);
    const int keep = std::min(n_terms, v);
    for (int c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = labels[i] == c ? 1.0 : 0.0;

        Eigen::VectorXd w = Eigen::VectorXd::Zero(v);
        double b = 0.0;
        for (int it = 0; it < 500; ++it) {
            const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(n, b);
            const Eigen::VectorXd p =
                z.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
            const Eigen::VectorXd resid = y - p;
            const Eigen::VectorXd grad_w = x.transpose() * resid - reg * w;
            const double grad_b = resid.sum();
            w += step * grad_w;
            b += step * grad_b;
            if (grad_w.norm() + std::abs(grad_b) < 1e-9) break;
        }

        std::vector<int> order(v);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int d) { return w[a] > w[d]; });
        for (int j = 0; j < keep; ++j) {
            result[c].push_back(m.vocab.terms[order[j]]);
        }
    }
    return result;
}

void save_model(const TopicModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "codetopics-model 1\n";
    out << "method " << method_name(model.method) << "\n";
    out << "k " << model.k << "\n";
    out << "seed " << model.seed << "\n";
    out << "objective " << format_double(model.diagnostics.objective) << "\n";
    out << "iterations " << model.diagnostics.iterations << "\n";
    out << "converged " << (model.diagnostics.converged ? 1 : 0) << "\n";
    out << "docs " << model.doc_ids.size() << "\n";
    out << "terms " << model.terms.size() << "\n";
    for (const auto& id : model.doc_ids) out << "doc " << id << "\n";
    for (const auto& t : model.terms) out << "term " << t << "\n";
    out << "doc_topic\n";
    for (int i = 0; i < model.doc_topic.rows(); ++i) {
        for (int j = 0; j < model.doc_topic.cols(); ++j) {
            out << (j ? " " : "") << format_double(model.doc_topic(i, j));
        }
        out << "\n";
    }
    out << "topic_term\n";
    for (int i = 0; i < model.topic_term.rows(); ++i) {
        for (int j = 0; j < model.topic_term.cols(); ++j) {
            out << (j ? " " : "") << format_double(model.topic_term(i, j));
        }
        out << "\n";
    }
}

TopicModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("codetopics-model", 0) != 0) {
        throw IoError("not a model file: " + path);
    }
    TopicModel model;
    long n_docs = 0, n_terms = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "method") {
            std::string v;
            ss >> v;
            model.method = method_from_name(v);
        } else if (key == "k") {
            ss >> model.k;
        } else if (key == "seed") {
            ss >> model.seed;
        } else if (key == "objective") {
            ss >> model.diagnostics.objective;
        } else if (key == "iterations") {
            ss >> model.diagnostics.iterations;
        } else if (key == "converged") {
            int c;
            ss >> c;
            model.diagnostics.converged = c != 0;
        } else if (key == "docs") {
            ss >> n_docs;
        } else if (key == "terms") {
            ss >> n_terms;
        } else if (key == "doc" || key == "term") {
            std::string rest;
            std::getline(ss, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            (key == "doc" ? model.doc_ids : model.terms).push_back(rest);
        } else if (key == "doc_topic") {
            break;
        }
    }
    if (static_cast<long>(model.doc_ids.size()) != n_docs ||
        static_cast<long>(model.terms.size()) != n_terms) {
        throw IoError("model header is inconsistent: " + path);
    }
    model.doc_topic.resize(n_docs, model.k);
    for (long i = 0; i < n_docs; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated doc_topic block");
        std::istringstream ss(line);
        for (int j = 0; j < model.k; ++j) ss >> model.doc_topic(i, j);
    }
    if (!std::getline(in, line) || line != "topic_term") {
        throw IoError("missing topic_term block");
    }
    model.topic_term.resize(model.k, n_terms);
    for (int i = 0; i < model.k; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated topic_term block");
        std::istringstream ss(line);
        for (long j = 0; j < n_terms; ++j) ss >> model.topic_term(i, j);
    }
    return model;
}

}  // namespace codetopics

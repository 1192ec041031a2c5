#include "codetopics/topics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "codetopics/errors.hpp"
#include "codetopics/rng.hpp"

namespace codetopics {

Assignment hard_assign(const TopicModel& model) {
    Assignment a;
    const int n = static_cast<int>(model.doc_topic.rows());
    a.docs_per_topic.assign(model.k, 0);
    for (int i = 0; i < n; ++i) {
        const auto row = model.doc_topic.row(i);
        if (row.cwiseAbs().sum() == 0.0) {
            a.topic_of_doc.push_back(-1);
            a.unassigned.push_back(i);
            continue;
        }
        int best = 0;
        for (int j = 1; j < model.k; ++j) {
            if (row[j] > row[best]) best = j;  // strict: ties keep the lowest id
        }
        a.topic_of_doc.push_back(best);
        ++a.docs_per_topic[best];
    }
    return a;
}

TopicSelection filter_topics(const TopicModel& model, const Assignment& assignment,
                             int min_docs, const std::vector<std::vector<int>>& merges) {
    const int k = model.k;
    std::vector<int> group_of(k, -1);
    for (std::size_t g = 0; g < merges.size(); ++g) {
        for (int t : merges[g]) {
            if (t < 0 || t >= k) {
                throw std::invalid_argument("merge group names topic " + std::to_string(t) +
                                            " outside 0.." + std::to_string(k - 1));
            }
            if (group_of[t] != -1) {
                throw MergeOverlapError("topic " + std::to_string(t) +
                                        " appears in two merge groups");
            }
            group_of[t] = static_cast<int>(g);
        }
    }

    TopicSelection sel;
    sel.min_docs = min_docs;

    // empty topics outside merge groups go first
    std::vector<bool> alive(k, true);
    for (int t = 0; t < k; ++t) {
        if (assignment.docs_per_topic[t] == 0 && group_of[t] == -1) {
            sel.removed_empty.push_back(t);
            alive[t] = false;
        }
    }

    // logical topics: merge groups count as one, keyed by their lowest member
    struct Logical {
        int repr;
        std::vector<int> members;
        int count;
    };
    std::map<int, Logical> logical;
    for (std::size_t g = 0; g < merges.size(); ++g) {
        Logical l;
        l.members = merges[g];
        std::sort(l.members.begin(), l.members.end());
        l.repr = l.members.front();
        l.count = 0;
        for (int t : l.members) l.count += assignment.docs_per_topic[t];
        logical[l.repr] = l;
        sel.merged.push_back(l.members);
    }
    for (int t = 0; t < k; ++t) {
        if (!alive[t] || group_of[t] != -1) continue;
        logical[t] = Logical{t, {t}, assignment.docs_per_topic[t]};
    }

    for (const auto& [repr, l] : logical) {
        if (l.count < min_docs) {
            for (int t : l.members) sel.removed_small.push_back(t);
        } else {
            sel.kept.push_back(repr);
            sel.kept_docs_per_topic.push_back(l.count);
        }
    }
    std::sort(sel.removed_small.begin(), sel.removed_small.end());
    return sel;
}

TopicModel apply_selection(const TopicModel& model, const TopicSelection& selection) {
    std::map<int, std::vector<int>> members;  // repr -> original topics
    for (int repr : selection.kept) members[repr] = {repr};
    for (const auto& group : selection.merged) {
        const int repr = *std::min_element(group.begin(), group.end());
        if (members.count(repr)) members[repr] = group;
    }

    TopicModel out;
    out.method = model.method;
    out.k = static_cast<int>(selection.kept.size());
    out.seed = model.seed;
    out.doc_ids = model.doc_ids;
    out.terms = model.terms;
    out.diagnostics = model.diagnostics;
    out.doc_topic.resize(model.doc_topic.rows(), out.k);
    out.topic_term.resize(out.k, model.topic_term.cols());

    for (int slot = 0; slot < out.k; ++slot) {
        const auto& group = members.at(selection.kept[slot]);
        Eigen::VectorXd col = Eigen::VectorXd::Zero(model.doc_topic.rows());
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(model.topic_term.cols());
        for (int t : group) {
            col += model.doc_topic.col(t);
            row += model.topic_term.row(t);
        }
        out.doc_topic.col(slot) = col;
        if (model.method == Method::Lda) {
            row /= static_cast<double>(group.size());  // average, then renormalize below
        }
        out.topic_term.row(slot) = row;
    }
    if (model.method == Method::Lda) {
        for (int i = 0; i < out.doc_topic.rows(); ++i) {
            const double s = out.doc_topic.row(i).sum();
            if (s > 0.0) out.doc_topic.row(i) /= s;
        }
        for (int t = 0; t < out.k; ++t) {
            const double s = out.topic_term.row(t).sum();
            if (s > 0.0) out.topic_term.row(t) /= s;
        }
    }
    return out;
}

namespace {

double percentile_linear(std::vector<double> values, double pct) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

TermImportance important_terms_percentile(const TopicModel& model, double pct) {
    const int k = model.k;
    const int v = static_cast<int>(model.topic_term.cols());
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(k) * v);
    for (int t = 0; t < k; ++t) {
        for (int j = 0; j < v; ++j) all.push_back(model.topic_term(t, j));
    }
    TermImportance imp;
    imp.threshold = percentile_linear(std::move(all), pct);
    imp.important.assign(k, std::vector<bool>(v, false));
    imp.exclusive.assign(v, false);
    for (int j = 0; j < v; ++j) {
        int hits = 0;
        for (int t = 0; t < k; ++t) {
            if (model.topic_term(t, j) > imp.threshold) {
                imp.important[t][j] = true;
                ++hits;
            }
        }
        imp.exclusive[j] = hits == 1;
    }
    return imp;
}

std::vector<std::vector<std::string>> relevance_terms(const TopicModel& model,
                                                      const DocTermMatrix& matrix,
                                                      double lambda, int n) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("relevance lambda must lie in [0, 1]");
    }
    const int v = static_cast<int>(model.terms.size());

    // empirical term probability from the matrix column masses
    Eigen::VectorXd col_mass = Eigen::VectorXd::Zero(v);
    double total = 0.0;
    for (int j = 0; j < v; ++j) {
        const int col = matrix.vocab.find(model.terms[j]);
        if (col < 0) continue;
        col_mass[j] = matrix.entries.col(col).sum();
        total += col_mass[j];
    }
    if (total <= 0.0) throw DegenerateMatrixError("matrix carries no mass for model terms");

    std::vector<std::vector<std::string>> result(model.k);
    for (int t = 0; t < model.k; ++t) {
        const double row_sum = model.topic_term.row(t).sum();
        if (row_sum <= 0.0) continue;
        std::vector<std::pair<double, int>> scored;
        for (int j = 0; j < v; ++j) {
            const double pwt = model.topic_term(t, j) / row_sum;
            const double pw = col_mass[j] / total;
            if (pwt <= 0.0 || pw <= 0.0) continue;  // zero-probability terms skipped
            const double rel = lambda * std::log(pwt) +
                               (1.0 - lambda) * std::log(pwt / pw);
            scored.emplace_back(rel, j);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        const int keep = std::min<int>(n, static_cast<int>(scored.size()));
        for (int j = 0; j < keep; ++j) {
            result[t].push_back(model.terms[scored[j].second]);
        }
    }
    return result;
}

namespace {

double jensen_shannon(const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& q) {
    double d = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) d += 0.5 * q[i] * std::log(q[i] / m);
    }
    return d;
}

}  // namespace

Eigen::MatrixXd topic_distance_matrix(const TopicModel& model) {
    const int k = model.k;
    Eigen::MatrixXd rows = model.topic_term;
    for (int t = 0; t < k; ++t) {
        const double s = rows.row(t).sum();
        if (s > 0.0) {
            rows.row(t) /= s;
        } else {
            rows.row(t).setConstant(1.0 / rows.cols());
        }
    }
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            const double d = jensen_shannon(rows.row(a), rows.row(b));
            dist(a, b) = d;
            dist(b, a) = d;
        }
    }
    return dist;
}

namespace {

void fix_signs(Eigen::MatrixXd& m) {
    for (int j = 0; j < m.cols(); ++j) {
        int arg = 0;
        for (int i = 1; i < m.rows(); ++i) {
            if (std::abs(m(i, j)) > std::abs(m(arg, j))) arg = i;
        }
        if (m(arg, j) < 0.0) m.col(j) = -m.col(j);
    }
}

}  // namespace

Pcoa2d pcoa_2d(const Eigen::MatrixXd& dist) {
    const int n = static_cast<int>(dist.rows());
    if (dist.cols() != n) throw std::invalid_argument("pcoa_2d: matrix must be square");

    Pcoa2d out;
    if (dist.cwiseAbs().maxCoeff() == 0.0) {
        out.coords = Eigen::MatrixXd::Zero(n, 2);
        out.eigenvalues.assign(2, 0.0);
        return out;
    }

    const Eigen::MatrixXd d2 = dist.cwiseProduct(dist);
    const Eigen::MatrixXd j =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::MatrixXd b = -0.5 * j * d2 * j;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    if (solver.info() != Eigen::Success) {
        throw DegenerateSpectrumError("eigendecomposition failed");
    }
    // eigenvalues come out ascending
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    const double tol = 1e-12 * std::max(1.0, std::abs(evals[n - 1]));
    if (evals[n - 1] <= tol) {
        throw DegenerateSpectrumError("no positive eigenvalue in double-centered matrix");
    }

    out.coords.resize(n, 2);
    for (int c = 0; c < 2; ++c) {
        const int idx = n - 1 - c;
        double ev = idx >= 0 ? evals[idx] : 0.0;
        if (ev < 0.0) out.clamped = true;
        if (ev < tol) ev = 0.0;  // numerical noise around zero collapses the axis
        out.eigenvalues.push_back(ev);
        if (idx >= 0) {
            out.coords.col(c) = evecs.col(idx) * std::sqrt(ev);
        } else {
            out.coords.col(c).setZero();
        }
    }
    fix_signs(out.coords);
    return out;
}

Eigen::MatrixXd pca_2d(const DocTermMatrix& matrix) {
    const Eigen::MatrixXd x = matrix.dense();
    const int n = static_cast<int>(x.rows());
    const int v = static_cast<int>(x.cols());
    if (n < 2 || v < 2) throw std::invalid_argument("pca_2d: need >= 2 docs and >= 2 terms");

    Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    if (centered.cwiseAbs().maxCoeff() == 0.0) {
        throw DegenerateDataError("pca_2d: data has rank 0 after centering");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    Eigen::MatrixXd v2 = svd.matrixV().leftCols(2);
    fix_signs(v2);
    return centered * v2;
}

std::vector<double> topic_term_shares(const TopicModel& model) {
    const int v = static_cast<int>(model.topic_term.cols());
    std::vector<int> counts(model.k, 0);
    for (int j = 0; j < v; ++j) {
        int best = 0;
        for (int t = 1; t < model.k; ++t) {
            if (model.topic_term(t, j) > model.topic_term(best, j)) best = t;
        }
        ++counts[best];
    }
    std::vector<double> shares(model.k);
    for (int t = 0; t < model.k; ++t) {
        shares[t] = static_cast<double>(counts[t]) / std::max(1, v);
    }
    return shares;
}

namespace {

// original topic id -> slot in selection.kept order (merge members share one)
std::map<int, int> kept_slots(const TopicSelection& selection) {
    std::map<int, int> slot;
    for (std::size_t i = 0; i < selection.kept.size(); ++i) {
        slot[selection.kept[i]] = static_cast<int>(i);
    }
    for (const auto& group : selection.merged) {
        const int repr = *std::min_element(group.begin(), group.end());
        auto it = slot.find(repr);
        if (it == slot.end()) continue;  // merged group was filtered out
        for (int t : group) slot[t] = it->second;
    }
    return slot;
}

}  // namespace

std::vector<IntruderTask> make_intruder_tasks(const Assignment& assignment,
                                              const TopicSelection& selection,
                                              const std::vector<std::string>& doc_ids,
                                              std::uint64_t seed) {
    if (selection.kept.size() < 2) {
        throw TooFewDocsError("need at least 2 kept topics for intruder tasks");
    }
    const std::map<int, int> slot = kept_slots(selection);

    std::vector<std::vector<int>> pool(selection.kept.size());
    for (std::size_t d = 0; d < assignment.topic_of_doc.size(); ++d) {
        const int t = assignment.topic_of_doc[d];
        if (t < 0) continue;
        auto it = slot.find(t);
        if (it == slot.end()) continue;
        pool[it->second].push_back(static_cast<int>(d));
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].size() < 3) {
            throw TooFewDocsError("kept topic " + std::to_string(selection.kept[i]) +
                                  " has fewer than 3 documents");
        }
    }

    Rng rng(mix_seed(seed, fnv1a64("intruder")));
    std::vector<IntruderTask> tasks;
    for (std::size_t i = 0; i < selection.kept.size(); ++i) {
        IntruderTask task;
        task.task_id = static_cast<int>(i);
        task.topic = selection.kept[i];

        // 3 members without replacement
        std::vector<int> candidates = pool[i];
        for (int pick = 0; pick < 3; ++pick) {
            const std::size_t j = pick + rng.uniform_index(candidates.size() - pick);
            std::swap(candidates[pick], candidates[j]);
            task.member_docs.push_back(doc_ids[candidates[pick]]);
        }

        // intruder from another kept topic
        std::size_t other = rng.uniform_index(selection.kept.size() - 1);
        if (other >= i) ++other;
        task.intruder_topic = selection.kept[other];
        task.intruder_doc = doc_ids[pool[other][rng.uniform_index(pool[other].size())]];

        task.shuffled = task.member_docs;
        task.shuffled.push_back(task.intruder_doc);
        rng.shuffle(task.shuffled);
        task.answer_index = static_cast<int>(
            std::find(task.shuffled.begin(), task.shuffled.end(), task.intruder_doc) -
            task.shuffled.begin());
        tasks.push_back(std::move(task));
    }
    return tasks;
}

Eigen::MatrixXd score_intruder_answers(const std::vector<IntruderTask>& tasks,
                                       const std::vector<int>& answers,
                                       const TopicSelection& selection) {
    if (tasks.size() != answers.size()) {
        throw std::invalid_argument("one answer required per task");
    }
    const std::map<int, int> slot = kept_slots(selection);
    const int k = static_cast<int>(selection.kept.size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (answers[i] < 0) continue;  // unanswered
        const int home = slot.at(tasks[i].topic);
        if (answers[i] == tasks[i].answer_index) {
            counts(home, home) += 1.0;
        } else {
            counts(home, slot.at(tasks[i].intruder_topic)) += 1.0;
        }
    }
    for (int r = 0; r < k; ++r) {
        const double s = counts.row(r).sum();
        if (s > 0.0) counts.row(r) /= s;
    }
    return counts;
}

}  // namespace codetopics

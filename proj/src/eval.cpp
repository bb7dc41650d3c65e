#include "dpq/eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dpq {

double average_precision(const std::vector<char>& ranked_relevance) {
    if (ranked_relevance.empty())
        throw std::invalid_argument("average_precision: empty ranking");
    int64_t relevant_total = 0;
    for (char r : ranked_relevance) relevant_total += r ? 1 : 0;
    if (relevant_total == 0) return 0.0;
    double sum = 0.0;
    int64_t relevant_seen = 0;
    for (size_t i = 0; i < ranked_relevance.size(); ++i) {
        if (ranked_relevance[i]) {
            ++relevant_seen;
            sum += static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant_total);
}

double eval_map(const RetrievalRun& run) {
    if (run.query_labels.size() != run.rankings.size())
        throw std::invalid_argument("eval_map: query labels and rankings differ in size");
    double sum = 0.0;
    int64_t valid = 0;
    for (size_t q = 0; q < run.rankings.size(); ++q) {
        const auto& ranking = run.rankings[q];
        const int32_t y = run.query_labels[q];
        // R counts the relevant items in the whole database: a truncated
        // ranking is scored against everything it could have retrieved
        int64_t relevant_total = 0;
        for (int32_t l : run.db_labels) relevant_total += l == y ? 1 : 0;
        if (relevant_total == 0) continue;  // query excluded from the mean
        double ap = 0.0;
        int64_t relevant_seen = 0;
        for (size_t i = 0; i < ranking.size(); ++i) {
            const int64_t db = ranking[i];
            if (db < 0 || db >= static_cast<int64_t>(run.db_labels.size()))
                throw std::invalid_argument("eval_map: ranking refers to database index " +
                                            std::to_string(db) + " out of range");
            if (run.db_labels[db] == y) {
                ++relevant_seen;
                ap += static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
            }
        }
        sum += ap / static_cast<double>(relevant_total);
        ++valid;
    }
    if (valid == 0) throw std::invalid_argument("eval_map: no query with relevant items");
    return sum / static_cast<double>(valid);
}

double top_n_accuracy(const std::vector<double>& scores, int num_classes,
                      const std::vector<int32_t>& labels, int n) {
    if (labels.empty()) throw std::invalid_argument("top_n_accuracy: empty labels");
    if (scores.size() != labels.size() * static_cast<size_t>(num_classes))
        throw std::invalid_argument("top_n_accuracy: score matrix shape mismatch");
    int64_t hits = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        const double* row = scores.data() + i * num_classes;
        const double own = row[labels[i]];
        // rank of the true class = number of strictly better scores, with
        // earlier equal scores (lower class id) ranked ahead
        int better = 0;
        for (int c = 0; c < num_classes; ++c) {
            if (row[c] > own || (row[c] == own && c < labels[i])) ++better;
        }
        if (better < n) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace dpq

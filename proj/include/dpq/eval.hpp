#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpq {

// One finished retrieval experiment: per-query ranked database indices plus
// the labels needed to score them.
struct RetrievalRun {
    std::vector<int32_t> query_labels;
    std::vector<std::vector<int64_t>> rankings;  // one ranked index list per query
    std::vector<int32_t> db_labels;
    std::string mode;  // e.g. "dpq-asym", "pq-sym", "dpq-asym-norm"
};

// Average precision of one ranked relevance sequence:
// AP = (1/R) * sum over relevant positions i of precision@i,
// R = number of relevant items in the sequence. Rejects empty input;
// returns 0 when R = 0 (such queries are excluded upstream).
double average_precision(const std::vector<char>& ranked_relevance);

// Mean AP over queries, relevance = label equality against the full
// ranking. Queries whose label never occurs in the database are excluded;
// rejects runs where no query is valid.
double eval_map(const RetrievalRun& run);

// Fraction of queries whose true label is among the top-n scores.
// scores is row-major num_queries x num_classes.
double top_n_accuracy(const std::vector<double>& scores, int num_classes,
                      const std::vector<int32_t>& labels, int n);

}  // namespace dpq

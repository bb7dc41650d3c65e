#include <cmath>

#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dpq/eval.hpp"
#include "dpq/rng.hpp"

using namespace dpq;

namespace {

// quadratic-time reference: precision at every relevant rank, averaged
double reference_ap(const std::vector<char>& rel) {
    int64_t R = 0;
    for (char r : rel) R += r ? 1 : 0;
    if (R == 0) return 0.0;
    double sum = 0;
    for (size_t i = 0; i < rel.size(); ++i) {
        if (!rel[i]) continue;
        int64_t hits = 0;
        for (size_t j = 0; j <= i; ++j) hits += rel[j] ? 1 : 0;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(R);
}

}  // namespace

TEST_CASE("average_precision: all relevant gives 1") {
    CHECK(average_precision({1, 1, 1, 1}) == 1.0);
}

TEST_CASE("average_precision: two-item hand cases") {
    CHECK(average_precision({1, 0}) == 1.0);
    CHECK(average_precision({0, 1}) == 0.5);
}

TEST_CASE("average_precision: rejects empty input, zero when nothing relevant") {
    CHECK_THROWS_AS(average_precision({}), std::invalid_argument);
    CHECK(average_precision({0, 0, 0}) == 0.0);
}

TEST_CASE("average_precision: random sequences match the quadratic reference") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        std::vector<char> rel(n);
        for (auto& r : rel) r = rng.uniform() < 0.3 ? 1 : 0;
        bool any = false;
        for (char r : rel) any = any || r;
        if (!any) rel[rng.uniform_int(n)] = 1;
        CHECK(average_precision(rel) == doctest::Approx(reference_ap(rel)).epsilon(1e-12));
    }
}

TEST_CASE("eval_map: database full of the query label gives 1") {
    RetrievalRun run;
    run.query_labels = {3, 3};
    run.db_labels = {3, 3, 3, 3};
    run.rankings = {{0, 1, 2, 3}, {3, 2, 1, 0}};
    CHECK(eval_map(run) == 1.0);
}

TEST_CASE("eval_map: hand-built four item ranking") {
    RetrievalRun run;
    run.query_labels = {1};
    run.db_labels = {1, 0, 1, 0};
    run.rankings = {{0, 1, 2, 3}};  // relevance 1,0,1,0
    // AP = (1/2) * (1/1 + 2/3)
    CHECK(eval_map(run) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
}

TEST_CASE("eval_map: excludes queries with no relevant item, rejects when none valid") {
    RetrievalRun run;
    run.query_labels = {1, 9};
    run.db_labels = {1, 0};
    run.rankings = {{0, 1}, {0, 1}};
    CHECK(eval_map(run) == 1.0);  // second query label never occurs
    RetrievalRun bad;
    bad.query_labels = {9};
    bad.db_labels = {1, 0};
    bad.rankings = {{0, 1}};
    CHECK_THROWS_AS(eval_map(bad), std::invalid_argument);
}

TEST_CASE("eval_map: truncated rankings are scored against the full relevant count") {
    RetrievalRun run;
    run.query_labels = {1};
    run.db_labels = {1, 1, 0, 0};       // two relevant items in the database
    run.rankings = {{0, 2}};            // but the ranking only surfaces one
    // AP = (1/R_total) * precision@1 = (1/2) * 1
    CHECK(eval_map(run) == doctest::Approx(0.5));
}

TEST_CASE("eval_map: random rankings on balanced classes approach the prior") {
    const int classes = 10, per_class = 30;
    std::vector<int32_t> db_labels;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) db_labels.push_back(c);
    double total = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(1000 + s);
        RetrievalRun run;
        run.db_labels = db_labels;
        for (int q = 0; q < 20; ++q) {
            run.query_labels.push_back(static_cast<int32_t>(rng.uniform_int(classes)));
            std::vector<int64_t> ranking(db_labels.size());
            for (size_t i = 0; i < ranking.size(); ++i) ranking[i] = static_cast<int64_t>(i);
            rng.shuffle(ranking);
            run.rankings.push_back(std::move(ranking));
        }
        total += eval_map(run);
    }
    CHECK(std::abs(total / seeds - 0.1) < 0.02);
}

TEST_CASE("top_n_accuracy: top-1 never exceeds top-5") {
    Rng rng(77);
    const int C = 10, N = 200;
    std::vector<double> scores(static_cast<size_t>(N) * C);
    std::vector<int32_t> labels(N);
    for (auto& s : scores) s = rng.uniform(-1, 1);
    for (auto& l : labels) l = static_cast<int32_t>(rng.uniform_int(C));
    const double top1 = top_n_accuracy(scores, C, labels, 1);
    const double top5 = top_n_accuracy(scores, C, labels, 5);
    CHECK(top1 >= 0.0);
    CHECK(top1 <= top5);
    CHECK(top5 <= 1.0);
    CHECK(top_n_accuracy(scores, C, labels, C) == 1.0);
}

TEST_CASE("top_n_accuracy: exact on a hand case") {
    // two samples, three classes
    const std::vector<double> scores{0.9, 0.1, 0.0,   // true class 0 ranked first
                                     0.5, 0.6, 0.4};  // true class 2 ranked last
    const std::vector<int32_t> labels{0, 2};
    CHECK(top_n_accuracy(scores, 3, labels, 1) == 0.5);
    CHECK(top_n_accuracy(scores, 3, labels, 2) == 0.5);
    CHECK(top_n_accuracy(scores, 3, labels, 3) == 1.0);
}

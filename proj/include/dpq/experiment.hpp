#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpq/types.hpp"

namespace dpq {

// Line-oriented "key = value" experiment description. '#' starts a comment;
// unknown keys are rejected.
struct ExperimentConfig {
    // data
    int classes = 10;
    int dim = 64;
    int points_per_class = 500;
    double spread = 0.3;
    uint64_t data_seed = 7;
    int queries = 500;
    std::string data_file;  // when set, load DPQV instead of generating

    // model geometry and training
    int M = 4;
    int K = 16;
    int D = 0;  // 0 = derived from the sliced width
    int hidden = 128;
    int front = 0;
    int epochs = 100;
    int batch = 64;
    double lr = 0.01;
    LossWeights weights;
    uint64_t seed = 1;
    int threads = 1;
    int pq_iters = 100;

    // which systems/modes to evaluate
    bool run_pq = true;
    bool run_dpq = true;
    bool sym = true;
    bool asym = true;
    bool normalize = false;

    // cross-domain split: train on train_classes, retrieve among
    // eval_classes (empty = single-domain)
    std::vector<int> train_classes;
    std::vector<int> eval_classes;

    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig parse_file(const std::string& path);
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage(stage) {}
    std::string stage;
};

// One structured metric value; serialized one-per-line in json-lines mode.
struct MetricRecord {
    std::string metric;  // "map", "top1", "top5", "compression_ratio", ...
    std::string mode;    // "dpq-asym", "pq-sym", "dpq-hard", ...
    int bits = 0;        // code length in bits
    double value = 0;
};

struct ExperimentReport {
    std::vector<MetricRecord> records;
    std::vector<std::string> notes;  // deterministic, human-oriented lines

    std::string text_table() const;
    std::string json_lines() const;
    const MetricRecord* find(const std::string& metric,
                             const std::string& mode) const;
};

// Generates or loads the data, splits it, trains the requested systems,
// encodes the database, runs the requested searches and classification and
// computes the metrics. Deterministic for a given config. Throws
// ConfigError / StageError.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                std::ostream* progress = nullptr);

}  // namespace dpq

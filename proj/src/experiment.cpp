#include "dpq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dpq/eval.hpp"
#include "dpq/io.hpp"
#include "dpq/lut.hpp"
#include "dpq/model.hpp"
#include "dpq/pq.hpp"
#include "dpq/rng.hpp"
#include "dpq/synth.hpp"

namespace dpq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// "0-6" or "0,2,5" or "3"
std::vector<int> parse_class_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash != std::string::npos && dash > 0) {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            for (int c = lo; c <= hi; ++c) out.push_back(c);
        } else {
            out.push_back(std::stoi(part));
        }
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("not a boolean: " + v);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "classes") cfg.classes = std::stoi(value);
            else if (key == "dim") cfg.dim = std::stoi(value);
            else if (key == "points_per_class") cfg.points_per_class = std::stoi(value);
            else if (key == "spread") cfg.spread = std::stod(value);
            else if (key == "data_seed") cfg.data_seed = std::stoull(value);
            else if (key == "queries") cfg.queries = std::stoi(value);
            else if (key == "data_file") cfg.data_file = value;
            else if (key == "m") cfg.M = std::stoi(value);
            else if (key == "k") cfg.K = std::stoi(value);
            else if (key == "d") cfg.D = std::stoi(value);
            else if (key == "hidden") cfg.hidden = std::stoi(value);
            else if (key == "front") cfg.front = std::stoi(value);
            else if (key == "epochs") cfg.epochs = std::stoi(value);
            else if (key == "batch") cfg.batch = std::stoi(value);
            else if (key == "lr") cfg.lr = std::stod(value);
            else if (key == "w_softmax") cfg.weights.softmax = std::stod(value);
            else if (key == "w_central") cfg.weights.central = std::stod(value);
            else if (key == "w_gini_batch") cfg.weights.gini_batch = std::stod(value);
            else if (key == "w_gini_sample") cfg.weights.gini_sample = std::stod(value);
            else if (key == "w_weight_decay") cfg.weights.weight_decay = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "threads") cfg.threads = std::stoi(value);
            else if (key == "pq_iters") cfg.pq_iters = std::stoi(value);
            else if (key == "normalize") cfg.normalize = parse_bool(value);
            else if (key == "train_classes") cfg.train_classes = parse_class_list(value);
            else if (key == "eval_classes") cfg.eval_classes = parse_class_list(value);
            else if (key == "systems") {
                std::stringstream ss(value);
                std::string tok;
                bool dpq_seen = false, pq_seen = false;
                while (std::getline(ss, tok, ',')) {
                    tok = trim(tok);
                    if (tok == "pq") pq_seen = true;
                    else if (tok == "dpq") dpq_seen = true;
                    else if (!tok.empty()) throw ConfigError("unknown system: " + tok);
                }
                cfg.run_pq = pq_seen;
                cfg.run_dpq = dpq_seen;
            } else if (key == "modes") {
                std::stringstream ss(value);
                std::string tok;
                bool sym_seen = false, asym_seen = false;
                while (std::getline(ss, tok, ',')) {
                    tok = trim(tok);
                    if (tok == "sym") sym_seen = true;
                    else if (tok == "asym") asym_seen = true;
                    else if (!tok.empty()) throw ConfigError("unknown mode: " + tok);
                }
                if (!sym_seen && !asym_seen)
                    throw ConfigError("modes: need sym and/or asym");
                cfg.sym = sym_seen;
                cfg.asym = asym_seen;
            } else {
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key +
                              "': " + e.what());
        }
    }
    if (!cfg.run_pq && !cfg.run_dpq) throw ConfigError("no system selected");
    if (cfg.train_classes.empty() != cfg.eval_classes.empty())
        throw ConfigError("cross-domain mode needs both train_classes and eval_classes");
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    return parse(in);
}

std::string ExperimentReport::text_table() const {
    std::string out;
    out += "metric               mode            bits  value\n";
    out += "-------------------------------------------------------\n";
    for (const MetricRecord& r : records) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-20s %-15s %-5d %s\n", r.metric.c_str(),
                      r.mode.c_str(), r.bits, format_value(r.value).c_str());
        out += buf;
    }
    for (const std::string& n : notes) out += "# " + n + "\n";
    return out;
}

std::string ExperimentReport::json_lines() const {
    std::string out;
    for (const MetricRecord& r : records) {
        out += "{\"metric\":\"" + r.metric + "\",\"mode\":\"" + r.mode +
               "\",\"bits\":" + std::to_string(r.bits) +
               ",\"value\":" + format_value(r.value) + "}\n";
    }
    return out;
}

const MetricRecord* ExperimentReport::find(const std::string& metric,
                                           const std::string& mode) const {
    for (const MetricRecord& r : records) {
        if (r.metric == metric && r.mode == mode) return &r;
    }
    return nullptr;
}

namespace {

VectorSet subset(const VectorSet& vs, const std::vector<int64_t>& idx) {
    VectorSet out;
    out.count = static_cast<int64_t>(idx.size());
    out.dim = vs.dim;
    out.data.resize(idx.size() * static_cast<size_t>(vs.dim));
    if (vs.has_labels()) out.labels.resize(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        const auto row = vs.row(idx[i]);
        std::copy(row.begin(), row.end(), out.data.begin() + i * vs.dim);
        if (vs.has_labels()) out.labels[i] = vs.labels[idx[i]];
    }
    return out;
}

struct Split {
    VectorSet train;     // labeled, labels remapped densely when cross-domain
    VectorSet queries;   // original labels
    VectorSet database;  // original labels
    int train_classes = 0;
};

Split make_split(const VectorSet& data, const ExperimentConfig& cfg) {
    Rng rng(mix_seed(cfg.data_seed, 0x51));
    Split split;
    if (cfg.train_classes.empty()) {
        // single domain: database doubles as the training set
        std::vector<int64_t> idx(static_cast<size_t>(data.count));
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        if (cfg.queries <= 0 || cfg.queries >= data.count)
            throw StageError("split", "queries must be in (0, point count)");
        std::vector<int64_t> q(idx.begin(), idx.begin() + cfg.queries);
        std::vector<int64_t> db(idx.begin() + cfg.queries, idx.end());
        split.queries = subset(data, q);
        split.database = subset(data, db);
        split.train = split.database;
        split.train_classes = cfg.classes;
        return split;
    }
    // cross domain: train on one label subset, retrieve among a disjoint one
    std::vector<int> remap(static_cast<size_t>(cfg.classes), -1);
    for (size_t i = 0; i < cfg.train_classes.size(); ++i) {
        const int c = cfg.train_classes[i];
        if (c < 0 || c >= cfg.classes) throw StageError("split", "train class out of range");
        remap[c] = static_cast<int>(i);
    }
    std::vector<char> is_eval(static_cast<size_t>(cfg.classes), 0);
    for (int c : cfg.eval_classes) {
        if (c < 0 || c >= cfg.classes) throw StageError("split", "eval class out of range");
        if (remap[c] >= 0) throw StageError("split", "train and eval classes overlap");
        is_eval[c] = 1;
    }
    std::vector<int64_t> train_idx, eval_idx;
    for (int64_t i = 0; i < data.count; ++i) {
        const int32_t y = data.labels[i];
        if (remap[y] >= 0) train_idx.push_back(i);
        else if (is_eval[y]) eval_idx.push_back(i);
    }
    if (train_idx.empty()) throw StageError("split", "no training points");
    if (static_cast<int64_t>(eval_idx.size()) <= cfg.queries)
        throw StageError("split", "not enough evaluation points for the query count");
    split.train = subset(data, train_idx);
    for (int32_t& y : split.train.labels) y = remap[y];
    rng.shuffle(eval_idx);
    std::vector<int64_t> q(eval_idx.begin(), eval_idx.begin() + cfg.queries);
    std::vector<int64_t> db(eval_idx.begin() + cfg.queries, eval_idx.end());
    split.queries = subset(data, q);
    split.database = subset(data, db);
    split.train_classes = static_cast<int>(cfg.train_classes.size());
    return split;
}

double run_map(const VectorSet& queries, const VectorSet& database,
               const std::vector<std::vector<int64_t>>& rankings,
               const std::string& mode) {
    RetrievalRun run;
    run.query_labels = queries.labels;
    run.db_labels = database.labels;
    run.rankings = rankings;
    run.mode = mode;
    return eval_map(run);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
    ExperimentReport report;
    auto note = [&](const std::string& s) {
        report.notes.push_back(s);
        if (progress) *progress << s << "\n";
    };

    // ---- data ----
    VectorSet data;
    try {
        if (!cfg.data_file.empty()) {
            data = read_vector_set(cfg.data_file);
        } else {
            SyntheticSpec spec;
            spec.num_classes = cfg.classes;
            spec.dim = cfg.dim;
            spec.points_per_class = cfg.points_per_class;
            spec.cluster_spread = cfg.spread;
            spec.seed = cfg.data_seed;
            data = gen_synthetic(spec);
        }
        if (!data.has_labels()) throw std::runtime_error("data has no labels");
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("data", e.what());
    }
    note("data: " + std::to_string(data.count) + " points, dim " +
         std::to_string(data.dim));

    // ---- split ----
    const Split split = make_split(data, cfg);
    note("split: " + std::to_string(split.train.count) + " train, " +
         std::to_string(split.queries.count) + " queries, " +
         std::to_string(split.database.count) + " database");

    const int bits = cfg.M * static_cast<int>(std::lround(std::log2(cfg.K)));
    report.records.push_back({"compression_ratio", "-", bits,
                              compression_ratio(data.dim, cfg.M, static_cast<uint32_t>(cfg.K))});

    const int64_t db_n = split.database.count;
    const int rank_k = static_cast<int>(db_n);

    // ---- classical PQ ----
    if (cfg.run_pq) {
        Codebook pq_cb;
        try {
            pq_cb = pq_train(split.train, cfg.M, cfg.K, cfg.pq_iters, cfg.seed, cfg.threads);
        } catch (const std::exception& e) {
            throw StageError("train-pq", e.what());
        }
        try {
            report.records.push_back(
                {"quantization_error", "pq", bits, quantization_error(split.database, pq_cb)});
            const CodeSet db_codes = pq_encode_set(split.database, pq_cb);
            if (cfg.sym) {
                const SymLut lut = build_sym_lut(pq_cb);
                std::vector<std::vector<int64_t>> rankings;
                rankings.reserve(split.queries.count);
                for (int64_t q = 0; q < split.queries.count; ++q) {
                    const auto hits = rank_symmetric(pq_encode(split.queries.row(q), pq_cb),
                                                     db_codes, lut, rank_k, cfg.threads);
                    std::vector<int64_t> r(hits.size());
                    for (size_t i = 0; i < hits.size(); ++i) r[i] = hits[i].index;
                    rankings.push_back(std::move(r));
                }
                report.records.push_back(
                    {"map", "pq-sym", bits, run_map(split.queries, split.database, rankings, "pq-sym")});
            }
            if (cfg.asym) {
                std::vector<std::vector<int64_t>> rankings;
                rankings.reserve(split.queries.count);
                for (int64_t q = 0; q < split.queries.count; ++q) {
                    // classic ADC: the uncompressed query vector itself
                    const AsymLut lut = build_asym_lut(split.queries.row(q), pq_cb);
                    const auto hits = rank_asymmetric(lut, db_codes, rank_k, cfg.threads);
                    std::vector<int64_t> r(hits.size());
                    for (size_t i = 0; i < hits.size(); ++i) r[i] = hits[i].index;
                    rankings.push_back(std::move(r));
                }
                report.records.push_back(
                    {"map", "pq-asym", bits, run_map(split.queries, split.database, rankings, "pq-asym")});
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError("eval-pq", e.what());
        }
    }

    // ---- deep PQ ----
    if (cfg.run_dpq) {
        DpqModel model;
        TrainLog tlog;
        try {
            QuantizerConfig qc;
            qc.M = cfg.M;
            qc.K = cfg.K;
            qc.front_dim = cfg.front;
            qc.input_dim = data.dim;
            qc.D = cfg.D > 0 ? cfg.D : qc.slice_width();
            qc.hidden_dim = cfg.hidden;
            qc.num_classes = split.train_classes;
            qc.weights = cfg.weights;
            qc.seed = cfg.seed;
            qc.epochs = cfg.epochs;
            qc.batch_size = cfg.batch;
            qc.learning_rate = cfg.lr;
            model = train(split.train, qc, &tlog, nullptr);
        } catch (const std::exception& e) {
            throw StageError("train-dpq", e.what());
        }
        for (const std::string& w : tlog.warnings) note("train-dpq: " + w);

        try {
            const CodeSet db_codes = encode_set(split.database, model);
            const Codebook cb = model.codebook();

            // quantization error of the deep codes against the hard codebook
            {
                double err = 0.0;
                for (int64_t i = 0; i < split.database.count; ++i) {
                    const auto soft = query_soft(split.database.row(i), model, false);
                    const auto recon = reconstruct(db_codes.indices(i), cb);
                    for (size_t d = 0; d < soft.size(); ++d) {
                        const double diff = soft[d] - recon[d];
                        err += diff * diff;
                    }
                }
                report.records.push_back(
                    {"quantization_error", "dpq", bits, err / static_cast<double>(db_n)});
            }

            auto run_modes = [&](const DpqModel& mdl, bool normalized,
                                 const std::string& suffix) {
                const Codebook cbn = mdl.codebook();
                if (cfg.sym) {
                    const SymLut lut = build_sym_lut(cbn);
                    std::vector<std::vector<int64_t>> rankings;
                    rankings.reserve(split.queries.count);
                    for (int64_t q = 0; q < split.queries.count; ++q) {
                        const auto hits = rank_symmetric(encode(split.queries.row(q), mdl),
                                                         db_codes, lut, rank_k, cfg.threads);
                        std::vector<int64_t> r(hits.size());
                        for (size_t i = 0; i < hits.size(); ++i) r[i] = hits[i].index;
                        rankings.push_back(std::move(r));
                    }
                    report.records.push_back({"map", "dpq-sym" + suffix, bits,
                                              run_map(split.queries, split.database, rankings,
                                                      "dpq-sym" + suffix)});
                }
                if (cfg.asym) {
                    std::vector<std::vector<int64_t>> rankings;
                    rankings.reserve(split.queries.count);
                    for (int64_t q = 0; q < split.queries.count; ++q) {
                        const auto soft = query_soft(split.queries.row(q), mdl, normalized);
                        const AsymLut lut = build_asym_lut(soft, cbn);
                        const auto hits = rank_asymmetric(lut, db_codes, rank_k, cfg.threads);
                        std::vector<int64_t> r(hits.size());
                        for (size_t i = 0; i < hits.size(); ++i) r[i] = hits[i].index;
                        rankings.push_back(std::move(r));
                    }
                    report.records.push_back({"map", "dpq-asym" + suffix, bits,
                                              run_map(split.queries, split.database, rankings,
                                                      "dpq-asym" + suffix)});
                }
            };
            run_modes(model, false, "");
            if (cfg.normalize) run_modes(intra_normalize(model), true, "-norm");

            // classification over compressed codes (single domain only:
            // the classifier heads cover the training classes)
            if (cfg.train_classes.empty()) {
                const ClassLut clut = build_class_lut(model);
                const CodeSet qcodes = encode_set(split.queries, model);
                std::vector<double> scores(static_cast<size_t>(split.queries.count) *
                                           split.train_classes);
                for (int64_t q = 0; q < split.queries.count; ++q) {
                    const auto s = classify_code(qcodes.indices(q), clut);
                    std::copy(s.begin(), s.end(),
                              scores.begin() + q * split.train_classes);
                }
                report.records.push_back(
                    {"top1", "dpq-hard", bits,
                     top_n_accuracy(scores, split.train_classes, split.queries.labels, 1)});
                report.records.push_back(
                    {"top5", "dpq-hard", bits,
                     top_n_accuracy(scores, split.train_classes, split.queries.labels,
                                    std::min(5, split.train_classes))});
            }

            // cluster usage of the database codes
            std::vector<int64_t> usage(static_cast<size_t>(cfg.M) * cfg.K, 0);
            for (int64_t i = 0; i < db_codes.count; ++i) {
                const auto z = db_codes.indices(i);
                for (int m = 0; m < cfg.M; ++m)
                    ++usage[static_cast<size_t>(m) * cfg.K + z[m]];
            }
            for (int m = 0; m < cfg.M; ++m) {
                int64_t mx = 0;
                for (int k = 0; k < cfg.K; ++k)
                    mx = std::max(mx, usage[static_cast<size_t>(m) * cfg.K + k]);
                report.records.push_back(
                    {"max_cluster_share", "dpq-part" + std::to_string(m), bits,
                     static_cast<double>(mx) / static_cast<double>(db_n)});
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError("eval-dpq", e.what());
        }
    }
    return report;
}

}  // namespace dpq

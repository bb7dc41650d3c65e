// Command line surface for the product quantization toolkit: synthetic data
// generation, classical and deep quantizer training, encoding, search,
// compressed-code classification and retrieval evaluation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpq/eval.hpp"
#include "dpq/experiment.hpp"
#include "dpq/io.hpp"
#include "dpq/lut.hpp"
#include "dpq/model.hpp"
#include "dpq/pq.hpp"
#include "dpq/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct GlobalOpts {
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::string format = "text";  // or "json-lines"
};

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void emit_metric(const GlobalOpts& g, std::ostream& out, const std::string& metric,
                 const std::string& mode, int bits, double value) {
    if (g.format == "json-lines") {
        out << "{\"metric\":\"" << metric << "\",\"mode\":\"" << mode
            << "\",\"bits\":" << bits << ",\"value\":" << fmt_value(value) << "}\n";
    } else {
        out << metric << " " << mode << " " << bits << " " << fmt_value(value) << "\n";
    }
}

int cmd_gen(const GlobalOpts& g, int classes, int dim, int per_class, double spread,
            uint64_t seed, const std::string& out_path) {
    dpq::SyntheticSpec spec;
    spec.num_classes = classes;
    spec.dim = dim;
    spec.points_per_class = per_class;
    spec.cluster_spread = spread;
    spec.seed = g.seed_set ? g.seed : seed;
    const dpq::VectorSet vs = dpq::gen_synthetic(spec);
    dpq::write_vector_set(out_path, vs);
    std::cerr << "wrote " << vs.count << " vectors of dim " << vs.dim << " to "
              << out_path << "\n";
    return kExitOk;
}

int cmd_train_pq(const GlobalOpts& g, const std::string& data_path, int M, int K,
                 int iters, uint64_t seed, const std::string& out_path) {
    const dpq::VectorSet data = dpq::read_vector_set(data_path);
    const dpq::Codebook cb =
        dpq::pq_train(data, M, K, iters, g.seed_set ? g.seed : seed, g.threads);
    dpq::write_codebook(out_path, cb);
    std::cerr << "trained PQ codebook M=" << M << " K=" << K << ", error "
              << fmt_value(dpq::quantization_error(data, cb)) << "\n";
    return kExitOk;
}

int cmd_train_dpq(const GlobalOpts& g, const std::string& data_path,
                  const std::string& preset, dpq::QuantizerConfig qc,
                  bool verbose, const std::string& out_path) {
    const dpq::VectorSet data = dpq::read_vector_set(data_path);
    qc.input_dim = data.dim;
    if (preset == "cifar-style") {
        qc.K = 64;
        qc.hidden_dim = 128;
        qc.front_dim = 0;
    } else if (preset == "crossdomain-style") {
        qc.M = 8;
        qc.K = 256;
        qc.D = 64;
        qc.hidden_dim = 128;
        qc.front_dim = 2048;
    } else if (!preset.empty()) {
        throw dpq::ConfigError("unknown preset: " + preset);
    }
    if (qc.D == 0) qc.D = qc.slice_width();
    if (qc.num_classes == 0) {
        int32_t mx = -1;
        for (int32_t y : data.labels) mx = std::max(mx, y);
        qc.num_classes = mx + 1;
    }
    if (g.seed_set) qc.seed = g.seed;
    const dpq::DpqModel model =
        dpq::train(data, qc, nullptr, verbose ? &std::cerr : nullptr);
    dpq::write_model(out_path, model);
    std::cerr << "trained model (" << qc.code_bits() << "-bit codes) to " << out_path
              << "\n";
    return kExitOk;
}

int cmd_encode(const std::string& data_path, const std::string& model_path,
               const std::string& codebook_path, const std::string& out_path) {
    const dpq::VectorSet data = dpq::read_vector_set(data_path);
    dpq::CodeSet codes;
    if (!model_path.empty()) {
        codes = dpq::encode_set(data, dpq::read_model(model_path));
    } else {
        codes = dpq::pq_encode_set(data, dpq::read_codebook(codebook_path));
    }
    dpq::write_code_set(out_path, codes);
    std::cerr << "encoded " << codes.count << " vectors (" << codes.record_size()
              << " bytes per code) to " << out_path << "\n";
    return kExitOk;
}

int cmd_search(const GlobalOpts& g, const std::string& queries_path,
               const std::string& db_path, const std::string& model_path,
               const std::string& codebook_path, const std::string& mode, int k,
               bool normalize, const std::string& out_path) {
    const dpq::VectorSet queries = dpq::read_vector_set(queries_path);
    const dpq::CodeSet db = dpq::read_code_set(db_path);
    const bool sym = mode == "sym";
    if (!sym && mode != "asym") throw dpq::ConfigError("mode must be sym or asym");
    if (k <= 0) k = static_cast<int>(db.count);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        out = &file;
    }

    auto emit = [&](int64_t qid, const std::vector<dpq::SearchHit>& hits) {
        for (size_t r = 0; r < hits.size(); ++r) {
            (*out) << qid << "\t" << (r + 1) << "\t" << hits[r].index << "\t"
                   << fmt_value(hits[r].distance) << "\n";
        }
    };

    if (!model_path.empty()) {
        dpq::DpqModel model = dpq::read_model(model_path);
        if (normalize) model = dpq::intra_normalize(model);
        const dpq::SearchMode m =
            sym ? dpq::SearchMode::symmetric : dpq::SearchMode::asymmetric;
        for (int64_t q = 0; q < queries.count; ++q)
            emit(q, dpq::search(queries.row(q), db, model, m, k, normalize, g.threads));
    } else {
        dpq::Codebook cb = dpq::read_codebook(codebook_path);
        if (sym) {
            const dpq::SymLut lut = dpq::build_sym_lut(cb);
            for (int64_t q = 0; q < queries.count; ++q)
                emit(q, dpq::rank_symmetric(dpq::pq_encode(queries.row(q), cb), db, lut,
                                            k, g.threads));
        } else {
            for (int64_t q = 0; q < queries.count; ++q) {
                const dpq::AsymLut lut = dpq::build_asym_lut(queries.row(q), cb);
                emit(q, dpq::rank_asymmetric(lut, db, k, g.threads));
            }
        }
    }
    return kExitOk;
}

int cmd_classify(const GlobalOpts& g, const std::string& model_path,
                 const std::string& codes_path, const std::string& labels_path) {
    const dpq::DpqModel model = dpq::read_model(model_path);
    const dpq::CodeSet codes = dpq::read_code_set(codes_path);
    const dpq::ClassLut lut = dpq::build_class_lut(model);
    const int C = model.layout.C;

    std::vector<double> scores(static_cast<size_t>(codes.count) * C);
    for (int64_t i = 0; i < codes.count; ++i) {
        const auto s = dpq::classify_code(codes.indices(i), lut);
        std::copy(s.begin(), s.end(), scores.begin() + i * C);
        int best = 0;
        for (int c = 1; c < C; ++c)
            if (s[c] > s[best]) best = c;
        std::cout << i << "\t" << best << "\n";
    }
    if (!labels_path.empty()) {
        const dpq::VectorSet labeled = dpq::read_vector_set(labels_path);
        if (!labeled.has_labels()) throw std::runtime_error("label file carries no labels");
        const int bits = model.config.code_bits();
        emit_metric(g, std::cerr, "top1", "dpq-hard", bits,
                    dpq::top_n_accuracy(scores, C, labeled.labels, 1));
        emit_metric(g, std::cerr, "top5", "dpq-hard", bits,
                    dpq::top_n_accuracy(scores, C, labeled.labels, std::min(5, C)));
    }
    return kExitOk;
}

int cmd_eval(const std::string& results_path, const std::string& queries_path,
             const std::string& db_path, const GlobalOpts& g) {
    const dpq::VectorSet queries = dpq::read_vector_set(queries_path);
    const dpq::VectorSet db = dpq::read_vector_set(db_path);
    if (!queries.has_labels() || !db.has_labels())
        throw std::runtime_error("eval needs labeled query and database files");

    std::ifstream in(results_path);
    if (!in) throw std::runtime_error("cannot open " + results_path);
    std::vector<std::vector<int64_t>> rankings(queries.count);
    int64_t qid, rank, dbi;
    double dist;
    while (in >> qid >> rank >> dbi >> dist) {
        if (qid < 0 || qid >= queries.count)
            throw std::runtime_error("result refers to unknown query " + std::to_string(qid));
        rankings[qid].push_back(dbi);
    }
    dpq::RetrievalRun run;
    run.query_labels = queries.labels;
    run.db_labels = db.labels;
    run.rankings = std::move(rankings);
    run.mode = "file";
    emit_metric(g, std::cout, "map", "file", 0, dpq::eval_map(run));
    return kExitOk;
}

int cmd_experiment(const GlobalOpts& g, const std::string& config_path,
                   const std::string& out_prefix, bool verbose) {
    dpq::ExperimentConfig cfg = dpq::ExperimentConfig::parse_file(config_path);
    if (g.seed_set) cfg.seed = g.seed;
    if (g.threads > 1) cfg.threads = g.threads;
    const dpq::ExperimentReport report =
        dpq::run_experiment(cfg, verbose ? &std::cerr : nullptr);
    if (g.format == "json-lines") {
        std::cout << report.json_lines();
    } else {
        std::cout << report.text_table();
    }
    if (!out_prefix.empty()) {
        std::ofstream txt(out_prefix + ".txt", std::ios::trunc);
        txt << report.text_table();
        std::ofstream jsonl(out_prefix + ".jsonl", std::ios::trunc);
        jsonl << report.json_lines();
        if (!txt || !jsonl)
            throw std::runtime_error("failed writing report files with prefix " + out_prefix);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"product quantization toolkit: train, compress, search, evaluate"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "override the seed of any subcommand")
        ->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--threads", g.threads, "worker threads for search/k-means");
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"text", "json-lines"}));

    // gen
    auto* gen = app.add_subcommand("gen", "generate synthetic labeled vectors");
    int classes = 10, dim = 64, per_class = 500;
    double spread = 0.3;
    uint64_t gen_seed = 7;
    std::string gen_out;
    gen->add_option("--classes", classes);
    gen->add_option("--dim", dim);
    gen->add_option("--per-class", per_class);
    gen->add_option("--spread", spread);
    gen->add_option("--data-seed", gen_seed);
    gen->add_option("--out", gen_out)->required();

    // train-pq
    auto* tpq = app.add_subcommand("train-pq", "k-means codebooks per partition");
    std::string tpq_data, tpq_out;
    int tpq_m = 8, tpq_k = 256, tpq_iters = 100;
    uint64_t tpq_seed = 1;
    tpq->add_option("--data", tpq_data)->required();
    tpq->add_option("--m", tpq_m);
    tpq->add_option("--k", tpq_k);
    tpq->add_option("--iters", tpq_iters);
    tpq->add_option("--train-seed", tpq_seed);
    tpq->add_option("--out", tpq_out)->required();

    // train-dpq
    auto* tdpq = app.add_subcommand("train-dpq", "supervised quantizer training");
    std::string tdpq_data, tdpq_out, tdpq_preset;
    bool tdpq_verbose = false;
    dpq::QuantizerConfig qc;
    qc.M = 4;
    qc.K = 16;
    qc.D = 0;
    tdpq->add_option("--data", tdpq_data)->required();
    tdpq->add_option("--m", qc.M);
    tdpq->add_option("--k", qc.K);
    tdpq->add_option("--d", qc.D);
    tdpq->add_option("--hidden", qc.hidden_dim);
    tdpq->add_option("--front", qc.front_dim);
    tdpq->add_option("--classes", qc.num_classes);
    tdpq->add_option("--epochs", qc.epochs);
    tdpq->add_option("--batch", qc.batch_size);
    tdpq->add_option("--lr", qc.learning_rate);
    tdpq->add_option("--w-softmax", qc.weights.softmax);
    tdpq->add_option("--w-central", qc.weights.central);
    tdpq->add_option("--w-gini-batch", qc.weights.gini_batch);
    tdpq->add_option("--w-gini-sample", qc.weights.gini_sample);
    tdpq->add_option("--w-weight-decay", qc.weights.weight_decay);
    tdpq->add_option("--train-seed", qc.seed);
    tdpq->add_option("--preset", tdpq_preset)
        ->check(CLI::IsMember({"cifar-style", "crossdomain-style"}));
    tdpq->add_flag("--soft-only", [&qc](size_t) { qc.hard_path = false; },
                   "disable the hard-path classification loss");
    tdpq->add_flag("--verbose", tdpq_verbose);
    tdpq->add_option("--out", tdpq_out)->required();

    // encode
    auto* enc = app.add_subcommand("encode", "compress vectors to packed codes");
    std::string enc_data, enc_model, enc_cb, enc_out;
    enc->add_option("--data", enc_data)->required();
    enc->add_option("--model", enc_model);
    enc->add_option("--codebook", enc_cb);
    enc->add_option("--out", enc_out)->required();

    // search
    auto* srch = app.add_subcommand("search", "ranked nearest codes for queries");
    std::string s_queries, s_db, s_model, s_cb, s_mode = "asym", s_out;
    int s_k = 0;
    bool s_norm = false;
    srch->add_option("--queries", s_queries)->required();
    srch->add_option("--db", s_db)->required();
    srch->add_option("--model", s_model);
    srch->add_option("--codebook", s_cb);
    srch->add_option("--mode", s_mode)->check(CLI::IsMember({"sym", "asym"}));
    srch->add_option("--k", s_k);
    srch->add_flag("--normalize", s_norm);
    srch->add_option("--out", s_out);

    // classify
    auto* cls = app.add_subcommand("classify", "score compressed codes by class");
    std::string c_model, c_codes, c_labels;
    cls->add_option("--model", c_model)->required();
    cls->add_option("--codes", c_codes)->required();
    cls->add_option("--labels", c_labels);

    // eval
    auto* ev = app.add_subcommand("eval", "mean average precision of a result file");
    std::string e_results, e_queries, e_db;
    ev->add_option("--results", e_results)->required();
    ev->add_option("--queries", e_queries)->required();
    ev->add_option("--db", e_db)->required();

    // experiment
    auto* exp = app.add_subcommand("experiment", "full benchmark pipeline from a config");
    std::string x_config, x_out;
    bool x_verbose = false;
    exp->add_option("--config", x_config)->required();
    exp->add_option("--out", x_out);
    exp->add_flag("--verbose", x_verbose);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen)
            return cmd_gen(g, classes, dim, per_class, spread, gen_seed, gen_out);
        if (*tpq)
            return cmd_train_pq(g, tpq_data, tpq_m, tpq_k, tpq_iters, tpq_seed, tpq_out);
        if (*tdpq)
            return cmd_train_dpq(g, tdpq_data, tdpq_preset, qc, tdpq_verbose, tdpq_out);
        if (*enc) {
            if (enc_model.empty() == enc_cb.empty())
                throw dpq::ConfigError("encode needs exactly one of --model / --codebook");
            return cmd_encode(enc_data, enc_model, enc_cb, enc_out);
        }
        if (*srch) {
            if (s_model.empty() == s_cb.empty())
                throw dpq::ConfigError("search needs exactly one of --model / --codebook");
            return cmd_search(g, s_queries, s_db, s_model, s_cb, s_mode, s_k, s_norm, s_out);
        }
        if (*cls) return cmd_classify(g, c_model, c_codes, c_labels);
        if (*ev) return cmd_eval(e_results, e_queries, e_db, g);
        if (*exp) return cmd_experiment(g, x_config, x_out, x_verbose);
    } catch (const dpq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dpq::StageError& e) {
        std::cerr << "stage failed: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitConfig;
}

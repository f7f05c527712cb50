#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evisec/edl.hpp"
#include "evisec/spectral.hpp"
#include "evisec/synth.hpp"
#include "evisec/train.hpp"

namespace {

using namespace evisec;
using nlohmann::json;

int cmd_ingest(const std::string& input, const std::string& features, const std::string& out,
               bool header, int label_col, int feature_dim) {
    std::ifstream in(input);
    if (!in) throw ValidationError("cannot open input file " + input);
    EdgeListSchema schema;
    schema.header = header;
    schema.label_col = label_col;
    schema.default_feature_dim = feature_dim;
    std::ifstream ff;
    std::istream* fptr = nullptr;
    if (!features.empty()) {
        ff.open(features);
        if (!ff) throw ValidationError("cannot open feature file " + features);
        fptr = &ff;
    }
    LoadResult result = load_temporal_edgelist(in, schema, fptr);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    save_sequence(result.sequence, out);
    std::cout << "ingested T=" << result.sequence.total_timesteps()
              << " N=" << result.sequence.num_nodes() << " d=" << result.sequence.feature_dim
              << " K=" << result.sequence.num_classes << " -> " << out << "\n";
    return 0;
}

DynamicGraphSequence load_data(const ExperimentConfig& cfg, bool synthetic) {
    if (synthetic) {
        SynthSpec spec;
        spec.seed = cfg.seed;
        return generate_synthetic(spec);
    }
    if (cfg.data_path.empty()) throw ValidationError("no data_path in config");
    return load_sequence(cfg.data_path);
}

int cmd_train(const ExperimentConfig& cfg, bool synthetic) {
    DynamicGraphSequence data = load_data(cfg, synthetic);
    TrainingState state = train(cfg, data);
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        save_config(cfg, std::filesystem::path(cfg.out_dir) / "config-resolved");
        std::ofstream lf(std::filesystem::path(cfg.out_dir) / "losses.csv");
        write_losses_csv(lf, state.history);
        save_checkpoint(state.best_params, config_hash(cfg),
                        std::filesystem::path(cfg.out_dir) / "checkpoint");
    }
    if (!state.history.empty())
        std::cout << "trained " << state.history.size()
                  << " epochs, final total loss = " << state.history.back().total
                  << ", best epoch = " << state.best_epoch << "\n";
    else
        std::cout << "trained 0 epochs (parameters at seeded initialization)\n";
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint,
                 const std::string& id_path, const std::string& ood_path) {
    TrainingState state;
    state.best_params = load_checkpoint(checkpoint);
    state.params = state.best_params;
    DynamicGraphSequence id_test = load_sequence(id_path);
    DynamicGraphSequence ood_test = load_sequence(ood_path);
    EvaluationResult result = evaluate(state, cfg, id_test, ood_test);
    if (!cfg.out_dir.empty()) write_results(cfg.out_dir, cfg, state, result);
    std::cout.precision(6);
    std::cout << "auroc=" << result.evisec.auroc << "\naupr=" << result.evisec.aupr
              << "\nfpr95=" << result.evisec.fpr95 << "\nf1=" << result.evisec.f1 << "\n";
    std::cout << "baseline_msp_auroc=" << result.msp.auroc << "\n";
    std::cout << "baseline_entropy_auroc=" << result.entropy.auroc << "\n";
    return 0;
}

int cmd_gen_ood(const std::string& input, const std::string& out, const std::string& kind,
                double lambda, int blocks, std::uint64_t seed) {
    DynamicGraphSequence seq = load_sequence(input);
    SBMSpec sm;
    sm.num_blocks = blocks;
    sm.seed = seed;
    FISpec fi;
    fi.fixed_lambda = lambda;
    fi.seed = seed;
    OodKind k = kind == "sm" ? OodKind::sm : OodKind::fi;
    if (kind != "sm" && kind != "fi") throw ValidationError("gen-ood kind must be sm or fi");
    DynamicGraphSequence ood = make_ood_testset(seq, k, sm, fi);
    save_sequence(ood, out);
    std::cout << "content_hash=" << sequence_content_hash(ood) << "\n";
    std::cout << "input_content_hash=" << sequence_content_hash(seq) << "\n";
    return 0;
}

int cmd_augment(const std::string& input, const std::string& out, double r) {
    DynamicGraphSequence seq = load_sequence(input);
    std::filesystem::create_directories(out);
    for (const auto& snap : seq.snapshots) {
        SpectralDecomposition dec = eigendecompose(laplacian(snap));
        NegativeSample neg = augment(dec, r);
        SpectralDecomposition neg_dec = eigendecompose(neg.l_minus);
        std::ofstream f(std::filesystem::path(out) /
                        ("spectrum_" + std::to_string(snap.timestep) + ".csv"));
        f << "eigenvalue,negative_eigenvalue\n";
        f.precision(17);
        for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i)
            f << dec.eigenvalues(i) << "," << neg_dec.eigenvalues(i) << "\n";
    }
    std::cout << "wrote spectra for " << seq.total_timesteps() << " snapshots to " << out << "\n";
    return 0;
}

int cmd_metrics(const std::string& id_path, const std::string& ood_path,
                const std::string& curve_out) {
    std::ifstream idf(id_path), oodf(ood_path);
    if (!idf) throw ValidationError("cannot open " + id_path);
    if (!oodf) throw ValidationError("cannot open " + ood_path);
    std::vector<double> id_scores = read_scores_csv(idf);
    std::vector<double> ood_scores = read_scores_csv(oodf);
    std::cout.precision(17);
    std::cout << "auroc=" << auroc(id_scores, ood_scores) << "\n";
    std::cout << "aupr=" << aupr(id_scores, ood_scores) << "\n";
    std::cout << "fpr95=" << fpr95(id_scores, ood_scores) << "\n";
    if (!curve_out.empty()) {
        std::ofstream cf(curve_out);
        write_curve_csv(cf, detection_curve(id_scores, ood_scores));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evidential spectrum-aware OOD detection for dynamic graphs"};
    app.require_subcommand(1);

    std::string config_path, input, features, out, id_path, ood_path, kind = "sm", curve_out;
    std::string checkpoint;
    bool header = false, synthetic = false;
    int label_col = -1, feature_dim = 8, blocks = 4;
    double lambda = -1.0, preserve = 0.3;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::string out_dir_override;

    auto* ingest = app.add_subcommand("ingest", "edge list -> internal sequence format");
    ingest->add_option("--input", input, "edge list file")->required();
    ingest->add_option("--features", features, "per-node feature file");
    ingest->add_option("--out", out, "output sequence directory")->required();
    ingest->add_flag("--header", header, "first row names the columns");
    ingest->add_option("--label-col", label_col, "column index of edge labels");
    ingest->add_option("--feature-dim", feature_dim, "degree one-hot dim when no feature file");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--out-dir", out_dir_override, "output directory override");
    };

    auto* train_cmd = app.add_subcommand("train", "train on a sequence");
    add_common(train_cmd);
    train_cmd->add_flag("--synthetic", synthetic, "use the bundled synthetic benchmark");

    auto* eval_cmd = app.add_subcommand("evaluate", "score ID and OOD test sequences");
    add_common(eval_cmd);
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
    eval_cmd->add_option("--id", id_path, "ID test sequence directory")->required();
    eval_cmd->add_option("--ood", ood_path, "OOD test sequence directory")->required();

    auto* gen = app.add_subcommand("gen-ood", "generate an OOD test sequence");
    gen->add_option("--input", input, "input sequence directory")->required();
    gen->add_option("--out", out, "output sequence directory")->required();
    gen->add_option("--kind", kind, "sm or fi")->required();
    gen->add_option("--lambda", lambda, "fixed interpolation coefficient (FI)");
    gen->add_option("--blocks", blocks, "SBM block count");
    gen->add_option("--seed", seed_override, "generation seed");

    auto* aug = app.add_subcommand("augment", "dump Laplacian and negative-sample spectra");
    aug->add_option("--input", input, "input sequence directory")->required();
    aug->add_option("--out", out, "output directory")->required();
    aug->add_option("--r", preserve, "preservation ratio");

    auto* met = app.add_subcommand("metrics", "recompute detection metrics from score CSVs");
    met->add_option("--id", id_path, "ID score CSV")->required();
    met->add_option("--ood", ood_path, "OOD score CSV")->required();
    met->add_option("--curve", curve_out, "write ROC/PR curve CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(input, features, out, header, label_col, feature_dim);
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed_set) cfg.seed = seed_override;
        if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
        if (*train_cmd) return cmd_train(cfg, synthetic);
        if (*eval_cmd) return cmd_evaluate(cfg, checkpoint, id_path, ood_path);
        if (*gen) return cmd_gen_ood(input, out, kind, lambda, blocks, seed_override);
        if (*aug) return cmd_augment(input, out, preserve);
        if (*met) return cmd_metrics(id_path, ood_path, curve_out);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        err["command"] = app.get_subcommands().empty() ? "" : app.get_subcommands()[0]->get_name();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}

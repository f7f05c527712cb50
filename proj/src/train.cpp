#include "evisec/train.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evisec/edl.hpp"
#include "evisec/tape.hpp"

namespace evisec {

using nlohmann::json;

HeadKind ExperimentConfig::head_kind() const {
    if (task == "node-classification") return HeadKind::node_classification;
    if (task == "edge-classification") return HeadKind::edge_classification;
    if (task == "link-prediction") return HeadKind::link_prediction;
    throw ValidationError("unknown task '" + task + "'");
}

Aggregation ExperimentConfig::agg() const {
    if (aggregation == "mean") return Aggregation::mean;
    if (aggregation == "max") return Aggregation::max;
    throw ValidationError("unknown aggregation '" + aggregation + "'");
}

AugmentMode ExperimentConfig::aug() const {
    if (augment_mode == "verbatim") return AugmentMode::verbatim;
    if (augment_mode == "weighted") return AugmentMode::weighted;
    throw ValidationError("unknown augment_mode '" + augment_mode + "'");
}

void ExperimentConfig::validate() const {
    if (layers < 1 || hidden_dim < 1) throw ValidationError("layers and hidden_dim must be >= 1");
    if (delta_t < 1) throw ValidationError("delta_t must be >= 1");
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (rho1 < 0.0 || rho2 < 0.0) throw ValidationError("rho1 and rho2 must be >= 0");
    if (preserve_ratio < 0.0 || preserve_ratio >= 1.0)
        throw ValidationError("preserve_ratio must be in [0, 1)");
    head_kind();
    agg();
    aug();
}

namespace {

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["task"] = c.task;
    j["layers"] = c.layers;
    j["hidden_dim"] = c.hidden_dim;
    j["delta_t"] = c.delta_t;
    j["epochs"] = c.epochs;
    j["learning_rate"] = c.learning_rate;
    j["momentum"] = c.momentum;
    j["seed"] = c.seed;
    j["ce_weight"] = c.ce_weight;
    j["rho1"] = c.rho1;
    j["rho2"] = c.rho2;
    j["preserve_ratio"] = c.preserve_ratio;
    j["gamma"] = c.gamma;
    j["logit_clamp"] = c.logit_clamp;
    j["kl_warmup_epochs"] = c.kl_warmup_epochs;
    j["aggregation"] = c.aggregation;
    j["augment_mode"] = c.augment_mode;
    j["ood_kind"] = c.ood_kind;
    j["train_timesteps"] = c.train_timesteps;
    j["val_timesteps"] = c.val_timesteps;
    j["test_timesteps"] = c.test_timesteps;
    j["data_path"] = c.data_path;
    j["out_dir"] = c.out_dir;
    j["sm"] = {{"num_blocks", c.sm.num_blocks},
               {"p_in", c.sm.p_in},
               {"p_out", c.sm.p_out},
               {"seed", c.sm.seed}};
    j["fi"] = {{"fixed_lambda", c.fi.fixed_lambda}, {"seed", c.fi.seed}};
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.value("schema_version", 1) != 1)
        throw ValidationError("unsupported config schema_version");
    c.task = j.value("task", c.task);
    c.layers = j.value("layers", c.layers);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.delta_t = j.value("delta_t", c.delta_t);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.seed = j.value("seed", c.seed);
    c.ce_weight = j.value("ce_weight", c.ce_weight);
    c.rho1 = j.value("rho1", c.rho1);
    c.rho2 = j.value("rho2", c.rho2);
    c.preserve_ratio = j.value("preserve_ratio", c.preserve_ratio);
    c.gamma = j.value("gamma", c.gamma);
    c.logit_clamp = j.value("logit_clamp", c.logit_clamp);
    c.kl_warmup_epochs = j.value("kl_warmup_epochs", c.kl_warmup_epochs);
    c.aggregation = j.value("aggregation", c.aggregation);
    c.augment_mode = j.value("augment_mode", c.augment_mode);
    c.ood_kind = j.value("ood_kind", c.ood_kind);
    c.train_timesteps = j.value("train_timesteps", c.train_timesteps);
    c.val_timesteps = j.value("val_timesteps", c.val_timesteps);
    c.test_timesteps = j.value("test_timesteps", c.test_timesteps);
    c.data_path = j.value("data_path", c.data_path);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("sm")) {
        c.sm.num_blocks = j["sm"].value("num_blocks", c.sm.num_blocks);
        c.sm.p_in = j["sm"].value("p_in", c.sm.p_in);
        c.sm.p_out = j["sm"].value("p_out", c.sm.p_out);
        c.sm.seed = j["sm"].value("seed", c.sm.seed);
    }
    if (j.contains("fi")) {
        c.fi.fixed_lambda = j["fi"].value("fixed_lambda", c.fi.fixed_lambda);
        c.fi.seed = j["fi"].value("seed", c.fi.seed);
    }
    c.validate();
    return c;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    return config_from_json(json::parse(in));
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << config_to_json(cfg).dump(2) << "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

Splits resolve_splits(const ExperimentConfig& cfg, int total) {
    Splits s;
    if (cfg.train_timesteps > 0) {
        s.train = cfg.train_timesteps;
        s.val = std::max(cfg.val_timesteps, 0);
        s.test = std::max(cfg.test_timesteps, 0);
    } else {
        s.val = s.test = std::max(cfg.delta_t, total / 4);
        s.train = total - s.val - s.test;
    }
    if (s.train + s.val + s.test > total)
        throw ValidationError("splits exceed sequence length");
    if (s.train < cfg.delta_t)
        throw ValidationError("training segment shorter than delta_t");
    return s;
}

namespace {

struct WindowTargets {
    std::vector<int> nodes;
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> labels;
    Mat y;  // one-hot rows
};

WindowTargets make_targets(const GraphSnapshot& final_snap, HeadKind kind, int num_classes,
                           std::uint64_t salt) {
    WindowTargets t;
    if (kind == HeadKind::node_classification) {
        if (final_snap.node_labels.size() == 0)
            throw ValidationError("node task requires node labels");
        for (int i = 0; i < final_snap.num_nodes; ++i)
            if (final_snap.node_labels(i) >= 0) {
                t.nodes.push_back(i);
                t.labels.push_back(final_snap.node_labels(i));
            }
    } else if (kind == HeadKind::edge_classification) {
        if (final_snap.edge_labels.empty())
            throw ValidationError("edge task requires edge labels");
        for (size_t i = 0; i < final_snap.edges.size(); ++i)
            if (final_snap.edge_labels[i] >= 0) {
                t.pairs.push_back(final_snap.edges[i]);
                t.labels.push_back(final_snap.edge_labels[i]);
            }
    } else {  // link prediction: existing edges vs sampled non-edges
        num_classes = 2;
        std::set<std::pair<int, int>> existing(final_snap.edges.begin(), final_snap.edges.end());
        std::mt19937_64 rng(salt);
        std::uniform_int_distribution<int> pick(0, final_snap.num_nodes - 1);
        for (const auto& e : final_snap.edges) {
            t.pairs.push_back(e);
            t.labels.push_back(1);
        }
        size_t wanted = final_snap.edges.size();
        size_t guard = 0;
        while (wanted > 0 && guard++ < 100000) {
            int a = pick(rng), b = pick(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (existing.count({a, b})) continue;
            existing.insert({a, b});
            t.pairs.push_back({a, b});
            t.labels.push_back(0);
            --wanted;
        }
    }
    if (t.labels.empty()) throw ValidationError("window has no labeled targets");
    t.y = Mat::Zero(static_cast<Eigen::Index>(t.labels.size()), num_classes);
    for (size_t i = 0; i < t.labels.size(); ++i) {
        if (t.labels[i] >= num_classes) throw ValidationError("label exceeds num_classes");
        t.y(static_cast<Eigen::Index>(i), t.labels[i]) = 1.0;
    }
    return t;
}

Mat plain_logits(const EncoderParams& params, const WindowInput& input,
                 const WindowTargets& targets) {
    EmbeddingState emb = encode_window(input, params.init, params.cells);
    if (params.head.kind == HeadKind::node_classification)
        return apply_head(emb.final_embedding, params.head, targets.nodes);
    return apply_head(emb.final_embedding, params.head, targets.pairs);
}

// --- taped forward -------------------------------------------------------

struct LayerIds {
    int w0, wz, uz, bz, wr, ur, br, wh, uh, bh, q;
};
struct ParamIds {
    std::vector<LayerIds> layers;
    int head = -1;

    std::vector<int> all() const {
        std::vector<int> out;
        for (const auto& l : layers)
            for (int id : {l.w0, l.wz, l.uz, l.bz, l.wr, l.ur, l.br, l.wh, l.uh, l.bh, l.q})
                out.push_back(id);
        out.push_back(head);
        return out;
    }
};

ParamIds register_params(Tape& tape, const EncoderParams& params) {
    ParamIds ids;
    for (size_t l = 0; l < params.cells.size(); ++l) {
        const GruCell& c = params.cells[l];
        LayerIds li;
        li.w0 = tape.input(params.init.layers[l], true);
        li.wz = tape.input(c.wz, true);
        li.uz = tape.input(c.uz, true);
        li.bz = tape.input(c.bz, true);
        li.wr = tape.input(c.wr, true);
        li.ur = tape.input(c.ur, true);
        li.br = tape.input(c.br, true);
        li.wh = tape.input(c.wh, true);
        li.uh = tape.input(c.uh, true);
        li.bh = tape.input(c.bh, true);
        li.q = tape.input(c.q, true);
        ids.layers.push_back(li);
    }
    ids.head = tape.input(params.head.weight, true);
    return ids;
}

int taped_evolve(Tape& tape, int z_prev, int w_prev, const LayerIds& l, int d_out) {
    int x = tape.topk_summary(z_prev, l.q, d_out);  // d_in x d_out
    int z = tape.sigmoid(tape.add(tape.add(tape.matmul(l.wz, x), tape.matmul(l.uz, w_prev)), l.bz));
    int r = tape.sigmoid(tape.add(tape.add(tape.matmul(l.wr, x), tape.matmul(l.ur, w_prev)), l.br));
    int cand = tape.tanh_op(tape.add(
        tape.add(tape.matmul(l.wh, x), tape.matmul(l.uh, tape.hadamard(r, w_prev))), l.bh));
    return tape.add(tape.hadamard(tape.one_minus(z), w_prev), tape.hadamard(z, cand));
}

int taped_logits(Tape& tape, const ParamIds& ids, const EncoderParams& params,
                 const WindowInput& input, const WindowTargets& targets) {
    const size_t num_layers = ids.layers.size();
    std::vector<int> weights(num_layers);
    for (size_t l = 0; l < num_layers; ++l) weights[l] = ids.layers[l].w0;
    int z_final = -1;
    for (const EncoderInput& step : input) {
        int p = tape.input(step.propagation);
        int z = tape.input(step.features);
        for (size_t l = 0; l < num_layers; ++l) {
            const int d_out = static_cast<int>(params.init.layers[l].cols());
            weights[l] = taped_evolve(tape, z, weights[l], ids.layers[l], d_out);
            int pre = tape.matmul(tape.matmul(p, z), weights[l]);
            z = l + 1 == num_layers ? pre : tape.relu(pre);
        }
        z_final = z;
    }
    if (params.head.kind == HeadKind::node_classification)
        return tape.matmul(tape.row_gather(z_final, targets.nodes), ids.head);
    std::vector<int> firsts, seconds;
    for (auto [a, b] : targets.pairs) {
        firsts.push_back(a);
        seconds.push_back(b);
    }
    int za = tape.row_gather(z_final, firsts);
    int zb = tape.row_gather(z_final, seconds);
    int fwd = tape.matmul(tape.hconcat(za, zb), ids.head);
    int rev = tape.matmul(tape.hconcat(zb, za), ids.head);
    return tape.scale(tape.add(fwd, rev), 0.5);
}

double validation_id_loss(const EncoderParams& params, const ExperimentConfig& cfg,
                          const DynamicGraphSequence& seq, int val_begin, int val_end) {
    double total = 0.0;
    int count = 0;
    for (int start = val_begin; start + cfg.delta_t <= val_end; ++start) {
        SnapshotWindow w = window(seq, start, cfg.delta_t);
        WindowTargets t = make_targets(w.snapshots.back(), cfg.head_kind(), seq.num_classes,
                                       cfg.seed ^ static_cast<std::uint64_t>(start));
        Mat logits = plain_logits(params, window_input(w), t);
        std::vector<LossSample> batch;
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            LossSample s;
            s.alpha = collect_evidence(logits.row(i).transpose(), cfg.logit_clamp).array() + 1.0;
            s.y = t.y.row(i).transpose();
            batch.push_back(std::move(s));
        }
        LossBreakdown lb = total_loss(batch, cfg.rho1, 0.0);
        total += cfg.ce_weight * lb.ce_edl + cfg.rho1 * lb.kl;
        ++count;
    }
    return count > 0 ? total / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TrainingState train(const ExperimentConfig& cfg, const DynamicGraphSequence& data) {
    cfg.validate();
    data.validate();
    const Splits splits = resolve_splits(cfg, data.total_timesteps());
    const HeadKind kind = cfg.head_kind();
    const int num_classes = kind == HeadKind::link_prediction ? 2 : data.num_classes;
    if (num_classes < 2) throw ValidationError("need at least 2 classes");

    std::vector<int> dims{data.feature_dim};
    for (int l = 0; l < cfg.layers; ++l) dims.push_back(cfg.hidden_dim);

    TrainingState state;
    state.params = init_params(dims, num_classes, kind, cfg.seed);

    // precompute per-window inputs, targets, and spectral negatives
    struct TrainWindow {
        WindowInput orig;
        WindowInput neg;
        WindowTargets targets;
    };
    std::vector<TrainWindow> train_windows;
    SpectralCache cache;
    for (int start = 0; start + cfg.delta_t <= splits.train; ++start) {
        SnapshotWindow w = window(data, start, cfg.delta_t);
        TrainWindow tw;
        tw.orig = window_input(w);
        if (cfg.rho2 > 0.0) tw.neg = negative_window(w, cfg.preserve_ratio, cfg.aug(), &cache);
        tw.targets = make_targets(w.snapshots.back(), kind, num_classes,
                                  cfg.seed ^ static_cast<std::uint64_t>(start));
        train_windows.push_back(std::move(tw));
    }
    if (train_windows.empty()) throw ValidationError("no training windows");

    // a start where every logit clips to zero evidence has no gradient and can
    // never recover; redraw the init deterministically until evidence flows
    for (std::uint64_t attempt = 1; attempt <= 32; ++attempt) {
        bool live = false;
        for (const TrainWindow& tw : train_windows)
            if ((plain_logits(state.params, tw.orig, tw.targets).array() > 0.0).any()) {
                live = true;
                break;
            }
        if (live) break;
        state.params =
            init_params(dims, num_classes, kind, cfg.seed + attempt * 0x9e3779b97f4a7c15ULL);
    }

    auto named = state.params.named_tensors();
    std::vector<Mat> velocity(named.size());
    for (size_t i = 0; i < named.size(); ++i)
        velocity[i] = Mat::Zero(named[i].second->rows(), named[i].second->cols());

    const int val_begin = splits.train;
    const int val_end = splits.train + splits.val;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double rho1_eff =
            cfg.kl_warmup_epochs > 0
                ? cfg.rho1 * std::min(1.0, static_cast<double>(epoch + 1) / cfg.kl_warmup_epochs)
                : cfg.rho1;
        LossBreakdown epoch_loss;
        epoch_loss.rho1 = rho1_eff;
        epoch_loss.rho2 = cfg.rho2;
        for (size_t wi = 0; wi < train_windows.size(); ++wi) {
            const TrainWindow& tw = train_windows[wi];
            Tape tape;
            ParamIds ids = register_params(tape, state.params);
            int logits = taped_logits(tape, ids, state.params, tw.orig, tw.targets);
            int ce = tape.ce_mean(logits, tw.targets.y, cfg.logit_clamp);
            int kl = tape.kl_mean(logits, tw.targets.y, cfg.logit_clamp);
            int total;
            double cl_value = 0.0;
            if (cfg.rho2 > 0.0) {
                int logits_neg = taped_logits(tape, ids, state.params, tw.neg, tw.targets);
                int cl = tape.contrastive_mean(logits, logits_neg, cfg.logit_clamp);
                cl_value = tape.scalar(cl);
                total = tape.linear_combination({ce, kl, cl}, {cfg.ce_weight, rho1_eff, cfg.rho2});
            } else {
                total = tape.linear_combination({ce, kl}, {cfg.ce_weight, rho1_eff});
            }
            const double total_value = tape.scalar(total);
            if (!std::isfinite(total_value))
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", window " + std::to_string(wi) +
                                   " (ce=" + std::to_string(tape.scalar(ce)) +
                                   ", kl=" + std::to_string(tape.scalar(kl)) + ")");
            tape.backward(total);
            std::vector<int> param_ids = ids.all();
            for (size_t i = 0; i < named.size(); ++i) {
                const Mat& g = tape.grad(param_ids[i]);
                if (cfg.momentum > 0.0) {
                    velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g;
                    *named[i].second += velocity[i];
                } else {
                    *named[i].second -= cfg.learning_rate * g;
                }
            }
            epoch_loss.ce_edl += tape.scalar(ce);
            epoch_loss.kl += tape.scalar(kl);
            epoch_loss.cl += cl_value;
        }
        const double inv = 1.0 / static_cast<double>(train_windows.size());
        epoch_loss.ce_edl *= inv;
        epoch_loss.kl *= inv;
        epoch_loss.cl *= inv;
        epoch_loss.total = cfg.ce_weight * epoch_loss.ce_edl + rho1_eff * epoch_loss.kl +
                           cfg.rho2 * epoch_loss.cl;
        state.history.push_back(epoch_loss);

        if (splits.val >= cfg.delta_t) {
            const double vl = validation_id_loss(state.params, cfg, data, val_begin, val_end);
            if (vl < state.best_val_loss) {
                state.best_val_loss = vl;
                state.best_epoch = epoch;
                state.best_params = state.params;
            }
        }
    }
    if (state.best_epoch < 0) state.best_params = state.params;
    return state;
}

std::vector<double> window_scores(const EncoderParams& params, const ExperimentConfig& cfg,
                                  const DynamicGraphSequence& seq) {
    std::vector<double> scores;
    const HeadKind kind = params.head.kind;
    for (int start = 0; start + cfg.delta_t <= seq.total_timesteps(); ++start) {
        SnapshotWindow w = window(seq, start, cfg.delta_t);
        WindowTargets t = make_targets(w.snapshots.back(), kind, seq.num_classes,
                                       cfg.seed ^ static_cast<std::uint64_t>(start));
        Mat logits = plain_logits(params, window_input(w), t);
        std::vector<double> us;
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            DirichletOpinion op =
                to_opinion(collect_evidence(logits.row(i).transpose(), cfg.logit_clamp));
            us.push_back(op.uncertainty());
        }
        scores.push_back(aggregate_window_score(us, cfg.agg()));
    }
    return scores;
}

EvaluationResult evaluate(const TrainingState& state, const ExperimentConfig& cfg,
                          const DynamicGraphSequence& id_test,
                          const DynamicGraphSequence& ood_test) {
    if (id_test.snapshots.empty() || ood_test.snapshots.empty())
        throw ValidationError("evaluate: empty test set");
    const EncoderParams& params = state.best_params;
    const HeadKind kind = params.head.kind;

    EvaluationResult result;
    std::vector<double> id_msp, ood_msp, id_ent, ood_ent;
    std::vector<int> predictions, labels;

    auto score_sequence = [&](const DynamicGraphSequence& seq, bool is_id) {
        for (int start = 0; start + cfg.delta_t <= seq.total_timesteps(); ++start) {
            SnapshotWindow w = window(seq, start, cfg.delta_t);
            WindowTargets t = make_targets(w.snapshots.back(), kind, seq.num_classes,
                                           cfg.seed ^ static_cast<std::uint64_t>(start));
            Mat logits = plain_logits(params, window_input(w), t);
            std::vector<double> us;
            for (Eigen::Index i = 0; i < logits.rows(); ++i) {
                DirichletOpinion op =
                    to_opinion(collect_evidence(logits.row(i).transpose(), cfg.logit_clamp));
                us.push_back(op.uncertainty());
                if (is_id) {
                    Eigen::Index pred;
                    expected_probability(op).maxCoeff(&pred);
                    predictions.push_back(static_cast<int>(pred));
                    labels.push_back(t.labels[i]);
                }
            }
            auto msp = baseline_scores(logits, BaselineKind::msp);
            auto ent = baseline_scores(logits, BaselineKind::entropy);
            const double u_score = aggregate_window_score(us, cfg.agg());
            const double m_score = aggregate_window_score(msp, cfg.agg());
            const double e_score = aggregate_window_score(ent, cfg.agg());
            (is_id ? result.id_scores : result.ood_scores).push_back(u_score);
            (is_id ? id_msp : ood_msp).push_back(m_score);
            (is_id ? id_ent : ood_ent).push_back(e_score);
        }
    };
    score_sequence(id_test, true);
    score_sequence(ood_test, false);
    if (result.id_scores.empty() || result.ood_scores.empty())
        throw ValidationError("evaluate: test sequence shorter than delta_t");

    const double task_f1 = f1(predictions, labels);
    auto report = [&](const std::vector<double>& id, const std::vector<double>& ood) {
        MetricsReport r;
        r.auroc = auroc(id, ood);
        r.aupr = aupr(id, ood);
        r.fpr95 = fpr95(id, ood);
        r.f1 = task_f1;
        r.num_id = static_cast<int>(id.size());
        r.num_ood = static_cast<int>(ood.size());
        return r;
    };
    result.evisec = report(result.id_scores, result.ood_scores);
    result.msp = report(id_msp, ood_msp);
    result.entropy = report(id_ent, ood_ent);
    return result;
}

void write_losses_csv(std::ostream& out, const std::vector<LossBreakdown>& history) {
    out << "epoch,ce_edl,kl,cl,total\n";
    out << std::hexfloat;
    for (size_t e = 0; e < history.size(); ++e)
        out << e << "," << history[e].ce_edl << "," << history[e].kl << "," << history[e].cl
            << "," << history[e].total << "\n";
}

void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const TrainingState& state, const EvaluationResult& result) {
    std::filesystem::create_directories(dir);
    save_config(cfg, dir / "config-resolved");
    {
        std::ofstream out(dir / "losses.csv");
        write_losses_csv(out, state.history);
    }
    {
        std::ofstream out(dir / "scores_id.csv");
        write_scores_csv(out, result.id_scores);
    }
    {
        std::ofstream out(dir / "scores_ood.csv");
        write_scores_csv(out, result.ood_scores);
    }
    {
        std::ofstream out(dir / "curves.csv");
        write_curve_csv(out, detection_curve(result.id_scores, result.ood_scores));
    }
    {
        std::ofstream out(dir / "metrics.txt");
        out.precision(17);
        auto emit = [&](const std::string& prefix, const MetricsReport& r) {
            out << prefix << "auroc=" << r.auroc << "\n";
            out << prefix << "aupr=" << r.aupr << "\n";
            out << prefix << "fpr95=" << r.fpr95 << "\n";
            out << prefix << "f1=" << r.f1 << "\n";
            out << prefix << "num_id=" << r.num_id << "\n";
            out << prefix << "num_ood=" << r.num_ood << "\n";
        };
        emit("", result.evisec);
        emit("baseline_msp_", result.msp);
        emit("baseline_entropy_", result.entropy);
    }
    save_checkpoint(state.best_params, config_hash(cfg), dir / "checkpoint");
}

void save_checkpoint(const EncoderParams& params, std::uint64_t cfg_hash,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["format"] = "evisec-checkpoint";
    manifest["config_hash"] = cfg_hash;
    manifest["head_kind"] = static_cast<int>(params.head.kind);
    manifest["num_layers"] = params.cells.size();
    std::vector<json> tensors;
    std::ofstream tf(dir / "tensors.txt");
    tf << std::hexfloat;
    for (const auto& [name, m] : params.named_tensors()) {
        tensors.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
        tf << name;
        for (Eigen::Index i = 0; i < m->rows(); ++i)
            for (Eigen::Index j = 0; j < m->cols(); ++j) tf << " " << (*m)(i, j);
        tf << "\n";
    }
    manifest["tensors"] = tensors;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

EncoderParams load_checkpoint(const std::filesystem::path& dir,
                              std::uint64_t expected_cfg_hash) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ValidationError("no checkpoint manifest in " + dir.string());
    json manifest = json::parse(mf);
    if (manifest.value("schema_version", 0) != 1)
        throw ValidationError("unsupported checkpoint schema_version");
    if (expected_cfg_hash != 0 &&
        manifest.value("config_hash", std::uint64_t{0}) != expected_cfg_hash)
        throw ValidationError("checkpoint config hash mismatch");

    const size_t num_layers = manifest["num_layers"];
    EncoderParams params;
    params.head.kind = static_cast<HeadKind>(manifest.value("head_kind", 0));
    params.init.layers.resize(num_layers);
    params.cells.resize(num_layers);

    std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> shapes;
    for (const auto& t : manifest["tensors"])
        shapes[t["name"]] = {t["rows"], t["cols"]};

    auto tensor_refs = params.named_tensors();
    std::map<std::string, Mat*> by_name(tensor_refs.begin(), tensor_refs.end());

    std::ifstream tf(dir / "tensors.txt");
    std::string line;
    while (std::getline(tf, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name;
        ss >> name;
        auto sit = shapes.find(name);
        auto nit = by_name.find(name);
        if (sit == shapes.end() || nit == by_name.end())
            throw ValidationError("unexpected tensor '" + name + "' in checkpoint");
        Mat m(sit->second.first, sit->second.second);
        std::string tok;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (!(ss >> tok)) throw ValidationError("truncated tensor '" + name + "'");
                m(i, j) = std::strtod(tok.c_str(), nullptr);
            }
        *nit->second = std::move(m);
    }
    for (const auto& [name, m] : params.named_tensors())
        if (m->size() == 0) throw ValidationError("checkpoint missing tensor '" + name + "'");
    return params;
}

}  // namespace evisec

#pragma once

#include <filesystem>
#include <limits>
#include <vector>

#include "evisec/encoder.hpp"
#include "evisec/graph.hpp"
#include "evisec/losses.hpp"
#include "evisec/metrics.hpp"
#include "evisec/oodgen.hpp"
#include "evisec/spectral.hpp"

namespace evisec {

struct ExperimentConfig {
    int schema_version = 1;
    std::string task = "node-classification";
    int layers = 2;
    int hidden_dim = 32;
    int delta_t = 3;
    int epochs = 100;
    double learning_rate = 0.01;
    double momentum = 0.0;
    std::uint64_t seed = 1;
    double ce_weight = 1.0;  // ablation hook; 1.0 in the full model
    double rho1 = 0.6;
    double rho2 = 0.8;
    double preserve_ratio = 0.3;  // r
    double gamma = 0.5;
    double logit_clamp = 10.0;
    int kl_warmup_epochs = 0;  // 0 = fixed rho1
    std::string aggregation = "mean";     // mean | max
    std::string augment_mode = "verbatim";  // verbatim | weighted
    std::string ood_kind = "sm";          // sm | fi
    int train_timesteps = -1;  // -1 = auto split
    int val_timesteps = -1;
    int test_timesteps = -1;
    std::string data_path;
    std::string out_dir;
    SBMSpec sm;
    FISpec fi;

    HeadKind head_kind() const;
    Aggregation agg() const;
    AugmentMode aug() const;
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct Splits {
    int train = 0, val = 0, test = 0;
};
Splits resolve_splits(const ExperimentConfig& cfg, int total_timesteps);

struct TrainingState {
    EncoderParams params;       // parameters after the last epoch
    EncoderParams best_params;  // selected by validation ID loss
    double best_val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    std::vector<LossBreakdown> history;  // one entry per epoch
};

TrainingState train(const ExperimentConfig& cfg, const DynamicGraphSequence& data);

struct EvaluationResult {
    MetricsReport evisec;  // uncertainty score
    MetricsReport msp;
    MetricsReport entropy;
    std::vector<double> id_scores, ood_scores;  // uncertainty, per window
};

EvaluationResult evaluate(const TrainingState& state, const ExperimentConfig& cfg,
                          const DynamicGraphSequence& id_test,
                          const DynamicGraphSequence& ood_test);

// score every stride-1 window of a sequence by aggregated uncertainty
std::vector<double> window_scores(const EncoderParams& params, const ExperimentConfig& cfg,
                                  const DynamicGraphSequence& seq);

void write_losses_csv(std::ostream& out, const std::vector<LossBreakdown>& history);
void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const TrainingState& state, const EvaluationResult& result);

void save_checkpoint(const EncoderParams& params, std::uint64_t cfg_hash,
                     const std::filesystem::path& dir);
EncoderParams load_checkpoint(const std::filesystem::path& dir,
                              std::uint64_t expected_cfg_hash = 0);

}  // namespace evisec

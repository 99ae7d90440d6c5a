#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semsum/dataset.hpp"
#include "semsum/discriminator.hpp"
#include "semsum/evaluator.hpp"
#include "semsum/generator.hpp"
#include "semsum/losses.hpp"
#include "semsum/selector.hpp"

namespace semsum {

struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    int d_v = 1024;
    int d_s = 512;
    int d_c = 128;
    int selector_hidden = 256;
    int discriminator_hidden = 256;
    int d_m = 256;
    int heads = 4;
    int d_f = 512;
    int layers = 2;
    double dropout = 0.1;
    ScoreMode fssa_mode = ScoreMode::Fused;
    bool multimodal = true;
    bool transformer_generator = true;  // false swaps in the 0-layer linear generator
};

struct TrainConfig {
    double lr_discriminator = 0.001;
    double lr_other = 0.002;
    int epochs = 50;
    double clip_norm = 5.0;
    LossWeights weights;
    bool adversarial = true;  // pure-reconstruction ablation when false
    long seed = 0;
    double budget_ratio = 0.15;
    Protocol protocol = Protocol::MaxUser;
};

class AdamState {
public:
    void step(ParamSet& params, double lr, double clip_norm);
    const Eigen::VectorXd& m() const { return m_; }
    const Eigen::VectorXd& v() const { return v_; }
    long t() const { return t_; }
    void restore(Eigen::VectorXd m, Eigen::VectorXd v, long t);

private:
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

// All three components plus optimizer state; owns the parameters the trainer
// mutates.
struct ModelState {
    ModelConfig config;
    std::unique_ptr<Selector> selector;
    std::unique_ptr<Generator> generator;
    std::unique_ptr<Discriminator> discriminator;
    AdamState opt_selector, opt_generator, opt_discriminator;
    int epoch = 0;
    long seed = 0;

    static ModelState init(const ModelConfig& cfg, long seed);
    ScoreSequence score_video(const VideoRecord& rec) const;
};

struct EpochMetrics {
    int epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double rec = 0.0;
    double sparsity = 0.0;
};

class Trainer {
public:
    Trainer(ModelState& state, const TrainConfig& cfg);

    double stage1_update_discriminator(const VideoRecord& rec);
    double stage2_update_selector(const VideoRecord& rec);
    double stage3_update_selector_generator(const VideoRecord& rec);
    EpochMetrics train_epoch(const DatasetBundle& bundle,
                             const std::vector<std::string>& train_ids);

private:
    struct Forward {
        ad::Var scores;
        ad::Var x, t;          // originals (constants)
        ad::Var x_hat, t_hat;  // reconstructions
    };
    Forward forward_pass(const VideoRecord& rec, bool training);
    void check_finite(double loss, const char* stage) const;

    ModelState& state_;
    TrainConfig cfg_;
    std::mt19937_64 rng_;
};

struct FitResult {
    std::vector<EpochMetrics> history;
    std::vector<double> test_f1_per_epoch;
    int best_epoch = 0;
    double best_f1 = 0.0;
};

EvalReport evaluate_split(const ModelState& state, const DatasetBundle& bundle,
                          const std::vector<std::string>& test_ids, Protocol protocol,
                          double budget_ratio);

// Trains for cfg.epochs, evaluating the test split each epoch; `state` holds
// the best-F1 parameters on return.
FitResult fit(ModelState& state, const DatasetBundle& bundle, const SplitSpec& split,
              const TrainConfig& cfg, std::ostream* log = nullptr);

void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace semsum

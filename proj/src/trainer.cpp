#include "semsum/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>

namespace semsum {

using namespace ad;

void AdamState::step(ParamSet& params, double lr, double clip_norm) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    Eigen::VectorXd g = params.flatten_grads();
    if (clip_norm > 0.0) {
        double norm = g.norm();
        if (norm > clip_norm) g *= clip_norm / norm;
    }
    if (t_ == 0) {
        m_ = Eigen::VectorXd::Zero(g.size());
        v_ = Eigen::VectorXd::Zero(g.size());
    }
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * g;
    v_ = kBeta2 * v_ + (1.0 - kBeta2) * g.cwiseAbs2();
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    Eigen::VectorXd update =
        (m_ / bc1).cwiseQuotient(((v_ / bc2).cwiseSqrt().array() + kEps).matrix());
    params.assign_values(params.flatten_values() - lr * update);
    if (!params.flatten_values().allFinite())
        throw TrainingDivergence("non-finite parameter after optimizer step");
}

void AdamState::restore(Eigen::VectorXd m, Eigen::VectorXd v, long t) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

ModelState ModelState::init(const ModelConfig& cfg, long seed) {
    ModelState s;
    s.config = cfg;
    s.seed = seed;
    std::mt19937_64 rng(static_cast<uint64_t>(seed) ^ 0xA5A5A5A5DEADBEEFull);
    SelectorConfig sel;
    sel.d_v = cfg.d_v;
    sel.d_s = cfg.d_s;
    sel.d_c = cfg.d_c;
    sel.hidden = cfg.selector_hidden;
    sel.mode = cfg.fssa_mode;
    sel.use_semantic = cfg.multimodal;
    s.selector = std::make_unique<Selector>(sel, rng);
    GeneratorConfig gen;
    gen.d_v = cfg.d_v;
    gen.d_s = cfg.d_s;
    gen.d_m = cfg.d_m;
    gen.heads = cfg.heads;
    gen.d_f = cfg.d_f;
    gen.layers = cfg.transformer_generator ? cfg.layers : 0;
    gen.dropout = cfg.dropout;
    s.generator = std::make_unique<Generator>(gen, rng);
    DiscriminatorConfig dis;
    dis.d_v = cfg.d_v;
    dis.d_s = cfg.d_s;
    dis.hidden = cfg.discriminator_hidden;
    s.discriminator = std::make_unique<Discriminator>(dis, rng);
    return s;
}

ScoreSequence ModelState::score_video(const VideoRecord& rec) const {
    return selector->select(rec.visual, rec.semantic);
}

Trainer::Trainer(ModelState& state, const TrainConfig& cfg)
    : state_(state), cfg_(cfg), rng_(static_cast<uint64_t>(cfg.seed) + 0x5151u) {}

Trainer::Forward Trainer::forward_pass(const VideoRecord& rec, bool training) {
    Forward f;
    f.x = constant(rec.visual);
    f.t = constant(state_.config.multimodal
                       ? rec.semantic
                       : Mat(Mat::Zero(rec.semantic.rows(), rec.semantic.cols())));
    f.scores = state_.selector->forward(f.x, f.t);
    Var wx = weight_rows(f.x, f.scores);
    Var wt = weight_rows(f.t, f.scores);
    auto out = state_.generator->reconstruct(wx, wt, training, &rng_);
    f.x_hat = out.visual;
    f.t_hat = out.semantic;
    return f;
}

void Trainer::check_finite(double loss, const char* stage) const {
    if (!std::isfinite(loss))
        throw TrainingDivergence(std::string("non-finite loss in ") + stage);
}

double Trainer::stage1_update_discriminator(const VideoRecord& rec) {
    Forward f = forward_pass(rec, true);
    Var p_real = state_.discriminator->forward(f.x, f.t);
    Var p_fake = state_.discriminator->forward(f.x_hat, f.t_hat);
    auto [d_loss, g_loss] = adversarial_losses(p_real, p_fake);
    check_finite(d_loss->scalar(), "stage 1");
    state_.selector->params().zero_grad();
    state_.generator->params().zero_grad();
    state_.discriminator->params().zero_grad();
    backward(d_loss);
    state_.opt_discriminator.step(state_.discriminator->params(),
                                  cfg_.lr_discriminator, cfg_.clip_norm);
    return d_loss->scalar();
}

double Trainer::stage2_update_selector(const VideoRecord& rec) {
    Forward f = forward_pass(rec, true);
    Var semantic_mse = mean_all(square(sub(f.t, f.t_hat)));
    Var loss = add(scale(semantic_mse, cfg_.weights.nu),
                   sparsity_loss(f.scores, cfg_.weights));
    check_finite(loss->scalar(), "stage 2");
    state_.selector->params().zero_grad();
    state_.generator->params().zero_grad();
    state_.discriminator->params().zero_grad();
    backward(loss);
    state_.opt_selector.step(state_.selector->params(), cfg_.lr_other, cfg_.clip_norm);
    return loss->scalar();
}

double Trainer::stage3_update_selector_generator(const VideoRecord& rec) {
    Forward f = forward_pass(rec, true);
    Var rec_loss = reconstruction_loss(f.x, f.x_hat, f.t, f.t_hat, cfg_.weights);
    Var loss = total_loss(rec_loss, sparsity_loss(f.scores, cfg_.weights));
    if (cfg_.adversarial) {
        Var p_fake = state_.discriminator->forward(f.x_hat, f.t_hat);
        auto [d_loss, g_loss] = adversarial_losses(constant(0.5), p_fake);
        loss = add(loss, scale(g_loss, cfg_.weights.g_adv));
    }
    check_finite(loss->scalar(), "stage 3");
    state_.selector->params().zero_grad();
    state_.generator->params().zero_grad();
    state_.discriminator->params().zero_grad();
    backward(loss);
    state_.opt_selector.step(state_.selector->params(), cfg_.lr_other, cfg_.clip_norm);
    state_.opt_generator.step(state_.generator->params(), cfg_.lr_other,
                              cfg_.clip_norm);
    return loss->scalar();
}

EpochMetrics Trainer::train_epoch(const DatasetBundle& bundle,
                                  const std::vector<std::string>& train_ids) {
    if (train_ids.empty())
        throw std::invalid_argument("train_epoch: empty train split");
    std::vector<std::string> order = train_ids;
    for (size_t i = order.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<size_t> pick(0, i);
        std::swap(order[i], order[pick(rng_)]);
    }
    EpochMetrics m;
    m.epoch = ++state_.epoch;
    for (const auto& id : order) {
        const VideoRecord& rec = bundle.find(id);
        m.d_loss += stage1_update_discriminator(rec);
        stage2_update_selector(rec);
        stage3_update_selector_generator(rec);
        // post-update metrics from a clean eval-mode pass
        Forward f = forward_pass(rec, false);
        m.rec += reconstruction_loss(f.x, f.x_hat, f.t, f.t_hat, cfg_.weights)->scalar();
        m.sparsity += sparsity_loss(f.scores, cfg_.weights)->scalar();
        if (cfg_.adversarial) {
            double p_fake =
                state_.discriminator->forward(f.x_hat, f.t_hat)->scalar();
            m.g_loss += adversarial_losses(0.5, p_fake).second;
        }
    }
    const double n = static_cast<double>(order.size());
    m.d_loss /= n;
    m.g_loss /= n;
    m.rec /= n;
    m.sparsity /= n;
    return m;
}

EvalReport evaluate_split(const ModelState& state, const DatasetBundle& bundle,
                          const std::vector<std::string>& test_ids, Protocol protocol,
                          double budget_ratio) {
    if (test_ids.empty())
        throw std::invalid_argument("evaluate_split: empty test split");
    EvalReport report;
    report.protocol = protocol;
    double sum = 0.0;
    for (const auto& id : test_ids) {
        const VideoRecord& rec = bundle.find(id);
        ScoreSequence scores = state.score_video(rec);
        SummaryMask mask = build_summary(rec, scores, budget_ratio);
        double f1 = evaluate_video(mask, rec, protocol, budget_ratio);
        report.video_ids.push_back(id);
        report.per_video_f1.push_back(f1);
        sum += f1;
    }
    report.aggregate_f1 = sum / static_cast<double>(test_ids.size());
    return report;
}

namespace {

struct Snapshot {
    Eigen::VectorXd sel, gen, dis;
};

Snapshot take_snapshot(const ModelState& s) {
    return {s.selector->params().flatten_values(), s.generator->params().flatten_values(),
            s.discriminator->params().flatten_values()};
}

void restore_snapshot(ModelState& s, const Snapshot& snap) {
    s.selector->params().assign_values(snap.sel);
    s.generator->params().assign_values(snap.gen);
    s.discriminator->params().assign_values(snap.dis);
}

}  // namespace

FitResult fit(ModelState& state, const DatasetBundle& bundle, const SplitSpec& split,
              const TrainConfig& cfg, std::ostream* log) {
    Trainer trainer(state, cfg);
    FitResult result;
    result.best_f1 = -1.0;
    Snapshot best = take_snapshot(state);
    int best_epoch = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        EpochMetrics m = trainer.train_epoch(bundle, split.train_ids);
        EvalReport report =
            evaluate_split(state, bundle, split.test_ids, cfg.protocol,
                           cfg.budget_ratio);
        result.history.push_back(m);
        result.test_f1_per_epoch.push_back(report.aggregate_f1);
        if (report.aggregate_f1 > result.best_f1) {
            result.best_f1 = report.aggregate_f1;
            best = take_snapshot(state);
            best_epoch = state.epoch;
        }
        if (log) {
            nlohmann::json line = {{"epoch", m.epoch},
                                   {"d_loss", m.d_loss},
                                   {"g_loss", m.g_loss},
                                   {"rec", m.rec},
                                   {"sparsity", m.sparsity},
                                   {"test_f1", report.aggregate_f1}};
            (*log) << line.dump() << "\n";
        }
    }
    restore_snapshot(state, best);
    state.epoch = best_epoch;
    result.best_epoch = best_epoch;
    return result;
}

namespace {

constexpr char kMagic[] = "SEMSUM-CKPT-v1";

void write_vec(std::ostream& out, const Eigen::VectorXd& v) {
    int64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
}

Eigen::VectorXd read_vec(std::istream& in) {
    int64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    Eigen::VectorXd v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

void write_i64(std::ostream& out, int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

int64_t read_i64(std::istream& in) {
    int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_adam(std::ostream& out, const AdamState& a) {
    write_i64(out, a.t());
    write_vec(out, a.t() > 0 ? a.m() : Eigen::VectorXd());
    write_vec(out, a.t() > 0 ? a.v() : Eigen::VectorXd());
}

void read_adam(std::istream& in, AdamState& a) {
    int64_t t = read_i64(in);
    Eigen::VectorXd m = read_vec(in);
    Eigen::VectorXd v = read_vec(in);
    a.restore(std::move(m), std::move(v), t);
}

}  // namespace

void save_checkpoint(const ModelState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic) - 1);
    const ModelConfig& c = state.config;
    for (int64_t v : {static_cast<int64_t>(c.d_v), static_cast<int64_t>(c.d_s),
                      static_cast<int64_t>(c.d_c), static_cast<int64_t>(c.selector_hidden),
                      static_cast<int64_t>(c.discriminator_hidden),
                      static_cast<int64_t>(c.d_m), static_cast<int64_t>(c.heads),
                      static_cast<int64_t>(c.d_f), static_cast<int64_t>(c.layers),
                      static_cast<int64_t>(c.fssa_mode),
                      static_cast<int64_t>(c.multimodal),
                      static_cast<int64_t>(c.transformer_generator)})
        write_i64(out, v);
    write_f64(out, c.dropout);
    write_i64(out, state.seed);
    write_i64(out, state.epoch);
    write_vec(out, state.selector->params().flatten_values());
    write_vec(out, state.generator->params().flatten_values());
    write_vec(out, state.discriminator->params().flatten_values());
    write_adam(out, state.opt_selector);
    write_adam(out, state.opt_generator);
    write_adam(out, state.opt_discriminator);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read checkpoint: " + path);
    char magic[sizeof(kMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, sizeof(magic)) != kMagic)
        throw std::invalid_argument("bad checkpoint magic in " + path);
    ModelConfig c;
    c.d_v = static_cast<int>(read_i64(in));
    c.d_s = static_cast<int>(read_i64(in));
    c.d_c = static_cast<int>(read_i64(in));
    c.selector_hidden = static_cast<int>(read_i64(in));
    c.discriminator_hidden = static_cast<int>(read_i64(in));
    c.d_m = static_cast<int>(read_i64(in));
    c.heads = static_cast<int>(read_i64(in));
    c.d_f = static_cast<int>(read_i64(in));
    c.layers = static_cast<int>(read_i64(in));
    c.fssa_mode = static_cast<ScoreMode>(read_i64(in));
    c.multimodal = read_i64(in) != 0;
    c.transformer_generator = read_i64(in) != 0;
    c.dropout = read_f64(in);
    long seed = read_i64(in);
    long epoch = read_i64(in);
    ModelState state = ModelState::init(c, seed);
    state.epoch = static_cast<int>(epoch);
    state.selector->params().assign_values(read_vec(in));
    state.generator->params().assign_values(read_vec(in));
    state.discriminator->params().assign_values(read_vec(in));
    read_adam(in, state.opt_selector);
    read_adam(in, state.opt_generator);
    read_adam(in, state.opt_discriminator);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return state;
}

}  // namespace semsum

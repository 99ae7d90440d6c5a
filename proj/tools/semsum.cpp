#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "semsum/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semsum;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string out_dir_or(const std::string& configured) {
    if (const char* env = std::getenv("SEMSUM_OUT")) return env;
    return configured;
}

json mask_to_json(const std::string& video_id, const SummaryMask& mask) {
    json rle = json::array();
    long i = 0;
    const long n = mask.mask.size();
    while (i < n) {
        if (mask.mask(i)) {
            long start = i;
            while (i < n && mask.mask(i)) ++i;
            rle.push_back({start, i - start});
        } else {
            ++i;
        }
    }
    return {{"video_id", video_id},
            {"n_frames", n},
            {"selected_shots", mask.selected_shots},
            {"mask_rle", rle}};
}

struct RunConfig {
    std::string dataset;
    std::string out_dir = "out";
    int n_runs = 5;
    ModelConfig model;
    TrainConfig train;
};

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    in >> j;
    RunConfig c;
    c.dataset = j.at("dataset").get<std::string>();
    c.out_dir = j.value("out_dir", c.out_dir);
    c.n_runs = j.value("n_runs", c.n_runs);
    c.train.seed = j.value("seed", 0L);
    c.train.epochs = j.value("epochs", 50);
    c.train.lr_discriminator = j.value("lr_discriminator", 0.001);
    c.train.lr_other = j.value("lr_other", 0.002);
    c.train.clip_norm = j.value("clip_norm", 5.0);
    c.train.adversarial = j.value("adversarial", true);
    c.train.budget_ratio = j.value("budget_ratio", 0.15);
    c.train.protocol = protocol_from_string(j.value("protocol", std::string("max-user")));
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        c.train.weights.mu = w.value("mu", 1.0);
        c.train.weights.nu = w.value("nu", 1.0);
        c.train.weights.lambda_s = w.value("lambda", 0.15);
        c.train.weights.g_adv = w.value("g_adv", 1.0);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        c.model.d_c = m.value("d_c", c.model.d_c);
        c.model.selector_hidden = m.value("selector_hidden", c.model.selector_hidden);
        c.model.discriminator_hidden =
            m.value("discriminator_hidden", c.model.discriminator_hidden);
        c.model.d_m = m.value("d_m", c.model.d_m);
        c.model.heads = m.value("heads", c.model.heads);
        c.model.d_f = m.value("d_f", c.model.d_f);
        c.model.layers = m.value("layers", c.model.layers);
        c.model.dropout = m.value("dropout", c.model.dropout);
    }
    if (j.contains("ablation")) {
        const auto& a = j["ablation"];
        c.model.multimodal = a.value("multimodal", true);
        c.model.transformer_generator = a.value("transformer_generator", true);
        c.model.fssa_mode =
            score_mode_from_string(a.value("fssa_mode", std::string("fused")));
    }
    if (c.train.epochs <= 0 || c.n_runs <= 0)
        throw std::invalid_argument("config: epochs and n_runs must be positive");
    if (c.train.lr_discriminator <= 0 || c.train.lr_other <= 0)
        throw std::invalid_argument("config: learning rates must be positive");
    if (c.train.weights.mu < 0 || c.train.weights.nu < 0 ||
        c.train.weights.lambda_s < 0 || c.train.weights.lambda_s > 1 ||
        c.train.weights.g_adv < 0)
        throw std::invalid_argument("config: loss weights out of range");
    if (c.model.d_m % c.model.heads != 0)
        throw std::invalid_argument("config: d_m must be divisible by heads");
    return c;
}

json report_to_json(const EvalReport& r) {
    json per_video = json::array();
    for (size_t i = 0; i < r.video_ids.size(); ++i)
        per_video.push_back({{"video_id", r.video_ids[i]}, {"f1", r.per_video_f1[i]}});
    return {{"protocol", to_string(r.protocol)},
            {"per_video", per_video},
            {"aggregate_f1", r.aggregate_f1}};
}

void write_csv_summary(const std::string& path, const std::string& dataset,
                       double f1) {
    std::ofstream csv(path);
    std::string lower = dataset;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(ch));
    bool is_summe = lower.find("summe") != std::string::npos;
    bool is_tvsum = lower.find("tvsum") != std::string::npos;
    csv << "method,summe_f1,tvsum_f1,average\n";
    csv << "semsum,";
    csv << (is_summe ? std::to_string(f1) : std::string()) << ",";
    csv << (is_tvsum ? std::to_string(f1) : std::string()) << ",";
    csv << f1 << "\n";
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_path,
              const std::string& protocol) {
    DatasetBundle bundle = synth_generate(cfg);
    bundle.protocol_hint = protocol_from_string(protocol);
    save_dataset(bundle, out_path);
    std::cout << "wrote " << out_path << ": " << bundle.records.size()
              << " videos, T=" << cfg.T << ", d_v=" << bundle.d_v
              << ", d_s=" << bundle.d_s << "\n";
    return 0;
}

int cmd_make_splits(const std::string& dataset, long seed, int n_runs,
                    const std::string& out_path) {
    DatasetBundle bundle = load_dataset(dataset, Protocol::MaxUser);
    auto splits = make_splits(bundle, seed, n_runs);
    save_splits(splits, seed, out_path);
    std::cout << "wrote " << out_path << ": " << splits.size() << " runs\n";
    return 0;
}

int cmd_train(RunConfig cfg) {
    DatasetBundle bundle = load_dataset(cfg.dataset, cfg.train.protocol);
    cfg.model.d_v = bundle.d_v;
    cfg.model.d_s = bundle.d_s;
    auto splits = make_splits(bundle, cfg.train.seed, cfg.n_runs);
    fs::path out_dir = out_dir_or(cfg.out_dir);
    fs::create_directories(out_dir);

    json report;
    report["protocol"] = to_string(cfg.train.protocol);
    report["ablation"] = {{"multimodal", cfg.model.multimodal},
                          {"fssa_mode", to_string(cfg.model.fssa_mode)},
                          {"transformer_generator", cfg.model.transformer_generator}};
    report["runs"] = json::array();
    double total = 0.0;
    for (size_t run = 0; run < splits.size(); ++run) {
        ModelState state = ModelState::init(
            cfg.model, cfg.train.seed + static_cast<long>(run));
        TrainConfig tc = cfg.train;
        tc.seed = cfg.train.seed + static_cast<long>(run);
        std::ofstream log(out_dir / ("train_log_run" + std::to_string(run) + ".jsonl"));
        FitResult fr = fit(state, bundle, splits[run], tc, &log);
        save_checkpoint(state, (out_dir / ("run" + std::to_string(run) + ".ckpt")).string());
        EvalReport er = evaluate_split(state, bundle, splits[run].test_ids,
                                       tc.protocol, tc.budget_ratio);
        json run_json = report_to_json(er);
        run_json["best_epoch"] = fr.best_epoch;
        report["runs"].push_back(run_json);
        total += er.aggregate_f1;
        std::cout << "run " << run << ": best epoch " << fr.best_epoch
                  << ", test F1 " << er.aggregate_f1 << "\n";
    }
    report["grand_mean_f1"] = total / static_cast<double>(splits.size());
    std::ofstream rep(out_dir / "report.json");
    rep << report.dump(2) << "\n";
    write_csv_summary((out_dir / "report.csv").string(), cfg.dataset,
                      report["grand_mean_f1"].get<double>());
    std::cout << "grand mean F1: " << report["grand_mean_f1"].get<double>() << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset,
             const std::string& protocol, const std::string& out_dir_flag) {
    ModelState state = load_checkpoint(ckpt_path);
    Protocol proto = protocol_from_string(protocol);
    DatasetBundle bundle = load_dataset(dataset, proto);
    std::vector<std::string> ids;
    for (const auto& r : bundle.records) ids.push_back(r.video_id);
    EvalReport report = evaluate_split(state, bundle, ids, proto, 0.15);
    fs::path out_dir = out_dir_or(out_dir_flag);
    fs::create_directories(out_dir);
    std::ofstream rep(out_dir / "eval_report.json");
    rep << report_to_json(report).dump(2) << "\n";
    write_csv_summary((out_dir / "eval_report.csv").string(), dataset,
                      report.aggregate_f1);
    std::cout << "aggregate F1 (" << protocol << "): " << report.aggregate_f1 << "\n";
    return 0;
}

int cmd_summarize(const std::string& ckpt_path, const std::string& dataset,
                  const std::string& video_id, const std::string& out_dir_flag) {
    ModelState state = load_checkpoint(ckpt_path);
    DatasetBundle bundle = load_dataset(dataset, Protocol::MaxUser);
    const VideoRecord& rec = bundle.find(video_id);
    ScoreSequence scores = state.score_video(rec);
    SummaryMask mask = build_summary(rec, scores, 0.15);
    fs::path out_dir = out_dir_or(out_dir_flag);
    fs::create_directories(out_dir);
    {
        std::ofstream out(out_dir / (video_id + "_mask.json"));
        out << mask_to_json(video_id, mask).dump(2) << "\n";
    }
    {
        json hist = {{"video_id", video_id},
                     {"mode", to_string(scores.mode)},
                     {"scores", std::vector<double>(scores.scores.begin(),
                                                    scores.scores.end())}};
        if (rec.gt_score)
            hist["gt_scores"] = std::vector<double>(rec.gt_score->begin(),
                                                    rec.gt_score->end());
        std::ofstream out(out_dir / (video_id + "_scores.json"));
        out << hist.dump(2) << "\n";
    }
    std::cout << "wrote mask and score histogram for " << video_id << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic-guided unsupervised video summarization"};
    app.require_subcommand(1);

    SynthConfig synth_cfg;
    std::string synth_out = "synthetic.h5";
    std::string synth_protocol = "max-user";
    auto* synth = app.add_subcommand("synth", "generate a synthetic feature dataset");
    synth->add_option("--seed", synth_cfg.seed);
    synth->add_option("--videos", synth_cfg.n_videos);
    synth->add_option("--frames", synth_cfg.T);
    synth->add_option("--dv", synth_cfg.d_v);
    synth->add_option("--ds", synth_cfg.d_s);
    synth->add_option("--segments", synth_cfg.n_segments);
    synth->add_option("--users", synth_cfg.n_users);
    synth->add_option("--protocol", synth_protocol);
    synth->add_option("--out", synth_out);

    std::string splits_dataset, splits_out = "splits.json";
    long splits_seed = 0;
    int splits_runs = 5;
    auto* mksplits = app.add_subcommand("make-splits", "write 80/20 split file");
    mksplits->add_option("--dataset", splits_dataset)->required();
    mksplits->add_option("--seed", splits_seed);
    mksplits->add_option("--runs", splits_runs);
    mksplits->add_option("--out", splits_out);

    std::string train_config_path;
    std::string train_dataset_override, train_out_override;
    long train_seed_override = -1;
    int train_epochs_override = -1;
    auto* train = app.add_subcommand("train", "run the three-stage training loop");
    train->add_option("--config", train_config_path)->required();
    train->add_option("--dataset", train_dataset_override);
    train->add_option("--out", train_out_override);
    train->add_option("--seed", train_seed_override);
    train->add_option("--epochs", train_epochs_override);

    std::string eval_ckpt, eval_dataset, eval_protocol = "max-user", eval_out = "out";
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--checkpoint", eval_ckpt)->required();
    eval->add_option("--dataset", eval_dataset)->required();
    eval->add_option("--protocol", eval_protocol);
    eval->add_option("--out", eval_out);

    std::string sum_ckpt, sum_dataset, sum_video, sum_out = "out";
    auto* summarize = app.add_subcommand("summarize", "export mask and score data");
    summarize->add_option("--checkpoint", sum_ckpt)->required();
    summarize->add_option("--dataset", sum_dataset)->required();
    summarize->add_option("--video", sum_video)->required();
    summarize->add_option("--out", sum_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_out, synth_protocol);
        if (mksplits->parsed())
            return cmd_make_splits(splits_dataset, splits_seed, splits_runs, splits_out);
        if (train->parsed()) {
            RunConfig cfg = parse_run_config(train_config_path);
            if (!train_dataset_override.empty()) cfg.dataset = train_dataset_override;
            if (!train_out_override.empty()) cfg.out_dir = train_out_override;
            if (train_seed_override >= 0) cfg.train.seed = train_seed_override;
            if (train_epochs_override > 0) cfg.train.epochs = train_epochs_override;
            return cmd_train(cfg);
        }
        if (eval->parsed())
            return cmd_eval(eval_ckpt, eval_dataset, eval_protocol, eval_out);
        if (summarize->parsed())
            return cmd_summarize(sum_ckpt, sum_dataset, sum_video, sum_out);
    } catch (const TrainingDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semsum {

using Mat = Eigen::MatrixXd;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Protocol { MaxUser, MeanUser, SingleReference };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct VideoRecord {
    std::string video_id;
    Mat visual;              // T x d_v
    Mat semantic;            // T x d_s
    long n_frames = 0;       // original frame count
    std::vector<long> picks; // length T, strictly increasing
    std::vector<std::pair<long, long>> change_points;  // inclusive, partition [0, n_frames-1]
    std::optional<Eigen::MatrixX<uint8_t>> user_summaries;  // U x n_frames
    std::optional<Eigen::VectorXd> gt_score;                // length T

    long T() const { return visual.rows(); }
    void validate() const;  // throws ValidationError naming this video
};

struct DatasetBundle {
    std::vector<VideoRecord> records;
    Protocol protocol_hint = Protocol::MaxUser;
    int d_v = 0;
    int d_s = 0;

    const VideoRecord& find(const std::string& id) const;
    void validate() const;
};

struct SplitSpec {
    long seed = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

DatasetBundle load_dataset(const std::string& path, Protocol protocol_hint);
void save_dataset(const DatasetBundle& bundle, const std::string& path);

struct SynthConfig {
    long seed = 0;
    int n_videos = 10;
    int T = 60;
    int d_v = 1024;
    int d_s = 512;
    int n_segments = 6;
    int n_users = 15;
};

DatasetBundle synth_generate(const SynthConfig& cfg);

std::vector<SplitSpec> make_splits(const DatasetBundle& bundle, long seed, int n_runs);

void save_splits(const std::vector<SplitSpec>& splits, long seed, const std::string& path);
std::vector<SplitSpec> load_splits(const std::string& path);

}  // namespace semsum

#include "semsum/dataset.hpp"

#include <hdf5.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

namespace semsum {

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::MaxUser: return "max-user";
        case Protocol::MeanUser: return "mean-user";
        case Protocol::SingleReference: return "single-reference";
    }
    return "max-user";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "max-user") return Protocol::MaxUser;
    if (s == "mean-user") return Protocol::MeanUser;
    if (s == "single-reference") return Protocol::SingleReference;
    throw ValidationError("unknown protocol: " + s);
}

void VideoRecord::validate() const {
    auto fail = [this](const std::string& msg) {
        throw ValidationError("video '" + video_id + "': " + msg);
    };
    if (visual.rows() < 2) fail("needs at least 2 sampled frames");
    if (visual.rows() != semantic.rows())
        fail("visual/semantic row count mismatch");
    if (n_frames <= 0) fail("n_frames must be positive");
    if (static_cast<long>(picks.size()) != visual.rows())
        fail("picks length must equal feature rows");
    for (size_t i = 0; i < picks.size(); ++i) {
        if (picks[i] < 0 || picks[i] >= n_frames) fail("pick out of range");
        if (i > 0 && picks[i] <= picks[i - 1]) fail("picks not strictly increasing");
    }
    if (change_points.empty()) fail("change_points empty");
    long expect = 0;
    for (const auto& [s, e] : change_points) {
        if (s != expect) fail("change_points have a gap or overlap");
        if (e < s) fail("change_point interval reversed");
        expect = e + 1;
    }
    if (expect != n_frames) fail("change_points do not cover all frames");
    if (user_summaries) {
        if (user_summaries->cols() != n_frames)
            fail("user_summaries column count must be n_frames");
        for (Eigen::Index u = 0; u < user_summaries->rows(); ++u)
            for (Eigen::Index f = 0; f < user_summaries->cols(); ++f)
                if ((*user_summaries)(u, f) > 1) fail("user_summaries not binary");
    }
    if (gt_score) {
        if (gt_score->size() != visual.rows()) fail("gt_score length must equal T");
        for (Eigen::Index i = 0; i < gt_score->size(); ++i)
            if ((*gt_score)(i) < 0.0 || (*gt_score)(i) > 1.0)
                fail("gt_score outside [0,1]");
    }
}

const VideoRecord& DatasetBundle::find(const std::string& id) const {
    for (const auto& r : records)
        if (r.video_id == id) return r;
    throw ValidationError("unknown video_id: " + id);
}

void DatasetBundle::validate() const {
    std::set<std::string> ids;
    for (const auto& r : records) {
        r.validate();
        if (r.visual.cols() != d_v || r.semantic.cols() != d_s)
            throw ValidationError("video '" + r.video_id +
                                  "': feature dims differ from bundle");
        if (!ids.insert(r.video_id).second)
            throw ValidationError("duplicate video_id: " + r.video_id);
    }
}

namespace {

// RAII wrappers around the HDF5 C API handle types.
struct H5File {
    hid_t id;
    explicit H5File(hid_t i) : id(i) {}
    ~H5File() { if (id >= 0) H5Fclose(id); }
};
struct H5Group {
    hid_t id;
    explicit H5Group(hid_t i) : id(i) {}
    ~H5Group() { if (id >= 0) H5Gclose(id); }
};
struct H5Dset {
    hid_t id;
    explicit H5Dset(hid_t i) : id(i) {}
    ~H5Dset() { if (id >= 0) H5Dclose(id); }
};

bool has_key(hid_t group, const std::string& key) {
    return H5Lexists(group, key.c_str(), H5P_DEFAULT) > 0;
}

std::vector<hsize_t> dset_dims(hid_t dset) {
    hid_t space = H5Dget_space(dset);
    int nd = H5Sget_simple_extent_ndims(space);
    std::vector<hsize_t> dims(std::max(nd, 0));
    if (nd > 0) H5Sget_simple_extent_dims(space, dims.data(), nullptr);
    H5Sclose(space);
    return dims;
}

Mat read_float_matrix(hid_t group, const std::string& vid, const std::string& key) {
    if (!has_key(group, key))
        throw SchemaError("video '" + vid + "': missing key '" + key + "'");
    H5Dset d(H5Dopen2(group, key.c_str(), H5P_DEFAULT));
    auto dims = dset_dims(d.id);
    if (dims.size() != 2)
        throw SchemaError("video '" + vid + "': '" + key + "' is not 2-D");
    std::vector<float> buf(dims[0] * dims[1]);
    if (H5Dread(d.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data()) < 0)
        throw SchemaError("video '" + vid + "': failed reading '" + key + "'");
    Mat m(dims[0], dims[1]);
    for (hsize_t i = 0; i < dims[0]; ++i)
        for (hsize_t j = 0; j < dims[1]; ++j)
            m(i, j) = static_cast<double>(buf[i * dims[1] + j]);
    return m;
}

std::vector<long> read_int_vector(hid_t group, const std::string& vid,
                                  const std::string& key) {
    if (!has_key(group, key))
        throw SchemaError("video '" + vid + "': missing key '" + key + "'");
    H5Dset d(H5Dopen2(group, key.c_str(), H5P_DEFAULT));
    auto dims = dset_dims(d.id);
    hsize_t n = 1;
    for (hsize_t dim : dims) n *= dim;  // flatten: change_points arrives Sx2
    std::vector<int64_t> buf(n);
    H5Dread(d.id, H5T_NATIVE_INT64, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
    return {buf.begin(), buf.end()};
}

long read_int_scalar(hid_t group, const std::string& vid, const std::string& key) {
    if (!has_key(group, key))
        throw SchemaError("video '" + vid + "': missing key '" + key + "'");
    H5Dset d(H5Dopen2(group, key.c_str(), H5P_DEFAULT));
    int64_t v = 0;
    H5Dread(d.id, H5T_NATIVE_INT64, H5S_ALL, H5S_ALL, H5P_DEFAULT, &v);
    return static_cast<long>(v);
}

void write_float_matrix(hid_t group, const std::string& key, const Mat& m) {
    hsize_t dims[2] = {static_cast<hsize_t>(m.rows()), static_cast<hsize_t>(m.cols())};
    hid_t space = H5Screate_simple(2, dims, nullptr);
    H5Dset d(H5Dcreate2(group, key.c_str(), H5T_IEEE_F32LE, space, H5P_DEFAULT,
                        H5P_DEFAULT, H5P_DEFAULT));
    std::vector<float> buf(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            buf[i * m.cols() + j] = static_cast<float>(m(i, j));
    H5Dwrite(d.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
    H5Sclose(space);
}

void write_int_vector(hid_t group, const std::string& key,
                      const std::vector<int64_t>& v) {
    hsize_t dims[1] = {v.size()};
    hid_t space = H5Screate_simple(1, dims, nullptr);
    H5Dset d(H5Dcreate2(group, key.c_str(), H5T_STD_I64LE, space, H5P_DEFAULT,
                        H5P_DEFAULT, H5P_DEFAULT));
    H5Dwrite(d.id, H5T_NATIVE_INT64, H5S_ALL, H5S_ALL, H5P_DEFAULT, v.data());
    H5Sclose(space);
}

void write_int_scalar(hid_t group, const std::string& key, int64_t v) {
    hid_t space = H5Screate(H5S_SCALAR);
    H5Dset d(H5Dcreate2(group, key.c_str(), H5T_STD_I64LE, space, H5P_DEFAULT,
                        H5P_DEFAULT, H5P_DEFAULT));
    H5Dwrite(d.id, H5T_NATIVE_INT64, H5S_ALL, H5S_ALL, H5P_DEFAULT, &v);
    H5Sclose(space);
}

}  // namespace

DatasetBundle load_dataset(const std::string& path, Protocol protocol_hint) {
    H5File f(H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT));
    if (f.id < 0) throw SchemaError("cannot open dataset file: " + path);

    std::vector<std::string> names;
    hsize_t n_obj = 0;
    H5Gget_num_objs(f.id, &n_obj);
    for (hsize_t i = 0; i < n_obj; ++i) {
        char buf[256];
        H5Gget_objname_by_idx(f.id, i, buf, sizeof(buf));
        names.emplace_back(buf);
    }
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        // video_2 sorts before video_10
        auto num = [](const std::string& s) {
            auto p = s.rfind('_');
            if (p == std::string::npos) return std::make_pair(false, 0L);
            char* end = nullptr;
            long v = std::strtol(s.c_str() + p + 1, &end, 10);
            return std::make_pair(*end == '\0', v);
        };
        auto [oka, va] = num(a);
        auto [okb, vb] = num(b);
        if (oka && okb && va != vb) return va < vb;
        return a < b;
    });

    DatasetBundle bundle;
    bundle.protocol_hint = protocol_hint;
    for (const auto& name : names) {
        H5Group g(H5Gopen2(f.id, name.c_str(), H5P_DEFAULT));
        if (g.id < 0) throw SchemaError("cannot open group '" + name + "'");
        VideoRecord rec;
        rec.video_id = name;
        rec.visual = read_float_matrix(g.id, name, "features");
        rec.semantic = read_float_matrix(g.id, name, "semantic_features");
        rec.picks = read_int_vector(g.id, name, "picks");
        rec.n_frames = read_int_scalar(g.id, name, "n_frames");
        auto cps = read_int_vector(g.id, name, "change_points");
        if (cps.size() % 2 != 0)
            throw SchemaError("video '" + name + "': change_points not Sx2");
        for (size_t i = 0; i + 1 < cps.size(); i += 2)
            rec.change_points.emplace_back(cps[i], cps[i + 1]);
        if (has_key(g.id, "user_summary")) {
            H5Dset d(H5Dopen2(g.id, "user_summary", H5P_DEFAULT));
            auto dims = dset_dims(d.id);
            if (dims.size() != 2)
                throw SchemaError("video '" + name + "': user_summary is not 2-D");
            std::vector<uint8_t> buf(dims[0] * dims[1]);
            H5Dread(d.id, H5T_NATIVE_UINT8, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
            Eigen::MatrixX<uint8_t> us(dims[0], dims[1]);
            for (hsize_t i = 0; i < dims[0]; ++i)
                for (hsize_t j = 0; j < dims[1]; ++j)
                    us(i, j) = buf[i * dims[1] + j];
            rec.user_summaries = std::move(us);
        }
        if (has_key(g.id, "gtscore")) {
            H5Dset d(H5Dopen2(g.id, "gtscore", H5P_DEFAULT));
            auto dims = dset_dims(d.id);
            std::vector<float> buf(dims.empty() ? 1 : dims[0]);
            H5Dread(d.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
            Eigen::VectorXd gs(buf.size());
            for (size_t i = 0; i < buf.size(); ++i) gs(i) = buf[i];
            rec.gt_score = std::move(gs);
        }
        rec.validate();
        if (bundle.records.empty()) {
            bundle.d_v = static_cast<int>(rec.visual.cols());
            bundle.d_s = static_cast<int>(rec.semantic.cols());
        }
        bundle.records.push_back(std::move(rec));
    }
    bundle.validate();
    return bundle;
}

void save_dataset(const DatasetBundle& bundle, const std::string& path) {
    H5File f(H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT));
    if (f.id < 0) throw SchemaError("cannot create dataset file: " + path);
    for (const auto& rec : bundle.records) {
        H5Group g(H5Gcreate2(f.id, rec.video_id.c_str(), H5P_DEFAULT, H5P_DEFAULT,
                             H5P_DEFAULT));
        write_float_matrix(g.id, "features", rec.visual);
        write_float_matrix(g.id, "semantic_features", rec.semantic);
        write_int_vector(g.id, "picks", {rec.picks.begin(), rec.picks.end()});
        write_int_scalar(g.id, "n_frames", rec.n_frames);
        std::vector<int64_t> cps, seg_lens;
        for (const auto& [s, e] : rec.change_points) {
            cps.push_back(s);
            cps.push_back(e);
            seg_lens.push_back(e - s + 1);
        }
        // change_points stored Sx2
        {
            hsize_t dims[2] = {rec.change_points.size(), 2};
            hid_t space = H5Screate_simple(2, dims, nullptr);
            H5Dset d(H5Dcreate2(g.id, "change_points", H5T_STD_I64LE, space,
                                H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT));
            H5Dwrite(d.id, H5T_NATIVE_INT64, H5S_ALL, H5S_ALL, H5P_DEFAULT, cps.data());
            H5Sclose(space);
        }
        write_int_vector(g.id, "n_frame_per_seg", seg_lens);
        if (rec.user_summaries) {
            const auto& us = *rec.user_summaries;
            hsize_t dims[2] = {static_cast<hsize_t>(us.rows()),
                               static_cast<hsize_t>(us.cols())};
            hid_t space = H5Screate_simple(2, dims, nullptr);
            H5Dset d(H5Dcreate2(g.id, "user_summary", H5T_STD_U8LE, space,
                                H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT));
            std::vector<uint8_t> buf(us.size());
            for (Eigen::Index i = 0; i < us.rows(); ++i)
                for (Eigen::Index j = 0; j < us.cols(); ++j)
                    buf[i * us.cols() + j] = us(i, j);
            H5Dwrite(d.id, H5T_NATIVE_UINT8, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
            H5Sclose(space);
        }
        if (rec.gt_score) {
            hsize_t dims[1] = {static_cast<hsize_t>(rec.gt_score->size())};
            hid_t space = H5Screate_simple(1, dims, nullptr);
            H5Dset d(H5Dcreate2(g.id, "gtscore", H5T_IEEE_F32LE, space, H5P_DEFAULT,
                                H5P_DEFAULT, H5P_DEFAULT));
            std::vector<float> buf(rec.gt_score->size());
            for (Eigen::Index i = 0; i < rec.gt_score->size(); ++i)
                buf[i] = static_cast<float>((*rec.gt_score)(i));
            H5Dwrite(d.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
            H5Sclose(space);
        }
    }
}

DatasetBundle synth_generate(const SynthConfig& cfg) {
    if (cfg.seed < 0 || cfg.n_videos <= 0 || cfg.T < 2 || cfg.d_v <= 0 ||
        cfg.d_s <= 0 || cfg.n_segments <= 0 || cfg.n_users <= 0)
        throw ValidationError("synth_generate: invalid argument");
    if (cfg.n_segments > cfg.T)
        throw ValidationError("synth_generate: n_segments exceeds T");

    std::mt19937_64 rng(static_cast<uint64_t>(cfg.seed) * 0x9E3779B97F4A7C15ull + 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const int k = std::min({8, cfg.d_v, cfg.d_s});
    const long frames_per_pick = 15;  // 30 fps source sampled at 2 fps

    // Shared cross-modal embedding: both modalities carry the event latent in
    // their first k coordinates plus a fixed random tail map.
    Mat tail_v = Mat::Zero(std::max(cfg.d_v - k, 0), k);
    Mat tail_s = Mat::Zero(std::max(cfg.d_s - k, 0), k);
    for (Eigen::Index i = 0; i < tail_v.rows(); ++i)
        for (int j = 0; j < k; ++j) tail_v(i, j) = 0.3 * gauss(rng);
    for (Eigen::Index i = 0; i < tail_s.rows(); ++i)
        for (int j = 0; j < k; ++j) tail_s(i, j) = 0.3 * gauss(rng);

    DatasetBundle bundle;
    bundle.d_v = cfg.d_v;
    bundle.d_s = cfg.d_s;

    for (int v = 0; v < cfg.n_videos; ++v) {
        VideoRecord rec;
        rec.video_id = "video_" + std::to_string(v + 1);
        rec.n_frames = static_cast<long>(cfg.T) * frames_per_pick;
        rec.picks.resize(cfg.T);
        for (int t = 0; t < cfg.T; ++t) rec.picks[t] = t * frames_per_pick;

        // Segment boundaries over sampled frames, roughly equal lengths.
        std::vector<int> seg_of(cfg.T);
        std::vector<std::pair<int, int>> segs;  // sampled-frame intervals
        for (int s = 0; s < cfg.n_segments; ++s) {
            int start = s * cfg.T / cfg.n_segments;
            int end = (s + 1) * cfg.T / cfg.n_segments - 1;
            segs.emplace_back(start, end);
            for (int t = start; t <= end; ++t) seg_of[t] = s;
        }
        for (size_t s = 0; s < segs.size(); ++s) {
            long cs = rec.picks[segs[s].first];
            long ce = (s + 1 < segs.size()) ? rec.picks[segs[s + 1].first] - 1
                                            : rec.n_frames - 1;
            rec.change_points.emplace_back(cs, ce);
        }

        // Per event: a unit latent, a salience bit, and for non-salient events a
        // decorrelated visual latent so cross-modal alignment tracks salience.
        std::vector<Eigen::VectorXd> latent(cfg.n_segments), vis_latent(cfg.n_segments);
        std::vector<bool> salient(cfg.n_segments);
        int n_salient = 0;
        for (int s = 0; s < cfg.n_segments; ++s) {
            Eigen::VectorXd u(k);
            for (int j = 0; j < k; ++j) u(j) = gauss(rng);
            u.normalize();
            latent[s] = u;
            salient[s] = unif(rng) < 0.35;
            if (salient[s]) ++n_salient;
            Eigen::VectorXd w(k);
            for (int j = 0; j < k; ++j) w(j) = gauss(rng);
            w.normalize();
            vis_latent[s] = salient[s] ? u : w;
        }
        if (cfg.n_segments >= 2) {
            if (n_salient == 0) {
                salient[0] = true;
                vis_latent[0] = latent[0];
            } else if (n_salient == cfg.n_segments) {
                salient[cfg.n_segments - 1] = false;
                Eigen::VectorXd w(k);
                for (int j = 0; j < k; ++j) w(j) = gauss(rng);
                w.normalize();
                vis_latent[cfg.n_segments - 1] = w;
            }
        }

        rec.visual = Mat(cfg.T, cfg.d_v);
        rec.semantic = Mat(cfg.T, cfg.d_s);
        Eigen::VectorXd gt(cfg.T);
        for (int t = 0; t < cfg.T; ++t) {
            int s = seg_of[t];
            Eigen::VectorXd xv(cfg.d_v), xs(cfg.d_s);
            xv.head(k) = vis_latent[s];
            if (cfg.d_v > k) xv.tail(cfg.d_v - k) = tail_v * vis_latent[s];
            xs.head(k) = latent[s];
            if (cfg.d_s > k) xs.tail(cfg.d_s - k) = tail_s * latent[s];
            for (int j = 0; j < cfg.d_v; ++j) xv(j) += 0.05 * gauss(rng);
            for (int j = 0; j < cfg.d_s; ++j) xs(j) += 0.05 * gauss(rng);
            rec.visual.row(t) = xv.transpose();
            rec.semantic.row(t) = xs.transpose();
            gt(t) = salient[s] ? 0.8 + 0.2 * unif(rng) : 0.2 * unif(rng);
        }
        rec.gt_score = gt;

        // Per-user jittered threshold on the frame-rate-expanded gt score.
        Eigen::MatrixX<uint8_t> users(cfg.n_users, rec.n_frames);
        for (int u = 0; u < cfg.n_users; ++u) {
            double thr = 0.5 + 0.3 * (unif(rng) - 0.5);
            for (int t = 0; t < cfg.T; ++t) {
                long lo = rec.picks[t];
                long hi = (t + 1 < cfg.T) ? rec.picks[t + 1] - 1 : rec.n_frames - 1;
                uint8_t bit = gt(t) > thr ? 1 : 0;
                for (long fidx = lo; fidx <= hi; ++fidx) users(u, fidx) = bit;
            }
        }
        rec.user_summaries = std::move(users);

        rec.validate();
        bundle.records.push_back(std::move(rec));
    }
    bundle.validate();
    return bundle;
}

std::vector<SplitSpec> make_splits(const DatasetBundle& bundle, long seed, int n_runs) {
    if (bundle.records.size() < 2)
        throw ValidationError("make_splits: need at least 2 records");
    if (n_runs < 1) throw ValidationError("make_splits: n_runs must be >= 1");
    std::vector<std::string> ids;
    for (const auto& r : bundle.records) ids.push_back(r.video_id);
    const size_t n_train = static_cast<size_t>(
        std::lround(0.8 * static_cast<double>(ids.size())));
    std::vector<SplitSpec> out;
    for (int run = 0; run < n_runs; ++run) {
        std::vector<std::string> shuffled = ids;
        std::mt19937_64 rng(static_cast<uint64_t>(seed) + static_cast<uint64_t>(run));
        for (size_t i = shuffled.size() - 1; i > 0; --i) {
            std::uniform_int_distribution<size_t> pick(0, i);
            std::swap(shuffled[i], shuffled[pick(rng)]);
        }
        SplitSpec s;
        s.seed = seed;
        s.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
        s.test_ids.assign(shuffled.begin() + n_train, shuffled.end());
        out.push_back(std::move(s));
    }
    return out;
}

void save_splits(const std::vector<SplitSpec>& splits, long seed,
                 const std::string& path) {
    nlohmann::json j;
    j["seed"] = seed;
    j["runs"] = nlohmann::json::array();
    for (const auto& s : splits)
        j["runs"].push_back({{"train", s.train_ids}, {"test", s.test_ids}});
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write splits file: " + path);
    out << j.dump(2) << "\n";
}

std::vector<SplitSpec> load_splits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read splits file: " + path);
    nlohmann::json j;
    in >> j;
    std::vector<SplitSpec> out;
    for (const auto& run : j.at("runs")) {
        SplitSpec s;
        s.seed = j.at("seed").get<long>();
        s.train_ids = run.at("train").get<std::vector<std::string>>();
        s.test_ids = run.at("test").get<std::vector<std::string>>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace semsum

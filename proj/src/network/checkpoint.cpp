#include "fhiqa/network/checkpoint.hpp"

#include "fhiqa/errors.hpp"

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include <fstream>
#include <new>
#include <sstream>
#include <stdexcept>

namespace fhiqa::network {

namespace fs = std::filesystem;

namespace {

// Serialized form of the format tag, which every checkpoint starts with.
std::string tag_prefix() {
    std::ostringstream out;
    {
        cereal::PortableBinaryOutputArchive ar(out);
        ar(std::string(kCheckpointTag));
    }
    return out.str();
}

template <class Archive>
void write_matrix(Archive& ar, const Matrix& m) {
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    std::vector<float> data(m.data(), m.data() + m.size());
    ar(rows, cols, data);
}

template <class Archive>
Matrix read_matrix(Archive& ar) {
    std::uint64_t rows = 0, cols = 0;
    std::vector<float> data;
    ar(rows, cols, data);
    if (data.size() != rows * cols) {
        throw CheckpointError("checkpoint: tensor size mismatch");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

template <class Archive>
void write_buffer(Archive& ar, const GradBuffer& buf) {
    ar(static_cast<std::uint64_t>(buf.size()));
    for (const auto& m : buf) {
        write_matrix(ar, m);
    }
}

template <class Archive>
GradBuffer read_buffer(Archive& ar) {
    std::uint64_t n = 0;
    ar(n);
    GradBuffer buf;
    for (std::uint64_t i = 0; i < n; ++i) {
        buf.push_back(read_matrix(ar));
    }
    return buf;
}

}  // namespace

void save_checkpoint(const fs::path& path, QualityModel& model, const training::TrainState& state,
                     const training::AdamState* optimizer) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write checkpoint " + tmp.string());
        }
        cereal::PortableBinaryOutputArchive ar(out);
        ar(std::string(kCheckpointTag), kCheckpointVersion);

        const auto& cfg = model.config();
        const std::vector<std::int32_t> hidden(cfg.target_hidden.begin(), cfg.target_hidden.end());
        ar(to_string(cfg.backbone), static_cast<std::int32_t>(cfg.input_size),
           static_cast<std::int32_t>(cfg.patches_per_image), static_cast<std::uint64_t>(cfg.num_scenes),
           static_cast<std::uint64_t>(cfg.top_k.k), to_string(cfg.hyper_head), hidden, cfg.init_seed);
        ar(model.registry().ids());

        const auto table = model.affine_table();
        std::vector<double> a(table.multipliers().begin(), table.multipliers().end());
        std::vector<double> b(table.offsets().begin(), table.offsets().end());
        ar(a, b);

        const auto params = model.parameters();
        ar(static_cast<std::uint64_t>(params.size()));
        for (const auto& p : params) {
            ar(p.name);
            write_matrix(ar, *p.value);
        }

        ar(static_cast<std::int32_t>(state.epoch), state.best_val_srcc, static_cast<std::int32_t>(state.best_epoch),
           static_cast<std::int32_t>(state.epochs_since_best), state.rng_state);
        ar(static_cast<std::uint64_t>(state.history.size()));
        for (const auto& r : state.history) {
            ar(static_cast<std::int32_t>(r.epoch), r.train_loss, r.huber, r.ce, r.val_median_srcc, r.lr_backbone,
               r.lr_heads);
        }

        const bool has_opt = optimizer != nullptr;
        ar(has_opt);
        if (has_opt) {
            ar(optimizer->step);
            write_buffer(ar, optimizer->first_moment);
            write_buffer(ar, optimizer->second_moment);
        }
        if (!out) {
            throw IoError("failed writing checkpoint " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError("cannot open checkpoint " + path.string());
    }
    {
        const std::string expected = tag_prefix();
        std::string head(expected.size(), '\0');
        in.read(head.data(), static_cast<std::streamsize>(head.size()));
        if (in.gcount() != static_cast<std::streamsize>(head.size()) || head != expected) {
            throw CheckpointError(path.string() + " is not a checkpoint (missing format tag)");
        }
        in.seekg(0);
    }
    try {
        cereal::PortableBinaryInputArchive ar(in);
        std::string tag;
        std::uint32_t version = 0;
        ar(tag);
        if (tag != kCheckpointTag) {
            throw CheckpointError(path.string() + " is not a checkpoint (format tag '" + tag + "')");
        }
        ar(version);
        if (version != kCheckpointVersion) {
            throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                  std::to_string(kCheckpointVersion) + ")");
        }

        ModelConfig cfg;
        std::string backbone, head;
        std::int32_t input_size = 0, patches = 0;
        std::uint64_t scenes = 0, k = 0;
        std::vector<std::int32_t> hidden;
        ar(backbone, input_size, patches, scenes, k, head, hidden, cfg.init_seed);
        cfg.backbone = parse_backbone(backbone);
        cfg.hyper_head = parse_head(head);
        cfg.input_size = input_size;
        cfg.patches_per_image = patches;
        cfg.num_scenes = scenes;
        cfg.top_k = core::TopKPolicy(static_cast<std::size_t>(k));
        cfg.target_hidden.assign(hidden.begin(), hidden.end());

        std::vector<std::string> ids;
        ar(ids);
        QualityModel model(cfg, core::SceneRegistry(ids));

        std::vector<double> a, b;
        ar(a, b);

        std::uint64_t n = 0;
        ar(n);
        auto params = model.parameters();
        if (n != params.size()) {
            throw CheckpointError("checkpoint holds " + std::to_string(n) + " tensors, model expects " +
                                  std::to_string(params.size()));
        }
        for (auto& p : params) {
            std::string name;
            ar(name);
            Matrix m = read_matrix(ar);
            if (name != p.name || m.rows() != p.value->rows() || m.cols() != p.value->cols()) {
                throw CheckpointError("checkpoint tensor '" + name + "' does not match model tensor '" + p.name + "'");
            }
            *p.value = std::move(m);
        }
        const auto stored = model.affine_table();
        if (!(core::SceneAffineTable(a, b) == stored)) {
            throw CheckpointError("checkpoint affine table disagrees with the rescaling layer");
        }

        training::TrainState state;
        std::int32_t epoch = 0, best_epoch = 0, since = 0;
        ar(epoch, state.best_val_srcc, best_epoch, since, state.rng_state);
        state.epoch = epoch;
        state.best_epoch = best_epoch;
        state.epochs_since_best = since;
        std::uint64_t records = 0;
        ar(records);
        for (std::uint64_t i = 0; i < records; ++i) {
            training::EpochRecord r;
            std::int32_t e = 0;
            ar(e, r.train_loss, r.huber, r.ce, r.val_median_srcc, r.lr_backbone, r.lr_heads);
            r.epoch = e;
            state.history.push_back(r);
        }

        bool has_opt = false;
        ar(has_opt);
        std::optional<training::AdamState> opt;
        if (has_opt) {
            training::AdamState s;
            ar(s.step);
            s.first_moment = read_buffer(ar);
            s.second_moment = read_buffer(ar);
            opt = std::move(s);
        }
        return LoadedCheckpoint{std::move(model), std::move(state), std::move(opt)};
    } catch (const cereal::Exception& e) {
        throw CheckpointError("checkpoint " + path.string() + " is truncated or corrupt: " + e.what());
    } catch (const ConfigError& e) {
        throw CheckpointError("checkpoint " + path.string() + " has an invalid model config: " + e.what());
    } catch (const std::length_error& e) {
        throw CheckpointError("checkpoint " + path.string() + " is corrupt: " + e.what());
    } catch (const std::bad_alloc&) {
        throw CheckpointError("checkpoint " + path.string() + " is corrupt: implausible tensor size");
    }
}

}  // namespace fhiqa::network

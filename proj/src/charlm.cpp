#include "catlm/charlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include <json.hpp>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"
#include "catlm/utf8.hpp"
#include "lstm.hpp"

namespace catlm {

using json = nlohmann::ordered_json;

CharVocab CharVocab::build(const RawCorpus& train) {
    std::set<char32_t> text_chars;
    for (const std::string& s : train.sentences)
        for (char32_t cp : utf8_decode(s)) text_chars.insert(cp);
    text_chars.erase(kEos);
    text_chars.erase(kUnk);
    require(text_chars.size() >= 2, Err::DegenerateVocab,
            "training text has " + std::to_string(text_chars.size()) +
                " distinct characters; need at least 2");
    std::vector<char32_t> chars{kEos, kUnk};
    chars.insert(chars.end(), text_chars.begin(), text_chars.end());
    return from_chars(std::move(chars));
}

CharVocab CharVocab::from_chars(std::vector<char32_t> chars) {
    CharVocab v;
    v.chars = std::move(chars);
    require(v.chars.size() >= 2 && v.chars[0] == kEos && v.chars[1] == kUnk, Err::BadCheckpoint,
            "vocabulary must start with the end-of-sentence and unknown markers");
    for (size_t i = 0; i < v.chars.size(); ++i) {
        auto [it, fresh] = v.index.emplace(v.chars[i], int(i));
        (void)it;
        require(fresh, Err::BadCheckpoint, "duplicate character in vocabulary");
    }
    return v;
}

void LMConfig::validate() const {
    require(hidden_size >= 1, Err::ConfigError, "hidden_size must be >= 1");
    require(num_layers >= 1, Err::ConfigError, "num_layers must be >= 1");
    require(embedding_size >= 1, Err::ConfigError, "embedding_size must be >= 1");
    require(bptt_len >= 1, Err::ConfigError, "bptt_len must be >= 1");
    require(batch_size >= 1, Err::ConfigError, "batch_size must be >= 1");
    require(learning_rate > 0.0, Err::ConfigError, "learning_rate must be > 0");
    require(grad_clip > 0.0, Err::ConfigError, "grad_clip must be > 0");
    require(lr_decay > 0.0 && lr_decay <= 1.0, Err::ConfigError, "lr_decay must be in (0, 1]");
    require(snapshot_every >= 1, Err::ConfigError, "snapshot_every must be >= 1");
    require(epochs >= snapshot_every, Err::ConfigError, "epochs must be >= snapshot_every");
}

namespace {

// [eos, sentence chars, eos, sentence chars, eos, ...]
std::vector<int> encode_stream(const RawCorpus& corpus, const CharVocab& vocab) {
    std::vector<int> ids{vocab.eos_id()};
    for (const std::string& s : corpus.sentences) {
        for (char32_t cp : utf8_decode(s)) ids.push_back(vocab.id_or_unk(cp));
        ids.push_back(vocab.eos_id());
    }
    return ids;
}

template <typename T>
double clip_gradient(std::vector<T>& grad, double max_norm) {
    double sq = 0.0;
    for (T g : grad) sq += double(g) * double(g);
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        T scale = T(max_norm / norm);
        for (T& g : grad) g *= scale;
    }
    return norm;
}

// Mean bits per character of a stream under the net, computed in batched
// stripes with padding masked out; every prediction counts exactly once.
template <typename T>
double eval_bpc(const detail::LstmNet<T>& net, const std::vector<int>& ids, int batch,
                int bptt) {
    const long n_pred = long(ids.size()) - 1;
    require(n_pred >= 1, Err::EmptyCorpus, "validation split has no characters");
    const int b_eval = int(std::min<long>(batch, n_pred));
    const long per_stripe = (n_pred + b_eval - 1) / b_eval;

    auto state = net.zero_state(b_eval);
    std::vector<int> inputs, targets;
    std::vector<uint8_t> mask;
    double nll = 0.0;
    long counted = 0;
    for (long start = 0; start < per_stripe; start += bptt) {
        const int steps = int(std::min<long>(bptt, per_stripe - start));
        inputs.assign(size_t(steps) * size_t(b_eval), 0);
        targets.assign(size_t(steps) * size_t(b_eval), 0);
        mask.assign(size_t(steps) * size_t(b_eval), 0);
        for (int t = 0; t < steps; ++t) {
            for (int b = 0; b < b_eval; ++b) {
                long pos = long(b) * per_stripe + start + t;
                if (pos >= n_pred) continue;
                inputs[size_t(t) * size_t(b_eval) + size_t(b)] = ids[size_t(pos)];
                targets[size_t(t) * size_t(b_eval) + size_t(b)] = ids[size_t(pos) + 1];
                mask[size_t(t) * size_t(b_eval) + size_t(b)] = 1;
            }
        }
        long preds = 0;
        nll += net.window(inputs.data(), targets.data(), mask.data(), steps, b_eval, state,
                          nullptr, &preds);
        counted += preds;
    }
    require(counted == n_pred, Err::ShapeError, "validation accounting mismatch");
    return nll / std::log(2.0) / double(counted);
}

std::vector<ShapeEntry> shape_table(const std::vector<detail::Segment>& segments) {
    std::vector<ShapeEntry> shapes;
    for (const detail::Segment& s : segments) shapes.push_back({s.name, s.rows, s.cols});
    return shapes;
}

}  // namespace

std::vector<Checkpoint> train(const CorpusSplits& splits, const LMConfig& config,
                              std::ostream* log) {
    config.validate();
    require(!splits.train.empty(), Err::EmptyCorpus, "training split is empty");

    CharVocab vocab = CharVocab::build(splits.train);
    std::vector<int> train_ids = encode_stream(splits.train, vocab);
    std::vector<int> valid_ids = encode_stream(splits.validation, vocab);

    detail::LstmNet<float> net(int(vocab.size()), config.embedding_size, config.hidden_size,
                               config.num_layers);
    Rng rng(config.seed);
    net.init_params(rng);

    const long n_pred = long(train_ids.size()) - 1;
    const int batch = config.batch_size;
    const long per_stream = n_pred / batch;
    require(per_stream >= 1, Err::ConfigError,
            "training split too small for batch_size " + std::to_string(batch));

    std::vector<float> grad(net.param_count(), 0.0f);
    std::vector<int> inputs, targets;
    std::vector<Checkpoint> checkpoints;
    std::vector<float> best_params;
    double best_bpc = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    auto make_checkpoint = [&](int epoch, bool best, double bpc,
                               const std::vector<float>& params) {
        Checkpoint cp;
        cp.epoch = epoch;
        cp.best = best;
        cp.valid_bpc = bpc;
        cp.vocab = vocab;
        cp.config = config;
        cp.shapes = shape_table(net.segments);
        cp.parameters = params;
        return cp;
    };

    double lr = config.learning_rate;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        auto state = net.zero_state(batch);
        long step_index = 0;
        for (long start = 0; start < per_stream; start += config.bptt_len, ++step_index) {
            const int steps = int(std::min<long>(config.bptt_len, per_stream - start));
            inputs.resize(size_t(steps) * size_t(batch));
            targets.resize(size_t(steps) * size_t(batch));
            for (int t = 0; t < steps; ++t)
                for (int b = 0; b < batch; ++b) {
                    long pos = long(b) * per_stream + start + t;
                    inputs[size_t(t) * size_t(batch) + size_t(b)] = train_ids[size_t(pos)];
                    targets[size_t(t) * size_t(batch) + size_t(b)] = train_ids[size_t(pos) + 1];
                }
            std::fill(grad.begin(), grad.end(), 0.0f);
            long preds = 0;
            double nll = net.window(inputs.data(), targets.data(), nullptr, steps, batch, state,
                                    &grad, &preds);
            if (!std::isfinite(nll))
                raise(Err::DivergedTraining, "non-finite loss at epoch " + std::to_string(epoch) +
                                                 ", step " + std::to_string(step_index));
            // mean-loss SGD step with norm clipping
            const float scale = float(1.0 / double(preds));
            for (float& g : grad) g *= scale;
            clip_gradient(grad, config.grad_clip);
            const float step_lr = float(lr);
            for (size_t i = 0; i < net.params.size(); ++i) net.params[i] -= step_lr * grad[i];
        }

        double bpc = eval_bpc(net, valid_ids, batch, config.bptt_len);
        if (!std::isfinite(bpc))
            raise(Err::DivergedTraining, "non-finite validation loss at epoch " + std::to_string(epoch));
        if (log)
            (*log) << "epoch " << epoch << " valid_bpc " << bpc << " lr " << lr << "\n";
        if (bpc < best_bpc) {
            best_bpc = bpc;
            best_epoch = epoch;
            best_params = net.params;
        } else {
            lr *= config.lr_decay;  // anneal when validation stops improving
        }
        if (epoch % config.snapshot_every == 0)
            checkpoints.push_back(make_checkpoint(epoch, false, bpc, net.params));
    }
    checkpoints.push_back(make_checkpoint(best_epoch, true, best_bpc, best_params));
    return checkpoints;
}

Checkpoint initialize_model(const RawCorpus& train_text, const LMConfig& config) {
    config.validate();
    require(!train_text.empty(), Err::EmptyCorpus, "no text to build a vocabulary from");
    CharVocab vocab = CharVocab::build(train_text);
    detail::LstmNet<float> net(int(vocab.size()), config.embedding_size, config.hidden_size,
                               config.num_layers);
    Rng rng(config.seed);
    net.init_params(rng);
    Checkpoint cp;
    cp.epoch = 0;
    cp.best = false;
    cp.valid_bpc = std::log2(double(vocab.size()));  // uniform-guess baseline
    cp.vocab = std::move(vocab);
    cp.config = config;
    cp.shapes = shape_table(net.segments);
    cp.parameters = std::move(net.params);
    return cp;
}

// ---------------------------------------------------------------- runner

struct LmRunner::Impl {
    detail::LstmNet<float> net;
    CharVocab vocab;

    Impl(const Checkpoint& cp)
        : net(int(cp.vocab.size()), cp.config.embedding_size, cp.config.hidden_size,
              cp.config.num_layers),
          vocab(cp.vocab) {
        require(cp.parameters.size() == net.param_count(), Err::BadCheckpoint,
                "parameter count does not match the shape table");
        net.params = cp.parameters;
    }
};

LmRunner::LmRunner(const Checkpoint& checkpoint) : impl_(std::make_unique<Impl>(checkpoint)) {}
LmRunner::~LmRunner() = default;
LmRunner::LmRunner(LmRunner&&) noexcept = default;
LmRunner& LmRunner::operator=(LmRunner&&) noexcept = default;

const CharVocab& LmRunner::vocab() const { return impl_->vocab; }

LmState LmRunner::zero_state() const {
    LmState st;
    st.h.assign(size_t(impl_->net.layers), std::vector<float>(size_t(impl_->net.hidden), 0.0f));
    st.c = st.h;
    return st;
}

std::vector<float> LmRunner::step(LmState& state, int char_id) const {
    const auto& net = impl_->net;
    require(char_id >= 0 && char_id < net.vocab, Err::UnknownCharId,
            "character id " + std::to_string(char_id) + " outside vocabulary of size " +
                std::to_string(net.vocab));
    require(int(state.h.size()) == net.layers && int(state.c.size()) == net.layers,
            Err::ShapeError, "state layer count mismatch");
    auto st = net.zero_state(1);
    for (int l = 0; l < net.layers; ++l) {
        require(int(state.h[size_t(l)].size()) == net.hidden &&
                    int(state.c[size_t(l)].size()) == net.hidden,
                Err::ShapeError, "state width mismatch");
        for (int i = 0; i < net.hidden; ++i) {
            st.h[size_t(l)](i, 0) = state.h[size_t(l)][size_t(i)];
            st.c[size_t(l)](i, 0) = state.c[size_t(l)][size_t(i)];
        }
    }
    detail::LstmNet<float>::Mat probs;
    net.step(&char_id, 1, st, probs);
    for (int l = 0; l < net.layers; ++l)
        for (int i = 0; i < net.hidden; ++i) {
            state.h[size_t(l)][size_t(i)] = st.h[size_t(l)](i, 0);
            state.c[size_t(l)][size_t(i)] = st.c[size_t(l)](i, 0);
        }
    std::vector<float> out(size_t(net.vocab));
    for (int i = 0; i < net.vocab; ++i) out[size_t(i)] = probs(i, 0);
    return out;
}

std::pair<std::vector<float>, LmState> next_char_distribution(const Checkpoint& checkpoint,
                                                              const LmState& state, int char_id) {
    LmRunner runner(checkpoint);
    LmState next = state;
    std::vector<float> probs = runner.step(next, char_id);
    return {std::move(probs), std::move(next)};
}

double gradient_check(const LMConfig& config, const std::string& sample_utf8, int probes) {
    config.validate();
    std::vector<char32_t> sample = utf8_decode(sample_utf8);
    require(!sample.empty(), Err::ConfigError, "gradient check sample is empty");
    require(int(sample.size()) <= config.bptt_len, Err::ConfigError,
            "sample longer than bptt_len");

    RawCorpus tiny = RawCorpus::from_sentences({sample_utf8});
    CharVocab vocab = CharVocab::build(tiny);
    std::vector<int> ids = encode_stream(tiny, vocab);

    detail::LstmNet<double> net(int(vocab.size()), config.embedding_size, config.hidden_size,
                                config.num_layers);
    Rng rng(config.seed);
    net.init_params(rng);

    const int steps = int(ids.size()) - 1;
    std::vector<int> inputs(ids.begin(), ids.end() - 1);
    std::vector<int> targets(ids.begin() + 1, ids.end());

    std::vector<double> grad(net.param_count(), 0.0);
    auto loss_at = [&](std::vector<double>* g) {
        auto state = net.zero_state(1);
        return net.window(inputs.data(), targets.data(), nullptr, steps, 1, state, g, nullptr);
    };
    double loss = loss_at(&grad);

    // The symmetric difference carries rounding noise of about
    // eps * |loss| / h, so gradients far below that scale are compared
    // against a loss-proportional floor instead of their own magnitude.
    const double h = 1e-5;
    const double floor = 1e-5 * (1.0 + std::fabs(loss));
    double max_rel = 0.0;
    for (int probe = 0; probe < probes; ++probe) {
        size_t idx = size_t(rng.next_below(net.param_count()));
        double saved = net.params[idx];
        net.params[idx] = saved + h;
        double up = loss_at(nullptr);
        net.params[idx] = saved - h;
        double down = loss_at(nullptr);
        net.params[idx] = saved;
        double numeric = (up - down) / (2.0 * h);
        double analytic = grad[idx];
        double denom = std::max({std::fabs(numeric), std::fabs(analytic), floor});
        max_rel = std::max(max_rel, std::fabs(numeric - analytic) / denom);
    }
    return max_rel;
}

// ---------------------------------------------------------------- files

namespace {
constexpr char kCheckpointMagic[4] = {'C', 'L', 'M', 'B'};
}

void Checkpoint::save(const std::filesystem::path& path) const {
    json header;
    header["format"] = "clmb";
    header["epoch"] = epoch;
    header["best"] = best;
    header["valid_bpc"] = valid_bpc;
    header["dtype"] = "f32";
    header["layout"] = "col-major";
    json cfg;
    cfg["hidden_size"] = config.hidden_size;
    cfg["num_layers"] = config.num_layers;
    cfg["embedding_size"] = config.embedding_size;
    cfg["bptt_len"] = config.bptt_len;
    cfg["batch_size"] = config.batch_size;
    cfg["learning_rate"] = config.learning_rate;
    cfg["grad_clip"] = config.grad_clip;
    cfg["lr_decay"] = config.lr_decay;
    cfg["epochs"] = config.epochs;
    cfg["snapshot_every"] = config.snapshot_every;
    cfg["seed"] = config.seed;
    header["config"] = cfg;
    json vocab_json = json::array();
    for (char32_t cp : vocab.chars) vocab_json.push_back(uint32_t(cp));
    header["vocab"] = vocab_json;
    json shapes_json = json::array();
    for (const ShapeEntry& s : shapes)
        shapes_json.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
    header["shapes"] = shapes_json;

    std::string header_bytes = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    out.write(kCheckpointMagic, 4);
    uint32_t version = 1;
    uint64_t header_len = header_bytes.size();
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&header_len), 8);
    out.write(header_bytes.data(), std::streamsize(header_bytes.size()));
    out.write(reinterpret_cast<const char*>(parameters.data()),
              std::streamsize(parameters.size() * sizeof(float)));
    if (!out) raise(Err::IoError, "write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    require(in.good() && std::memcmp(magic, kCheckpointMagic, 4) == 0, Err::BadCheckpoint,
            path.string() + " is not a checkpoint file");
    uint32_t version = 0;
    uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&header_len), 8);
    require(version == 1, Err::BadCheckpoint, "unsupported checkpoint version");
    std::string header_bytes(header_len, '\0');
    in.read(header_bytes.data(), std::streamsize(header_len));
    require(in.good(), Err::BadCheckpoint, "truncated checkpoint header");

    json header = json::parse(header_bytes, nullptr, false);
    require(!header.is_discarded(), Err::BadCheckpoint, "unparsable checkpoint header");

    Checkpoint cp;
    cp.epoch = header.at("epoch").get<int>();
    cp.best = header.at("best").get<bool>();
    cp.valid_bpc = header.at("valid_bpc").get<double>();
    require(header.at("dtype").get<std::string>() == "f32", Err::BadCheckpoint,
            "unsupported parameter dtype");
    const json& cfg = header.at("config");
    cp.config.hidden_size = cfg.at("hidden_size").get<int>();
    cp.config.num_layers = cfg.at("num_layers").get<int>();
    cp.config.embedding_size = cfg.at("embedding_size").get<int>();
    cp.config.bptt_len = cfg.at("bptt_len").get<int>();
    cp.config.batch_size = cfg.at("batch_size").get<int>();
    cp.config.learning_rate = cfg.at("learning_rate").get<double>();
    cp.config.grad_clip = cfg.at("grad_clip").get<double>();
    cp.config.lr_decay = cfg.at("lr_decay").get<double>();
    cp.config.epochs = cfg.at("epochs").get<int>();
    cp.config.snapshot_every = cfg.at("snapshot_every").get<int>();
    cp.config.seed = cfg.at("seed").get<uint64_t>();

    std::vector<char32_t> chars;
    for (const json& c : header.at("vocab")) chars.push_back(char32_t(c.get<uint32_t>()));
    cp.vocab = CharVocab::from_chars(std::move(chars));

    size_t expected = 0;
    for (const json& s : header.at("shapes")) {
        ShapeEntry e{s.at("name").get<std::string>(), s.at("rows").get<int64_t>(),
                     s.at("cols").get<int64_t>()};
        expected += size_t(e.rows) * size_t(e.cols);
        cp.shapes.push_back(std::move(e));
    }
    cp.parameters.resize(expected);
    in.read(reinterpret_cast<char*>(cp.parameters.data()),
            std::streamsize(expected * sizeof(float)));
    require(in.gcount() == std::streamsize(expected * sizeof(float)), Err::BadCheckpoint,
            "parameter payload does not match the shape table");
    return cp;
}

}  // namespace catlm

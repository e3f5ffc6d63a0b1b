#pragma once

// Internal LSTM network used by charlm and the babbler. Templated on the
// scalar so training runs in single precision while the gradient check
// runs the identical code in double precision.

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "catlm/error.hpp"
#include "catlm/rng.hpp"

namespace catlm::detail {

struct Segment {
    std::string name;
    long rows = 0, cols = 0;
    size_t offset = 0;

    size_t count() const { return size_t(rows) * size_t(cols); }
};

// Parameter layout, in checkpoint payload order (column-major within each
// named shape): embedding, then per layer w_ih / w_hh / bias, then the
// output projection.
inline std::vector<Segment> lstm_layout(int vocab, int embed, int hidden, int layers) {
    std::vector<Segment> segments;
    size_t offset = 0;
    auto add = [&](std::string name, long rows, long cols) {
        segments.push_back({std::move(name), rows, cols, offset});
        offset += size_t(rows) * size_t(cols);
    };
    add("embedding", embed, vocab);
    for (int l = 0; l < layers; ++l) {
        int in = (l == 0) ? embed : hidden;
        add("w_ih." + std::to_string(l), 4 * hidden, in);
        add("w_hh." + std::to_string(l), 4 * hidden, hidden);
        add("bias." + std::to_string(l), 4 * hidden, 1);
    }
    add("w_out", vocab, hidden);
    add("b_out", vocab, 1);
    return segments;
}

template <typename T>
struct LstmNet {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using Arr = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic>;
    using MapMat = Eigen::Map<Mat>;
    using CMapMat = Eigen::Map<const Mat>;

    int vocab, embed, hidden, layers;
    std::vector<Segment> segments;
    std::vector<T> params;

    LstmNet(int vocab_size, int embedding_size, int hidden_size, int num_layers)
        : vocab(vocab_size), embed(embedding_size), hidden(hidden_size), layers(num_layers),
          segments(lstm_layout(vocab_size, embedding_size, hidden_size, num_layers)) {
        params.assign(param_count(), T(0));
    }

    size_t param_count() const { return segments.back().offset + segments.back().count(); }

    MapMat seg(std::vector<T>& store, size_t idx) const {
        const Segment& s = segments[idx];
        return MapMat(store.data() + s.offset, s.rows, s.cols);
    }
    CMapMat seg(const std::vector<T>& store, size_t idx) const {
        const Segment& s = segments[idx];
        return CMapMat(store.data() + s.offset, s.rows, s.cols);
    }

    size_t idx_embedding() const { return 0; }
    size_t idx_w_ih(int l) const { return 1 + size_t(l) * 3; }
    size_t idx_w_hh(int l) const { return 2 + size_t(l) * 3; }
    size_t idx_bias(int l) const { return 3 + size_t(l) * 3; }
    size_t idx_w_out() const { return segments.size() - 2; }
    size_t idx_b_out() const { return segments.size() - 1; }

    // Uniform init scaled by fan-in; forget-gate bias starts at 1 so the
    // cell path is open early in training. Output layer bias stays zero.
    void init_params(Rng& rng) {
        auto fill_uniform = [&](size_t idx, double r) {
            MapMat m = seg(params, idx);
            for (long j = 0; j < m.cols(); ++j)
                for (long i = 0; i < m.rows(); ++i)
                    m(i, j) = T((rng.next_double() * 2.0 - 1.0) * r);
        };
        fill_uniform(idx_embedding(), 0.1);
        for (int l = 0; l < layers; ++l) {
            double r = 1.0 / std::sqrt(double(hidden));
            fill_uniform(idx_w_ih(l), r);
            fill_uniform(idx_w_hh(l), r);
            MapMat b = seg(params, idx_bias(l));
            b.setZero();
            b.block(hidden, 0, hidden, 1).setConstant(T(1));  // forget gate
        }
        fill_uniform(idx_w_out(), 1.0 / std::sqrt(double(hidden)));
        seg(params, idx_b_out()).setZero();
    }

    struct State {
        std::vector<Mat> h, c;  // hidden x batch per layer
    };

    State zero_state(int batch) const {
        State st;
        st.h.assign(size_t(layers), Mat::Zero(hidden, batch));
        st.c.assign(size_t(layers), Mat::Zero(hidden, batch));
        return st;
    }

    static Arr sigmoid(const Arr& x) {
        return ((x >= T(0)).select(
            T(1) / (T(1) + (-x).exp()),
            x.exp() / (T(1) + x.exp())));
    }

    struct StepCache {
        Mat x;                 // input to layer
        Arr i, f, g, o;        // gate activations
        Mat c_prev, h_prev;
        Arr tanh_c;
    };

    // Runs `steps` timesteps over a batch. inputs/targets are indexed
    // [t * batch + b]; mask (optional) marks predictions that count.
    // Returns the summed negative log-likelihood in nats over counted
    // positions and the number of counted positions via predictions.
    // When grad is non-null, accumulates d(sum nll)/d(params) into it.
    double window(const int* inputs, const int* targets, const uint8_t* mask, int steps, int batch,
                  State& state, std::vector<T>* grad, long* predictions) const {
        const int h_size = hidden;
        CMapMat emb = seg(params, idx_embedding());
        CMapMat w_out = seg(params, idx_w_out());
        CMapMat b_out = seg(params, idx_b_out());

        std::vector<std::vector<StepCache>> cache;  // [t][layer]
        std::vector<Mat> probs_cache(grad ? size_t(steps) : size_t(0));
        if (grad) cache.resize(size_t(steps));

        double nll = 0.0;
        long counted = 0;
        Mat x(embed, batch), gates(4 * h_size, batch), logits(vocab, batch), probs(vocab, batch);

        for (int t = 0; t < steps; ++t) {
            for (int b = 0; b < batch; ++b) x.col(b) = emb.col(inputs[size_t(t) * batch + b]);
            if (grad) cache[size_t(t)].resize(size_t(layers));
            Mat layer_in = x;
            for (int l = 0; l < layers; ++l) {
                CMapMat w_ih = seg(params, idx_w_ih(l));
                CMapMat w_hh = seg(params, idx_w_hh(l));
                CMapMat bias = seg(params, idx_bias(l));
                gates.noalias() = w_ih * layer_in + w_hh * state.h[size_t(l)];
                gates.colwise() += bias.col(0);
                Arr gi = sigmoid(gates.topRows(h_size).array());
                Arr gf = sigmoid(gates.middleRows(h_size, h_size).array());
                Arr gg = gates.middleRows(2 * h_size, h_size).array().tanh();
                Arr go = sigmoid(gates.bottomRows(h_size).array());
                Mat c_new = (gf * state.c[size_t(l)].array() + gi * gg).matrix();
                Arr tanh_c = c_new.array().tanh();
                Mat h_new = (go * tanh_c).matrix();
                if (grad) {
                    StepCache& sc = cache[size_t(t)][size_t(l)];
                    sc.x = layer_in;
                    sc.i = gi;
                    sc.f = gf;
                    sc.g = gg;
                    sc.o = go;
                    sc.c_prev = state.c[size_t(l)];
                    sc.h_prev = state.h[size_t(l)];
                    sc.tanh_c = tanh_c;
                }
                state.c[size_t(l)] = std::move(c_new);
                state.h[size_t(l)] = h_new;
                layer_in = std::move(h_new);
            }
            logits.noalias() = w_out * layer_in;
            logits.colwise() += b_out.col(0);
            for (int b = 0; b < batch; ++b) {
                T m = logits.col(b).maxCoeff();
                probs.col(b) = (logits.col(b).array() - m).exp();
                probs.col(b) /= probs.col(b).sum();
                assert(std::fabs(double(probs.col(b).sum()) - 1.0) < 1e-4);
            }
            for (int b = 0; b < batch; ++b) {
                if (mask && !mask[size_t(t) * batch + b]) continue;
                T p = probs(targets[size_t(t) * batch + b], b);
                nll -= std::log(double(std::max(p, T(1e-30))));
                ++counted;
            }
            if (grad) probs_cache[size_t(t)] = probs;
        }
        if (predictions) *predictions = counted;
        if (!grad) return nll;

        // backward
        MapMat d_emb = seg(*grad, idx_embedding());
        MapMat d_w_out = seg(*grad, idx_w_out());
        MapMat d_b_out = seg(*grad, idx_b_out());
        std::vector<Mat> dh_rec(size_t(layers), Mat::Zero(h_size, batch));
        std::vector<Mat> dc_rec(size_t(layers), Mat::Zero(h_size, batch));
        Mat dlogits(vocab, batch), dh(h_size, batch), dgates(4 * h_size, batch);

        for (int t = steps - 1; t >= 0; --t) {
            dlogits = probs_cache[size_t(t)];
            for (int b = 0; b < batch; ++b) {
                if (mask && !mask[size_t(t) * batch + b]) {
                    dlogits.col(b).setZero();
                    continue;
                }
                dlogits(targets[size_t(t) * batch + b], b) -= T(1);
            }
            const StepCache& top = cache[size_t(t)].back();
            Mat h_top = (top.o * top.tanh_c).matrix();  // h = o . tanh(c)
            d_w_out.noalias() += dlogits * h_top.transpose();
            d_b_out.col(0) += dlogits.rowwise().sum();
            Mat d_from_above = seg(params, idx_w_out()).transpose() * dlogits;

            for (int l = layers - 1; l >= 0; --l) {
                const StepCache& sc = cache[size_t(t)][size_t(l)];
                dh = d_from_above + dh_rec[size_t(l)];
                Arr d_o = dh.array() * sc.tanh_c;
                Arr dc = dh.array() * sc.o * (T(1) - sc.tanh_c.square()) + dc_rec[size_t(l)].array();
                Arr d_i = dc * sc.g;
                Arr d_g = dc * sc.i;
                Arr d_f = dc * sc.c_prev.array();
                dc_rec[size_t(l)] = (dc * sc.f).matrix();
                dgates.topRows(h_size) = (d_i * sc.i * (T(1) - sc.i)).matrix();
                dgates.middleRows(h_size, h_size) = (d_f * sc.f * (T(1) - sc.f)).matrix();
                dgates.middleRows(2 * h_size, h_size) = (d_g * (T(1) - sc.g.square())).matrix();
                dgates.bottomRows(h_size) = (d_o * sc.o * (T(1) - sc.o)).matrix();

                seg(*grad, idx_w_ih(l)).noalias() += dgates * sc.x.transpose();
                seg(*grad, idx_w_hh(l)).noalias() += dgates * sc.h_prev.transpose();
                seg(*grad, idx_bias(l)).col(0) += dgates.rowwise().sum();
                dh_rec[size_t(l)].noalias() = seg(params, idx_w_hh(l)).transpose() * dgates;
                // shape changes at the bottom layer (embedding width), so
                // this assignment must be allowed to resize
                d_from_above = seg(params, idx_w_ih(l)).transpose() * dgates;
            }
            for (int b = 0; b < batch; ++b)
                d_emb.col(inputs[size_t(t) * batch + b]) += d_from_above.col(b);
        }
        return nll;
    }

    // Forward one character for every batch column; fills probs (vocab x batch).
    void step(const int* ids, int batch, State& state, Mat& probs) const {
        CMapMat emb = seg(params, idx_embedding());
        Mat layer_in(embed, batch);
        for (int b = 0; b < batch; ++b) layer_in.col(b) = emb.col(ids[b]);
        Mat gates(4 * hidden, batch);
        for (int l = 0; l < layers; ++l) {
            gates.noalias() = seg(params, idx_w_ih(l)) * layer_in +
                              seg(params, idx_w_hh(l)) * state.h[size_t(l)];
            gates.colwise() += seg(params, idx_bias(l)).col(0);
            Arr gi = sigmoid(gates.topRows(hidden).array());
            Arr gf = sigmoid(gates.middleRows(hidden, hidden).array());
            Arr gg = gates.middleRows(2 * hidden, hidden).array().tanh();
            Arr go = sigmoid(gates.bottomRows(hidden).array());
            state.c[size_t(l)] = (gf * state.c[size_t(l)].array() + gi * gg).matrix();
            Arr tanh_c = state.c[size_t(l)].array().tanh();
            state.h[size_t(l)] = (go * tanh_c).matrix();
            layer_in = state.h[size_t(l)];
        }
        Mat logits = seg(params, idx_w_out()) * layer_in;
        logits.colwise() += seg(params, idx_b_out()).col(0);
        probs.resize(vocab, batch);
        for (int b = 0; b < batch; ++b) {
            typename Mat::Scalar m = logits.col(b).maxCoeff();
            probs.col(b) = (logits.col(b).array() - m).exp();
            probs.col(b) /= probs.col(b).sum();
            assert(std::fabs(double(probs.col(b).sum()) - 1.0) < 1e-4);
        }
    }
};

}  // namespace catlm::detail

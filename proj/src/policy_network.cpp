#include "damarl/policy_network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "damarl/error.hpp"

namespace damarl {

namespace {

// tanh through the vectorized exp; saturates cleanly at +-1 on overflow.
Matrix tanh_of(const Matrix& x) { return (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix(); }

// dL/dpre for y = tanh(pre), given y and dL/dy.
Matrix tanh_backward(const Matrix& y, const Matrix& dy) {
    return (dy.array() * (1.0 - y.array().square())).matrix();
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_rows(const Matrix& m, int rows, const char* what) {
    if (m.rows() != rows) {
        throw ContractError(std::string("actor: ") + what + " has " + std::to_string(m.rows()) +
                            " rows, expected " + std::to_string(rows));
    }
}

// Softmax over the present slots of each column; absent slots get weight 0.
Matrix masked_softmax(const Matrix& logits, const std::array<bool, kSlots>& present) {
    Matrix w = Matrix::Zero(logits.rows(), logits.cols());
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        double peak = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < kSlots; ++j) {
            if (present[static_cast<std::size_t>(j)]) peak = std::max(peak, logits(j, b));
        }
        double total = 0.0;
        for (int j = 0; j < kSlots; ++j) {
            if (!present[static_cast<std::size_t>(j)]) continue;
            w(j, b) = std::exp(logits(j, b) - peak);
            total += w(j, b);
        }
        w.col(b) /= total;
    }
    return w;
}

struct AttentionResult {
    Matrix queries, keys, values;
    std::vector<Matrix> weights;
    Matrix heads_out;
};

} // namespace

Matrix AttentionOutput::mean_weights() const {
    Matrix out = Matrix::Zero(weights.front().rows(), weights.front().cols());
    for (const auto& w : weights) out += w;
    return out / static_cast<double>(weights.size());
}

Eigen::VectorXd softmax_backward(const Eigen::VectorXd& w, const Eigen::VectorXd& dw) {
    const double inner = w.dot(dw);
    return (w.array() * (dw.array() - inner)).matrix();
}

Actor::Actor(const ActorArch& arch, std::uint64_t seed) : arch_(arch) {
    if (arch.input_dim < 1 || arch.hidden < 1 || arch.heads < 1 || arch.head_dim < 1 || arch.mix_dim < 1) {
        throw ValidationError("actor: all layer sizes must be positive");
    }
    const int qkv = arch.heads * arch.head_dim;
    enc1_ = nn::Linear::create(params_, "encoder.0", arch.input_dim, arch.hidden);
    enc2_ = nn::Linear::create(params_, "encoder.1", arch.hidden, arch.hidden);
    wq_ = nn::Linear::create(params_, "attention.query", arch.hidden, qkv, false);
    wk_ = nn::Linear::create(params_, "attention.key", arch.hidden, qkv, false);
    wv_ = nn::Linear::create(params_, "attention.value", arch.hidden, qkv, false);
    mix_ = nn::Linear::create(params_, "attention.mix", qkv, arch.mix_dim);
    dec1_ = nn::Linear::create(params_, "decoder.0", arch.hidden + arch.mix_dim, arch.hidden);
    dec2_ = nn::Linear::create(params_, "decoder.1", arch.hidden, kActionDim);

    std::mt19937_64 rng(seed);
    for (const auto* l : {&enc1_, &enc2_, &wq_, &wk_, &wv_, &mix_, &dec1_, &dec2_}) l->init_uniform(params_, rng);
}

Matrix Actor::encode(const Matrix& x) const {
    require_rows(x, arch_.input_dim, "encoder input");
    return tanh_of(enc2_.forward(params_, tanh_of(enc1_.forward(params_, x))));
}

static AttentionResult run_attention(const nn::ParamStore& p, const nn::Linear& wq, const nn::Linear& wk,
                                     const nn::Linear& wv, int heads, int head_dim, const Matrix& self_emb,
                                     const Matrix& all_emb, const std::array<bool, kSlots>& present) {
    const Eigen::Index batch = self_emb.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    AttentionResult r;
    r.queries = wq.forward(p, self_emb);
    r.keys = wk.forward(p, all_emb);
    r.values = wv.forward(p, all_emb);
    r.heads_out = Matrix::Zero(static_cast<Eigen::Index>(heads) * head_dim, batch);
    for (int m = 0; m < heads; ++m) {
        const Eigen::Index row = static_cast<Eigen::Index>(m) * head_dim;
        const auto q = r.queries.middleRows(row, head_dim);
        Matrix logits = Matrix::Zero(kSlots, batch);
        for (int j = 0; j < kSlots; ++j) {
            const auto k = r.keys.block(row, j * batch, head_dim, batch);
            logits.row(j) = (q.array() * k.array()).colwise().sum().matrix() * scale;
        }
        Matrix w = masked_softmax(logits, present);
        auto out = r.heads_out.middleRows(row, head_dim);
        for (int j = 0; j < kSlots; ++j) {
            if (!present[static_cast<std::size_t>(j)]) continue;
            const auto v = r.values.block(row, j * batch, head_dim, batch);
            out.array() += v.array().rowwise() * w.row(j).array();
        }
        r.weights.push_back(std::move(w));
    }
    return r;
}

AttentionOutput Actor::attend(const Matrix& self_emb, const Matrix& pred_emb, const Matrix& fol_emb,
                              bool has_predecessor, bool has_follower) const {
    require_rows(self_emb, arch_.hidden, "self embedding");
    require_rows(pred_emb, arch_.hidden, "predecessor embedding");
    require_rows(fol_emb, arch_.hidden, "follower embedding");
    const Eigen::Index batch = self_emb.cols();
    if (batch == 0) throw ContractError("actor: empty attention batch");
    if (pred_emb.cols() != batch || fol_emb.cols() != batch) throw ContractError("actor: batch size mismatch");
    Matrix all(arch_.hidden, 3 * batch);
    all << self_emb, pred_emb, fol_emb;
    auto r = run_attention(params_, wq_, wk_, wv_, arch_.heads, arch_.head_dim, self_emb, all,
                           {true, has_predecessor, has_follower});
    AttentionOutput out;
    out.weights = std::move(r.weights);
    out.context = mix_.forward(params_, r.heads_out);
    return out;
}

Matrix Actor::squash(const Matrix& raw) const {
    const auto& b = arch_.bounds;
    const double mid = 0.5 * (b.u_max + b.u_min);
    const double half = 0.5 * (b.u_max - b.u_min);
    Matrix out(kActionDim, raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        out(0, c) = b.alpha_max * sigmoid(raw(0, c));
        out(1, c) = b.beta_max * sigmoid(raw(1, c));
        out(2, c) = mid + half * std::tanh(raw(2, c));
    }
    return out;
}

Matrix Actor::decode(const Matrix& embedding, const Matrix& context) const {
    require_rows(embedding, arch_.hidden, "decoder embedding");
    require_rows(context, arch_.mix_dim, "decoder context");
    Matrix in(arch_.hidden + arch_.mix_dim, embedding.cols());
    in << embedding, context;
    return squash(dec2_.forward(params_, tanh_of(dec1_.forward(params_, in))));
}

Matrix Actor::forward(const ActorBatch& batch, ActorTape* tape) const {
    const Eigen::Index n = batch.size();
    if (n == 0) throw ContractError("actor: empty batch");
    require_rows(batch.self, arch_.input_dim, "self input");
    require_rows(batch.predecessor, arch_.input_dim, "predecessor input");
    require_rows(batch.follower, arch_.input_dim, "follower input");
    if (batch.predecessor.cols() != n || batch.follower.cols() != n) throw ContractError("actor: batch size mismatch");

    ActorTape local;
    ActorTape& t = tape ? *tape : local;
    t.enc_in.resize(arch_.input_dim, 3 * n);
    t.enc_in << batch.self, batch.predecessor, batch.follower;
    t.enc_h1 = tanh_of(enc1_.forward(params_, t.enc_in));
    t.enc_out = tanh_of(enc2_.forward(params_, t.enc_h1));
    const Matrix self_emb = t.enc_out.leftCols(n);

    auto r = run_attention(params_, wq_, wk_, wv_, arch_.heads, arch_.head_dim, self_emb, t.enc_out,
                           {true, batch.has_predecessor, batch.has_follower});
    t.queries = std::move(r.queries);
    t.keys = std::move(r.keys);
    t.values = std::move(r.values);
    t.weights = std::move(r.weights);
    t.heads_out = std::move(r.heads_out);
    t.context = mix_.forward(params_, t.heads_out);

    t.dec_in.resize(arch_.hidden + arch_.mix_dim, n);
    t.dec_in << self_emb, t.context;
    t.dec_h1 = tanh_of(dec1_.forward(params_, t.dec_in));
    t.raw = dec2_.forward(params_, t.dec_h1);
    t.valid = tape != nullptr;
    return squash(t.raw);
}

void Actor::backward(const ActorTape& t, const Matrix& d_actions, Vector& grad) const {
    if (!t.valid) throw ContractError("actor: backward called without a recorded forward pass");
    const Eigen::Index n = t.raw.cols();
    if (d_actions.rows() != kActionDim || d_actions.cols() != n) throw ContractError("actor: gradient shape mismatch");
    if (grad.size() != params_.size()) throw ContractError("actor: gradient buffer size mismatch");

    // squash
    const auto& b = arch_.bounds;
    const double half = 0.5 * (b.u_max - b.u_min);
    Matrix d_raw(kActionDim, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const double sa = sigmoid(t.raw(0, c));
        const double sb = sigmoid(t.raw(1, c));
        const double tu = std::tanh(t.raw(2, c));
        d_raw(0, c) = d_actions(0, c) * b.alpha_max * sa * (1.0 - sa);
        d_raw(1, c) = d_actions(1, c) * b.beta_max * sb * (1.0 - sb);
        d_raw(2, c) = d_actions(2, c) * half * (1.0 - tu * tu);
    }

    // decoder
    const Matrix d_h1 = dec2_.backward(params_, t.dec_h1, d_raw, grad);
    const Matrix d_dec_in = dec1_.backward(params_, t.dec_in, tanh_backward(t.dec_h1, d_h1), grad);
    Matrix d_enc_out = Matrix::Zero(arch_.hidden, 3 * n);
    d_enc_out.leftCols(n) += d_dec_in.topRows(arch_.hidden);
    const Matrix d_context = d_dec_in.bottomRows(arch_.mix_dim);

    // head mixing
    const Matrix d_heads = mix_.backward(params_, t.heads_out, d_context, grad);

    // per-head scaled dot-product attention
    const int dk = arch_.head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Matrix d_q = Matrix::Zero(t.queries.rows(), n);
    Matrix d_k = Matrix::Zero(t.keys.rows(), 3 * n);
    Matrix d_v = Matrix::Zero(t.values.rows(), 3 * n);
    for (int m = 0; m < arch_.heads; ++m) {
        const Eigen::Index row = static_cast<Eigen::Index>(m) * dk;
        const Matrix& w = t.weights[static_cast<std::size_t>(m)];
        const auto d_out = d_heads.middleRows(row, dk);
        const auto q = t.queries.middleRows(row, dk);

        Matrix d_w(kSlots, n);
        for (int j = 0; j < kSlots; ++j) {
            const auto v = t.values.block(row, j * n, dk, n);
            d_w.row(j) = (d_out.array() * v.array()).colwise().sum().matrix();
            d_v.block(row, j * n, dk, n).array() = d_out.array().rowwise() * w.row(j).array();
        }
        // softmax Jacobian per column
        const Eigen::RowVectorXd inner = (w.array() * d_w.array()).colwise().sum().matrix();
        const Matrix d_logits = (w.array() * (d_w.rowwise() - inner).array()).matrix() * scale;

        auto dq = d_q.middleRows(row, dk);
        for (int j = 0; j < kSlots; ++j) {
            const auto k = t.keys.block(row, j * n, dk, n);
            dq.array() += k.array().rowwise() * d_logits.row(j).array();
            d_k.block(row, j * n, dk, n).array() = q.array().rowwise() * d_logits.row(j).array();
        }
    }
    d_enc_out.leftCols(n) += wq_.backward(params_, t.enc_out.leftCols(n), d_q, grad);
    d_enc_out += wk_.backward(params_, t.enc_out, d_k, grad);
    d_enc_out += wv_.backward(params_, t.enc_out, d_v, grad);

    // encoder
    const Matrix d_h = enc2_.backward(params_, t.enc_h1, tanh_backward(t.enc_out, d_enc_out), grad);
    enc1_.backward_params(params_, t.enc_in, tanh_backward(t.enc_h1, d_h), grad);
}

ActionTriple Actor::act(const ActorBatch& one) const {
    if (one.size() != 1) throw ContractError("actor: act expects a single sample");
    const Matrix a = forward(one);
    return {a(0, 0), a(1, 0), a(2, 0)};
}

Critic::Critic(const CriticArch& arch, std::uint64_t seed) : arch_(arch) {
    if (arch.input_dim < 1 || arch.hidden < 1) throw ValidationError("critic: layer sizes must be positive");
    l1_ = nn::Linear::create(params_, "critic.0", arch.input_dim, arch.hidden);
    l2_ = nn::Linear::create(params_, "critic.1", arch.hidden, arch.hidden);
    l3_ = nn::Linear::create(params_, "critic.2", arch.hidden, 1);
    std::mt19937_64 rng(seed);
    for (const auto* l : {&l1_, &l2_, &l3_}) l->init_uniform(params_, rng);
}

Matrix Critic::forward(const Matrix& input, CriticTape* tape) const {
    if (input.rows() != arch_.input_dim) {
        throw ContractError("critic: input has " + std::to_string(input.rows()) + " rows, expected " +
                            std::to_string(arch_.input_dim));
    }
    CriticTape local;
    CriticTape& t = tape ? *tape : local;
    t.x = input;
    t.h1 = tanh_of(l1_.forward(params_, t.x));
    t.h2 = tanh_of(l2_.forward(params_, t.h1));
    t.valid = tape != nullptr;
    return l3_.forward(params_, t.h2);
}

Matrix Critic::backward(const CriticTape& t, const Matrix& d_q, Vector* grad, bool want_input_grad) const {
    if (!t.valid) throw ContractError("critic: backward called without a recorded forward pass");
    if (d_q.rows() != 1 || d_q.cols() != t.x.cols()) throw ContractError("critic: gradient shape mismatch");
    if (grad == nullptr) {
        if (!want_input_grad) return {};
        const Matrix d_h2 = params_.mat(l3_.weight).transpose() * d_q;
        const Matrix d_h1 = params_.mat(l2_.weight).transpose() * tanh_backward(t.h2, d_h2);
        return params_.mat(l1_.weight).transpose() * tanh_backward(t.h1, d_h1);
    }
    if (grad->size() != params_.size()) throw ContractError("critic: gradient buffer size mismatch");
    const Matrix d_h2 = l3_.backward(params_, t.h2, d_q, *grad);
    const Matrix d_h1 = l2_.backward(params_, t.h1, tanh_backward(t.h2, d_h2), *grad);
    const Matrix d_pre1 = tanh_backward(t.h1, d_h1);
    if (want_input_grad) return l1_.backward(params_, t.x, d_pre1, *grad);
    l1_.backward_params(params_, t.x, d_pre1, *grad);
    return {};
}

Matrix Critic::input_grad_rows(const CriticTape& t, const Matrix& d_q, int first, int count) const {
    if (!t.valid) throw ContractError("critic: backward called without a recorded forward pass");
    if (d_q.rows() != 1 || d_q.cols() != t.x.cols()) throw ContractError("critic: gradient shape mismatch");
    if (first < 0 || count < 0 || first + count > arch_.input_dim) throw ContractError("critic: input rows out of range");
    const Matrix d_h2 = params_.mat(l3_.weight).transpose() * d_q;
    const Matrix d_h1 = params_.mat(l2_.weight).transpose() * tanh_backward(t.h2, d_h2);
    return params_.mat(l1_.weight).middleCols(first, count).transpose() * tanh_backward(t.h1, d_h1);
}

} // namespace damarl

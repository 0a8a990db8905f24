#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "damarl/action.hpp"
#include "damarl/nn/params.hpp"

namespace damarl {

using nn::Matrix;
using nn::Vector;

struct ActorArch {
    int input_dim = 20; ///< 5 + 3k, or 5 when planned actions are withheld
    int hidden = 64;    ///< encoder and decoder width
    int heads = 2;
    int head_dim = 64;  ///< per-head query/key/value size
    int mix_dim = 64;   ///< output of the head-mixing layer
    ActionBounds bounds;

    friend bool operator==(const ActorArch&, const ActorArch&) = default;
};

/// Attention slots: the agent itself, its predecessor and its follower.
enum AttentionSlot : int { kSelf = 0, kPredecessor = 1, kFollower = 2 };
inline constexpr int kSlots = 3;

/// A batch of actor inputs, one column per sample. Neighbour columns carry the
/// neighbour's environment features with the planned-action part zeroed.
struct ActorBatch {
    Matrix self;
    Matrix predecessor;
    Matrix follower;
    bool has_predecessor = true;
    bool has_follower = true;

    [[nodiscard]] Eigen::Index size() const { return self.cols(); }
};

struct AttentionOutput {
    /// weights[m] is kSlots x B: head m's softmax weights per slot. Masked
    /// slots carry exactly 0.
    std::vector<Matrix> weights;
    Matrix context; ///< mix_dim x B

    /// Head-averaged weights, still summing to 1 per column.
    [[nodiscard]] Matrix mean_weights() const;
};

/// Intermediate values kept by a forward pass for the reverse sweep.
struct ActorTape {
    bool valid = false;
    Matrix enc_in, enc_h1, enc_out; // encoder over [self | pred | follower]
    Matrix queries, keys, values;   // heads*head_dim x B (queries), x 3B (keys, values)
    std::vector<Matrix> weights;
    Matrix heads_out;               // heads*head_dim x B
    Matrix context;
    Matrix dec_in, dec_h1;
    Matrix raw;                     // 3 x B, pre-squash
};

/// Encoder -> multi-head attention over {self, predecessor, follower} ->
/// decoder, emitting squashed (alpha, beta, u_hat).
class Actor {
public:
    Actor() = default;
    Actor(const ActorArch& arch, std::uint64_t seed);

    /// Shared encoder, one column per input.
    [[nodiscard]] Matrix encode(const Matrix& x) const;
    [[nodiscard]] AttentionOutput attend(const Matrix& self_emb, const Matrix& pred_emb, const Matrix& fol_emb,
                                         bool has_predecessor, bool has_follower) const;
    /// Decoder over [embedding; context], returning squashed actions (3 x B).
    [[nodiscard]] Matrix decode(const Matrix& embedding, const Matrix& context) const;

    /// Full forward pass; squashed actions 3 x B. Fills `tape` when given.
    Matrix forward(const ActorBatch& batch, ActorTape* tape = nullptr) const;
    /// Reverse sweep from dL/d(actions). Accumulates into `grad`.
    void backward(const ActorTape& tape, const Matrix& d_actions, Vector& grad) const;

    /// Single-sample helper.
    [[nodiscard]] ActionTriple act(const ActorBatch& one) const;

    [[nodiscard]] Matrix squash(const Matrix& raw) const;

    nn::ParamStore& params() { return params_; }
    [[nodiscard]] const nn::ParamStore& params() const { return params_; }
    [[nodiscard]] const ActorArch& arch() const { return arch_; }

private:
    ActorArch arch_;
    nn::ParamStore params_;
    nn::Linear enc1_, enc2_, wq_, wk_, wv_, mix_, dec1_, dec2_;
};

struct CriticArch {
    int input_dim = 0; ///< global augmented state + 3 * agents
    int hidden = 256;

    friend bool operator==(const CriticArch&, const CriticArch&) = default;
};

struct CriticTape {
    bool valid = false;
    Matrix x, h1, h2;
};

/// Centralized Q(x, a_1..a_N): two tanh hidden layers and a linear head.
class Critic {
public:
    Critic() = default;
    Critic(const CriticArch& arch, std::uint64_t seed);

    /// 1 x B values.
    Matrix forward(const Matrix& input, CriticTape* tape = nullptr) const;
    /// Accumulates parameter gradients into `grad` (if non-null) and returns
    /// dL/d(input) when `want_input_grad`.
    Matrix backward(const CriticTape& tape, const Matrix& d_q, Vector* grad, bool want_input_grad) const;
    /// Rows [first, first + count) of dL/d(input), without parameter gradients.
    Matrix input_grad_rows(const CriticTape& tape, const Matrix& d_q, int first, int count) const;

    nn::ParamStore& params() { return params_; }
    [[nodiscard]] const nn::ParamStore& params() const { return params_; }
    [[nodiscard]] const CriticArch& arch() const { return arch_; }

private:
    CriticArch arch_;
    nn::ParamStore params_;
    nn::Linear l1_, l2_, l3_;
};

/// Softmax backward for one column: given weights w and upstream dL/dw,
/// returns dL/dlogits. Masked entries (w == 0) receive 0.
Eigen::VectorXd softmax_backward(const Eigen::VectorXd& w, const Eigen::VectorXd& dw);

} // namespace damarl

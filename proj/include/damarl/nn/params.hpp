#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace damarl::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

struct ParamBlock {
    std::string name;
    int rows = 0;
    int cols = 0;
    Eigen::Index offset = 0;

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
};

/// All parameters of one network in a single flat vector, partitioned into
/// named column-major blocks. Gradients and optimizer moments share the same
/// layout, so copying, soft updates and serialization act on one vector.
class ParamStore {
public:
    int add(std::string name, int rows, int cols);

    [[nodiscard]] const std::vector<ParamBlock>& blocks() const { return blocks_; }
    [[nodiscard]] const ParamBlock& block(int id) const { return blocks_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] Eigen::Index size() const { return values_.size(); }

    Vector& values() { return values_; }
    [[nodiscard]] const Vector& values() const { return values_; }

    MatrixMap mat(int id) { return view(values_, block(id)); }
    [[nodiscard]] ConstMatrixMap mat(int id) const { return view(values_, block(id)); }

    [[nodiscard]] Vector zeros() const { return Vector::Zero(values_.size()); }

    static MatrixMap view(Vector& flat, const ParamBlock& b) { return {flat.data() + b.offset, b.rows, b.cols}; }
    static ConstMatrixMap view(const Vector& flat, const ParamBlock& b) {
        return {flat.data() + b.offset, b.rows, b.cols};
    }

    /// Shapes and names agree (values may differ).
    [[nodiscard]] bool same_layout(const ParamStore& other) const;

private:
    std::vector<ParamBlock> blocks_;
    Vector values_;
};

/// Affine layer y = W x + b over column batches.
struct Linear {
    int weight = -1;
    int bias = -1;
    int in = 0;
    int out = 0;

    static Linear create(ParamStore& store, const std::string& name, int in, int out, bool with_bias = true);

    [[nodiscard]] Matrix forward(const ParamStore& p, const Matrix& x) const;
    /// Accumulates dW, db into `grad` and returns dL/dx.
    Matrix backward(const ParamStore& p, const Matrix& x, const Matrix& dy, Vector& grad) const;
    /// Accumulates dW, db only.
    void backward_params(const ParamStore& p, const Matrix& x, const Matrix& dy, Vector& grad) const;

    /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weight and bias.
    void init_uniform(ParamStore& p, std::mt19937_64& rng) const;
};

/// Adaptive-moment optimizer over one ParamStore.
class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// Gradient descent step on `params` using `grad`.
    void step(Vector& params, const Vector& grad);

    [[nodiscard]] double learning_rate() const { return lr_; }

private:
    double lr_ = 0.0;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::int64_t t_ = 0;
    Vector m_;
    Vector v_;
};

/// target <- kappa * online + (1 - kappa) * target
void soft_update(Vector& target, const Vector& online, double kappa);

} // namespace damarl::nn

#include "damarl/nn/params.hpp"

#include <cmath>

#include "damarl/error.hpp"

namespace damarl::nn {

int ParamStore::add(std::string name, int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw ContractError("param block '" + name + "' has an empty shape");
    ParamBlock b{std::move(name), rows, cols, values_.size()};
    const Eigen::Index old = values_.size();
    values_.conservativeResize(old + b.size());
    values_.segment(old, b.size()).setZero();
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (blocks_.size() != other.blocks_.size()) return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& a = blocks_[i];
        const auto& b = other.blocks_[i];
        if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
    }
    return true;
}

Linear Linear::create(ParamStore& store, const std::string& name, int in, int out, bool with_bias) {
    Linear l;
    l.in = in;
    l.out = out;
    l.weight = store.add(name + ".weight", out, in);
    if (with_bias) l.bias = store.add(name + ".bias", out, 1);
    return l;
}

Matrix Linear::forward(const ParamStore& p, const Matrix& x) const {
    if (x.rows() != in) throw ContractError("linear: input has " + std::to_string(x.rows()) + " rows, expected " +
                                            std::to_string(in));
    Matrix y = p.mat(weight) * x;
    if (bias >= 0) y.colwise() += p.mat(bias).col(0);
    return y;
}

void Linear::backward_params(const ParamStore& p, const Matrix& x, const Matrix& dy, Vector& grad) const {
    ParamStore::view(grad, p.block(weight)).noalias() += dy * x.transpose();
    if (bias >= 0) ParamStore::view(grad, p.block(bias)).col(0) += dy.rowwise().sum();
}

Matrix Linear::backward(const ParamStore& p, const Matrix& x, const Matrix& dy, Vector& grad) const {
    backward_params(p, x, dy, grad);
    return p.mat(weight).transpose() * dy;
}

void Linear::init_uniform(ParamStore& p, std::mt19937_64& rng) const {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : p.mat(weight).reshaped()) w = dist(rng);
    if (bias >= 0) {
        for (auto& b : p.mat(bias).reshaped()) b = dist(rng);
    }
}

Adam::Adam(Eigen::Index size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

void Adam::step(Vector& params, const Vector& grad) {
    if (grad.size() != m_.size() || params.size() != m_.size()) throw ContractError("adam: size mismatch");
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void soft_update(Vector& target, const Vector& online, double kappa) {
    if (target.size() != online.size()) throw ContractError("soft_update: size mismatch");
    target = kappa * online + (1.0 - kappa) * target;
}

} // namespace damarl::nn

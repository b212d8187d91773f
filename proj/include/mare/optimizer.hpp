#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mare {

// Adam with decoupled weight decay. One instance per parameter group; the
// step count advances once per batch via begin_step(). Sparse groups update
// only touched coordinates (untouched zero-initialized coordinates would stay
// zero under a dense step anyway, and touch-time decay keeps updates cheap
// and deterministic).
class AdamW {
 public:
  AdamW(size_t size, double learning_rate, double weight_decay, double beta1 = 0.9,
        double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate),
        wd_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        eps_(epsilon),
        m_(size, 0.0),
        v_(size, 0.0) {}

  void begin_step() {
    ++t_;
    bias1_ = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    bias2_ = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  }

  void update(std::vector<double>& params, const std::vector<double>& grads) {
    for (size_t i = 0; i < params.size(); ++i) update_one(params, i, grads[i]);
  }

  void update_one(std::vector<double>& params, size_t i, double grad) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad * grad;
    double m_hat = m_[i] / bias1_;
    double v_hat = v_[i] / bias2_;
    params[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) + wd_ * params[i]);
  }

  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double wd_;
  double beta1_, beta2_, eps_;
  uint64_t t_ = 0;
  double bias1_ = 1.0, bias2_ = 1.0;
  std::vector<double> m_, v_;
};

}  // namespace mare

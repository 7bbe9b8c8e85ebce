#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crossgan/tensor.hpp"

namespace crossgan {

enum class LossKind { kL, kL1, kL2, kE };

std::string to_string(LossKind kind);

/// Probability guard for log terms: scores are clamped to [eps, 1 - eps].
inline constexpr double kScoreEpsilon = 1e-7;

struct LossReport {
  LossKind name = LossKind::kL;
  double value = 0.0;
  /// Ordered term name -> contribution; contributions sum to `value`.
  std::vector<std::pair<std::string, double>> breakdown;
  std::size_t batch_size = 0;
  /// Number of scores that had to be clamped.
  std::size_t clamped = 0;

  double term(const std::string& name) const;
  /// "iteration<TAB>name<TAB>value<TAB>term=value..." (no newline).
  std::string log_line(long long iteration) const;
};

/// GAN value L: mean log f(x) over real scores plus mean log(1 - f(g(z)))
/// over fake scores. Terms "real" and "fake".
LossReport gan_loss(std::span<const double> real_scores, std::span<const double> fake_scores);

/// Generator objective to be minimized: -mean log f(g(z)) when
/// `non_saturating`, otherwise mean log(1 - f(g(z))).
LossReport generator_loss(std::span<const double> fake_scores, bool non_saturating);

/// Domain-adaptation cross entropy L1 over the four score batches.
/// Terms "real_s", "real_l", "fake_s", "fake_l".
LossReport da_l1(std::span<const double> real_s, std::span<const double> real_l,
                 std::span<const double> fake_s, std::span<const double> fake_l);

/// Softmax log loss L2 of an (N, k) logit matrix with integer labels in [0, k).
LossReport da_l2(const Tensor<double>& logits, std::span<const int> labels);

/// Energy E = L1 + L2.
LossReport da_energy(const LossReport& l1, const LossReport& l2);

/// Gradients with respect to the realness logits (p = sigmoid(logit)).
namespace grad {

/// d/dlogit of mean_i log sigmoid(l_i), scaled by `weight`.
template <typename T>
std::vector<T> log_score(std::span<const T> logits, double weight = 1.0);
/// d/dlogit of mean_i log(1 - sigmoid(l_i)), scaled by `weight`.
template <typename T>
std::vector<T> log_one_minus_score(std::span<const T> logits, double weight = 1.0);
/// d/dlogits of the softmax log loss (mean over rows), scaled by `weight`.
template <typename T>
Tensor<T> softmax_log_loss(const Tensor<T>& logits, std::span<const int> labels,
                           double weight = 1.0);

}  // namespace grad

template <typename T>
std::vector<double> to_double(std::span<const T> v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace crossgan

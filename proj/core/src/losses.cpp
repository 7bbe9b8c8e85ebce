#include "crossgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "crossgan/error.hpp"
#include "crossgan/nets.hpp"

namespace crossgan {
namespace {

struct MeanLog {
  double value = 0.0;
  std::size_t clamped = 0;
};

// mean over scores of log(s) or log(1 - s) with the epsilon guard.
MeanLog mean_log(std::span<const double> scores, bool complement) {
  if (scores.empty()) throw std::invalid_argument("loss term needs a non-empty score batch");
  MeanLog out;
  double sum = 0.0;
  for (double s : scores) {
    double c = std::clamp(s, kScoreEpsilon, 1.0 - kScoreEpsilon);
    if (c != s) ++out.clamped;
    sum += std::log(complement ? 1.0 - c : c);
  }
  out.value = sum / static_cast<double>(scores.size());
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kL: return "L";
    case LossKind::kL1: return "L1";
    case LossKind::kL2: return "L2";
    case LossKind::kE: return "E";
  }
  return "?";
}

double LossReport::term(const std::string& name) const {
  for (const auto& [k, v] : breakdown)
    if (k == name) return v;
  throw std::out_of_range("loss report has no term " + name);
}

std::string LossReport::log_line(long long iteration) const {
  std::string line = std::to_string(iteration) + "\t" + to_string(name) + "\t" + format_double(value);
  for (const auto& [k, v] : breakdown) line += "\t" + k + "=" + format_double(v);
  if (clamped) line += "\tclamped=" + std::to_string(clamped);
  return line;
}

LossReport gan_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  const auto real = mean_log(real_scores, false);
  const auto fake = mean_log(fake_scores, true);
  LossReport r;
  r.name = LossKind::kL;
  r.value = real.value + fake.value;
  r.breakdown = {{"real", real.value}, {"fake", fake.value}};
  r.batch_size = real_scores.size() + fake_scores.size();
  r.clamped = real.clamped + fake.clamped;
  return r;
}

LossReport generator_loss(std::span<const double> fake_scores, bool non_saturating) {
  LossReport r;
  r.name = LossKind::kL;
  r.batch_size = fake_scores.size();
  if (non_saturating) {
    const auto t = mean_log(fake_scores, false);
    r.value = -t.value;
    r.breakdown = {{"generator_nonsaturating", r.value}};
    r.clamped = t.clamped;
  } else {
    const auto t = mean_log(fake_scores, true);
    r.value = t.value;
    r.breakdown = {{"generator_saturating", r.value}};
    r.clamped = t.clamped;
  }
  return r;
}

LossReport da_l1(std::span<const double> real_s, std::span<const double> real_l,
                 std::span<const double> fake_s, std::span<const double> fake_l) {
  const auto rs = mean_log(real_s, false);
  const auto rl = mean_log(real_l, false);
  const auto fs = mean_log(fake_s, true);
  const auto fl = mean_log(fake_l, true);
  LossReport r;
  r.name = LossKind::kL1;
  r.breakdown = {{"real_s", rs.value}, {"real_l", rl.value}, {"fake_s", fs.value},
                 {"fake_l", fl.value}};
  r.value = rs.value + rl.value + fs.value + fl.value;
  r.batch_size = real_s.size() + real_l.size() + fake_s.size() + fake_l.size();
  r.clamped = rs.clamped + rl.clamped + fs.clamped + fl.clamped;
  return r;
}

LossReport da_l2(const Tensor<double>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("da_l2 expects (N, k) logits");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (n == 0) throw std::invalid_argument("da_l2 needs at least one row");
  if (labels.size() != n) throw std::invalid_argument("da_l2: label count does not match rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::invalid_argument("da_l2: label " + std::to_string(y) + " outside [0, k)");
    }
    const double* row = logits.data() + i * k;
    const double m = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - m);
    sum += std::log(z) - (row[y] - m);
  }
  LossReport r;
  r.name = LossKind::kL2;
  r.value = sum / static_cast<double>(n);
  r.breakdown = {{"softmax_log_loss", r.value}};
  r.batch_size = n;
  return r;
}

LossReport da_energy(const LossReport& l1, const LossReport& l2) {
  if (l1.name != LossKind::kL1 || l2.name != LossKind::kL2) {
    throw ConfigError("da_energy expects an L1 report and an L2 report, got " +
                      to_string(l1.name) + " and " + to_string(l2.name));
  }
  LossReport r;
  r.name = LossKind::kE;
  r.value = l1.value + l2.value;
  r.breakdown = {{"L1", l1.value}, {"L2", l2.value}};
  r.batch_size = l1.batch_size + l2.batch_size;
  r.clamped = l1.clamped + l2.clamped;
  return r;
}

namespace grad {

template <typename T>
std::vector<T> log_score(std::span<const T> logits, double weight) {
  std::vector<T> g(logits.size());
  const double scale = weight / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = static_cast<T>(scale * (1.0 - static_cast<double>(sigmoid(logits[i]))));
  }
  return g;
}

template <typename T>
std::vector<T> log_one_minus_score(std::span<const T> logits, double weight) {
  std::vector<T> g(logits.size());
  const double scale = weight / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = static_cast<T>(-scale * static_cast<double>(sigmoid(logits[i])));
  }
  return g;
}

template <typename T>
Tensor<T> softmax_log_loss(const Tensor<T>& logits, std::span<const int> labels, double weight) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  Tensor<T> g(logits.shape());
  const double scale = weight / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * k;
    const double m = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - m);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - m) / z;
      const double target = static_cast<int>(j) == labels[i] ? 1.0 : 0.0;
      g[i * k + j] = static_cast<T>(scale * (p - target));
    }
  }
  return g;
}

template std::vector<float> log_score(std::span<const float>, double);
template std::vector<double> log_score(std::span<const double>, double);
template std::vector<float> log_one_minus_score(std::span<const float>, double);
template std::vector<double> log_one_minus_score(std::span<const double>, double);
template Tensor<float> softmax_log_loss(const Tensor<float>&, std::span<const int>, double);
template Tensor<double> softmax_log_loss(const Tensor<double>&, std::span<const int>, double);

}  // namespace grad
}  // namespace crossgan

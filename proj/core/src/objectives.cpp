#include "crossgan/objectives.hpp"

namespace crossgan {
namespace {

template <typename T>
std::vector<double> scores(const std::vector<T>& probs, std::size_t begin, std::size_t end) {
  return std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(begin),
                             probs.begin() + static_cast<std::ptrdiff_t>(end));
}

template <typename T>
std::span<const T> part(const std::vector<T>& v, std::size_t begin, std::size_t end) {
  return std::span<const T>(v).subspan(begin, end - begin);
}

template <typename T>
void append(std::vector<T>& out, const std::vector<T>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

template <typename T>
LossReport l1_from_passes(const DiscriminatorPass<T>& real, std::size_t n_s,
                          const DiscriminatorPass<T>& fake, std::size_t m_s) {
  const auto rs = scores(real.probs, 0, n_s), rl = scores(real.probs, n_s, real.probs.size());
  const auto fs = scores(fake.probs, 0, m_s), fl = scores(fake.probs, m_s, fake.probs.size());
  return da_l1(rs, rl, fs, fl);
}

}  // namespace

std::vector<int> domain_labels(std::size_t n_s, std::size_t n_l) {
  std::vector<int> labels(n_s, 0);
  labels.resize(n_s + n_l, 1);
  return labels;
}

template <typename T>
LossReport discriminator_gradients(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& real,
                                   const Tensor<T>& z) {
  const Tensor<T> fake = g.generate(z, Mode::kTrainFrozen);
  const auto rp = d.forward(real, Mode::kTrain);
  const auto fp = d.forward(fake, Mode::kTrainFrozen);
  auto report = gan_loss(scores(rp.probs, 0, rp.probs.size()), scores(fp.probs, 0, fp.probs.size()));
  d.backward(rp, grad::log_score<T>(rp.logits, -1.0));
  d.backward(fp, grad::log_one_minus_score<T>(fp.logits, -1.0));
  return report;
}

template <typename T>
LossReport generator_gradients(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& z,
                               bool non_saturating, Mode generator_mode) {
  const auto trace = g.forward(z, generator_mode);
  const auto fp = d.forward(trace.output, Mode::kTrainFrozen);
  auto report = generator_loss(scores(fp.probs, 0, fp.probs.size()), non_saturating);
  const auto grad_logits = non_saturating ? grad::log_score<T>(fp.logits, -1.0)
                                          : grad::log_one_minus_score<T>(fp.logits, 1.0);
  g.backward(trace, d.backward(fp, grad_logits));
  return report;
}

template <typename T>
LossReport evaluate_gan_value(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& real,
                              const Tensor<T>& z) {
  const Tensor<T> fake = g.generate(z, Mode::kTrainFrozen);
  const auto rp = d.forward(real, Mode::kTrainFrozen);
  const auto fp = d.forward(fake, Mode::kTrainFrozen);
  return gan_loss(scores(rp.probs, 0, rp.probs.size()), scores(fp.probs, 0, fp.probs.size()));
}

template <typename T>
LossReport dann_discriminator_gradients(DannModel<T>& m, const Tensor<T>& real_s,
                                        const Tensor<T>& real_l, const Tensor<T>& z_s,
                                        const Tensor<T>& z_l) {
  const Tensor<T> fake_s = m.generator(0).generate(z_s, Mode::kTrainFrozen);
  const Tensor<T> fake_l = m.generator(1).generate(z_l, Mode::kTrainFrozen);
  const Tensor<T> real = concat_batch({&real_s, &real_l});
  const Tensor<T> fake = concat_batch({&fake_s, &fake_l});
  auto& d = m.discriminator();
  const auto rp = d.forward(real, Mode::kTrain);
  const auto fp = d.forward(fake, Mode::kTrainFrozen);
  const std::size_t n_s = real_s.dim(0), m_s = z_s.dim(0);
  auto report = l1_from_passes(rp, n_s, fp, m_s);

  std::vector<T> gr = grad::log_score(part(rp.logits, 0, n_s), -1.0);
  append(gr, grad::log_score(part(rp.logits, n_s, rp.logits.size()), -1.0));
  std::vector<T> gf = grad::log_one_minus_score(part(fp.logits, 0, m_s), -1.0);
  append(gf, grad::log_one_minus_score(part(fp.logits, m_s, fp.logits.size()), -1.0));
  d.backward(rp, gr);
  d.backward(fp, gf);
  return report;
}

template <typename T>
LossReport dann_generator_gradients(DannModel<T>& m, const Tensor<T>& z_s, const Tensor<T>& z_l,
                                    bool non_saturating) {
  const auto ts = m.generator(0).forward(z_s, Mode::kTrain);
  const auto tl = m.generator(1).forward(z_l, Mode::kTrain);
  const Tensor<T> fake = concat_batch({&ts.output, &tl.output});
  const auto fp = m.discriminator().forward(fake, Mode::kTrainFrozen);
  const std::size_t m_s = z_s.dim(0), total = fp.logits.size();

  const auto rs = generator_loss(scores(fp.probs, 0, m_s), non_saturating);
  const auto rl = generator_loss(scores(fp.probs, m_s, total), non_saturating);
  LossReport report;
  report.name = LossKind::kL1;
  report.value = rs.value + rl.value;
  report.breakdown = {{"generator_s", rs.value}, {"generator_l", rl.value}};
  report.batch_size = total;
  report.clamped = rs.clamped + rl.clamped;

  auto grad_part = [&](std::size_t b, std::size_t e) {
    return non_saturating ? grad::log_score(part(fp.logits, b, e), -1.0)
                          : grad::log_one_minus_score(part(fp.logits, b, e), 1.0);
  };
  std::vector<T> g = grad_part(0, m_s);
  append(g, grad_part(m_s, total));
  const Tensor<T> gimg = m.discriminator().backward(fp, g);
  m.generator(0).backward(ts, slice_batch(gimg, 0, m_s));
  m.generator(1).backward(tl, slice_batch(gimg, m_s, total));
  return report;
}

template <typename T>
LossReport classifier_gradients(DannModel<T>& m, const Tensor<T>& images, std::span<const int> labels,
                                bool real_images) {
  auto& d = m.discriminator();
  const auto trunk = d.trunk_forward(images, real_images ? Mode::kTrain : Mode::kTrainFrozen);
  const auto cp = m.classifier().forward(trunk.output, Mode::kTrain);
  auto report = da_l2(cp.logits().template cast<double>(), labels);
  const Tensor<T> gf = m.classifier().backward(cp, grad::softmax_log_loss(cp.logits(), labels));
  d.trunk_backward(trunk, gf);
  return report;
}

template <typename T>
LossReport evaluate_l1(DannModel<T>& m, const Tensor<T>& real_s, const Tensor<T>& real_l,
                       const Tensor<T>& z_s, const Tensor<T>& z_l) {
  const Tensor<T> fake_s = m.generator(0).generate(z_s, Mode::kTrainFrozen);
  const Tensor<T> fake_l = m.generator(1).generate(z_l, Mode::kTrainFrozen);
  const Tensor<T> real = concat_batch({&real_s, &real_l});
  const Tensor<T> fake = concat_batch({&fake_s, &fake_l});
  const auto rp = m.discriminator().forward(real, Mode::kTrainFrozen);
  const auto fp = m.discriminator().forward(fake, Mode::kTrainFrozen);
  return l1_from_passes(rp, real_s.dim(0), fp, z_s.dim(0));
}

template <typename T>
LossReport evaluate_l2(DannModel<T>& m, const Tensor<T>& images, std::span<const int> labels) {
  const auto trunk = m.discriminator().trunk_forward(images, Mode::kTrainFrozen);
  const auto cp = m.classifier().forward(trunk.output, Mode::kTrainFrozen);
  return da_l2(cp.logits().template cast<double>(), labels);
}

#define CROSSGAN_INSTANTIATE_OBJECTIVES(T)                                                       \
  template LossReport discriminator_gradients(Generator<T>&, Discriminator<T>&, const Tensor<T>&, \
                                              const Tensor<T>&);                                  \
  template LossReport generator_gradients(Generator<T>&, Discriminator<T>&, const Tensor<T>&,     \
                                          bool, Mode);                                            \
  template LossReport evaluate_gan_value(Generator<T>&, Discriminator<T>&, const Tensor<T>&,      \
                                         const Tensor<T>&);                                       \
  template LossReport dann_discriminator_gradients(DannModel<T>&, const Tensor<T>&,               \
                                                   const Tensor<T>&, const Tensor<T>&,            \
                                                   const Tensor<T>&);                             \
  template LossReport dann_generator_gradients(DannModel<T>&, const Tensor<T>&, const Tensor<T>&, \
                                               bool);                                             \
  template LossReport classifier_gradients(DannModel<T>&, const Tensor<T>&, std::span<const int>, \
                                           bool);                                                 \
  template LossReport evaluate_l1(DannModel<T>&, const Tensor<T>&, const Tensor<T>&,              \
                                  const Tensor<T>&, const Tensor<T>&);                            \
  template LossReport evaluate_l2(DannModel<T>&, const Tensor<T>&, std::span<const int>);

CROSSGAN_INSTANTIATE_OBJECTIVES(float)
CROSSGAN_INSTANTIATE_OBJECTIVES(double)

}  // namespace crossgan

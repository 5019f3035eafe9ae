#include "pcad/harness/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"
#include "pcad/nn/optim.hpp"
#include "pcad/scoring/scoring.hpp"

namespace pcad::harness {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5e1f;
constexpr std::uint64_t kJitterStream = 0x717e;

std::string describe(const LossBreakdown& b) {
  std::ostringstream os;
  os << "total=" << b.total << " rec=" << b.rec << " c3l=" << b.c3l;
  if (b.scl) os << " scl=" << *b.scl;
  if (b.cls) os << " cls=" << *b.cls;
  if (b.cos) os << " cos=" << *b.cos;
  return os.str();
}

}  // namespace

Tensor training_loss(const Model& model, const ForwardPass& f, int category, const c3l::ContrastBuffer& buffer,
                     LossBreakdown* breakdown) {
  const RunConfig& c = model.config();
  std::optional<Tensor> scl, cls, cos;
  if (c.uses_term("scl")) scl = c3l::scl_loss(f.z, category, buffer, c.tau);
  if (c.uses_term("cls")) cls = cfgt::cross_entropy(f.logits, category);
  if (c.uses_term("cos") && c.cfgt_on) cos = cfgt::cosine_alignment_loss(f.seq.base, f.seq.fine, f.seq.coarse);
  const Tensor c3l_loss = c3l::c3l_total(scl, cls, cos, c.loss_weights());
  const Tensor rec = ggd::rec_loss(f.recon, f.raw_base);
  const Tensor total = ggd::total_loss(c3l_loss, rec);
  if (breakdown) {
    if (scl) breakdown->scl = scl->item();
    if (cls) breakdown->cls = cls->item();
    if (cos) breakdown->cos = cos->item();
    breakdown->c3l = c3l_loss.item();
    breakdown->rec = rec.item();
    breakdown->total = total.item();
  }
  return total;
}

TrainReport train(Model& model, const std::vector<PreparedSample>& samples, const TrainOptions& options) {
  const RunConfig& c = model.config();
  if (samples.empty()) throw ConfigError("training set is empty");
  std::set<int> present;
  for (const PreparedSample& s : samples) {
    if (s.object_label != 0) throw DataError("training sample " + s.id + " is anomalous");
    if (s.category < 1 || s.category > model.category_count()) {
      throw DataError("training sample " + s.id + " has category outside the model's range");
    }
    present.insert(s.category);
  }
  if ((c.uses_term("scl") || c.uses_term("cls")) && present.size() < 2) {
    throw ConfigError("contrastive and classification terms need at least two categories in the training set");
  }

  nn::AdamWOptions opt_options;
  opt_options.lr = c.lr;
  opt_options.weight_decay = c.weight_decay;
  nn::AdamW optimizer(model.params(), opt_options);
  c3l::ContrastBuffer buffer(c.buffer_size);
  Rng shuffle_rng(derive_seed(c.seed, kShuffleStream));
  Rng jitter_rng(derive_seed(c.seed, kJitterStream));
  model.params().zero_grad();

  TrainReport report;
  std::vector<std::size_t> order(samples.size());
  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    const double lr = c.schedule == "cosine" ? nn::cosine_lr(c.lr, epoch, c.epochs, c.lr_floor_ratio) : c.lr;
    optimizer.set_lr(lr);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.index(i)]);

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.lr = lr;
    int pending = 0;
    for (std::size_t idx : order) {
      const PreparedSample& s = samples[idx];
      const ForwardPass f = model.forward(s, &jitter_rng);
      LossBreakdown b;
      const Tensor loss = training_loss(model, f, s.category, buffer, &b);
      if (!std::isfinite(b.total)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1) + " on sample " + s.id + ": " +
                             describe(b));
      }
      nn::backward(loss);
      if (++pending == c.batch_size) {
        optimizer.step(1.0 / pending);
        pending = 0;
      }
      buffer.push(Eigen::RowVectorXd(f.z.value().row(0)), s.category);
      stats.total += b.total;
      stats.rec += b.rec;
      stats.c3l += b.c3l;
      if (c.uses_term("scl") && !b.scl) ++stats.scl_skipped;
    }
    if (pending > 0) optimizer.step(1.0 / pending);
    const double n = static_cast<double>(samples.size());
    stats.total /= n;
    stats.rec /= n;
    stats.c3l /= n;
    report.epochs.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
  }
  report.steps = optimizer.steps();
  return report;
}

Calibration calibrate(const Model& model, const std::vector<PreparedSample>& samples) {
  if (samples.empty()) throw ConfigError("calibration needs at least one sample");
  Calibration cal{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const PreparedSample& s : samples) {
    const ForwardPass f = model.forward(s);
    for (double r : scoring::token_residuals(f.recon.value(), f.raw_base.value())) {
      cal.lo = std::min(cal.lo, r);
      cal.hi = std::max(cal.hi, r);
    }
  }
  return cal;
}

}  // namespace pcad::harness

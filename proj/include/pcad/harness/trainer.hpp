#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pcad/c3l/c3l.hpp"
#include "pcad/harness/model.hpp"

namespace pcad::harness {

/// Scalar values of every loss component for one sample. Absent optional
/// terms were disabled or skipped.
struct LossBreakdown {
  std::optional<double> scl;
  std::optional<double> cls;
  std::optional<double> cos;
  double c3l = 0.0;
  double rec = 0.0;
  double total = 0.0;
};

/// Builds the training objective c3l + rec for one forward pass. The buffer
/// is read, not modified.
Tensor training_loss(const Model& model, const ForwardPass& f, int category, const c3l::ContrastBuffer& buffer,
                     LossBreakdown* breakdown = nullptr);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;  // means over the epoch's samples
  double rec = 0.0;
  double c3l = 0.0;
  int scl_skipped = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  long steps = 0;
};

struct TrainOptions {
  std::function<void(const EpochStats&)> on_epoch;
};

/// Runs config().epochs epochs over the prepared training samples with
/// AdamW and the configured schedule. Sample order and jitter are drawn from
/// streams derived from the config seed. Throws ConfigError for an empty
/// training set or fewer than two categories with contrastive or
/// classification terms on, and NumericalError on a non-finite loss.
TrainReport train(Model& model, const std::vector<PreparedSample>& samples, const TrainOptions& options = {});

/// Min and max per-token residual over the given (training) samples.
Calibration calibrate(const Model& model, const std::vector<PreparedSample>& samples);

}  // namespace pcad::harness

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pcad/cfgt/cfgt.hpp"
#include "pcad/data/manifest.hpp"
#include "pcad/encoder/local_encoder.hpp"
#include "pcad/ggd/decoder.hpp"
#include "pcad/harness/config.hpp"
#include "pcad/kernels/backend.hpp"

namespace pcad::harness {

using nn::Matrix;
using nn::Tensor;

/// Per-sample geometry computed once: groups, standardized descriptor
/// variations and, for a frozen encoder, the raw token sequences.
struct PreparedSample {
  std::string id;
  int category = 0;
  int object_label = 0;
  PointCloud cloud;
  GroupSet groups;
  Matrix variations;                           // g x 2
  std::optional<std::array<Matrix, 3>> tokens;  // fine, base, coarse
};

/// Everything one forward pass produces.
struct ForwardPass {
  Tensor raw_base;  // F^(k), the reconstruction target
  cfgt::EncodedSequences seq;
  Tensor global;
  Tensor logits;
  Tensor z;
  Tensor bias;  // undefined when guidance is off
  Tensor recon;
};

/// Residual range seen on the training set, used by calibrated scoring.
struct Calibration {
  double lo = 0.0;
  double hi = 0.0;
};

/// The full network: local encoder, CFGT, GGD. Parameter creation order is
/// fixed, so a (config, categories) pair always yields the same initial
/// weights for a given seed.
class Model {
 public:
  Model(RunConfig config, std::vector<data::Category> categories);

  const RunConfig& config() const { return config_; }
  const std::vector<data::Category>& categories() const { return categories_; }
  int category_count() const { return static_cast<int>(categories_.size()); }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  const kernels::GeoKernels& kernels() const { return kernels_; }
  cfgt::GlobalTokenMode global_mode() const { return global_mode_; }

  const encoder::EncoderParams& encoder_params() const { return encoder_; }
  const cfgt::CfgtParams& cfgt_params() const { return cfgt_; }
  const ggd::GgdParams& ggd_params() const { return ggd_; }

  std::optional<Calibration> calibration;

  /// Groups, descriptors and (frozen encoder) tokens for a cloud.
  PreparedSample prepare(const PointCloud& cloud, std::string id, int category, int object_label) const;
  PreparedSample prepare(const data::Sample& sample) const;
  std::vector<PreparedSample> prepare_all(const std::vector<data::Sample>& samples) const;

  /// Runs the pipeline. With a jitter generator the pass is in training mode
  /// and the transformer inputs are jittered; without one it is inference.
  ForwardPass forward(const PreparedSample& sample, Rng* jitter_rng = nullptr) const;

  /// Checks that a manifest's categories match the model's (by id and name).
  void check_categories(const data::DatasetManifest& manifest) const;

 private:
  RunConfig config_;
  std::vector<data::Category> categories_;
  cfgt::GlobalTokenMode global_mode_;
  kernels::GeoKernels kernels_;
  nn::ParamStore store_;
  encoder::EncoderParams encoder_;
  cfgt::CfgtParams cfgt_;
  ggd::GgdParams ggd_;
};

}  // namespace pcad::harness

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/c3l/c3l.hpp"
#include "pcad/cfgt/cfgt.hpp"
#include "pcad/nn/attention.hpp"
#include "pcad/pc/grouping.hpp"
#include "pcad/scoring/scoring.hpp"

namespace pcad::harness {

/// How token residuals are mapped to [0, 1] before smoothing.
///   instance:   min-max within each instance
///   pooled:     min-max over every token of the evaluated set
///   calibrated: range recorded on the training set, clipped
enum class ScoreNormalization { instance, pooled, calibrated };

std::string to_string(ScoreNormalization n);
ScoreNormalization score_normalization_from_string(const std::string& s);

/// Every knob of a run. Loaded from JSON: the "profile" key picks the base
/// values ("desk" or "paper") and any other key overrides one field.
struct RunConfig {
  std::string profile = "desk";

  // Grouping.
  int g = 128;
  int k = 16;
  int res_fine = 0;  // 0: k / 2
  int res_coarse = 0;  // 0: 2 k
  bool normalize_unit_sphere = false;

  // Model widths.
  int d = 64;
  int d_z = 128;
  int categories = 0;  // 0: taken from the training manifest
  int encoder_hidden = 64;
  bool train_encoder = false;
  int layers = 4;
  int heads = 8;
  int ffn_hidden = 128;
  int proj_hidden = 128;
  int decoder_layers = 1;
  int decoder_heads = 8;
  int decoder_ffn_hidden = 128;
  int bias_hidden = 16;

  // Objective.
  double tau = 0.07;
  double beta = 1.0;
  bool learnable_beta = false;
  double lambda_scl = 0.001;
  double lambda_cls = 0.001;
  double lambda_cos = 0.01;
  int buffer_size = 64;

  // Feature jittering.
  double jitter_scale = 20.0;
  double jitter_prob = 1.0;
  bool jitter_all_resolutions = true;

  // Scoring.
  int k_g = 511;
  double sigma = 0.2;
  std::string sigma_mode = "absolute";
  std::string score_normalization = "pooled";

  // Optimization.
  std::string optimizer = "adamw";
  double lr = 1e-3;
  double weight_decay = 0.01;
  std::string schedule = "cosine";
  double lr_floor_ratio = 0.01;
  int epochs = 200;
  int batch_size = 1;
  std::uint64_t seed = 0;

  // Ablation switches.
  bool cfgt_on = true;
  std::vector<std::string> c3l_terms{"scl", "cls", "cos"};
  std::string guidance = "bias";
  std::string global_token = "cfgt";

  // Geometry kernels.
  std::string kernels = "reference";
  std::string kernel_library;

  static RunConfig desk();
  static RunConfig paper();

  /// Throws ConfigError on any inconsistent value.
  void validate() const;

  Resolutions resolutions() const;
  bool uses_term(const std::string& term) const;
  nn::Guidance guidance_mode() const;
  cfgt::GlobalTokenMode global_mode() const;
  c3l::LossWeights loss_weights() const;
  scoring::SmoothingOptions smoothing() const;
  ScoreNormalization normalization() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Unknown keys and type mismatches are ConfigErrors.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& c);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace pcad::harness

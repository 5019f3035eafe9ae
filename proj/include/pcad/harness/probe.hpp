#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/harness/model.hpp"

namespace pcad::harness {

struct ProbeRecord {
  std::string id;
  int category = 0;
  double class_score = 0.0;  // probe probability of the true category
  double rec_error = 0.0;
  bool correct = false;
};

struct ProbeReport {
  int epochs = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<ProbeRecord> normal_test;  // one record per normal test sample
  std::optional<double> spearman;        // class_score vs rec_error over normal_test
  std::optional<double> silhouette_train;
  std::optional<double> silhouette_test;

  nlohmann::json to_json() const;
};

struct ProbeOptions {
  int epochs = 100;
  int hidden = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

/// Global token z (1 x d_z) per sample from a frozen model, stacked.
nn::Matrix global_tokens(const Model& model, const std::vector<PreparedSample>& samples);

/// Mean-pooled reconstruction (1 x d) per sample, stacked.
nn::Matrix pooled_reconstructions(const Model& model, const std::vector<PreparedSample>& samples);

/// Silhouette of the samples' global tokens grouped by category; nullopt
/// when fewer than two categories are present.
std::optional<double> token_silhouette(const Model& model, const std::vector<PreparedSample>& samples);

/// Trains a two-layer classifier on mean-pooled reconstructions of the
/// training samples with the model frozen, then relates its confidence on
/// normal test samples to their reconstruction error. Throws ConfigError
/// with fewer than two categories.
ProbeReport ice_probe(const Model& model, const std::vector<PreparedSample>& train,
                      const std::vector<PreparedSample>& test, const ProbeOptions& options = {});

/// CSV text: header "sample_id,split,category_id,category,z0,...", one row
/// per sample, values printed with 17 significant digits.
std::string export_embeddings(const Model& model, const std::vector<PreparedSample>& samples,
                              const std::vector<std::string>& splits);

}  // namespace pcad::harness

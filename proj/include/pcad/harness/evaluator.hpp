#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/harness/model.hpp"
#include "pcad/scoring/scoring.hpp"

namespace pcad::harness {

/// Scores of one test sample plus what the metrics need.
struct SampleScore {
  std::string id;
  int category = 0;
  int object_label = 0;
  double object_score = 0.0;           // under the configured normalization
  double instance_object_score = 0.0;  // under per-instance min-max
  std::vector<double> point_scores;
  std::vector<std::uint8_t> point_labels;
  double rec_error = 0.0;
};

/// Per-token residuals for every sample, plus their normalized and smoothed
/// scores under the given mode. Pooled mode normalizes by the range over all
/// given samples; calibrated mode needs model.calibration.
std::vector<scoring::AnomalyResult> score_prepared(const Model& model, const std::vector<PreparedSample>& samples,
                                                   ScoreNormalization mode);

std::vector<SampleScore> score_samples(const Model& model, const std::vector<PreparedSample>& samples,
                                       ScoreNormalization mode);

struct CategoryReport {
  int id = 0;
  std::string name;
  int normal = 0;
  int anomalous = 0;
  std::optional<double> o_auroc;
  std::optional<double> p_auroc;
  std::optional<double> o_aupr;
  std::optional<double> o_auroc_instance;
};

/// Per-category metrics and their unweighted means and variances over the
/// categories where a metric is defined.
struct EvalReport {
  std::string normalization;
  std::vector<CategoryReport> categories;
  std::optional<double> mean_o_auroc, mean_p_auroc, mean_o_aupr, mean_o_auroc_instance;
  std::optional<double> var_o_auroc, var_p_auroc, var_o_aupr;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

EvalReport build_report(const std::vector<SampleScore>& scores, const std::vector<data::Category>& categories,
                        const std::string& normalization);

EvalReport evaluate(const Model& model, const std::vector<PreparedSample>& test_samples);

}  // namespace pcad::harness

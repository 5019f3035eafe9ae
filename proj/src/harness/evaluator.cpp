#include "pcad/harness/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pcad/common/error.hpp"
#include "pcad/scoring/metrics.hpp"

namespace pcad::harness {

using nlohmann::json;

namespace {

struct Residuals {
  std::vector<double> tokens;
  double rec_error = 0.0;
};

std::vector<Residuals> compute_residuals(const Model& model, const std::vector<PreparedSample>& samples) {
  std::vector<Residuals> out;
  out.reserve(samples.size());
  for (const PreparedSample& s : samples) {
    const ForwardPass f = model.forward(s);
    Residuals r;
    r.tokens = scoring::token_residuals(f.recon.value(), f.raw_base.value());
    r.rec_error = ggd::rec_loss(f.recon, f.raw_base).item();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<double>> normalize(const Model& model, const std::vector<Residuals>& residuals,
                                           ScoreNormalization mode) {
  std::vector<std::vector<double>> out;
  out.reserve(residuals.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  if (mode == ScoreNormalization::pooled) {
    for (const Residuals& r : residuals) {
      for (double v : r.tokens) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  } else if (mode == ScoreNormalization::calibrated) {
    if (!model.calibration) throw ConfigError("calibrated scoring needs a checkpoint with a calibration range");
    lo = model.calibration->lo;
    hi = model.calibration->hi;
  }
  const scoring::SmoothingOptions opt = model.config().smoothing();
  for (const Residuals& r : residuals) {
    const std::vector<double> unit = mode == ScoreNormalization::instance ? scoring::min_max_normalize(r.tokens)
                                                                          : scoring::range_normalize(r.tokens, lo, hi);
    out.push_back(scoring::gaussian_smooth(unit, opt));
  }
  return out;
}

std::optional<double> guarded(auto&& fn) {
  try {
    return fn();
  } catch (const UndefinedMetric&) {
    return std::nullopt;
  }
}

struct Summary {
  std::optional<double> mean, variance;
};

Summary summarize(const std::vector<CategoryReport>& cats, std::optional<double> CategoryReport::*field) {
  std::vector<double> v;
  for (const CategoryReport& c : cats) {
    if (c.*field) v.push_back(*(c.*field));
  }
  if (v.empty()) return {};
  return {metrics::mean(v), metrics::variance(v)};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "     n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%8.4f", *v);
  return buf;
}

}  // namespace

std::vector<scoring::AnomalyResult> score_prepared(const Model& model, const std::vector<PreparedSample>& samples,
                                                   ScoreNormalization mode) {
  const std::vector<std::vector<double>> tokens = normalize(model, compute_residuals(model, samples), mode);
  std::vector<scoring::AnomalyResult> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.push_back(scoring::make_result(tokens[i], samples[i].cloud, samples[i].groups));
  }
  return out;
}

std::vector<SampleScore> score_samples(const Model& model, const std::vector<PreparedSample>& samples,
                                       ScoreNormalization mode) {
  const std::vector<Residuals> residuals = compute_residuals(model, samples);
  const auto configured = normalize(model, residuals, mode);
  const auto instance = normalize(model, residuals, ScoreNormalization::instance);
  std::vector<SampleScore> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PreparedSample& s = samples[i];
    const scoring::AnomalyResult r = scoring::make_result(configured[i], s.cloud, s.groups);
    SampleScore sc;
    sc.id = s.id;
    sc.category = s.category;
    sc.object_label = s.object_label;
    sc.object_score = r.object_score;
    sc.instance_object_score = *std::max_element(instance[i].begin(), instance[i].end());
    sc.point_scores = r.point_scores;
    sc.point_labels = s.cloud.mask ? *s.cloud.mask : std::vector<std::uint8_t>(r.point_scores.size(), 0);
    sc.rec_error = residuals[i].rec_error;
    out.push_back(std::move(sc));
  }
  return out;
}

EvalReport build_report(const std::vector<SampleScore>& scores, const std::vector<data::Category>& categories,
                        const std::string& normalization) {
  EvalReport rep;
  rep.normalization = normalization;
  for (const data::Category& cat : categories) {
    CategoryReport cr;
    cr.id = cat.id;
    cr.name = cat.name;
    std::vector<double> obj, obj_inst, pts;
    std::vector<int> obj_labels, pt_labels;
    for (const SampleScore& s : scores) {
      if (s.category != cat.id) continue;
      (s.object_label ? cr.anomalous : cr.normal) += 1;
      obj.push_back(s.object_score);
      obj_inst.push_back(s.instance_object_score);
      obj_labels.push_back(s.object_label);
      if (s.point_labels.size() != s.point_scores.size()) throw DataError("sample " + s.id + ": mask length mismatch");
      pts.insert(pts.end(), s.point_scores.begin(), s.point_scores.end());
      for (std::uint8_t l : s.point_labels) pt_labels.push_back(l ? 1 : 0);
    }
    if (obj.empty()) continue;
    cr.o_auroc = guarded([&] { return metrics::auroc(obj, obj_labels); });
    cr.o_auroc_instance = guarded([&] { return metrics::auroc(obj_inst, obj_labels); });
    cr.o_aupr = guarded([&] { return metrics::aupr(obj, obj_labels); });
    cr.p_auroc = guarded([&] { return metrics::auroc(pts, pt_labels); });
    rep.categories.push_back(cr);
  }
  const Summary o = summarize(rep.categories, &CategoryReport::o_auroc);
  const Summary p = summarize(rep.categories, &CategoryReport::p_auroc);
  const Summary a = summarize(rep.categories, &CategoryReport::o_aupr);
  rep.mean_o_auroc = o.mean;
  rep.var_o_auroc = o.variance;
  rep.mean_p_auroc = p.mean;
  rep.var_p_auroc = p.variance;
  rep.mean_o_aupr = a.mean;
  rep.var_o_aupr = a.variance;
  rep.mean_o_auroc_instance = summarize(rep.categories, &CategoryReport::o_auroc_instance).mean;
  return rep;
}

EvalReport evaluate(const Model& model, const std::vector<PreparedSample>& test_samples) {
  const ScoreNormalization mode = model.config().normalization();
  return build_report(score_samples(model, test_samples, mode), model.categories(), to_string(mode));
}

json EvalReport::to_json() const {
  json j;
  j["normalization"] = normalization;
  j["categories"] = json::array();
  for (const CategoryReport& c : categories) {
    j["categories"].push_back({{"id", c.id},
                               {"name", c.name},
                               {"normal", c.normal},
                               {"anomalous", c.anomalous},
                               {"o_auroc", opt(c.o_auroc)},
                               {"p_auroc", opt(c.p_auroc)},
                               {"o_aupr", opt(c.o_aupr)},
                               {"o_auroc_instance_norm", opt(c.o_auroc_instance)}});
  }
  j["mean"] = {{"o_auroc", opt(mean_o_auroc)},
               {"p_auroc", opt(mean_p_auroc)},
               {"o_aupr", opt(mean_o_aupr)},
               {"o_auroc_instance_norm", opt(mean_o_auroc_instance)}};
  j["variance"] = {{"o_auroc", opt(var_o_auroc)}, {"p_auroc", opt(var_p_auroc)}, {"o_aupr", opt(var_o_aupr)}};
  return j;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %6s %6s %8s %8s %8s %8s\n", "category", "normal", "anom", "O-AUROC",
                "P-AUROC", "O-AUPR", "O(inst)");
  os << line;
  for (const CategoryReport& c : categories) {
    std::snprintf(line, sizeof line, "%-14s %6d %6d %s %s %s %s\n", c.name.c_str(), c.normal, c.anomalous,
                  fmt(c.o_auroc).c_str(), fmt(c.p_auroc).c_str(), fmt(c.o_aupr).c_str(),
                  fmt(c.o_auroc_instance).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %6s %6s %s %s %s %s\n", "mean", "", "", fmt(mean_o_auroc).c_str(),
                fmt(mean_p_auroc).c_str(), fmt(mean_o_aupr).c_str(), fmt(mean_o_auroc_instance).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-14s %6s %6s %s %s %s\n", "variance", "", "", fmt(var_o_auroc).c_str(),
                fmt(var_p_auroc).c_str(), fmt(var_o_aupr).c_str());
  os << line;
  os << "scores normalized per " << normalization << " mode\n";
  return os.str();
}

}  // namespace pcad::harness

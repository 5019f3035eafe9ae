#include "pcad/harness/probe.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"
#include "pcad/nn/optim.hpp"
#include "pcad/scoring/metrics.hpp"

namespace pcad::harness {

using nlohmann::json;

nn::Matrix global_tokens(const Model& model, const std::vector<PreparedSample>& samples) {
  nn::Matrix out(static_cast<Eigen::Index>(samples.size()), model.config().d_z);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = model.forward(samples[i]).z.value().row(0);
  }
  return out;
}

nn::Matrix pooled_reconstructions(const Model& model, const std::vector<PreparedSample>& samples) {
  nn::Matrix out(static_cast<Eigen::Index>(samples.size()), model.config().d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = model.forward(samples[i]).recon.value().colwise().mean();
  }
  return out;
}

std::optional<double> token_silhouette(const Model& model, const std::vector<PreparedSample>& samples) {
  std::vector<int> labels;
  for (const PreparedSample& s : samples) labels.push_back(s.category);
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) return std::nullopt;
  return metrics::silhouette(global_tokens(model, samples), labels);
}

ProbeReport ice_probe(const Model& model, const std::vector<PreparedSample>& train,
                      const std::vector<PreparedSample>& test, const ProbeOptions& options) {
  const int C = model.category_count();
  std::set<int> present;
  for (const PreparedSample& s : train) present.insert(s.category);
  if (C < 2 || present.size() < 2) throw ConfigError("the probe needs at least two categories");
  if (options.epochs < 0 || options.hidden < 1 || !(options.lr > 0.0)) throw ConfigError("bad probe options");

  // Features are standardized with training statistics so the probe's
  // learning rate does not depend on the reconstruction scale.
  const nn::Matrix train_x = pooled_reconstructions(model, train);
  const Eigen::RowVectorXd mu = train_x.colwise().mean();
  Eigen::RowVectorXd sd = ((train_x.rowwise() - mu).array().square().colwise().sum() /
                           static_cast<double>(train_x.rows())).sqrt();
  sd = sd.unaryExpr([](double v) { return v > 1e-12 ? v : 1.0; });
  auto standardize = [&](const nn::Matrix& x) -> nn::Matrix {
    return ((x.rowwise() - mu).array().rowwise() / sd.array()).matrix();
  };
  const nn::Matrix xs = standardize(train_x);

  nn::ParamStore store;
  Rng rng(derive_seed(options.seed, 0x9b0e));
  const nn::Mlp2 head = nn::Mlp2::create(store, "probe", xs.cols(), options.hidden, C, nn::Init::he_normal, rng);
  nn::AdamWOptions ao;
  ao.lr = options.lr;
  nn::AdamW opt(store, ao);
  std::vector<std::size_t> order(train.size());
  for (int e = 0; e < options.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t i : order) {
      const Tensor logits = head(Tensor::constant(xs.row(static_cast<Eigen::Index>(i))));
      nn::backward(cfgt::cross_entropy(logits, train[i].category));
      opt.step();
    }
  }

  auto predict = [&](const nn::Matrix& x, Eigen::Index row) {
    const nn::Matrix logits = head(Tensor::constant(x.row(row))).value();
    return nn::softmax_rows(logits);
  };

  ProbeReport rep;
  rep.epochs = options.epochs;
  int correct = 0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    Eigen::Index arg;
    predict(xs, i).row(0).maxCoeff(&arg);
    correct += static_cast<int>(arg) + 1 == train[static_cast<std::size_t>(i)].category ? 1 : 0;
  }
  rep.train_accuracy = train.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(train.size());

  const nn::Matrix test_x = standardize(pooled_reconstructions(model, test));
  correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const nn::Matrix p = predict(test_x, static_cast<Eigen::Index>(i));
    Eigen::Index arg;
    p.row(0).maxCoeff(&arg);
    const bool ok = static_cast<int>(arg) + 1 == test[i].category;
    correct += ok ? 1 : 0;
    if (test[i].object_label != 0) continue;
    const ForwardPass f = model.forward(test[i]);
    rep.normal_test.push_back({test[i].id, test[i].category, p(0, test[i].category - 1),
                               ggd::rec_loss(f.recon, f.raw_base).item(), ok});
  }
  rep.test_accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());

  std::vector<double> cls, rec;
  for (const ProbeRecord& r : rep.normal_test) {
    cls.push_back(r.class_score);
    rec.push_back(r.rec_error);
  }
  try {
    rep.spearman = metrics::spearman(cls, rec);
  } catch (const UndefinedMetric&) {
  }
  rep.silhouette_train = token_silhouette(model, train);
  rep.silhouette_test = token_silhouette(model, test);
  return rep;
}

json ProbeReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  json j;
  j["epochs"] = epochs;
  j["train_accuracy"] = train_accuracy;
  j["test_accuracy"] = test_accuracy;
  j["spearman_class_score_vs_rec_error"] = opt(spearman);
  j["silhouette_z_train"] = opt(silhouette_train);
  j["silhouette_z_test"] = opt(silhouette_test);
  j["normal_test"] = json::array();
  for (const ProbeRecord& r : normal_test) {
    j["normal_test"].push_back({{"sample_id", r.id},
                                {"category", r.category},
                                {"class_score", r.class_score},
                                {"rec_error", r.rec_error},
                                {"correct", r.correct}});
  }
  return j;
}

std::string export_embeddings(const Model& model, const std::vector<PreparedSample>& samples,
                              const std::vector<std::string>& splits) {
  if (splits.size() != samples.size()) throw InvalidArgument("export_embeddings: one split per sample");
  const nn::Matrix z = global_tokens(model, samples);
  std::string out = "sample_id,split,category_id,category";
  for (Eigen::Index c = 0; c < z.cols(); ++c) out += ",z" + std::to_string(c);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PreparedSample& s = samples[i];
    out += s.id + ',' + splits[i] + ',' + std::to_string(s.category) + ',' +
           model.categories().at(static_cast<std::size_t>(s.category - 1)).name;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", z(static_cast<Eigen::Index>(i), c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace pcad::harness

// Command-line front end: dataset generation, training, evaluation, the
// category probe, embedding export and single-file scoring.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcad/common/error.hpp"
#include "pcad/data/manifest.hpp"
#include "pcad/harness/checkpoint.hpp"
#include "pcad/harness/evaluator.hpp"
#include "pcad/harness/probe.hpp"
#include "pcad/harness/trainer.hpp"
#include "pcad/pc/ply.hpp"

namespace {

using nlohmann::json;
using namespace pcad;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "Seed override");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

harness::RunConfig run_config(const Common& c) {
  harness::RunConfig cfg = c.config.empty() ? harness::RunConfig::desk() : harness::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

// Loads a checkpoint and, when a config is given, checks it against the one
// the checkpoint was trained with.
harness::LoadedCheckpoint open_checkpoint(const std::string& path, const Common& c, bool allow_mismatch) {
  harness::LoadedCheckpoint ck = harness::load_checkpoint(path);
  if (!c.config.empty() || c.seed) {
    harness::RunConfig cfg = c.config.empty() ? ck.model->config() : harness::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    harness::check_config(ck, cfg, allow_mismatch);
  }
  return ck;
}

int cmd_gen_data(const Common& c, const std::string& out_dir) {
  data::SynthConfig sc;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw ConfigError("cannot open config " + c.config);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("config " + c.config + ": " + e.what());
    }
    sc = data::synth_config_from_json(j);
  }
  if (c.seed) sc.seed = *c.seed;
  const data::DatasetManifest m = data::build_dataset(sc, out_dir);
  std::fprintf(stderr, "wrote %zu train and %zu test samples to %s\n", m.count("train"), m.count("test"),
               out_dir.c_str());
  return kOk;
}

int cmd_train(const Common& c, const std::string& data_path, const std::string& out, const std::string& log_path) {
  const harness::RunConfig cfg = run_config(c);
  const data::Dataset ds = data::load_dataset(data_path);
  harness::Model model(cfg, ds.manifest.categories);
  const auto train_set = model.prepare_all(ds.train);
  json log = json::array();
  const auto start = std::chrono::steady_clock::now();
  harness::TrainOptions opts;
  opts.on_epoch = [&](const harness::EpochStats& s) {
    log.push_back({{"epoch", s.epoch}, {"lr", s.lr}, {"total", s.total}, {"rec", s.rec}, {"c3l", s.c3l}});
    if (s.epoch == 1 || s.epoch % 10 == 0 || s.epoch == cfg.epochs) {
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "epoch %4d  lr %.3g  loss %.6f  rec %.6f  c3l %.6f  (%.1fs)\n", s.epoch, s.lr, s.total,
                   s.rec, s.c3l, sec);
    }
  };
  const harness::TrainReport rep = harness::train(model, train_set, opts);
  model.calibration = harness::calibrate(model, train_set);
  harness::save_checkpoint(out, model, rep.steps);
  if (!log_path.empty()) write_text(log_path, log.dump(2) + "\n");
  std::fprintf(stderr, "saved %s after %ld steps\n", out.c_str(), rep.steps);
  return kOk;
}

int cmd_eval(const Common& c, const std::string& ckpt_path, const std::string& data_path, bool allow_mismatch,
             const std::string& normalization, const std::string& out) {
  const harness::LoadedCheckpoint ck = open_checkpoint(ckpt_path, c, allow_mismatch);
  const data::Dataset ds = data::load_dataset(data_path);
  ck.model->check_categories(ds.manifest);
  const auto mode = normalization.empty() ? ck.model->config().normalization()
                                          : harness::score_normalization_from_string(normalization);
  const auto test = ck.model->prepare_all(ds.test);
  const harness::EvalReport rep =
      harness::build_report(harness::score_samples(*ck.model, test, mode), ck.model->categories(), to_string(mode));
  std::fputs(rep.to_table().c_str(), stderr);
  write_text(out, rep.to_json().dump(2) + "\n");
  return kOk;
}

int cmd_probe(const Common& c, const std::string& ckpt_path, const std::string& data_path, int epochs,
              const std::string& out) {
  const harness::LoadedCheckpoint ck = harness::load_checkpoint(ckpt_path);
  const data::Dataset ds = data::load_dataset(data_path);
  ck.model->check_categories(ds.manifest);
  harness::ProbeOptions opts;
  opts.epochs = epochs;
  opts.seed = c.seed.value_or(ck.model->config().seed);
  const harness::ProbeReport rep =
      harness::ice_probe(*ck.model, ck.model->prepare_all(ds.train), ck.model->prepare_all(ds.test), opts);
  write_text(out, rep.to_json().dump(2) + "\n");
  return kOk;
}

int cmd_export(const Common& c, const std::string& ckpt_path, const std::string& data_path, const std::string& split,
               const std::string& out) {
  const harness::LoadedCheckpoint ck = open_checkpoint(ckpt_path, c, false);
  const data::Dataset ds = data::load_dataset(data_path);
  ck.model->check_categories(ds.manifest);
  std::vector<data::Sample> chosen;
  std::vector<std::string> splits;
  for (const auto* part : {&ds.train, &ds.test}) {
    for (const data::Sample& s : *part) {
      if (split != "all" && s.entry.split != split) continue;
      chosen.push_back(s);
      splits.push_back(s.entry.split);
    }
  }
  write_text(out, harness::export_embeddings(*ck.model, ck.model->prepare_all(chosen), splits));
  return kOk;
}

int cmd_score(const Common& c, const std::string& ckpt_path, const std::string& input, const std::string& out_json,
              const std::string& out_ply, const std::string& normalization) {
  const harness::LoadedCheckpoint ck = open_checkpoint(ckpt_path, c, false);
  const harness::Model& model = *ck.model;
  harness::ScoreNormalization mode = harness::ScoreNormalization::instance;
  if (!normalization.empty()) {
    mode = harness::score_normalization_from_string(normalization);
  } else if (model.calibration) {
    mode = harness::ScoreNormalization::calibrated;
  }
  if (mode == harness::ScoreNormalization::pooled) throw ConfigError("pooled normalization needs a test set; use eval");
  const PointCloud cloud = read_ply(input);
  const std::string id = std::filesystem::path(input).stem().string();
  const harness::PreparedSample s = model.prepare(cloud, id, 0, 0);
  const scoring::AnomalyResult r = harness::score_prepared(model, {s}, mode).front();
  Eigen::Index predicted;
  model.forward(s).logits.value().row(0).maxCoeff(&predicted);
  json j{{"sample_id", id},
         {"object_score", r.object_score},
         {"category", model.categories().at(static_cast<std::size_t>(predicted)).name},
         {"normalization", to_string(mode)},
         {"token_scores", r.token_scores}};
  write_text(out_json, j.dump(2) + "\n");
  if (!out_ply.empty()) write_ply(out_ply, s.cloud, std::span<const double>(r.point_scores));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified multi-category point-cloud anomaly detection"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, probe_c, export_c, score_c;
  std::string gen_out = "dataset";
  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic multi-category dataset");
  add_common(gen, gen_c);
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  std::string train_data, train_out = "model.ckpt", train_log;
  auto* train = app.add_subcommand("train", "Train on the normal samples of a dataset");
  add_common(train, train_c);
  train->add_option("--data", train_data, "Dataset manifest")->required();
  train->add_option("--out", train_out, "Checkpoint path")->capture_default_str();
  train->add_option("--log", train_log, "Per-epoch loss log (JSON)");

  std::string eval_ckpt, eval_data, eval_norm, eval_out = "-";
  bool eval_allow = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test split");
  add_common(eval, eval_c);
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--data", eval_data, "Dataset manifest")->required();
  eval->add_option("--normalization", eval_norm, "instance, pooled or calibrated");
  eval->add_flag("--allow-config-mismatch", eval_allow, "Evaluate even if the config hash differs");
  eval->add_option("--out", eval_out, "Report JSON path ('-' for stdout)");

  std::string probe_ckpt, probe_data, probe_out = "-";
  int probe_epochs = 100;
  auto* probe = app.add_subcommand("probe", "Category probe on frozen reconstructions");
  add_common(probe, probe_c);
  probe->add_option("--checkpoint", probe_ckpt)->required();
  probe->add_option("--data", probe_data, "Dataset manifest")->required();
  probe->add_option("--epochs", probe_epochs)->capture_default_str();
  probe->add_option("--out", probe_out, "Report JSON path ('-' for stdout)");

  std::string export_ckpt, export_data, export_split = "all", export_out = "-";
  auto* exp = app.add_subcommand("export-emb", "Export global tokens as CSV");
  add_common(exp, export_c);
  exp->add_option("--checkpoint", export_ckpt)->required();
  exp->add_option("--data", export_data, "Dataset manifest")->required();
  exp->add_option("--split", export_split)->check(CLI::IsMember({"all", "train", "test"}))->capture_default_str();
  exp->add_option("--out", export_out, "CSV path ('-' for stdout)");

  std::string score_ckpt, score_in, score_json = "-", score_ply, score_norm;
  auto* score = app.add_subcommand("score", "Score one PLY file");
  add_common(score, score_c);
  score->add_option("--checkpoint", score_ckpt)->required();
  score->add_option("--input", score_in, "PLY file")->required();
  score->add_option("--out", score_json, "Result JSON path ('-' for stdout)");
  score->add_option("--out-ply", score_ply, "Copy of the cloud with a per-point score property");
  score->add_option("--normalization", score_norm, "instance or calibrated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen_data(gen_c, gen_out);
    if (*train) return cmd_train(train_c, train_data, train_out, train_log);
    if (*eval) return cmd_eval(eval_c, eval_ckpt, eval_data, eval_allow, eval_norm, eval_out);
    if (*probe) return cmd_probe(probe_c, probe_ckpt, probe_data, probe_epochs, probe_out);
    if (*exp) return cmd_export(export_c, export_ckpt, export_data, export_split, export_out);
    if (*score) return cmd_score(score_c, score_ckpt, score_in, score_json, score_ply, score_norm);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}

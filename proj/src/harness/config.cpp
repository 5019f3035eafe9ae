#include "pcad/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "pcad/common/error.hpp"
#include "pcad/ggd/decoder.hpp"

namespace pcad::harness {

using nlohmann::json;

namespace {

// Single list of serialized fields, shared by reading and writing.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("profile", c.profile);
  f("g", c.g);
  f("k", c.k);
  f("res_fine", c.res_fine);
  f("res_coarse", c.res_coarse);
  f("normalize_unit_sphere", c.normalize_unit_sphere);
  f("d", c.d);
  f("d_z", c.d_z);
  f("categories", c.categories);
  f("encoder_hidden", c.encoder_hidden);
  f("train_encoder", c.train_encoder);
  f("layers", c.layers);
  f("heads", c.heads);
  f("ffn_hidden", c.ffn_hidden);
  f("proj_hidden", c.proj_hidden);
  f("decoder_layers", c.decoder_layers);
  f("decoder_heads", c.decoder_heads);
  f("decoder_ffn_hidden", c.decoder_ffn_hidden);
  f("bias_hidden", c.bias_hidden);
  f("tau", c.tau);
  f("beta", c.beta);
  f("learnable_beta", c.learnable_beta);
  f("lambda_scl", c.lambda_scl);
  f("lambda_cls", c.lambda_cls);
  f("lambda_cos", c.lambda_cos);
  f("buffer_size", c.buffer_size);
  f("jitter_scale", c.jitter_scale);
  f("jitter_prob", c.jitter_prob);
  f("jitter_all_resolutions", c.jitter_all_resolutions);
  f("k_g", c.k_g);
  f("sigma", c.sigma);
  f("sigma_mode", c.sigma_mode);
  f("score_normalization", c.score_normalization);
  f("optimizer", c.optimizer);
  f("lr", c.lr);
  f("weight_decay", c.weight_decay);
  f("schedule", c.schedule);
  f("lr_floor_ratio", c.lr_floor_ratio);
  f("epochs", c.epochs);
  f("batch_size", c.batch_size);
  f("seed", c.seed);
  f("cfgt_on", c.cfgt_on);
  f("c3l_terms", c.c3l_terms);
  f("guidance", c.guidance);
  f("global_token", c.global_token);
  f("kernels", c.kernels);
  f("kernel_library", c.kernel_library);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(ScoreNormalization n) {
  switch (n) {
    case ScoreNormalization::instance: return "instance";
    case ScoreNormalization::pooled: return "pooled";
    case ScoreNormalization::calibrated: return "calibrated";
  }
  return "pooled";
}

ScoreNormalization score_normalization_from_string(const std::string& s) {
  if (s == "instance") return ScoreNormalization::instance;
  if (s == "pooled") return ScoreNormalization::pooled;
  if (s == "calibrated") return ScoreNormalization::calibrated;
  throw ConfigError("unknown score_normalization '" + s + "'");
}

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::paper() {
  RunConfig c;
  c.profile = "paper";
  c.g = 1024;
  c.k = 256;
  c.d = 384;
  c.encoder_hidden = 256;
  c.ffn_hidden = 4 * 384;
  c.proj_hidden = 384;
  c.decoder_ffn_hidden = 4 * 384;
  c.lr = 1e-4;
  c.epochs = 1000;
  return c;
}

void RunConfig::validate() const {
  require(profile == "desk" || profile == "paper", "profile must be desk or paper");
  require(g >= 1, "g must be positive");
  require(k >= 2 && k % 2 == 0, "k must be even and >= 2");
  const Resolutions r = resolutions();
  require(r.fine >= 1 && r.base >= 1 && r.coarse >= 1, "resolutions must be positive");
  require(d >= 1 && d_z >= 1 && encoder_hidden >= 1, "widths must be positive");
  require(heads >= 1 && d % heads == 0, "d must be divisible by heads");
  require(decoder_heads >= 1 && d % decoder_heads == 0, "d must be divisible by decoder_heads");
  require(layers >= 0 && decoder_layers >= 1, "layer counts out of range");
  require(ffn_hidden >= 1 && proj_hidden >= 1 && decoder_ffn_hidden >= 1 && bias_hidden >= 1,
          "hidden widths must be positive");
  require(categories >= 0, "categories must be >= 0");
  require(tau > 0.0, "tau must be positive");
  require(std::isfinite(beta), "beta must be finite");
  require(lambda_scl >= 0.0 && lambda_cls >= 0.0 && lambda_cos >= 0.0, "loss weights must be >= 0");
  require(buffer_size >= 1, "buffer_size must be positive");
  require(jitter_scale > 0.0, "jitter_scale must be positive");
  require(jitter_prob >= 0.0 && jitter_prob <= 1.0, "jitter_prob must lie in [0, 1]");
  require(k_g >= 1 && k_g % 2 == 1, "k_g must be a positive odd integer");
  require(sigma > 0.0, "sigma must be positive");
  require(sigma_mode == "absolute" || sigma_mode == "kernel_relative", "sigma_mode must be absolute or kernel_relative");
  score_normalization_from_string(score_normalization);
  require(optimizer == "adamw", "optimizer must be adamw");
  require(schedule == "cosine" || schedule == "constant", "schedule must be cosine or constant");
  require(lr > 0.0 && weight_decay >= 0.0, "lr must be positive and weight_decay >= 0");
  require(lr_floor_ratio >= 0.0 && lr_floor_ratio <= 1.0, "lr_floor_ratio must lie in [0, 1]");
  require(epochs >= 0 && batch_size >= 1, "epochs >= 0 and batch_size >= 1 required");
  std::set<std::string> seen;
  for (const std::string& t : c3l_terms) {
    require(t == "scl" || t == "cls" || t == "cos", "unknown c3l term '" + t + "'");
    require(seen.insert(t).second, "duplicate c3l term '" + t + "'");
  }
  ggd::guidance_from_string(guidance);
  cfgt::global_token_mode_from_string(global_token);
  require(kernels == "reference" || kernels == "native", "kernels must be reference or native");
  require(kernels != "native" || !kernel_library.empty(), "kernels = native requires kernel_library");
}

Resolutions RunConfig::resolutions() const {
  Resolutions r = Resolutions::symmetric(k);
  if (res_fine > 0) r.fine = res_fine;
  if (res_coarse > 0) r.coarse = res_coarse;
  return r;
}

bool RunConfig::uses_term(const std::string& term) const {
  return std::find(c3l_terms.begin(), c3l_terms.end(), term) != c3l_terms.end();
}

nn::Guidance RunConfig::guidance_mode() const { return ggd::guidance_from_string(guidance); }

cfgt::GlobalTokenMode RunConfig::global_mode() const {
  return cfgt::global_token_mode_from_string(global_token);
}

c3l::LossWeights RunConfig::loss_weights() const { return {lambda_scl, lambda_cls, lambda_cos}; }

scoring::SmoothingOptions RunConfig::smoothing() const {
  return {k_g, sigma, sigma_mode == "absolute" ? scoring::SigmaMode::absolute : scoring::SigmaMode::kernel_relative};
}

ScoreNormalization RunConfig::normalization() const { return score_normalization_from_string(score_normalization); }

json to_json(const RunConfig& c) {
  json j = json::object();
  visit_fields(c, [&](const char* key, const auto& value) { j[key] = value; });
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string profile = j.value("profile", std::string("desk"));
  RunConfig c;
  if (profile == "desk") {
    c = RunConfig::desk();
  } else if (profile == "paper") {
    c = RunConfig::paper();
  } else {
    throw ConfigError("unknown profile '" + profile + "'");
  }
  std::set<std::string> known;
  visit_fields(c, [&](const char* key, auto& value) {
    known.insert(key);
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(value);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  });
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

}  // namespace pcad::harness

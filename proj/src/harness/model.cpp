#include "pcad/harness/model.hpp"

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::harness {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;

cfgt::GlobalTokenMode effective_mode(const RunConfig& c) {
  const cfgt::GlobalTokenMode mode = c.global_mode();
  // Without the multi-resolution branch there is nothing to fuse; fall back
  // to pooling the base sequence.
  if (!c.cfgt_on && mode == cfgt::GlobalTokenMode::cfgt) return cfgt::GlobalTokenMode::mean;
  return mode;
}

}  // namespace

Model::Model(RunConfig config, std::vector<data::Category> categories)
    : config_(std::move(config)),
      categories_(std::move(categories)),
      global_mode_(effective_mode(config_)),
      kernels_(kernels::select_kernels(config_.kernels, config_.kernel_library)) {
  config_.validate();
  if (categories_.size() < 2) throw ConfigError("the model needs at least two categories");
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].id != static_cast<int>(i) + 1) throw ConfigError("category ids must be 1..C in order");
  }
  if (config_.categories != 0 && config_.categories != category_count()) {
    throw ConfigError("config declares " + std::to_string(config_.categories) + " categories, data has " +
                      std::to_string(category_count()));
  }
  config_.categories = category_count();

  Rng rng(derive_seed(config_.seed, kInitStream));
  encoder_ = encoder::EncoderParams::create(store_, "encoder", config_.encoder_hidden, config_.d, rng);

  cfgt::CfgtParams::Shape cs;
  cs.width = config_.d;
  cs.embed_dim = config_.d_z;
  cs.categories = category_count();
  cs.layers = config_.layers;
  cs.heads = config_.heads;
  cs.ffn_hidden = config_.ffn_hidden;
  cs.proj_hidden = config_.proj_hidden;
  cs.mode = global_mode_;
  cfgt_ = cfgt::CfgtParams::create(store_, "cfgt", cs, rng);

  ggd::GgdParams::Shape gs;
  gs.width = config_.d;
  gs.embed_dim = config_.d_z;
  gs.heads = config_.decoder_heads;
  gs.layers = config_.decoder_layers;
  gs.ffn_hidden = config_.decoder_ffn_hidden;
  gs.bias_hidden = config_.bias_hidden;
  gs.beta = config_.beta;
  gs.guidance = config_.guidance_mode();
  ggd_ = ggd::GgdParams::create(store_, "ggd", gs, rng);

  store_.set_trainable_prefix("encoder.", config_.train_encoder);
  store_.set_trainable_prefix("ggd.beta", config_.learnable_beta);
}

PreparedSample Model::prepare(const PointCloud& input, std::string id, int category, int object_label) const {
  PreparedSample s;
  s.id = std::move(id);
  s.category = category;
  s.object_label = object_label;
  s.cloud = config_.normalize_unit_sphere ? normalize_unit_sphere(input) : input;
  s.cloud.validate();
  s.groups = kernels_.build_groups(s.cloud, config_.g, config_.resolutions());
  s.variations = ggd::standardized_variations(kernels_.descriptors(s.cloud, s.groups));
  if (!config_.train_encoder) {
    const Resolutions r = s.groups.resolutions;
    s.tokens = std::array<Matrix, 3>{encoder::encode_resolution(s.cloud, s.groups, r.fine, encoder_).value(),
                                     encoder::encode_resolution(s.cloud, s.groups, r.base, encoder_).value(),
                                     encoder::encode_resolution(s.cloud, s.groups, r.coarse, encoder_).value()};
  }
  return s;
}

PreparedSample Model::prepare(const data::Sample& sample) const {
  return prepare(sample.cloud, sample.entry.id, sample.entry.category_id, sample.entry.object_label);
}

std::vector<PreparedSample> Model::prepare_all(const std::vector<data::Sample>& samples) const {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const data::Sample& s : samples) out.push_back(prepare(s));
  return out;
}

ForwardPass Model::forward(const PreparedSample& s, Rng* jitter_rng) const {
  const Resolutions r = s.groups.resolutions;
  Tensor raw[3];
  if (s.tokens) {
    for (int i = 0; i < 3; ++i) raw[i] = Tensor::constant((*s.tokens)[static_cast<std::size_t>(i)]);
  } else {
    const std::array<int, 3> sizes = r.as_array();
    for (int i = 0; i < 3; ++i) raw[i] = encoder::encode_resolution(s.cloud, s.groups, sizes[static_cast<std::size_t>(i)], encoder_);
  }

  auto jittered = [&](const Tensor& t, bool apply) {
    if (jitter_rng == nullptr || !apply) return t;
    const Matrix noisy = encoder::jitter_features(t.value(), config_.jitter_scale, config_.jitter_prob, *jitter_rng);
    return nn::add(t, Tensor::constant(noisy - t.value()));
  };

  ForwardPass f;
  f.raw_base = raw[1];
  const bool all = config_.jitter_all_resolutions;
  const Tensor base_in = jittered(raw[1], true);
  if (config_.cfgt_on) {
    const Tensor fine_in = jittered(raw[0], all);
    const Tensor coarse_in = jittered(raw[2], all);
    f.seq = cfgt::encode_sequences(fine_in, base_in, coarse_in, cfgt_);
  } else {
    f.seq = cfgt::encode_base_only(base_in, cfgt_);
  }
  f.global = cfgt::global_representation(f.seq, global_mode_);
  f.logits = cfgt::classify(f.global, cfgt_);
  f.z = cfgt::project(f.global, cfgt_);
  if (ggd_.guidance != nn::Guidance::none) f.bias = ggd::geo_bias(s.variations, ggd_.bias_mlp);
  f.recon = ggd::decode(f.z, f.seq.base, f.bias, s.groups.centers, ggd_);
  return f;
}

void Model::check_categories(const data::DatasetManifest& manifest) const {
  if (manifest.categories.size() != categories_.size()) {
    throw DataError("dataset has " + std::to_string(manifest.categories.size()) + " categories, model has " +
                    std::to_string(categories_.size()));
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (manifest.categories[i].id != categories_[i].id || manifest.categories[i].name != categories_[i].name) {
      throw DataError("dataset category '" + manifest.categories[i].name + "' does not match model category '" +
                      categories_[i].name + "'");
    }
  }
}

}  // namespace pcad::harness

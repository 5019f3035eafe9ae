#pragma once

#include "pcad/common/rng.hpp"
#include "pcad/nn/layers.hpp"
#include "pcad/pc/grouping.hpp"

namespace pcad::encoder {

using nn::Matrix;
using nn::Tensor;

/// PointNet-style set encoder E(.): a shared per-point lift (3 -> h -> h, ReLU),
/// max-pooling over the neighborhood, a linear projection h -> d, plus a
/// two-layer ReLU positional embedding of the absolute center (3 -> d -> d).
struct EncoderParams {
  int hidden = 0;
  int width = 0;
  nn::Linear lift1;
  nn::Linear lift2;
  nn::Linear project;
  nn::Mlp2 position;

  static EncoderParams create(nn::ParamStore& store, const std::string& prefix, int hidden,
                              int width, Rng& rng);
  /// Throws InvalidInput when a tensor is non-finite or mis-shaped.
  void validate() const;
};

/// Positional embedding of each row of `centers` (n x 3) -> n x d.
Tensor embed_positions(const nn::Mlp2& position, const Matrix& centers);

/// Token for one neighborhood (r x 3) around `center`. Coordinates are taken
/// relative to the center and divided by `coord_scale` before lifting.
Eigen::RowVectorXd encode_neighborhood(const Points& neighborhood, const Vec3& center,
                                       const EncoderParams& params, double coord_scale = 1.0);

/// Differentiable g x d sequence for resolution r. Row m encodes the r
/// neighbors of FPS center m. Coordinates are scaled by the group set's
/// adaptive radius (1 when the radius is zero).
Tensor encode_resolution(const PointCloud& cloud, const GroupSet& groups, int r,
                         const EncoderParams& params);

/// Adds zero-mean Gaussian noise with per-token stddev ||token|| / (scale * sqrt(d)).
/// With probability `prob` (one draw per call) the whole sequence is jittered;
/// otherwise, or when not training, the input is returned unchanged.
Matrix jitter_features(const Matrix& tokens, double scale, double prob, Rng& rng, bool training = true);

}  // namespace pcad::encoder

#pragma once

#include "phaselab/loss.hpp"
#include "phaselab/rng.hpp"

#include <utility>
#include <vector>

namespace phaselab {

/// Two planes in R^4: V1 = span(v1, v2), V2 = span(v3, v4), with
/// v1 = e1, v2 = sin(theta) e2 + cos(theta) e3, v3 = e3, v4 = e4.
struct SubspacePair {
  double theta = 0.0;
  Vector v1, v2, v3, v4;

  /// 4 x 2 orthonormal basis of V1 (cls 0) or V2 (cls 1).
  Matrix basis(int cls) const;
};

/// Throws ConfigError unless 0 < theta <= pi/2.
SubspacePair make_subspace_pair(double theta);

/// Smallest principal angle between the column spans of two orthonormal bases.
double principal_angle(const Matrix& a, const Matrix& b);

struct GridSpec {
  std::vector<double> radii;   ///< 20/j for j = 10..20
  std::vector<double> angles;  ///< j pi / 40 for j = 1..80
  double noise_std = 0.0;

  static GridSpec standard(double noise_std = 0.0);
  int points_per_class() const { return static_cast<int>(radii.size() * angles.size()); }
};

/// Both classes in R^4: class 0 on V1, class 1 on V2, radius-major order.
/// `rng` is required when noise_std > 0; noise is added in R^4 after embedding.
LabeledDataset grid_dataset(const SubspacePair& pair, const GridSpec& spec, Rng* rng = nullptr);

/// The class-0 grid written in V1 coordinates: r (cos phi, sin phi) in R^2,
/// labelled 0 in a two-class dataset with no class-1 samples.
LabeledDataset grid_dataset_planar(const GridSpec& spec);

/// Uniform distribution on {m <= |x| <= M} inside span(basis).
struct AnnulusDistribution {
  Matrix basis;  ///< d x d_i, orthonormal columns
  double m = 1.0;
  double M = 2.0;

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
  double volume() const;
  double density() const { return 1.0 / volume(); }
  void validate() const;
};

/// `count` samples labelled `label` out of `classes`. Direction is a
/// normalized Gaussian, radius is drawn by inverse CDF from r^{d_i - 1}.
LabeledDataset sample_annulus(const AnnulusDistribution& dist, int count, int label, int classes, Rng& rng);

/// Coordinate blocks: class c lives on e_{c d_i + 1} .. e_{(c + 1) d_i}.
std::vector<Matrix> block_bases(int classes, int dim_per_class);

/// Entries i.i.d. N(0, 1), drawn column by column.
Matrix init_random(int d, int k, Rng& rng);

/// init_random with the first coordinate of every column replaced by its absolute value.
Matrix init_halfspace(int d, int k, Rng& rng);

/// x / |x|^2. Throws ConfigError for the zero vector.
Vector kelvin(const Vector& x);

/// rho(theta) = min(1, relu(binary output at (cos theta, sin theta))) at
/// `samples` equispaced angles in [0, 2 pi). Requires d == 2 and n == 2.
std::vector<std::pair<double, double>> rho_curve(const NetworkParams& params, int samples);

}  // namespace phaselab

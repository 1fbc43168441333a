#include "phaselab/datagen.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phaselab {

Matrix SubspacePair::basis(int cls) const {
  Matrix b(4, 2);
  if (cls == 0) {
    b.col(0) = v1;
    b.col(1) = v2;
  } else if (cls == 1) {
    b.col(0) = v3;
    b.col(1) = v4;
  } else {
    throw ConfigError("subspace pair has classes 0 and 1 only");
  }
  return b;
}

SubspacePair make_subspace_pair(double theta) {
  if (!(theta > 0.0 && theta <= std::numbers::pi / 2 + 1e-15)) {
    throw ConfigError("subspace angle must lie in (0, pi/2]");
  }
  SubspacePair p;
  p.theta = theta;
  p.v1 = Vector::Unit(4, 0);
  p.v2 = Vector::Zero(4);
  p.v2(1) = std::sin(theta);
  p.v2(2) = std::cos(theta);
  p.v3 = Vector::Unit(4, 2);
  p.v4 = Vector::Unit(4, 3);
  return p;
}

double principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("bases live in different spaces");
  Eigen::JacobiSVD<Matrix> svd(a.transpose() * b);
  const double top = std::clamp(svd.singularValues()(0), -1.0, 1.0);
  return std::acos(top);
}

GridSpec GridSpec::standard(double noise_std) {
  GridSpec s;
  for (int j = 10; j <= 20; ++j) s.radii.push_back(20.0 / j);
  for (int j = 1; j <= 80; ++j) s.angles.push_back(j * std::numbers::pi / 40.0);
  s.noise_std = noise_std;
  return s;
}

LabeledDataset grid_dataset(const SubspacePair& pair, const GridSpec& spec, Rng* rng) {
  if (spec.noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
  if (spec.noise_std > 0.0 && rng == nullptr) throw ConfigError("noisy grid needs an Rng");
  const int per = spec.points_per_class();
  Matrix x(2 * per, 4);
  std::vector<int> labels(static_cast<std::size_t>(2 * per));
  for (int cls = 0; cls < 2; ++cls) {
    const Vector& a = cls == 0 ? pair.v1 : pair.v3;
    const Vector& b = cls == 0 ? pair.v2 : pair.v4;
    int row = cls * per;
    for (double r : spec.radii) {
      for (double phi : spec.angles) {
        x.row(row) = (r * (std::cos(phi) * a + std::sin(phi) * b)).transpose();
        labels[static_cast<std::size_t>(row)] = cls;
        ++row;
      }
    }
  }
  if (spec.noise_std > 0.0) {
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) += spec.noise_std * rng->normal();
  }
  return LabeledDataset(std::move(x), std::move(labels), 2);
}

LabeledDataset grid_dataset_planar(const GridSpec& spec) {
  const int per = spec.points_per_class();
  Matrix x(per, 2);
  int row = 0;
  for (double r : spec.radii) {
    for (double phi : spec.angles) {
      x(row, 0) = r * std::cos(phi);
      x(row, 1) = r * std::sin(phi);
      ++row;
    }
  }
  return LabeledDataset(std::move(x), std::vector<int>(static_cast<std::size_t>(per), 0), 2);
}

double AnnulusDistribution::volume() const {
  const double d = dim();
  const double sphere = 2.0 * std::pow(std::numbers::pi, d / 2.0) / boost::math::tgamma(d / 2.0);
  return sphere / d * (std::pow(M, d) - std::pow(m, d));
}

void AnnulusDistribution::validate() const {
  if (basis.cols() < 1) throw ConfigError("annulus basis needs at least one column");
  if (!(m > 0.0 && m < M)) throw ConfigError("annulus radii need 0 < m < M");
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw ConfigError("annulus basis must be orthonormal");
  }
}

LabeledDataset sample_annulus(const AnnulusDistribution& dist, int count, int label, int classes, Rng& rng) {
  dist.validate();
  if (count < 1) throw ConfigError("annulus sample count must be >= 1");
  const int di = dist.dim();
  const double lo = std::pow(dist.m, di);
  const double hi = std::pow(dist.M, di);
  Matrix x(count, dist.ambient_dim());
  for (int s = 0; s < count; ++s) {
    Vector g(di);
    double norm = 0.0;
    do {
      for (int c = 0; c < di; ++c) g(c) = rng.normal();
      norm = g.norm();
    } while (norm == 0.0);
    const double r = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / di);
    x.row(s) = (dist.basis * (g * (r / norm))).transpose();
  }
  return LabeledDataset(std::move(x), std::vector<int>(static_cast<std::size_t>(count), label), classes);
}

std::vector<Matrix> block_bases(int classes, int dim_per_class) {
  if (classes < 1 || dim_per_class < 1) throw ConfigError("block bases need classes >= 1 and dim >= 1");
  const int d = classes * dim_per_class;
  std::vector<Matrix> out;
  for (int c = 0; c < classes; ++c) {
    Matrix b = Matrix::Zero(d, dim_per_class);
    for (int i = 0; i < dim_per_class; ++i) b(c * dim_per_class + i, i) = 1.0;
    out.push_back(std::move(b));
  }
  return out;
}

Matrix init_random(int d, int k, Rng& rng) {
  if (d < 1 || k < 1) throw ConfigError("init needs d >= 1 and k >= 1");
  Matrix w(d, k);
  for (int j = 0; j < k; ++j)
    for (int r = 0; r < d; ++r) w(r, j) = rng.normal();
  return w;
}

Matrix init_halfspace(int d, int k, Rng& rng) {
  Matrix w = init_random(d, k, rng);
  w.row(0) = w.row(0).cwiseAbs();
  return w;
}

Vector kelvin(const Vector& x) {
  const double sq = x.squaredNorm();
  if (sq == 0.0) throw ConfigError("Kelvin transform is undefined at the origin");
  return x / sq;
}

std::vector<std::pair<double, double>> rho_curve(const NetworkParams& params, int samples) {
  if (params.w.rows() != 2) throw DimensionError("rho curve needs a planar network (d == 2)");
  if (samples < 1) throw ConfigError("rho curve needs at least one angle");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(samples));
  Vector u(2);
  for (int s = 0; s < samples; ++s) {
    const double theta = 2.0 * std::numbers::pi * s / samples;
    u << std::cos(theta), std::sin(theta);
    out.emplace_back(theta, std::min(1.0, std::max(0.0, forward_binary(params, u))));
  }
  return out;
}

}  // namespace phaselab

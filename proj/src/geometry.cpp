#include "phaselab/geometry.hpp"

#include "phaselab/parallel.hpp"
#include "phaselab/simplex.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace phaselab {

std::string to_string(GcVerdict verdict) {
  switch (verdict) {
    case GcVerdict::kHolds: return "holds";
    case GcVerdict::kFails: return "fails";
    case GcVerdict::kDegenerate: return "degenerate";
  }
  return "unknown";
}

DirectionSet make_direction_set(const Matrix& w, std::span<const int> columns, const Matrix* basis,
                                double min_norm) {
  std::vector<int> selected(columns.begin(), columns.end());
  if (selected.empty()) {
    selected.resize(static_cast<std::size_t>(w.cols()));
    std::iota(selected.begin(), selected.end(), 0);
  }
  if (basis != nullptr && basis->rows() != w.rows()) throw DimensionError("projection basis rows differ from W rows");
  const Eigen::Index dim = basis != nullptr ? basis->cols() : w.rows();

  DirectionSet out;
  std::vector<Vector> kept;
  for (int j : selected) {
    if (j < 0 || j >= w.cols()) throw DimensionError("neuron index out of range");
    Vector col = basis != nullptr ? Vector(basis->transpose() * w.col(j)) : Vector(w.col(j));
    const double norm = col.norm();
    if (norm < min_norm) {
      out.dropped.push_back(j);
      continue;
    }
    kept.push_back(col / norm);
    out.source_indices.push_back(j);
  }
  out.dirs.resize(dim, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) out.dirs.col(static_cast<Eigen::Index>(c)) = kept[c];
  return out;
}

DirectionSet direction_set_from(const Matrix& vectors) {
  return make_direction_set(vectors);
}

namespace {

void require_nonempty(const DirectionSet& dirs) {
  if (dirs.count() == 0) throw ConfigError("geometric condition needs at least one non-zero direction");
  if (dirs.dim() < 1) throw ConfigError("directions must have dimension >= 1");
}

struct SpanInfo {
  bool full = false;
  Vector null_direction;  ///< unit vector orthogonal to every direction when not full
};

SpanInfo span_info(const Matrix& dirs) {
  Eigen::JacobiSVD<Matrix> svd(dirs, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const Eigen::Index d = dirs.rows();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-9 ? 1 : 0;
  SpanInfo info;
  info.full = rank == d;
  if (!info.full) info.null_direction = svd.matrixU().col(d - 1);
  return info;
}

}  // namespace

GcCertificate gc_check(const DirectionSet& dirs, double tol) {
  require_nonempty(dirs);
  const Eigen::Index d = dirs.dim();
  const Eigen::Index k = dirs.count();

  // Columns: lambda offsets mu_j >= 0, then eps = eps_plus - eps_minus, with
  // lambda_j = mu_j + eps.
  const Vector sum_dirs = dirs.dirs.rowwise().sum();
  Matrix a = Matrix::Zero(d + 1, k + 2);
  a.topLeftCorner(d, k) = dirs.dirs;
  a.block(0, k, d, 1) = sum_dirs;
  a.block(0, k + 1, d, 1) = -sum_dirs;
  a.row(d).head(k).setOnes();
  a(d, k) = static_cast<double>(k);
  a(d, k + 1) = -static_cast<double>(k);
  Vector b = Vector::Zero(d + 1);
  b(d) = 1.0;
  Vector c = Vector::Zero(k + 2);
  c(k) = 1.0;
  c(k + 1) = -1.0;

  const LpResult lp = solve_lp(a, b, c);
  GcCertificate cert;
  if (lp.status == LpResult::Status::kInfeasible) {
    // Farkas ray (y, z): <y, w_j> + z >= 0 with z < 0, so y strictly separates.
    cert.verdict = GcVerdict::kFails;
    const Vector y = lp.y.head(d);
    cert.separator = y / y.norm();
    return cert;
  }
  if (lp.status != LpResult::Status::kOptimal) throw std::logic_error("hull LP unexpectedly unbounded");

  const double eps = lp.objective;
  cert.margin = eps;
  const Vector y = lp.y.head(d);
  if (eps < -tol) {
    cert.verdict = GcVerdict::kFails;
    cert.separator = y / y.norm();
    return cert;
  }
  if (eps <= tol) {
    cert.verdict = GcVerdict::kDegenerate;
    return cert;
  }
  const SpanInfo span = span_info(dirs.dirs);
  if (!span.full) {
    // The origin is a relative-interior point of a lower-dimensional hull;
    // a normal of that hull spans a closed hemisphere containing every direction.
    cert.verdict = GcVerdict::kDegenerate;
    cert.separator = span.null_direction;
    return cert;
  }
  cert.verdict = GcVerdict::kHolds;
  cert.hull_coeffs = lp.x.head(k).array() + eps;
  return cert;
}

GcCertificate gc_check_2d(const DirectionSet& dirs, double tol) {
  require_nonempty(dirs);
  if (dirs.dim() != 2) throw ConfigError("planar oracle requires d == 2");
  const int k = dirs.count();
  std::vector<std::pair<double, int>> angles;
  angles.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) angles.emplace_back(std::atan2(dirs.dirs(1, j), dirs.dirs(0, j)), j);
  std::sort(angles.begin(), angles.end());

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> gaps(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    const double from = angles[static_cast<std::size_t>(s)].first;
    const double to = s + 1 < k ? angles[static_cast<std::size_t>(s + 1)].first : angles[0].first + kTwoPi;
    gaps[static_cast<std::size_t>(s)] = to - from;
  }
  const auto widest = static_cast<int>(std::max_element(gaps.begin(), gaps.end()) - gaps.begin());
  const double max_gap = gaps[static_cast<std::size_t>(widest)];

  GcCertificate cert;
  cert.margin = std::numbers::pi - max_gap;
  if (max_gap > std::numbers::pi + tol) {
    const double mid = angles[static_cast<std::size_t>(widest)].first + 0.5 * max_gap;
    cert.verdict = GcVerdict::kFails;
    cert.separator = Vector(2);
    cert.separator << -std::cos(mid), -std::sin(mid);
    return cert;
  }
  if (max_gap >= std::numbers::pi - tol) {
    cert.verdict = GcVerdict::kDegenerate;
    return cert;
  }

  // Every gap is below pi, so each antipode -w_j sits in the cone of the two
  // sorted neighbours around it; summing those identities gives positive weights.
  Vector lambda = Vector::Zero(k);
  for (int j = 0; j < k; ++j) {
    const double target = std::atan2(-dirs.dirs(1, j), -dirs.dirs(0, j));
    int lo = k - 1;
    for (int s = 0; s < k; ++s) {
      if (angles[static_cast<std::size_t>(s)].first <= target) lo = s;
    }
    const int hi = (lo + 1) % k;
    const int a = angles[static_cast<std::size_t>(lo)].second;
    const int bi = angles[static_cast<std::size_t>(hi)].second;
    Eigen::Matrix2d basis;
    basis << dirs.dirs.col(a), dirs.dirs.col(bi);
    Eigen::Vector2d coef;
    if (std::abs(basis.determinant()) < 1e-14) {
      coef << 1.0, 0.0;
    } else {
      coef = basis.lu().solve(-Eigen::Vector2d(dirs.dirs.col(j)));
    }
    lambda(j) += 1.0;
    lambda(a) += std::max(coef(0), 0.0);
    lambda(bi) += std::max(coef(1), 0.0);
  }
  cert.verdict = GcVerdict::kHolds;
  cert.hull_coeffs = lambda / lambda.sum();
  return cert;
}

bool verify_certificate(const DirectionSet& dirs, const GcCertificate& cert, double tol) {
  switch (cert.verdict) {
    case GcVerdict::kHolds: {
      const auto& lambda = cert.hull_coeffs;
      if (lambda.size() != dirs.count() || lambda.size() == 0) return false;
      if (!((lambda.array() > 0.0).all())) return false;
      if (std::abs(lambda.sum() - 1.0) > tol) return false;
      if ((dirs.dirs * lambda).norm() > tol) return false;
      return span_info(dirs.dirs).full;
    }
    case GcVerdict::kFails: {
      const auto& n = cert.separator;
      if (n.size() != dirs.dim()) return false;
      if (std::abs(n.norm() - 1.0) > tol) return false;
      return ((dirs.dirs.transpose() * n).array() >= -tol).all();
    }
    case GcVerdict::kDegenerate:
      return false;
  }
  return false;
}

double gc_probability(int d, int k) {
  if (d < 1 || k < 1) throw ConfigError("gc_probability needs d >= 1 and k >= 1");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (k <= d) return 0.0;
  cpp_int binom = 1;  // C(k-1, j), advanced incrementally
  cpp_int total = 0;
  for (int j = 0; j <= k - 1; ++j) {
    if (j >= d) total += binom;
    binom = binom * (k - 1 - j) / (j + 1);
  }
  const cpp_int denom = cpp_int(1) << (k - 1);
  return cpp_rational(total, denom).convert_to<double>();
}

MonteCarloEstimate gc_probability_mc(int d, int k, std::uint64_t trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw ConfigError("Monte Carlo needs at least one trial");
  if (d < 1 || k < 1) throw ConfigError("Monte Carlo needs d >= 1 and k >= 1");
  std::vector<unsigned char> hit(static_cast<std::size_t>(trials), 0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    Matrix w(d, k);
    for (int j = 0; j < k; ++j) {
      for (int r = 0; r < d; ++r) w(r, j) = rng.normal();
    }
    hit[t] = gc_check(make_direction_set(w)).verdict == GcVerdict::kHolds ? 1 : 0;
  });
  MonteCarloEstimate est;
  est.trials = trials;
  est.hits = static_cast<std::uint64_t>(std::accumulate(hit.begin(), hit.end(), std::uint64_t{0}));
  const double n = static_cast<double>(trials);
  est.estimate = static_cast<double>(est.hits) / n;
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / n);
  return est;
}

}  // namespace phaselab

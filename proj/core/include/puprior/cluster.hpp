#pragma once

#include "puprior/classifier.hpp"
#include "puprior/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace puprior {

/// Keeps the features with positive gain, each multiplied by its gain.
/// `kept` receives the retained feature indices in ascending order.
Matrix scale_by_importance(const Matrix& features, const ImportanceMap& importance,
                           std::vector<std::size_t>* kept = nullptr);

struct GmmConfig {
  std::size_t max_iter = 250;
  /// Stop when the log-likelihood improves by less than this fraction.
  double tolerance = 1e-4;
  double reg_covar = 1e-6;
  std::size_t kmeans_iter = 100;
  /// Independent seedings; the fit with the highest log-likelihood is kept.
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
};

struct GmmModel {
  std::size_t k = 0;
  Vector weights;
  Matrix means;  // k x d
  std::vector<Matrix> covariances;
  double log_likelihood = 0.0;
  /// Log-likelihood after each E-step.
  std::vector<double> ll_history;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t n_points = 0;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
};

/// Full-covariance Gaussian mixture by EM from a k-means++ start. Rows are
/// put in canonical order first, so the fit does not depend on row order.
GmmModel gmm_fit(const Matrix& points, std::size_t k, const GmmConfig& config = {});

/// n x k matrix of log(weight_c * N(x | mean_c, cov_c)).
Matrix weighted_log_density(const GmmModel& model, const Matrix& points);

double log_likelihood(const GmmModel& model, const Matrix& points);

/// (k - 1) + k d + k d (d + 1) / 2.
std::size_t gmm_parameter_count(std::size_t k, std::size_t d);

double bic(const GmmModel& model, const Matrix& points);

/// Normalized distance a knee must lie below the chord to be accepted. Noise
/// on a single-component curve stays under it.
inline constexpr double kMinKneeDepth = 0.05;

/// A full covariance is estimated from this many points per dimension per
/// component on average, at least.
inline constexpr std::size_t kPointsPerDimension = 3;

struct Knee {
  std::size_t index = 0;
  /// Normalized distance below the chord of the deepest interior point.
  double depth = 0.0;
  bool used_argmin = true;
};

/// Knee of a BIC curve (entry i is k = i + 1): the point farthest below the
/// chord joining the first and last points, after scaling both axes to
/// [0, 1]. Falls back to the argmin when no point lies more than `min_depth`
/// below the chord.
Knee find_knee(std::span<const double> bic_values, double min_depth = kMinKneeDepth);
std::size_t knee_index(std::span<const double> bic_values, double min_depth = kMinKneeDepth);

/// Largest k worth fitting: n / (kPointsPerDimension * dim), at least 1.
std::size_t cluster_count_limit(std::size_t n_points, std::size_t dim);

struct ClusterSelection {
  std::size_t k = 1;
  std::size_t k_max = 0;
  /// The requested k_max exceeded cluster_count_limit and was lowered.
  bool k_max_lowered = false;
  /// Knee detection fell back to the BIC minimum.
  bool used_argmin = false;
  double knee_depth = 0.0;
  /// 2 (LL_knee - LL_1) - 2 (p_knee - p_1); the knee is dropped for the BIC
  /// minimum unless this is positive.
  double aic_gain = 0.0;
  bool knee_rejected = false;
  std::vector<double> bic;
  GmmModel model;
};

/// Fits k = 1..k_max and picks k at the BIC knee, provided the knee model
/// beats k = 1 on AIC; otherwise the BIC minimum. `jobs` > 1 fits several k
/// concurrently; results do not depend on it.
ClusterSelection select_cluster_count(const Matrix& points, std::size_t k_max = 25,
                                      const GmmConfig& config = {}, std::size_t jobs = 1);

struct ClusterAssignment {
  /// Cluster index per point, 0-based and contiguous.
  std::vector<std::size_t> cluster;
  std::vector<std::size_t> sizes;
  /// Components absorbed into a neighbour for being too small or empty.
  std::size_t n_merged = 0;

  [[nodiscard]] std::size_t n_clusters() const { return sizes.size(); }
};

/// Hard assignment by largest posterior. Clusters with fewer than `min_size`
/// points are merged, smallest first, into the cluster whose mean is nearest
/// by Mahalanobis distance under the averaged covariance.
ClusterAssignment assign_clusters(const GmmModel& model, const Matrix& points,
                                  std::size_t min_size = 10);

nlohmann::json cluster_report(const ClusterSelection& selection,
                              const ClusterAssignment& assignment);

}  // namespace puprior

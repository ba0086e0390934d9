#include "puprior/cluster.hpp"

#include "puprior/parallel.hpp"
#include "puprior/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace puprior {
namespace {

Matrix canonical_rows(const Matrix& points) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
    }
    return a < b;
  });
  return points(order, Eigen::all);
}

// n x k squared Euclidean distances.
Matrix squared_distances(const Matrix& x, const Matrix& centers) {
  Matrix d = -2.0 * x * centers.transpose();
  d.colwise() += x.rowwise().squaredNorm();
  d.rowwise() += centers.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

std::vector<std::size_t> kmeans_labels(const Matrix& x, std::size_t k, std::size_t max_iter,
                                       Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix centers(static_cast<Eigen::Index>(k), x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
  Vector nearest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = nearest.sum();
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest(static_cast<Eigen::Index>(i));
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    nearest = nearest.cwiseMin(
        (x.rowwise() - centers.row(static_cast<Eigen::Index>(c))).rowwise().squaredNorm());
  }

  std::vector<std::size_t> labels(n, k);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const Matrix dist = squared_distances(x, centers);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist.row(static_cast<Eigen::Index>(i)).minCoeff(&best);
      if (labels[i] != static_cast<std::size_t>(best)) {
        labels[i] = static_cast<std::size_t>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(labels[i])) += x.row(static_cast<Eigen::Index>(i));
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }
  return labels;
}

// Columns shifted to zero mean and unit variance; constant columns become 0.
// The mixture likelihood is affine invariant but Lloyd's algorithm is not, so
// seeding on standardized points keeps one high-variance column from
// deciding the initial partition.
Matrix standardized(const Matrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Matrix out = x.rowwise() - mean;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
    if (sd > 0.0) {
      out.col(j) /= sd;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Eigen::LLT<Matrix> robust_cholesky(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (double jitter = 1e-12; jitter <= 1e-2; jitter *= 10.0) {
    Matrix adjusted = cov;
    adjusted.diagonal().array() += jitter * scale;
    llt.compute(adjusted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalError("covariance matrix is not positive definite");
}

void m_step(const Matrix& x, const Matrix& resp, double reg, GmmModel& model) {
  const auto n = static_cast<double>(x.rows());
  const Vector nk = resp.colwise().sum().transpose().array() +
                    10.0 * std::numeric_limits<double>::epsilon();
  model.weights = nk / n;
  model.means = (resp.transpose() * x).array().colwise() / nk.array();
  model.covariances.resize(model.k);
  for (std::size_t c = 0; c < model.k; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const Matrix centered = x.rowwise() - model.means.row(ci);
    const Matrix weighted = centered.array().colwise() * resp.col(ci).array();
    Matrix cov = (weighted.transpose() * centered) / nk(ci);
    cov = 0.5 * (cov + cov.transpose());
    cov.diagonal().array() += reg;
    model.covariances[c] = std::move(cov);
  }
}

// Row-wise log-sum-exp; also turns `log_dens` into log-responsibilities.
double normalize_rows(Matrix& log_dens) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < log_dens.rows(); ++i) {
    const double mx = log_dens.row(i).maxCoeff();
    const double lse = mx + std::log((log_dens.row(i).array() - mx).exp().sum());
    log_dens.row(i).array() -= lse;
    total += lse;
  }
  return total;
}

}  // namespace

Matrix scale_by_importance(const Matrix& features, const ImportanceMap& importance,
                           std::vector<std::size_t>* kept) {
  std::vector<std::size_t> cols;
  for (const auto& [feature, gain] : importance) {
    if (gain > 0.0) {
      if (feature >= static_cast<std::size_t>(features.cols())) {
        throw InputError("importance refers to a feature outside the matrix");
      }
      cols.push_back(feature);
    }
  }
  if (cols.empty()) throw InputError("no feature has positive gain");
  Matrix out(features.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        features.col(static_cast<Eigen::Index>(cols[j])) * importance.at(cols[j]);
  }
  if (kept) *kept = cols;
  return out;
}

Matrix weighted_log_density(const GmmModel& model, const Matrix& points) {
  const auto d = static_cast<double>(model.dim());
  Matrix out(points.rows(), static_cast<Eigen::Index>(model.k));
  for (std::size_t c = 0; c < model.k; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const auto llt = robust_cholesky(model.covariances[c]);
    Matrix centered = (points.rowwise() - model.means.row(ci)).transpose();
    llt.matrixL().solveInPlace(centered);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    out.col(ci) = (std::log(model.weights(ci)) -
                   0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det +
                          centered.colwise().squaredNorm().array()))
                      .transpose();
  }
  return out;
}

double log_likelihood(const GmmModel& model, const Matrix& points) {
  Matrix log_dens = weighted_log_density(model, points);
  return normalize_rows(log_dens);
}

namespace {

GmmModel fit_once(const Matrix& x, const Matrix& seeding, std::size_t k, const GmmConfig& config,
                  std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  Rng rng(seed);
  const auto labels = kmeans_labels(seeding, k, config.kmeans_iter, rng);
  Matrix resp = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
  }

  GmmModel model;
  model.k = k;
  model.n_points = n;
  m_step(x, resp, config.reg_covar, model);
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter <= config.max_iter; ++iter) {
    Matrix log_resp = weighted_log_density(model, x);
    const double ll = normalize_rows(log_resp);
    if (!std::isfinite(ll)) throw NumericalError("mixture log-likelihood is not finite");
    model.ll_history.push_back(ll);
    model.log_likelihood = ll;
    if (iter > 0 && std::abs(ll - previous) <= config.tolerance * std::abs(previous)) {
      model.converged = true;
      break;
    }
    if (iter == config.max_iter) break;
    previous = ll;
    m_step(x, log_resp.array().exp().matrix(), config.reg_covar, model);
    model.iterations = iter + 1;
  }
  return model;
}

}  // namespace

GmmModel gmm_fit(const Matrix& points, std::size_t k, const GmmConfig& config) {
  if (k < 1) throw InputError("k must be at least 1");
  if (points.rows() == 0 || points.cols() == 0) throw InputError("gmm_fit needs points");
  if (static_cast<std::size_t>(points.rows()) < k) throw InputError("fewer points than components");
  if (!points.allFinite()) throw InputError("points contain non-finite values");
  if (config.restarts < 1) throw InputError("restarts must be at least 1");

  const Matrix x = canonical_rows(points);
  const Matrix seeding = standardized(x);
  GmmModel best = fit_once(x, seeding, k, config, config.seed);
  for (std::size_t r = 1; r < config.restarts; ++r) {
    GmmModel next = fit_once(x, seeding, k, config, derive_seed(config.seed, r));
    if (next.log_likelihood > best.log_likelihood) best = std::move(next);
  }
  return best;
}

std::size_t gmm_parameter_count(std::size_t k, std::size_t d) {
  return (k - 1) + k * d + k * d * (d + 1) / 2;
}

double bic(const GmmModel& model, const Matrix& points) {
  const auto p = static_cast<double>(gmm_parameter_count(model.k, model.dim()));
  return p * std::log(static_cast<double>(points.rows())) - 2.0 * log_likelihood(model, points);
}

Knee find_knee(std::span<const double> values, double min_depth) {
  if (values.empty()) throw InputError("knee detection needs at least one value");
  Knee out;
  out.index =
      static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  const auto n = values.size();
  if (n < 3) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  auto y = [&](std::size_t i) { return (values[i] - lo) / range; };
  const double y0 = y(0);
  const double y1 = y(n - 1);
  std::size_t best = 0;
  double best_depth = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double depth = (y0 + t * (y1 - y0)) - y(i);
    if (depth > best_depth) {
      best_depth = depth;
      best = i;
    }
  }
  out.depth = best_depth;
  if (best_depth > min_depth) {
    out.index = best;
    out.used_argmin = false;
  }
  return out;
}

std::size_t knee_index(std::span<const double> values, double min_depth) {
  return find_knee(values, min_depth).index;
}

std::size_t cluster_count_limit(std::size_t n_points, std::size_t dim) {
  const std::size_t per_component = kPointsPerDimension * std::max<std::size_t>(dim, 1);
  return std::max<std::size_t>(1, n_points / per_component);
}

ClusterSelection select_cluster_count(const Matrix& points, std::size_t k_max,
                                      const GmmConfig& config, std::size_t jobs) {
  if (k_max < 1) throw InputError("k_max must be at least 1");
  if (points.rows() == 0) throw InputError("no points to cluster");
  ClusterSelection out;
  out.k_max = k_max;
  const auto limit = cluster_count_limit(static_cast<std::size_t>(points.rows()),
                                         static_cast<std::size_t>(points.cols()));
  if (limit < k_max) {
    out.k_max = limit;
    out.k_max_lowered = true;
  }
  // BIC sums over rows; canonical order keeps it bit-identical under permutation.
  const Matrix x = canonical_rows(points);
  std::vector<GmmModel> models(out.k_max);
  out.bic.assign(out.k_max, 0.0);
  parallel_for(out.k_max, jobs, [&](std::size_t i) {
    GmmConfig cfg = config;
    cfg.seed = derive_seed(config.seed, i + 1);
    models[i] = gmm_fit(x, i + 1, cfg);
    out.bic[i] = bic(models[i], x);
  });
  auto knee = find_knee(out.bic);
  out.knee_depth = knee.depth;
  // On a curve that never drops below k = 1 a shallow bend is easily noise.
  // Keep the knee only if its likelihood gain still pays for the extra
  // parameters at the AIC rate of 2 per parameter.
  const auto d = static_cast<std::size_t>(points.cols());
  out.aic_gain = 2.0 * (models[knee.index].log_likelihood - models[0].log_likelihood) -
                 2.0 * static_cast<double>(gmm_parameter_count(knee.index + 1, d) -
                                           gmm_parameter_count(1, d));
  if (!knee.used_argmin && !(out.aic_gain > 0.0)) {
    knee.index = static_cast<std::size_t>(
        std::min_element(out.bic.begin(), out.bic.end()) - out.bic.begin());
    knee.used_argmin = true;
    out.knee_rejected = true;
  }
  const auto idx = knee.index;
  out.used_argmin = knee.used_argmin;
  out.k = idx + 1;
  out.model = std::move(models[idx]);
  return out;
}

ClusterAssignment assign_clusters(const GmmModel& model, const Matrix& points,
                                  std::size_t min_size) {
  const auto n = static_cast<std::size_t>(points.rows());
  const Matrix log_dens = weighted_log_density(model, points);
  std::vector<std::size_t> raw(n);
  std::vector<std::size_t> sizes(model.k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    log_dens.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    raw[i] = static_cast<std::size_t>(best);
    ++sizes[raw[i]];
  }

  // target[c] follows merges; alive clusters map to themselves.
  std::vector<std::size_t> target(model.k);
  std::iota(target.begin(), target.end(), std::size_t{0});
  std::vector<bool> alive(model.k);
  for (std::size_t c = 0; c < model.k; ++c) alive[c] = sizes[c] > 0;
  std::size_t merged = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), false));

  while (true) {
    std::size_t small = model.k;
    std::size_t n_alive = 0;
    for (std::size_t c = 0; c < model.k; ++c) {
      if (!alive[c]) continue;
      ++n_alive;
      if (sizes[c] < min_size && (small == model.k || sizes[c] < sizes[small])) small = c;
    }
    if (small == model.k || n_alive < 2) break;
    std::size_t nearest = model.k;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k; ++c) {
      if (!alive[c] || c == small) continue;
      const Matrix pooled = 0.5 * (model.covariances[small] + model.covariances[c]);
      const Vector diff = (model.means.row(static_cast<Eigen::Index>(small)) -
                           model.means.row(static_cast<Eigen::Index>(c)))
                              .transpose();
      const double dist = diff.dot(robust_cholesky(pooled).solve(diff));
      if (dist < nearest_dist) {
        nearest_dist = dist;
        nearest = c;
      }
    }
    alive[small] = false;
    sizes[nearest] += sizes[small];
    sizes[small] = 0;
    for (auto& t : target) {
      if (t == small) t = nearest;
    }
    ++merged;
  }

  std::vector<std::size_t> renumber(model.k, 0);
  ClusterAssignment out;
  for (std::size_t c = 0; c < model.k; ++c) {
    if (alive[c]) {
      renumber[c] = out.sizes.size();
      out.sizes.push_back(sizes[c]);
    }
  }
  out.cluster.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cluster[i] = renumber[target[raw[i]]];
  out.n_merged = merged;
  return out;
}

nlohmann::json cluster_report(const ClusterSelection& selection,
                              const ClusterAssignment& assignment) {
  return {{"k", selection.k},
          {"k_max", selection.k_max},
          {"k_max_lowered", selection.k_max_lowered},
          {"used_bic_minimum", selection.used_argmin},
          {"knee_depth", selection.knee_depth},
          {"knee_aic_gain", selection.aic_gain},
          {"knee_rejected", selection.knee_rejected},
          {"bic", selection.bic},
          {"n_clusters", assignment.n_clusters()},
          {"cluster_sizes", assignment.sizes},
          {"n_merged", assignment.n_merged}};
}

}  // namespace puprior

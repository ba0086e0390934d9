#include "puprior/report.hpp"

#include "puprior/version.hpp"

#include <fstream>

namespace puprior {
namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view version() { return kVersion; }

nlohmann::json to_json(const ClassifierConfig& c) {
  nlohmann::json out = {{"n_trees", c.n_trees},
                        {"max_depth", c.max_depth},
                        {"learning_rate", c.learning_rate},
                        {"n_folds", c.n_folds},
                        {"l2", c.l2},
                        {"min_child_weight", c.min_child_weight},
                        {"max_bins", c.max_bins}};
  out["positive_scale"] = c.positive_scale ? nlohmann::json(*c.positive_scale)
                                           : nlohmann::json("auto");
  return out;
}

nlohmann::json to_json(const EstimatorConfig& c) {
  nlohmann::json pulscar = {
      {"bin_rule", to_string(c.pulscar.bin_rule)},
      {"n_bins", c.pulscar.n_bins ? nlohmann::json(*c.pulscar.n_bins) : nlohmann::json(nullptr)},
      {"grid_step", c.pulscar.grid_step},
      {"bandwidth_objective", to_string(c.pulscar.bandwidth.objective)},
      {"optimizer",
       {{"population", c.pulscar.bandwidth.optimizer.population},
        {"max_generations", c.pulscar.bandwidth.optimizer.max_generations},
        {"mutation", c.pulscar.bandwidth.optimizer.mutation},
        {"crossover", c.pulscar.bandwidth.optimizer.crossover},
        {"tolerance", c.pulscar.bandwidth.optimizer.tolerance},
        {"polish", c.pulscar.bandwidth.optimizer.polish}}}};
  return {{"classifier", to_json(c.classifier)},
          {"pulscar", pulscar},
          {"gmm",
           {{"max_iter", c.gmm.max_iter},
            {"tolerance", c.gmm.tolerance},
            {"reg_covar", c.gmm.reg_covar}}},
          {"k_max", c.k_max},
          {"min_cluster_size", c.min_cluster_size},
          {"n_clusters", c.n_clusters ? nlohmann::json(*c.n_clusters) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const Bandwidth& b) {
  return {{"value", b.value},
          {"loss", b.loss},
          {"degenerate", b.degenerate},
          {"generations", b.search.generations},
          {"evaluations", b.search.evaluations},
          {"converged", b.search.converged}};
}

nlohmann::json to_json(const AlphaEstimate& e, bool include_curve) {
  nlohmann::json out = {{"alpha", e.alpha},
                        {"grid_index", e.grid_index},
                        {"n_bins", e.n_bins},
                        {"bandwidth", to_json(e.bandwidth)},
                        {"epsilon", e.curve.epsilon},
                        {"max_slope_change", e.selection.max_change},
                        {"gap_at_alpha", e.gap_at_alpha},
                        {"gap_two_steps_beyond", e.gap_beyond},
                        {"no_signal", e.no_signal},
                        {"saturated", e.saturated}};
  if (include_curve) {
    out["curve"] = {{"alpha", e.curve.alphas},
                    {"f_alpha", e.curve.values},
                    {"slope", e.selection.slope}};
    out["density_positive"] = e.density_positive.values;
    out["density_unlabeled"] = e.density_unlabeled.values;
    out["bin_centers"] = e.density_positive.bin_centers;
  }
  return out;
}

nlohmann::json to_json(const SubproblemEstimate& sub, bool include_curve) {
  return {{"cluster", sub.cluster},
          {"n_positive", sub.positive_rows.size()},
          {"n_unlabeled", sub.probs_unlabeled.size()},
          {"estimate", to_json(sub.estimate, include_curve)}};
}

nlohmann::json to_json(const SnarAlphaEstimate& e, bool include_curves) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& sub : e.per_cluster) clusters.push_back(to_json(sub, include_curves));
  nlohmann::json importance = nlohmann::json::object();
  for (const auto& [feature, gain] : e.importance) importance[std::to_string(feature)] = gain;
  return {{"alpha_total", e.alpha_total},
          {"alpha_sum", e.alpha_sum},
          {"clipped", e.clipped},
          {"cluster_count", e.cluster_count},
          {"clustering", cluster_report(e.selection, e.assignment)},
          {"clustered_features", e.clustered_features},
          {"importance", importance},
          {"per_cluster", clusters}};
}

nlohmann::json to_json(const RepeatSummary& s) {
  nlohmann::json estimates = nlohmann::json::array();
  for (const auto& v : s.estimates) estimates.push_back(optional_json(v));
  return {{"seeds", s.seeds},
          {"estimates", estimates},
          {"n_failed", s.n_failed},
          {"failures", s.failures},
          {"mean", s.mean},
          {"standard_error", s.standard_error},
          {"ci95", {s.ci_low, s.ci_high}}};
}

nlohmann::json to_json(const MetricsReport& m) {
  return {{"variant", m.variant},
          {"threshold", m.threshold},
          {"accuracy", m.accuracy},
          {"auc_roc", optional_json(m.auc_roc)},
          {"brier", m.brier},
          {"f1", m.f1},
          {"mcc", optional_json(m.mcc)},
          {"average_precision", m.average_precision}};
}

nlohmann::json to_json(const FlipSchedule& s) {
  return {{"n_bins", s.n_bins},
          {"total", s.total},
          {"target", s.target},
          {"available", s.available},
          {"realized", s.realized},
          {"carried_in", s.carried_in},
          {"bottom_fallback", s.bottom_fallback}};
}

nlohmann::json to_json(const ReliabilityDiagram& d) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : d.bins) {
    bins.push_back({{"bin_center", b.bin_center},
                    {"mean_predicted", b.mean_predicted},
                    {"fraction_true", b.fraction_true},
                    {"count", b.count}});
  }
  return {{"bins", bins}, {"slope", optional_json(d.slope)}, {"intercept", optional_json(d.intercept)}};
}

nlohmann::json to_json(const ImprovementResult& r) {
  return {{"mode", to_string(r.mode)},
          {"alpha", r.alpha},
          {"n_flipped", r.n_flipped},
          {"without", to_json(r.without)},
          {"with", to_json(r.with)}};
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace puprior

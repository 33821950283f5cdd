#pragma once

#include "wayfind/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wayfind {

struct MlrConfig {
    double learning_rate = 1.0; ///< initial (and maximum) step size
    int max_iters = 500;
    double l2 = 1e-4;
    std::uint64_t seed = 0;     ///< recorded only; training is deterministic from zero weights
    double tolerance = 1e-12;   ///< stop when the objective gain falls below this
    /// Fit on z-scored features and map the weights back to the raw feature
    /// scale afterwards; the L2 penalty then acts on the standardized weights.
    bool standardize = true;

    friend bool operator==(const MlrConfig&, const MlrConfig&) = default;
};

struct TrainingLog {
    int iterations = 0;
    double final_log_likelihood = 0.0;  ///< unpenalized, summed over samples
    std::vector<double> objective;      ///< penalized objective per iteration, starting at the zero model
};

/// Multinomial softmax model. weights is row-major n_classes x (n_features + 1),
/// column 0 holding the bias.
struct LogisticModel {
    int n_classes = 0;
    int n_features = 0;
    std::vector<double> weights;
    std::vector<std::string> feature_names;
    MlrConfig config;
    TrainingLog training_log;

    double& weight(int cls, int col) { return weights[static_cast<std::size_t>(cls * (n_features + 1) + col)]; }
    double weight(int cls, int col) const { return weights[static_cast<std::size_t>(cls * (n_features + 1) + col)]; }
};

LogisticModel zero_logistic_model(int n_classes, std::vector<std::string> feature_names);

/// Softmax class probabilities. Throws Error on a feature-length mismatch.
std::vector<double> mlr_probabilities(const LogisticModel& model, std::span<const double> x);

/// Argmax of the softmax scores, ties to the smallest class code.
int mlr_predict(const LogisticModel& model, std::span<const double> x);

/// Penalized objective: mean log-likelihood minus (l2 / 2) * sum of squared
/// non-bias weights.
double mlr_objective(std::span<const double> weights, int n_classes, const FeatureMatrix& data, double l2);

/// Analytic gradient of mlr_objective with respect to the weights.
std::vector<double> mlr_gradient(std::span<const double> weights, int n_classes, const FeatureMatrix& data, double l2);

/// Full-batch gradient ascent from zero weights with step halving, so the
/// penalized objective (of the fitted, possibly standardized, problem) never
/// decreases. Throws Error on single-class data or
/// a non-finite objective.
LogisticModel mlr_train(const Dataset& train, const MlrConfig& config);

/// Summed log-likelihood of the data under the model.
double log_likelihood(const LogisticModel& model, const FeatureMatrix& data);

/// McFadden pseudo-R^2: 1 - LL(model) / LL(intercept-only MLE on the same
/// data). Throws Error when the data holds a single class.
double mcfadden_pseudo_r2(const LogisticModel& model, const Dataset& data);

} // namespace wayfind

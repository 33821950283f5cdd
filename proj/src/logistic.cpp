#include "wayfind/logistic.hpp"

#include "wayfind/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wayfind {

namespace {

/// Writes log-softmax of the scores for row x into `out`.
void log_softmax_row(std::span<const double> w, int k_classes, std::span<const double> x, std::vector<double>& out) {
    const std::size_t stride = x.size() + 1;
    out.resize(static_cast<std::size_t>(k_classes));
    double top = -INFINITY;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double* row = w.data() + k * stride;
        double s = row[0];
        for (std::size_t j = 0; j < x.size(); ++j) s += row[j + 1] * x[j];
        out[k] = s;
        top = std::max(top, s);
    }
    double sum = 0.0;
    for (double s : out) sum += std::exp(s - top);
    const double log_norm = top + std::log(sum);
    for (double& s : out) s -= log_norm;
}

double penalty(std::span<const double> w, std::size_t stride, double l2) {
    double sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (i % stride != 0) sq += w[i] * w[i];
    return 0.5 * l2 * sq;
}

void check_shape(std::span<const double> w, int n_classes, const FeatureMatrix& data) {
    if (n_classes < 1 || w.size() != static_cast<std::size_t>(n_classes) * (data.cols + 1))
        throw Error("weight vector does not match n_classes x (n_features + 1)");
    if (data.rows == 0) throw Error("empty data");
}

/// Objective and (optionally) gradient in one pass over the data.
double evaluate(std::span<const double> w, int n_classes, const FeatureMatrix& data, double l2,
                std::vector<double>* grad) {
    check_shape(w, n_classes, data);
    const std::size_t stride = data.cols + 1;
    std::vector<double> logp;
    double ll = 0.0;
    if (grad) grad->assign(w.size(), 0.0);
    for (std::size_t i = 0; i < data.rows; ++i) {
        const auto x = data.row(i);
        log_softmax_row(w, n_classes, x, logp);
        const auto y = static_cast<std::size_t>(data.targets[i]);
        ll += logp[y];
        if (!grad) continue;
        for (std::size_t k = 0; k < logp.size(); ++k) {
            const double prob = std::exp(logp[k]);
            if (prob == 0.0 && k != y) continue;
            const double r = (k == y ? 1.0 : 0.0) - prob;
            double* g = grad->data() + k * stride;
            g[0] += r;
            for (std::size_t j = 0; j < x.size(); ++j) g[j + 1] += r * x[j];
        }
    }
    const double n = static_cast<double>(data.rows);
    if (grad) {
        for (std::size_t i = 0; i < grad->size(); ++i) {
            (*grad)[i] /= n;
            if (i % stride != 0) (*grad)[i] -= l2 * w[i];
        }
    }
    return ll / n - penalty(w, stride, l2);
}

} // namespace

LogisticModel zero_logistic_model(int n_classes, std::vector<std::string> feature_names) {
    LogisticModel m;
    m.n_classes = n_classes;
    m.n_features = static_cast<int>(feature_names.size());
    m.feature_names = std::move(feature_names);
    m.weights.assign(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(m.n_features + 1), 0.0);
    return m;
}

std::vector<double> mlr_probabilities(const LogisticModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.n_features))
        throw Error("feature length " + std::to_string(x.size()) + " does not match model (" +
                    std::to_string(model.n_features) + ")");
    std::vector<double> p;
    log_softmax_row(model.weights, model.n_classes, x, p);
    for (double& v : p) v = std::exp(v);
    return p;
}

int mlr_predict(const LogisticModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.n_features))
        throw Error("feature length " + std::to_string(x.size()) + " does not match model (" +
                    std::to_string(model.n_features) + ")");
    // argmax over raw scores; softmax is monotone
    const std::size_t stride = x.size() + 1;
    int best = 0;
    double best_score = -INFINITY;
    for (int k = 0; k < model.n_classes; ++k) {
        const double* row = model.weights.data() + static_cast<std::size_t>(k) * stride;
        double s = row[0];
        for (std::size_t j = 0; j < x.size(); ++j) s += row[j + 1] * x[j];
        if (s > best_score) {
            best = k;
            best_score = s;
        }
    }
    return best;
}

double mlr_objective(std::span<const double> weights, int n_classes, const FeatureMatrix& data, double l2) {
    return evaluate(weights, n_classes, data, l2, nullptr);
}

std::vector<double> mlr_gradient(std::span<const double> weights, int n_classes, const FeatureMatrix& data,
                                 double l2) {
    std::vector<double> grad;
    evaluate(weights, n_classes, data, l2, &grad);
    return grad;
}

LogisticModel mlr_train(const Dataset& train, const MlrConfig& config) {
    const FeatureMatrix raw = FeatureMatrix::from(train);
    std::vector<double> mean(raw.cols, 0.0);
    std::vector<double> scale(raw.cols, 1.0);
    FeatureMatrix data = raw;
    if (config.standardize && raw.rows > 0) {
        const double n = static_cast<double>(raw.rows);
        for (std::size_t j = 0; j < raw.cols; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < raw.rows; ++i) sum += raw.values[i * raw.cols + j];
            mean[j] = sum / n;
            double sq = 0.0;
            for (std::size_t i = 0; i < raw.rows; ++i) {
                const double d = raw.values[i * raw.cols + j] - mean[j];
                sq += d * d;
            }
            const double sd = std::sqrt(sq / n);
            scale[j] = sd > 0.0 ? sd : 1.0;
            for (std::size_t i = 0; i < raw.rows; ++i)
                data.values[i * raw.cols + j] = (raw.values[i * raw.cols + j] - mean[j]) / scale[j];
        }
    }
    if (data.rows == 0) throw Error("cannot train on an empty dataset");
    const std::set<int> present(data.targets.begin(), data.targets.end());
    if (present.size() < 2) throw Error("logistic regression needs at least 2 classes in the training data");
    if (!(config.learning_rate > 0)) throw Error("learning rate must be positive");

    int n_classes = train.n_classes();
    for (int t : data.targets) n_classes = std::max(n_classes, t + 1);
    LogisticModel model = zero_logistic_model(n_classes, train.feature_names);
    model.config = config;

    std::vector<double> grad;
    double objective = evaluate(model.weights, n_classes, data, config.l2, &grad);
    if (!std::isfinite(objective)) throw Error("non-finite objective at the zero model");
    model.training_log.objective.push_back(objective);

    std::vector<double> trial(model.weights.size());
    std::vector<double> trial_grad;
    double step = config.learning_rate;
    int iter = 0;
    for (; iter < config.max_iters; ++iter) {
        bool accepted = false;
        double trial_objective = objective;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = model.weights[i] + step * grad[i];
            trial_objective = evaluate(trial, n_classes, data, config.l2, &trial_grad);
            if (std::isfinite(trial_objective) && trial_objective >= objective) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double gain = trial_objective - objective;
        for (double g : trial_grad)
            if (!std::isfinite(g)) throw Error("non-finite gradient at iteration " + std::to_string(iter));
        model.weights.swap(trial);
        grad.swap(trial_grad);
        objective = trial_objective;
        model.training_log.objective.push_back(objective);
        step = std::min(config.learning_rate, 2.0 * step);
        if (gain < config.tolerance) {
            ++iter;
            break;
        }
    }
    if (config.standardize) {
        const std::size_t stride = raw.cols + 1;
        for (int k = 0; k < n_classes; ++k) {
            double* row = model.weights.data() + static_cast<std::size_t>(k) * stride;
            for (std::size_t j = 0; j < raw.cols; ++j) {
                row[j + 1] /= scale[j];
                row[0] -= row[j + 1] * mean[j];
            }
        }
    }
    model.training_log.iterations = iter;
    model.training_log.final_log_likelihood = log_likelihood(model, raw);
    return model;
}

double log_likelihood(const LogisticModel& model, const FeatureMatrix& data) {
    if (data.cols != static_cast<std::size_t>(model.n_features)) throw Error("feature length does not match model");
    std::vector<double> logp;
    double ll = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) {
        log_softmax_row(model.weights, model.n_classes, data.row(i), logp);
        ll += logp.at(static_cast<std::size_t>(data.targets[i]));
    }
    return ll;
}

double mcfadden_pseudo_r2(const LogisticModel& model, const Dataset& data) {
    const FeatureMatrix m = FeatureMatrix::from(data);
    std::vector<std::size_t> counts;
    for (int t : m.targets) {
        if (static_cast<std::size_t>(t) >= counts.size()) counts.resize(static_cast<std::size_t>(t) + 1, 0);
        ++counts[static_cast<std::size_t>(t)];
    }
    const double n = static_cast<double>(m.rows);
    double null_ll = 0.0;
    std::size_t distinct = 0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        ++distinct;
        null_ll += static_cast<double>(c) * std::log(static_cast<double>(c) / n);
    }
    if (distinct < 2) throw Error("pseudo-R^2 is undefined for single-class data");
    return 1.0 - log_likelihood(model, m) / null_ll;
}

} // namespace wayfind

#include <doctest.h>

#include "wayfind/error.hpp"
#include "wayfind/logistic.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace wayfind;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& x, const std::vector<int>& y, int n_classes) {
    Dataset ds;
    std::vector<std::string> labels;
    for (int c = 0; c < n_classes; ++c) labels.push_back("c" + std::to_string(c));
    ds.node_encoder = LabelEncoder::fit(labels);
    for (std::size_t j = 0; j < x.front().size(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < x.size(); ++i) ds.samples.push_back({x[i], y[i], "P", 1});
    return ds;
}

Dataset random_instance(RandomStream& rng, int n, int d, int k) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        for (int j = 0; j < d; ++j) row.push_back(4 * rng.uniform01() - 2);
        x.push_back(row);
        y.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k))));
    }
    return make_dataset(x, y, k);
}

// Summed log-likelihood computed directly from softmax scores.
double direct_log_likelihood(const LogisticModel& m, const Dataset& ds) {
    double ll = 0;
    for (const auto& s : ds.samples) {
        std::vector<double> z;
        for (int c = 0; c < m.n_classes; ++c) {
            double v = m.weight(c, 0);
            for (int j = 0; j < m.n_features; ++j) v += m.weight(c, j + 1) * s.features[static_cast<std::size_t>(j)];
            z.push_back(v);
        }
        const double mx = *std::max_element(z.begin(), z.end());
        double sum = 0;
        for (double v : z) sum += std::exp(v - mx);
        ll += z[static_cast<std::size_t>(s.target)] - mx - std::log(sum);
    }
    return ll;
}

} // namespace

TEST_CASE("zero model is uniform and predicts the smallest class") {
    const auto m = zero_logistic_model(4, {"a", "b"});
    const auto p = mlr_probabilities(m, std::vector<double>{3, -1});
    for (double v : p) CHECK(v == doctest::Approx(0.25));
    CHECK(mlr_predict(m, std::vector<double>{3, -1}) == 0);
    CHECK_THROWS_AS(mlr_predict(m, std::vector<double>{3}), Error);
}

TEST_CASE("weights favoring a class select it") {
    auto m = zero_logistic_model(3, {"a"});
    m.weight(2, 0) = 5;
    CHECK(mlr_predict(m, std::vector<double>{0.5}) == 2);
}

TEST_CASE("probabilities sum to one") {
    RandomStream rng(3);
    auto m = zero_logistic_model(6, {"a", "b", "c"});
    for (auto& w : m.weights) w = 10 * rng.normal();
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.normal() * 5, rng.normal() * 5, rng.normal() * 5};
        const auto p = mlr_probabilities(m, x);
        double sum = 0;
        for (double v : p) sum += v;
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    RandomStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_index(3));
        const int k = 2 + static_cast<int>(rng.uniform_index(3));
        const auto ds = random_instance(rng, 15, d, k);
        const auto data = FeatureMatrix::from(ds);
        std::vector<double> w(static_cast<std::size_t>(k * (d + 1)));
        for (auto& v : w) v = rng.normal();
        const double l2 = 0.1;
        const auto g = mlr_gradient(w, k, data, l2);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double h = 1e-5;
            auto up = w, down = w;
            up[i] += h;
            down[i] -= h;
            const double fd = (mlr_objective(up, k, data, l2) - mlr_objective(down, k, data, l2)) / (2 * h);
            CHECK(std::fabs(fd - g[i]) / std::max(1.0, std::fabs(fd)) <= 1e-6);
        }
    }
}

TEST_CASE("training objective never decreases") {
    RandomStream rng(8);
    for (bool standardize : {true, false}) {
        const auto ds = random_instance(rng, 80, 3, 4);
        MlrConfig cfg;
        cfg.standardize = standardize;
        cfg.max_iters = 200;
        const auto m = mlr_train(ds, cfg);
        const auto& obj = m.training_log.objective;
        REQUIRE(obj.size() >= 2);
        for (std::size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] >= obj[i - 1] - 1e-9);
        for (double w : m.weights) CHECK(std::isfinite(w));
        CHECK(m.training_log.final_log_likelihood ==
              doctest::Approx(log_likelihood(m, FeatureMatrix::from(ds))).epsilon(1e-9));
    }
}

TEST_CASE("separable data is learned") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back({double(i)});
        y.push_back(i < 20 ? 0 : 1);
    }
    const auto ds = make_dataset(x, y, 2);
    for (bool standardize : {true, false}) {
        MlrConfig cfg;
        cfg.standardize = standardize;
        cfg.max_iters = 2000;
        const auto m = mlr_train(ds, cfg);
        int hit = 0;
        for (const auto& s : ds.samples) hit += mlr_predict(m, s.features) == s.target;
        CHECK(hit >= 38);
    }
}

TEST_CASE("training rejects single-class data") {
    const auto ds = make_dataset({{1}, {2}}, {1, 1}, 2);
    CHECK_THROWS_AS(mlr_train(ds, MlrConfig{}), Error);
    CHECK_THROWS_AS(mcfadden_pseudo_r2(zero_logistic_model(2, {"f0"}), ds), Error);
}

TEST_CASE("argmax is invariant to shift and positive scale") {
    RandomStream rng(12);
    auto m = zero_logistic_model(5, {"a", "b"});
    for (auto& w : m.weights) w = rng.normal();
    auto shifted = m;
    const std::vector<double> offset{rng.normal(), rng.normal(), rng.normal()};
    for (int c = 0; c < 5; ++c)
        for (int j = 0; j < 3; ++j) shifted.weight(c, j) = 2.5 * m.weight(c, j) + offset[static_cast<std::size_t>(j)];
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{rng.normal(), rng.normal()};
        CHECK(mlr_predict(m, x) == mlr_predict(shifted, x));
    }
}

TEST_CASE("pseudo r2") {
    RandomStream rng(4);
    const auto ds = random_instance(rng, 60, 2, 3);

    // intercept-only MLE: biases are log class frequencies
    auto intercept = zero_logistic_model(3, ds.feature_names);
    std::vector<int> freq(3);
    for (const auto& s : ds.samples) freq[static_cast<std::size_t>(s.target)]++;
    for (int c = 0; c < 3; ++c) intercept.weight(c, 0) = std::log(freq[static_cast<std::size_t>(c)]);
    CHECK(std::fabs(mcfadden_pseudo_r2(intercept, ds)) <= 1e-9);

    auto m = zero_logistic_model(3, ds.feature_names);
    for (auto& w : m.weights) w = rng.normal();
    const auto data = FeatureMatrix::from(ds);
    CHECK(std::fabs(log_likelihood(m, data) - direct_log_likelihood(m, ds)) <= 1e-9);
    double ll0 = 0;
    for (int c = 0; c < 3; ++c) ll0 += freq[static_cast<std::size_t>(c)] * std::log(freq[static_cast<std::size_t>(c)] / 60.0);
    CHECK(std::fabs(mcfadden_pseudo_r2(m, ds) - (1 - direct_log_likelihood(m, ds) / ll0)) <= 1e-9);

    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
        x.push_back({double(i % 2)});
        y.push_back(i % 2);
    }
    MlrConfig cfg;
    cfg.l2 = 0;
    cfg.max_iters = 3000;
    const auto det = make_dataset(x, y, 2);
    CHECK(mcfadden_pseudo_r2(mlr_train(det, cfg), det) > 0.9);
}

TEST_CASE("tree fits relabeled codes while the linear model may not") {
    // one feature whose codes are permuted: the original order is linear in the
    // class, the permuted one is not
    std::vector<std::vector<double>> x, permuted;
    std::vector<int> y;
    const std::vector<double> perm{2, 0, 3, 1};
    for (int v = 0; v < 4; ++v)
        for (int r = 0; r < 10; ++r) {
            x.push_back({double(v)});
            permuted.push_back({perm[static_cast<std::size_t>(v)]});
            y.push_back(v < 2 ? 0 : 1);
        }
    MlrConfig cfg;
    cfg.max_iters = 2000;
    const auto accuracy = [&](const std::vector<std::vector<double>>& data) {
        const auto ds = make_dataset(data, y, 2);
        const auto m = mlr_train(ds, cfg);
        int hit = 0;
        for (const auto& s : ds.samples) hit += mlr_predict(m, s.features) == s.target;
        return hit / 40.0;
    };
    CHECK(accuracy(x) == 1.0);
    CHECK(accuracy(permuted) < 1.0);
}

#include <doctest.h>

#include "wayfind/error.hpp"
#include "wayfind/random_forest.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <numeric>
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

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

double training_accuracy(const DecisionTree& tree, const Dataset& ds) {
    std::size_t hit = 0;
    for (const auto& s : ds.samples) hit += tree.predict(s.features) == s.target;
    return static_cast<double>(hit) / static_cast<double>(ds.size());
}

double gini(const std::vector<int>& counts) {
    double n = 0, sq = 0;
    for (int c : counts) n += c;
    if (n == 0) return 0;
    for (int c : counts) sq += (c / n) * (c / n);
    return 1 - sq;
}

Dataset xor_data() {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 5; ++r) {
                x.push_back({double(a), double(b)});
                y.push_back(a ^ b);
            }
    return make_dataset(x, y, 2);
}

Dataset noisy_markov(std::uint64_t seed, int n, int classes) {
    RandomStream rng(seed);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        const int prev = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(classes)));
        const int task = 1 + static_cast<int>(rng.uniform_index(4));
        x.push_back({double(task), double(prev), rng.uniform01()});
        y.push_back(rng.bernoulli(0.85) ? (prev + task) % classes
                                        : static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(classes))));
    }
    return make_dataset(x, y, classes);
}

} // namespace

TEST_CASE("pure node becomes a single leaf") {
    const auto ds = make_dataset({{1}, {2}, {3}}, {1, 1, 1}, 2);
    RandomStream rng(1);
    const auto tree = train_tree(FeatureMatrix::from(ds), all_rows(3), {15, 1, 2}, rng);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.predict(std::vector<double>{9}) == 1);
}

TEST_CASE("threshold split on one feature") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int v = 0; v < 10; ++v) {
        x.push_back({double(v)});
        y.push_back(v < 5 ? 0 : 1);
    }
    const auto ds = make_dataset(x, y, 2);
    RandomStream rng(1);
    const auto tree = train_tree(FeatureMatrix::from(ds), all_rows(ds.size()), {15, 1, 2}, rng);
    CHECK(tree.depth() == 1);
    CHECK(tree.nodes[0].threshold == 4.5);
    CHECK(training_accuracy(tree, ds) == 1.0);
}

TEST_CASE("xor needs depth two") {
    const auto ds = xor_data();
    const auto m = FeatureMatrix::from(ds);

    // no single split of either feature separates xor
    for (int f = 0; f < 2; ++f) {
        std::vector<int> left(2), right(2);
        for (const auto& s : ds.samples) (s.features[static_cast<std::size_t>(f)] <= 0.5 ? left : right)[static_cast<std::size_t>(s.target)]++;
        CHECK(gini(left) > 0);
        CHECK(gini(right) > 0);
    }

    RandomStream rng(4);
    const auto tree = train_tree(m, all_rows(ds.size()), {15, 2, 2}, rng);
    CHECK(tree.depth() == 2);
    CHECK(training_accuracy(tree, ds) == 1.0);
}

TEST_CASE("splits never increase weighted impurity") {
    const auto ds = noisy_markov(3, 400, 6);
    RandomStream rng(8);
    const auto tree = train_tree(FeatureMatrix::from(ds), all_rows(ds.size()), {10, 2, 2}, rng);
    const auto counts = [](const TreeNode& n) {
        std::vector<int> c(6);
        for (auto [cls, k] : n.class_counts) c[static_cast<std::size_t>(cls)] = k;
        return c;
    };
    const auto total = [](const std::vector<int>& c) { return std::accumulate(c.begin(), c.end(), 0.0); };
    for (const auto& node : tree.nodes) {
        CHECK(node.depth <= 10);
        CHECK_FALSE(node.class_counts.empty());
        if (node.is_leaf()) continue;
        const auto p = counts(node), l = counts(tree.nodes[static_cast<std::size_t>(node.left)]),
                   r = counts(tree.nodes[static_cast<std::size_t>(node.right)]);
        CHECK(total(l) + total(r) == total(p));
        const double after = (total(l) * gini(l) + total(r) * gini(r)) / total(p);
        CHECK(after <= gini(p) + 1e-12);
    }
}

TEST_CASE("forest determinism and schedule independence") {
    const auto ds = noisy_markov(5, 300, 8);
    ForestParams params;
    params.n_trees = 7;
    params.seed = 99;
    const auto a = rf_train(ds, params, 1);
    const auto b = rf_train(ds, params, 1);
    const auto c = rf_train(ds, params, 4);
    CHECK(a.trees == b.trees);
    CHECK(a.trees == c.trees);
    CHECK(a.trees.size() == 7);

    params.seed = 100;
    CHECK_FALSE(rf_train(ds, params).trees == a.trees);
    CHECK_THROWS_AS(rf_train(Dataset{}, params), Error);
}

TEST_CASE("single tree without bootstrap equals train_tree") {
    const auto ds = noisy_markov(6, 200, 5);
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.seed = 12;
    const auto forest = rf_train(ds, params);
    RandomStream rng(derive_seed(12, 0));
    const TreeConfig cfg{params.max_depth, resolve_mtry(params, ds.n_features()), params.min_samples_split};
    CHECK(forest.trees[0] == train_tree(FeatureMatrix::from(ds), all_rows(ds.size()), cfg, rng));
    for (const auto& s : ds.samples) CHECK(rf_predict(forest, s.features) == forest.trees[0].predict(s.features));
}

TEST_CASE("forest beats the majority baseline on Markov data") {
    const auto train = noisy_markov(10, 1500, 10);
    const auto test = noisy_markov(11, 500, 10);
    ForestParams params;
    params.seed = 1;
    const auto model = rf_train(train, params);
    std::vector<int> freq(10);
    for (const auto& s : train.samples) freq[static_cast<std::size_t>(s.target)]++;
    const int majority = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    std::size_t hit = 0, base = 0;
    for (const auto& s : test.samples) {
        hit += rf_predict(model, s.features) == s.target;
        base += s.target == majority;
    }
    CHECK(hit > base);
    CHECK_THROWS_AS(rf_predict(model, std::vector<double>{1.0}), Error);
}

TEST_CASE("voting and tie-breaks") {
    TreeNode leaf;
    leaf.class_counts = {{1, 3}, {2, 3}, {4, 1}};
    CHECK(leaf.majority() == 1);

    RandomForestModel model;
    model.n_classes = 3;
    model.feature_names = {"f0"};
    for (int cls : {2, 2, 1, 1, 0}) {
        DecisionTree t;
        TreeNode n;
        n.class_counts = {{cls, 1}};
        t.nodes.push_back(n);
        model.trees.push_back(t);
    }
    const std::vector<double> x{0.0};
    CHECK(rf_votes(model, x) == std::vector<int>{2, 2, 1, 1, 0});
    CHECK(rf_predict(model, x) == 1);

    // the winner has at least ceil(n_trees / distinct votes) votes
    const auto votes = rf_votes(model, x);
    const auto winner = rf_predict(model, x);
    std::vector<int> distinct = votes;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    CHECK(std::count(votes.begin(), votes.end(), winner) * static_cast<long>(distinct.size()) >= 5);
}

TEST_CASE("constant training data predicts that class everywhere") {
    const auto ds = make_dataset({{1, 5}, {2, 6}, {3, 7}, {4, 8}}, {3, 3, 3, 3}, 4);
    const auto model = rf_train(ds, ForestParams{});
    for (double a = -5; a < 10; a += 1.5) CHECK(rf_predict(model, std::vector<double>{a, -a}) == 3);
    for (const auto& [name, count] : feature_importance_fscore(model)) CHECK(count == 0);
    for (const auto& levels : top_nodes(model, 2)) CHECK(levels.empty());
}

TEST_CASE("importance accounting") {
    auto ds = noisy_markov(20, 600, 6);
    for (auto& s : ds.samples) s.features[2] = 1.0;
    ForestParams params;
    params.mtry = 3;
    params.seed = 2;
    const auto model = rf_train(ds, params);
    const auto fs = feature_importance_fscore(model);
    REQUIRE(fs.size() == 3);
    CHECK(fs[2].second == 0);
    CHECK(fs[1].second > fs[2].second);
    std::size_t internal = 0;
    for (const auto& t : model.trees) internal += t.internal_count();
    CHECK(fs[0].second + fs[1].second + fs[2].second == internal);

    const auto top = top_nodes(model, 2);
    CHECK(top.size() == model.trees.size());
    for (const auto& l : top) CHECK(l.size() <= 3);
    for (const auto& l : top_nodes(model, 1)) CHECK(l.size() <= 1);
}

TEST_CASE("a full tree fits relabeled codes exactly") {
    RandomStream rng(31);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::vector<int> map(12);
    for (auto& m : map) m = static_cast<int>(rng.uniform_index(4));
    for (int v = 0; v < 12; ++v)
        for (int r = 0; r < 3; ++r) {
            x.push_back({double(v)});
            y.push_back(map[static_cast<std::size_t>(v)]);
        }
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    auto relabeled = x;
    for (auto& row : relabeled) row[0] = perm[static_cast<std::size_t>(row[0])];

    for (const auto& data : {x, relabeled}) {
        const auto ds = make_dataset(data, y, 4);
        RandomStream tree_rng(1);
        const auto tree = train_tree(FeatureMatrix::from(ds), all_rows(ds.size()), {40, 1, 2}, tree_rng);
        CHECK(training_accuracy(tree, ds) == 1.0);
    }
}

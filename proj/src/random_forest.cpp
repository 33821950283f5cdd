#include "wayfind/random_forest.hpp"

#include "wayfind/error.hpp"
#include "wayfind/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace wayfind {

int TreeNode::majority() const {
    int best_class = -1;
    int best_count = -1;
    for (const auto& [cls, count] : class_counts) {
        if (count > best_count) {
            best_class = cls;
            best_count = count;
        }
    }
    return best_class;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf())
        node = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                                   ? node->left
                                                   : node->right)];
    return *node;
}

std::size_t DecisionTree::internal_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

int DecisionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& data, const TreeConfig& cfg, RandomStream& rng)
        : data_(data), cfg_(cfg), rng_(rng) {
        int max_class = 0;
        for (int t : data.targets) max_class = std::max(max_class, t);
        n_classes_ = static_cast<std::size_t>(max_class) + 1;
        left_.resize(n_classes_);
        right_.resize(n_classes_);
        order_.resize(data.cols);
    }

    DecisionTree build(std::vector<std::size_t> rows) {
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    struct Candidate {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0; // weighted child Gini, scaled by n
    };

    int grow(std::vector<std::size_t>& rows, int depth) {
        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        TreeNode node;
        node.depth = depth;

        std::vector<int> counts(n_classes_, 0);
        for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data_.targets[r])];
        std::size_t distinct = 0;
        for (std::size_t c = 0; c < n_classes_; ++c) {
            if (counts[c] == 0) continue;
            node.class_counts.emplace_back(static_cast<int>(c), counts[c]);
            ++distinct;
        }

        const bool stop = distinct <= 1 || depth >= cfg_.max_depth ||
                          rows.size() < static_cast<std::size_t>(std::max(cfg_.min_samples_split, 2));
        const Candidate best = stop ? Candidate{} : find_split(rows, counts);
        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(index)] = std::move(node);
            return index;
        }

        const auto f = static_cast<std::size_t>(best.feature);
        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (data_.values[r * data_.cols + f] <= best.threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = grow(left_rows, depth + 1);
        node.right = grow(right_rows, depth + 1);
        tree_.nodes[static_cast<std::size_t>(index)] = std::move(node);
        return index;
    }

    Candidate find_split(const std::vector<std::size_t>& rows, const std::vector<int>& parent_counts) {
        for (std::size_t f = 0; f < data_.cols; ++f) order_[f] = f;
        rng_.shuffle(std::span<std::size_t>(order_));

        Candidate best;
        int searched = 0;
        std::vector<std::pair<double, int>> column(rows.size());
        const double n = static_cast<double>(rows.size());
        for (std::size_t f : order_) {
            if (searched >= cfg_.mtry) break;
            for (std::size_t i = 0; i < rows.size(); ++i)
                column[i] = {data_.values[rows[i] * data_.cols + f], data_.targets[rows[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue; // constant here, draw another
            ++searched;

            std::fill(left_.begin(), left_.end(), 0);
            for (std::size_t c = 0; c < n_classes_; ++c) right_[c] = parent_counts[c];
            // sums of squared class counts give Gini = 1 - sumsq / m^2
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (int c : parent_counts) right_sq += static_cast<double>(c) * c;

            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const auto c = static_cast<std::size_t>(column[i].second);
                left_sq += 2.0 * left_[c] + 1.0;
                right_sq -= 2.0 * right_[c] - 1.0;
                ++left_[c];
                --right_[c];
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = n - nl;
                const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
                if (best.feature < 0 || impurity < best.impurity) {
                    double mid = 0.5 * (column[i].first + column[i + 1].first);
                    if (!(mid < column[i + 1].first)) mid = column[i].first;
                    best = {static_cast<int>(f), mid, impurity};
                }
            }
        }
        return best;
    }

    const FeatureMatrix& data_;
    const TreeConfig& cfg_;
    RandomStream& rng_;
    std::size_t n_classes_ = 0;
    std::vector<int> left_;
    std::vector<int> right_;
    std::vector<std::size_t> order_;
    DecisionTree tree_;
};

} // namespace

DecisionTree train_tree(const FeatureMatrix& data, std::span<const std::size_t> rows, const TreeConfig& cfg,
                        RandomStream& rng) {
    if (rows.empty()) throw Error("cannot train a tree on zero samples");
    if (cfg.mtry < 1) throw Error("mtry must be >= 1");
    if (cfg.max_depth < 0) throw Error("max_depth must be >= 0");
    TreeBuilder builder(data, cfg, rng);
    return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

int resolve_mtry(const ForestParams& params, std::size_t n_features) {
    if (n_features == 0) throw Error("dataset has no features");
    if (params.mtry) {
        if (*params.mtry < 1 || static_cast<std::size_t>(*params.mtry) > n_features)
            throw Error("mtry " + std::to_string(*params.mtry) + " outside 1.." + std::to_string(n_features));
        return *params.mtry;
    }
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

RandomForestModel rf_train(const Dataset& train, const ForestParams& params, int jobs) {
    if (train.size() == 0) throw Error("cannot train a forest on an empty dataset");
    if (params.n_trees < 1) throw Error("n_trees must be >= 1");
    if (params.max_depth < 1) throw Error("max_depth must be >= 1");

    const FeatureMatrix data = FeatureMatrix::from(train);
    const TreeConfig cfg{params.max_depth, resolve_mtry(params, data.cols), params.min_samples_split};

    RandomForestModel model;
    model.params = params;
    model.feature_names = train.feature_names;
    model.n_classes = train.n_classes();
    for (int t : data.targets) model.n_classes = std::max(model.n_classes, t + 1);
    model.trees.resize(static_cast<std::size_t>(params.n_trees));

    parallel_for(model.trees.size(), jobs, [&](std::size_t t) {
        RandomStream rng(derive_seed(params.seed, t));
        std::vector<std::size_t> rows(data.rows);
        for (std::size_t i = 0; i < data.rows; ++i)
            rows[i] = params.bootstrap ? static_cast<std::size_t>(rng.uniform_index(data.rows)) : i;
        model.trees[t] = train_tree(data, rows, cfg, rng);
    });
    return model;
}

std::vector<int> rf_votes(const RandomForestModel& model, std::span<const double> x) {
    if (x.size() != model.n_features())
        throw Error("feature length " + std::to_string(x.size()) + " does not match model (" +
                    std::to_string(model.n_features()) + ")");
    std::vector<int> votes;
    votes.reserve(model.trees.size());
    for (const auto& tree : model.trees) votes.push_back(tree.predict(x));
    return votes;
}

int rf_predict(const RandomForestModel& model, std::span<const double> x) {
    std::map<int, int> tally;
    for (int v : rf_votes(model, x)) ++tally[v];
    int best = -1;
    int best_count = 0;
    for (const auto& [cls, count] : tally) {
        if (count > best_count) {
            best = cls;
            best_count = count;
        }
    }
    return best;
}

std::vector<std::pair<std::string, std::size_t>> feature_importance_fscore(const RandomForestModel& model) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& name : model.feature_names) out.emplace_back(name, 0);
    for (const auto& tree : model.trees)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf()) ++out.at(static_cast<std::size_t>(node.feature)).second;
    return out;
}

std::vector<std::vector<std::string>> top_nodes(const RandomForestModel& model, int levels) {
    if (levels < 1) throw Error("levels must be >= 1");
    std::vector<std::vector<std::string>> out;
    for (const auto& tree : model.trees) {
        std::vector<std::string> names;
        std::deque<int> queue{0};
        while (!queue.empty()) {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(queue.front())];
            queue.pop_front();
            if (node.is_leaf() || node.depth >= levels) continue;
            names.push_back(model.feature_names.at(static_cast<std::size_t>(node.feature)));
            queue.push_back(node.left);
            queue.push_back(node.right);
        }
        out.push_back(std::move(names));
    }
    return out;
}

} // namespace wayfind

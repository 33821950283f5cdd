#include <doctest.h>

#include "wayfind/error.hpp"
#include "wayfind/evaluation.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace wayfind;

namespace {

struct Brute {
    double accuracy = 0;
    double balanced = 0;
    std::map<int, double> recall;
};

// Per-class enumeration straight from the label vectors.
Brute brute_force(const std::vector<int>& t, const std::vector<int>& p, int k) {
    Brute b;
    int correct = 0;
    for (std::size_t i = 0; i < t.size(); ++i) correct += t[i] == p[i];
    b.accuracy = static_cast<double>(correct) / static_cast<double>(t.size());
    for (int c = 0; c < k; ++c) {
        int total = 0, hit = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] == c) {
                ++total;
                hit += p[i] == c;
            }
        if (total > 0) b.recall[c] = static_cast<double>(hit) / total;
    }
    for (auto [c, r] : b.recall) b.balanced += r;
    b.balanced /= static_cast<double>(b.recall.size());
    return b;
}

Sample sample(int task, int target, std::string participant = "P01") {
    return {{static_cast<double>(task), static_cast<double>(target)}, target, std::move(participant), task};
}

} // namespace

TEST_CASE("confusion matrix examples") {
    const auto classes = class_range(2);
    const std::vector<int> t{0, 0, 1}, p{0, 1, 1};
    const auto cm = confusion_matrix(t, p, classes);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.row_sum(0) == 2);

    const auto diag = confusion_matrix(t, t, classes);
    CHECK(diag.at(0, 1) == 0);
    CHECK(diag.trace() == 3);
    CHECK(accuracy(diag) == 1.0);
    CHECK(balanced_accuracy(diag) == 1.0);

    const auto empty = confusion_matrix(std::vector<int>{}, std::vector<int>{}, classes);
    CHECK(empty.n == 0);
    CHECK_THROWS_AS(accuracy(empty), Error);
    CHECK_THROWS_AS(balanced_accuracy(empty), Error);

    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{0}, std::vector<int>{0, 1}, classes), Error);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{2}, std::vector<int>{0}, classes), Error);
}

TEST_CASE("accuracy and balanced accuracy examples") {
    const auto classes = class_range(3);
    CHECK(accuracy(confusion_matrix(std::vector<int>{0, 1, 2, 0}, std::vector<int>{0, 1, 2, 1}, classes)) == 0.75);

    std::vector<int> t(100, 0), p(100, 0);
    std::fill(t.begin() + 90, t.end(), 1);
    const auto cm = confusion_matrix(t, p, classes);
    CHECK(accuracy(cm) == doctest::Approx(0.9));
    CHECK(balanced_accuracy(cm) == doctest::Approx(0.5));
    CHECK(per_class_recall(cm).count(2) == 0);
}

TEST_CASE("per node recall") {
    const std::vector<std::string> labels{"251", "402", "404"};
    const auto enc = LabelEncoder::fit(labels);
    const std::vector<int> t{0, 0, 0, 1}, p{0, 0, 1, 1};
    const auto report = per_node_report(confusion_matrix(t, p, class_range(3)), enc);
    CHECK(report.at("251") == doctest::Approx(2.0 / 3.0));
    CHECK(report.at("402") == 1.0);
    CHECK(report.count("404") == 0);
}

TEST_CASE("metrics match brute force on random instances") {
    RandomStream rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 1 + static_cast<int>(rng.uniform_index(10));
        const auto n = 1 + rng.uniform_index(200);
        std::vector<int> t, p;
        for (std::uint64_t i = 0; i < n; ++i) {
            t.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k))));
            p.push_back(rng.bernoulli(0.5) ? t.back() : static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k))));
        }
        const auto report = evaluate(t, p, class_range(k));
        const auto b = brute_force(t, p, k);
        CHECK(std::fabs(report.accuracy - b.accuracy) <= 1e-12);
        CHECK(std::fabs(report.balanced_accuracy - b.balanced) <= 1e-12);
        REQUIRE(report.per_class_recall.size() == b.recall.size());
        for (auto [c, r] : b.recall) CHECK(std::fabs(report.per_class_recall.at(c) - r) <= 1e-12);

        std::size_t total = 0;
        for (std::size_t i = 0; i < report.confusion.size(); ++i) {
            CHECK(report.confusion.row_sum(i) ==
                  static_cast<std::size_t>(std::count(t.begin(), t.end(), static_cast<int>(i))));
            total += report.confusion.row_sum(i);
        }
        CHECK(total == n);

        double lo = 1, hi = 0;
        for (auto [c, r] : report.per_class_recall) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        CHECK(report.balanced_accuracy >= lo - 1e-12);
        CHECK(report.balanced_accuracy <= hi + 1e-12);

        // consistent relabeling leaves every metric unchanged
        std::vector<int> perm = class_range(k);
        rng.shuffle(std::span<int>(perm));
        std::vector<int> tp, pp;
        for (std::size_t i = 0; i < t.size(); ++i) {
            tp.push_back(perm[static_cast<std::size_t>(t[i])]);
            pp.push_back(perm[static_cast<std::size_t>(p[i])]);
        }
        const auto relabeled = evaluate(tp, pp, class_range(k));
        CHECK(std::fabs(relabeled.accuracy - report.accuracy) <= 1e-12);
        CHECK(std::fabs(relabeled.balanced_accuracy - report.balanced_accuracy) <= 1e-12);
    }
}

TEST_CASE("group evaluation") {
    std::vector<Sample> samples;
    for (int i = 0; i < 40; ++i) samples.push_back(sample(1 + i % 4, i % 3, i % 2 ? "P01" : "P02"));
    const Predictor predict = [](std::span<const double> x) { return x[0] == 1.0 ? 0 : static_cast<int>(x[1]); };
    const auto classes = class_range(3);

    const auto y_true = [&] {
        std::vector<int> out;
        for (const auto& s : samples) out.push_back(s.target);
        return out;
    }();
    const auto overall = evaluate(y_true, predict_all(predict, samples), classes);

    const GroupKey everyone = [](const Sample&) { return std::optional<std::string>("all"); };
    const auto single = group_eval(samples, predict, everyone, classes);
    REQUIRE(single.size() == 1);
    CHECK(single.at("all").accuracy == overall.accuracy);
    CHECK(single.at("all").balanced_accuracy == overall.balanced_accuracy);

    const auto by_task = group_eval(samples, predict, task_group(), classes);
    CHECK(by_task.size() == 4);
    std::size_t n = 0;
    for (const auto& [g, r] : by_task) n += r.n;
    CHECK(n == samples.size());
    CHECK(by_task.at("task2").accuracy == 1.0);

    const std::map<std::string, PersonProfile> profiles{
        {"P01", {"female", 20, 160, "a", "b", "c", "low", "d", "hmd"}},
        {"P02", {"male", 30, 180, "a", "b", "c", "high", "d", "desktop"}}};
    const auto crossed = group_eval(samples, predict,
                                    crossed_group(profile_group(profiles, "building_familiarity"), task_group()), classes);
    CHECK(crossed.size() == 4);
    for (const auto& [g, r] : crossed) {
        std::vector<int> t, p;
        for (const auto& s : samples) {
            const std::string fam = profiles.at(s.participant).building_familiarity;
            if (g.starts_with(fam) && g.ends_with(std::to_string(s.task))) {
                t.push_back(s.target);
                p.push_back(predict(s.features));
            }
        }
        const auto direct = evaluate(t, p, classes);
        CHECK(r.n == direct.n);
        CHECK(r.accuracy == direct.accuracy);
        CHECK(r.balanced_accuracy == direct.balanced_accuracy);
    }

    const std::map<std::string, PersonProfile> partial{{"P01", profiles.at("P01")}};
    CHECK_THROWS_AS(group_eval(samples, predict, profile_group(partial, "gender"), classes), Error);
}

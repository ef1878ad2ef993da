#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fraudkit/errors.hpp"
#include "fraudkit/metrics.hpp"
#include "fraudkit/rng.hpp"

using namespace fraudkit;

namespace {

// O(n^2) rank-statistic oracle: P(score_pos > score_neg) + 0.5 P(tie)
double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0;
    std::int64_t pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / double(pairs);
}

// brute-force curve: confusion counts at every unique threshold, descending
std::vector<std::pair<double, double>> brute_curve(const std::vector<double>& scores,
                                                   const std::vector<int>& labels) {
    std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
    double pos = 0, neg = 0;
    for (int l : labels) (l ? pos : neg)++;
    std::vector<std::pair<double, double>> points{{0.0, 0.0}};
    for (double t : thresholds) {
        auto c = confusion(scores, labels, t);
        points.push_back({double(c.fp) / neg, double(c.tp) / pos});
    }
    return points;
}

std::pair<std::vector<double>, std::vector<int>> random_scored(Rng& rng, int n) {
    std::vector<double> scores(static_cast<size_t>(n));
    std::vector<int> labels(static_cast<size_t>(n));
    bool ties = rng.uniform01() < 0.5;
    for (int i = 0; i < n; ++i) {
        scores[size_t(i)] = ties ? double(rng.uniform_int(0, 9)) / 10.0 : rng.uniform01();
        labels[size_t(i)] = rng.uniform01() < 0.4 ? 1 : 0;
    }
    labels[0] = 1;  // both classes guaranteed
    labels[size_t(n - 1)] = 0;
    return {scores, labels};
}

}  // namespace

TEST_CASE("perfect separation gives the unit-step curve") {
    std::vector<double> scores{0.9, 0.1};
    std::vector<int> labels{1, 0};
    auto curve = roc_curve(scores, labels);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].fpr == 0.0);
    CHECK(curve.points[0].tpr == 0.0);
    CHECK(curve.points[1].fpr == 0.0);
    CHECK(curve.points[1].tpr == 1.0);
    CHECK(curve.points[2].fpr == 1.0);
    CHECK(curve.points[2].tpr == 1.0);
    CHECK(auc(curve) == doctest::Approx(1.0));
}

TEST_CASE("a full tie is one diagonal step") {
    std::vector<double> scores{0.5, 0.5};
    std::vector<int> labels{1, 0};
    auto curve = roc_curve(scores, labels);
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].fpr == 0.0);
    CHECK(curve.points[1].fpr == 1.0);
    CHECK(curve.points[1].tpr == 1.0);
    CHECK(auc(curve) == doctest::Approx(0.5));
}

TEST_CASE("degenerate labels are rejected") {
    std::vector<double> scores{0.2, 0.4};
    std::vector<int> ones{1, 1};
    CHECK_THROWS_AS(roc_curve(scores, ones), DataError);
    std::vector<int> zeros{0, 0};
    CHECK_THROWS_AS(roc_curve(scores, zeros), DataError);
}

TEST_CASE("six-point fixture equals the brute-force threshold enumeration") {
    std::vector<double> scores{0.9, 0.8, 0.8, 0.4, 0.3, 0.1};
    std::vector<int> labels{1, 1, 0, 1, 0, 0};
    auto curve = roc_curve(scores, labels);
    auto oracle = brute_curve(scores, labels);
    REQUIRE(curve.points.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
        CHECK(curve.points[i].fpr == doctest::Approx(oracle[i].first));
        CHECK(curve.points[i].tpr == doctest::Approx(oracle[i].second));
    }
}

TEST_CASE("trapezoidal auc equals the pairwise rank statistic") {
    Rng rng(404);
    auto [scores, labels] = random_scored(rng, 200);
    CHECK(std::fabs(auc(roc_curve(scores, labels)) - pairwise_auc(scores, labels)) <= 1e-12);
}

TEST_CASE("auc equals the rank statistic on many random datasets") {
    Rng rng(1123);
    for (int iter = 0; iter < 100; ++iter) {
        int n = int(rng.uniform_int(4, 500));
        auto [scores, labels] = random_scored(rng, n);
        double trap = auc(roc_curve(scores, labels));
        double rank = pairwise_auc(scores, labels);
        CHECK(std::fabs(trap - rank) <= 1e-12);
    }
}

TEST_CASE("roc curve is monotone with proper endpoints on random input") {
    Rng rng(77);
    for (int iter = 0; iter < 100; ++iter) {
        auto [scores, labels] = random_scored(rng, int(rng.uniform_int(4, 120)));
        auto curve = roc_curve(scores, labels);
        REQUIRE(curve.points.size() >= 2);
        CHECK(curve.points.front().fpr == 0.0);
        CHECK(curve.points.front().tpr == 0.0);
        CHECK(curve.points.back().fpr == 1.0);
        CHECK(curve.points.back().tpr == 1.0);
        for (size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
            CHECK(curve.thresholds[i] < curve.thresholds[i - 1]);
        }
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng(500);
    auto [scores, labels] = random_scored(rng, 80);
    double base = auc(roc_curve(scores, labels));
    std::vector<double> transformed(scores);
    for (auto& s : transformed) s = std::exp(3.0 * s + 1.0);
    CHECK(auc(roc_curve(transformed, labels)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("negating tie-free scores complements auc") {
    Rng rng(321);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 101; ++i) {
        scores.push_back(double(i) / 101.0);  // all distinct
        labels.push_back(rng.uniform01() < 0.5 ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> negated(scores);
    for (auto& s : negated) s = -s;
    double a = auc(roc_curve(scores, labels));
    double b = auc(roc_curve(negated, labels));
    CHECK(a == doctest::Approx(1.0 - b).epsilon(1e-12));
}

TEST_CASE("confusion counts at a threshold") {
    std::vector<double> scores{0.6, 0.4};
    std::vector<int> labels{1, 0};
    auto c = confusion(scores, labels, 0.5);
    CHECK(c.tp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);

    auto none = confusion(scores, labels, 0.7);
    CHECK(none.tp == 0);
    CHECK(none.fp == 0);
    CHECK(none.fn == 1);
    CHECK(none.tn == 1);

    // >= threshold is the positive side
    auto edge = confusion(scores, labels, 0.6);
    CHECK(edge.tp == 1);
}

TEST_CASE("20-sample confusion matches hand enumeration") {
    Rng rng(2718);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        scores.push_back(rng.uniform01());
        labels.push_back(rng.uniform01() < 0.5 ? 1 : 0);
    }
    double threshold = 0.45;
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < 20; ++i) {
        bool predicted = scores[size_t(i)] >= threshold;
        if (labels[size_t(i)] == 1 && predicted) ++tp;
        if (labels[size_t(i)] == 0 && predicted) ++fp;
        if (labels[size_t(i)] == 0 && !predicted) ++tn;
        if (labels[size_t(i)] == 1 && !predicted) ++fn;
    }
    auto c = confusion(scores, labels, threshold);
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.tn == tn);
    CHECK(c.fn == fn);
    CHECK(c.tp + c.fp + c.tn + c.fn == 20);
}

TEST_CASE("f1 score formula and degenerate convention") {
    CHECK(f1_score({2, 1, 0, 1}) == doctest::Approx(2.0 / 3.0));  // 2*2/(4+1+1)
    CHECK(f1_score({5, 0, 7, 0}) == doctest::Approx(1.0));
    CHECK(f1_score({0, 0, 3, 0}) == 0.0);
}

TEST_CASE("f1_max scans thresholds and prefers the highest on ties") {
    std::vector<double> scores{0.9, 0.7, 0.3, 0.2};
    std::vector<int> labels{1, 1, 0, 0};
    auto best = f1_max(scores, labels);
    CHECK(best.f1 == doctest::Approx(1.0));
    CHECK(best.threshold == doctest::Approx(0.7));
}

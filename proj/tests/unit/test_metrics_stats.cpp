#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "preictal/error.hpp"
#include "preictal/metrics.hpp"
#include "preictal/rng.hpp"
#include "preictal/stats.hpp"

using namespace preictal;

namespace {

// Pairwise AUC: fraction of (positive, negative) pairs ordered correctly, ties half.
double auc_pairs(const std::vector<double>& s, const std::vector<int>& l) {
    double good = 0, total = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!l[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (l[j]) continue;
            total += 1;
            good += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    }
    return good / total;
}

Counts counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    Counts c;
    c.tp = tp;
    c.fp = fp;
    c.tn = tn;
    c.fn = fn;
    return c;
}

}  // namespace

TEST_CASE("confusion metrics follow the textbook formulas") {
    const auto m = metrics_from_counts(counts(99, 5, 95, 1));
    CHECK(*m.sen == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(*m.spe == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(*m.acc == doctest::Approx(0.97).epsilon(1e-15));
    const double prec = 99.0 / 104.0;
    CHECK(*m.f1 == doctest::Approx(2 * prec * 0.99 / (prec + 0.99)).epsilon(1e-15));
    CHECK(*m.f1 == doctest::Approx(198.0 / 204.0).epsilon(1e-15));
}

TEST_CASE("perfect and all-positive predictions") {
    const std::vector<int> labels{1, 1, 0, 0};
    const auto perfect = confusion_metrics(std::vector<double>{0.9, 0.6, 0.1, 0.4}, labels);
    CHECK(*perfect.sen == 1.0);
    CHECK(*perfect.spe == 1.0);
    CHECK(*perfect.acc == 1.0);
    CHECK(*perfect.f1 == 1.0);
    const auto all_pos = confusion_metrics(std::vector<double>{1, 1, 1, 1}, labels);
    CHECK(*all_pos.sen == 1.0);
    CHECK(*all_pos.spe == 0.0);
    CHECK(*all_pos.acc == 0.5);
}

TEST_CASE("threshold ties count as positive") {
    const auto c = confusion_counts(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0});
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
}

TEST_CASE("one-class labels leave the undefined ratio empty") {
    const auto m = confusion_metrics(std::vector<double>{0.2, 0.8}, std::vector<int>{0, 0});
    CHECK_FALSE(m.sen.has_value());
    CHECK(m.spe.has_value());
}

TEST_CASE("balanced accuracy equals mean of sen and spe on balanced sets") {
    const auto m = metrics_from_counts(counts(40, 7, 43, 10));
    CHECK(*m.acc == doctest::Approx((*m.sen + *m.spe) / 2).epsilon(1e-15));
}

TEST_CASE("AUC matches the pairwise oracle on random sets") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(derive_seed(77, seed));
        const std::size_t n = 20 + rng.below(200);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = rng.uniform() < 0.4 ? 1 : 0;
            // Coarse rounding plants ties.
            s[i] = std::round((rng.normal() + l[i]) * 4) / 4;
        }
        l[0] = 1;
        l[1] = 0;
        CHECK(std::abs(auc(s, l) - auc_pairs(s, l)) < 1e-12);
    }
}

TEST_CASE("AUC edge cases and monotone invariance") {
    CHECK(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<int>{0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);

    Rng rng(5);
    std::vector<double> s(300), t(300);
    std::vector<int> l(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
        l[i] = static_cast<int>(rng.below(2));
        s[i] = rng.normal() + 0.7 * l[i];
        t[i] = std::exp(3 * s[i]) + 2;  // strictly increasing map
    }
    CHECK(auc(s, l) == auc(t, l));
}

TEST_CASE("FAR arithmetic") {
    CHECK(far_from_counts(5, 1440) == 2.5);  // 5 FP over 2 h of 5-s segments
    CHECK(far_from_counts(0, 720) == 0.0);
    std::vector<double> p(720, 0.9);
    std::vector<int> l(720, 0);
    CHECK(far_epoch(p, l) == 720.0);
    CHECK_THROWS_AS(far_from_counts(1, 0), ValidationError);
    // Linear in FP, inverse in hours.
    CHECK(far_from_counts(10, 1440) == 2 * far_from_counts(5, 1440));
    CHECK(far_from_counts(5, 2880) == far_from_counts(5, 1440) / 2);
}

TEST_CASE("segment-wise pooling weighs larger seizures more") {
    const std::vector<Counts> per{counts(100, 0, 0, 0), counts(270, 0, 0, 30)};
    const auto pooled = aggregate_segmentwise(per);
    CHECK(*pooled.sen == doctest::Approx(0.925).epsilon(1e-15));
    const std::vector<Counts> reversed{per[1], per[0]};
    CHECK(aggregate_segmentwise(reversed).counts.tp == pooled.counts.tp);
    const std::vector<Counts> one{per[1]};
    CHECK(*aggregate_segmentwise(one).sen == doctest::Approx(0.9));
}

TEST_CASE("Friedman matches the reference implementation on canned tables") {
    // Reference values from scipy.stats.friedmanchisquare.
    const std::vector<std::vector<double>> t1{{10, 20, 30, 40}, {12, 11, 35, 30}, {9, 25, 20, 41}};
    const auto r1 = friedman(t1);
    CHECK(std::abs(r1.statistic - 5.800000000000004) < 1e-9);
    CHECK(std::abs(r1.p - 0.1217566197112535) < 1e-9);
    CHECK(r1.df == 3);

    const std::vector<std::vector<double>> t2{{3, 3, 2, 1}, {4, 2, 2, 1}, {5, 4, 3, 3},
                                              {2, 2, 2, 2}, {7, 6, 5, 1}, {4, 4, 1, 2}};
    const auto r2 = friedman(t2);
    CHECK(std::abs(r2.statistic - 12.978260869565222) < 1e-9);
    CHECK(std::abs(r2.p - 0.004683854178195716) < 1e-9);
    REQUIRE(r2.pairs.size() == 6);
    // Dunn z, raw p and Bonferroni p computed independently in Python.
    const double z[6] = {0.7826237921249266, 2.23606797749979, 2.7950849718747373,
                         1.4534441853748632, 2.0124611797498106, 0.5590169943749476};
    const double praw[6] = {0.4338480657664392, 0.0253473186774682, 0.005188607552315538,
                            0.1461004659634224, 0.044171344908442656, 0.5761501220305789};
    const double padj[6] = {1, 0.1520839120648092, 0.03113164531389323, 0.8766027957805345, 0.26502806945065593, 1};
    for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(r2.pairs[i].z - z[i]) < 1e-9);
        CHECK(std::abs(r2.pairs[i].p_raw - praw[i]) < 1e-9);
        CHECK(std::abs(r2.pairs[i].p_adjusted - padj[i]) < 1e-9);
    }
    CHECK(r2.pairs[2].reject);
    CHECK_FALSE(r2.pairs[1].reject);

    const std::vector<std::vector<double>> t3{
        {0.305, -1.04, 0.75, 0.941},   {-1.951, -1.302, 0.128, -0.316}, {-0.017, -0.853, 0.879, 0.778},
        {0.066, 1.127, 0.468, -0.859}, {0.369, -0.959, 0.878, -0.05},   {-0.185, -0.681, 1.223, -0.155},
        {-0.428, -0.352, 0.532, 0.365}, {0.413, 0.431, 2.142, -0.406},  {-0.512, -0.814, 0.616, 1.129},
        {-0.114, -0.84, -0.824, 0.651}, {0.743, 0.543, -0.666, 0.232},  {0.117, 0.219, 0.871, 0.224},
        {0.679, 0.068, 0.289, 0.631}};
    const auto r3 = friedman(t3);
    CHECK(std::abs(r3.statistic - 9.461538461538481) < 1e-9);
    CHECK(std::abs(r3.p - 0.02374406647671967) < 1e-9);
    CHECK(std::abs(r3.pairs[3].z - -2.88630719618845) < 1e-9);
    CHECK(std::abs(r3.pairs[3].p_adjusted - 0.023387489433791764) < 1e-9);
}

TEST_CASE("Friedman degenerate and extreme cases") {
    const std::vector<std::vector<double>> same(5, std::vector<double>{0.7, 0.7, 0.7, 0.7});
    const auto r = friedman(same);
    CHECK(r.statistic == 0.0);
    CHECK(r.p == 1.0);

    // Identical rows with distinct values: perfect concordance reaches n (k - 1).
    std::vector<std::vector<double>> mono(13, std::vector<double>{4, 3, 2, 1});
    CHECK(std::abs(friedman(mono).statistic - 39.0) < 1e-12);

    // Oracle from the rank formula on a shuffled-but-untied matrix.
    Rng rng(3);
    std::vector<std::vector<double>> m(9, std::vector<double>(4));
    for (auto& row : m) {
        for (auto& v : row) v = rng.normal();
    }
    std::vector<double> rsum(4, 0);
    for (const auto& row : m) {
        for (int j = 0; j < 4; ++j) {
            int rank = 1;
            for (int q = 0; q < 4; ++q) rank += row[q] < row[j];
            rsum[j] += rank;
        }
    }
    double ss = 0;
    for (double R : rsum) ss += R * R;
    const double expected = 12.0 / (9 * 4 * 5) * ss - 3 * 9 * 5;
    CHECK(std::abs(friedman(m).statistic - expected) < 1e-12);

    CHECK_THROWS_AS(friedman({{1, 2, 3, 4}}), ValidationError);
}

TEST_CASE("Friedman is invariant to per-subject monotone transforms") {
    Rng rng(11);
    std::vector<std::vector<double>> m(10, std::vector<double>(4)), t = m;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double scale = 0.5 + rng.uniform();
        for (int j = 0; j < 4; ++j) {
            m[i][j] = std::round(rng.normal() * 3) / 3;
            t[i][j] = std::exp(scale * m[i][j]);
        }
    }
    CHECK(std::abs(friedman(m).statistic - friedman(t).statistic) < 1e-12);
}

TEST_CASE("average ranks share ties") {
    const auto r = average_ranks({3, 1, 3, 2});
    CHECK(r == std::vector<double>{3.5, 1, 3.5, 2});
}

#include "preictal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "preictal/error.hpp"

namespace preictal {

std::vector<double> average_ranks(const std::vector<double>& row) {
    const std::size_t k = row.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    std::vector<double> ranks(k);
    for (std::size_t i = 0; i < k;) {
        std::size_t j = i;
        while (j < k && row[order[j]] == row[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
        i = j;
    }
    return ranks;
}

StatReport friedman(const std::vector<std::vector<double>>& scores, double alpha) {
    if (scores.size() < 2) throw ValidationError("Friedman test needs at least two subjects");
    const std::size_t k = scores.front().size();
    if (k < 2) throw ValidationError("Friedman test needs at least two groups");
    for (const auto& row : scores) {
        if (row.size() != k) throw ValidationError("ragged score matrix");
        for (double v : row) {
            if (!std::isfinite(v)) throw ValidationError("score matrix contains a non-finite value");
        }
    }
    const double n = static_cast<double>(scores.size());
    const double kd = static_cast<double>(k);

    StatReport r;
    r.n_subjects = scores.size();
    r.k_groups = k;
    r.df = static_cast<int>(k) - 1;
    r.alpha = alpha;
    std::vector<double> rank_sum(k, 0.0);
    double tie_term = 0.0;
    for (const auto& row : scores) {
        const auto ranks = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) rank_sum[j] += ranks[j];
        auto sorted = row;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < k;) {
            std::size_t j = i;
            while (j < k && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_term += t * t * t - t;
            i = j;
        }
    }
    double ss = 0.0;
    for (double R : rank_sum) ss += R * R;
    const double q = 12.0 / (n * kd * (kd + 1.0)) * ss - 3.0 * n * (kd + 1.0);
    const double correction = 1.0 - tie_term / (n * kd * (kd * kd - 1.0));
    if (correction <= 0.0) {
        r.statistic = 0.0;
        r.p = 1.0;
    } else {
        r.statistic = std::max(0.0, q / correction);
        const boost::math::chi_squared chi(static_cast<double>(r.df));
        r.p = r.statistic > 0 ? boost::math::cdf(boost::math::complement(chi, r.statistic)) : 1.0;
    }

    for (double R : rank_sum) r.mean_ranks.push_back(R / n);
    const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * n));
    const double n_pairs = kd * (kd - 1.0) / 2.0;
    const boost::math::normal unit;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            PairwiseComparison c;
            c.group_i = i;
            c.group_j = j;
            c.mean_rank_i = r.mean_ranks[i];
            c.mean_rank_j = r.mean_ranks[j];
            c.z = (c.mean_rank_i - c.mean_rank_j) / se;
            c.p_raw = 2.0 * boost::math::cdf(boost::math::complement(unit, std::abs(c.z)));
            c.p_adjusted = std::min(1.0, c.p_raw * n_pairs);
            c.reject = c.p_adjusted < alpha;
            r.pairs.push_back(c);
        }
    }
    return r;
}

}  // namespace preictal

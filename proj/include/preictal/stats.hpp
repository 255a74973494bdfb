#pragma once

#include <string>
#include <vector>

namespace preictal {

struct PairwiseComparison {
    std::size_t group_i = 0, group_j = 0;
    double mean_rank_i = 0, mean_rank_j = 0;
    double z = 0;
    double p_raw = 1;
    double p_adjusted = 1;  // Bonferroni: min(1, p_raw * number of pairs)
    bool reject = false;
};

struct StatReport {
    std::size_t n_subjects = 0;
    std::size_t k_groups = 0;
    double statistic = 0;  // tie-corrected Friedman chi-square
    int df = 0;
    double p = 1;
    std::vector<double> mean_ranks;
    std::vector<PairwiseComparison> pairs;
    double alpha = 0.05;
};

/// Friedman test over a subjects x groups matrix (rows are related samples), with Dunn's
/// pairwise z on mean ranks and Bonferroni adjustment.
StatReport friedman(const std::vector<std::vector<double>>& scores, double alpha = 0.05);

/// Average ranks (1-based) of one row; ties share the mean rank.
std::vector<double> average_ranks(const std::vector<double>& row);

}  // namespace preictal

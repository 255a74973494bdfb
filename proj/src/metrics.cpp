#include "preictal/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "preictal/error.hpp"

namespace preictal {

Counts confusion_counts(std::span<const double> predictions, std::span<const int> labels, double threshold) {
    if (predictions.size() != labels.size()) throw ValidationError("predictions and labels differ in length");
    Counts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool positive = predictions[i] >= threshold;
        if (labels[i]) (positive ? c.tp : c.fn)++;
        else (positive ? c.fp : c.tn)++;
    }
    return c;
}

MetricsReport metrics_from_counts(const Counts& c) {
    MetricsReport m;
    m.counts = c;
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.sen = ratio(c.tp, c.tp + c.fn);
    m.spe = ratio(c.tn, c.tn + c.fp);
    m.acc = ratio(c.tp + c.tn, c.total());
    m.precision = ratio(c.tp, c.tp + c.fp);
    if (m.sen && m.precision && (*m.sen + *m.precision) > 0) {
        m.f1 = 2.0 * *m.precision * *m.sen / (*m.precision + *m.sen);
    } else if (m.sen && m.precision) {
        m.f1 = 0.0;
    }
    return m;
}

MetricsReport confusion_metrics(std::span<const double> predictions, std::span<const int> labels, double threshold) {
    return metrics_from_counts(confusion_counts(predictions, labels, threshold));
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]]) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC needs both classes");
    const double np = static_cast<double>(n_pos);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double far_from_counts(std::size_t false_positives, std::size_t interictal_segments, double segment_s) {
    if (interictal_segments == 0) throw ValidationError("FAR needs interictal data");
    const double hours = static_cast<double>(interictal_segments) * segment_s / 3600.0;
    return static_cast<double>(false_positives) / hours;
}

double far_epoch(std::span<const double> predictions, std::span<const int> labels, double segment_s, double threshold) {
    const auto c = confusion_counts(predictions, labels, threshold);
    return far_from_counts(c.fp, c.fp + c.tn, segment_s);
}

MetricsReport aggregate_segmentwise(std::span<const Counts> per_seizure) {
    Counts total;
    for (const auto& c : per_seizure) total += c;
    return metrics_from_counts(total);
}

}  // namespace preictal

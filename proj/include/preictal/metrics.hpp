#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace preictal {

struct Counts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Ratios are empty when undefined (e.g. no positives for sensitivity).
struct MetricsReport {
    Counts counts;
    std::optional<double> sen, spe, acc, f1, precision;
    std::optional<double> auc;
    std::optional<double> far_per_hour;
};

/// Thresholded at `threshold`; scores equal to it count as positive.
Counts confusion_counts(std::span<const double> predictions, std::span<const int> labels, double threshold = 0.5);
MetricsReport metrics_from_counts(const Counts& c);
MetricsReport confusion_metrics(std::span<const double> predictions, std::span<const int> labels,
                                double threshold = 0.5);

/// Mann-Whitney form of the ROC area with ties counted half. Throws ValidationError for one-class input.
double auc(std::span<const double> scores, std::span<const int> labels);

/// False-positive interictal segments per hour of interictal data.
double far_epoch(std::span<const double> predictions, std::span<const int> labels, double segment_s = 5.0,
                 double threshold = 0.5);
double far_from_counts(std::size_t false_positives, std::size_t interictal_segments, double segment_s = 5.0);

/// Pools counts before taking ratios, so larger seizures weigh more.
MetricsReport aggregate_segmentwise(std::span<const Counts> per_seizure);

}  // namespace preictal

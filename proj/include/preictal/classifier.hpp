#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "preictal/preprocess.hpp"

namespace preictal {

struct Band {
    const char* name;
    double low_hz;
    double high_hz;
};

/// delta, theta, alpha, beta, gamma
const std::vector<Band>& feature_bands();

constexpr double kLogPowerFloor = 1e-12;

/// Per channel, log band power for each band in feature_bands(); channel-major.
using FeatureVector = std::vector<double>;

/// Row-major table of feature vectors.
class FeatureTable {
public:
    explicit FeatureTable(std::size_t dim = 0) : dim_(dim) {}
    void push_back(std::span<const double> row);
    std::size_t rows() const noexcept { return dim_ ? values_.size() / dim_ : 0; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_;
    std::vector<double> values_;
};

/// Periodogram band-power features. Keeps an FFT plan per segment length; not thread-safe.
class FeatureExtractor {
public:
    explicit FeatureExtractor(double sample_rate_hz = 256.0);
    ~FeatureExtractor();
    FeatureExtractor(const FeatureExtractor&) = delete;
    FeatureExtractor& operator=(const FeatureExtractor&) = delete;

    FeatureVector operator()(const Segment& seg);
    /// Features of one window taken directly from a recording.
    FeatureVector operator()(const Recording& rec, std::int64_t offset_sample, std::size_t length);

private:
    FeatureVector compute(std::span<const double> channel_major, std::size_t n_channels, std::size_t n);
    struct Plan;
    double rate_;
    std::unique_ptr<Plan> plan_;
};

FeatureVector extract_features(const Segment& seg, double sample_rate_hz = 256.0);

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 64;
    int max_epochs = 100;
    int patience = 20;
    std::uint64_t seed = 0;
};

struct TrainingMeta {
    int epochs_run = 0;
    int best_epoch = 0;  // 1-based
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    std::uint64_t seed = 0;
};

/// Logistic model on standardized features. weights[0] is the bias.
struct BaselineModel {
    std::vector<double> weights;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;
    TrainingMeta meta;

    std::size_t feature_dim() const noexcept { return weights.empty() ? 0 : weights.size() - 1; }
    double score(std::span<const double> features) const;
    double probability(std::span<const double> features) const;

    /// Model with every weight zero and identity standardization.
    static BaselineModel zeros(std::size_t feature_dim);
};

/// Mini-batch logistic regression (Adam with the AMSGrad variant, zero initialization,
/// binary cross-entropy). Returns the epoch checkpoint with the lowest validation loss.
BaselineModel train_baseline(const FeatureTable& train, std::span<const int> train_labels, const FeatureTable& val,
                             std::span<const int> val_labels, const TrainConfig& config = {});

double binary_cross_entropy(const BaselineModel& model, const FeatureTable& x, std::span<const int> labels);

void save_model(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path);

struct PredictionPoint {
    double t_onset_min;
    double y;
};

/// Classifier output over continuous pre-onset time, oldest first.
struct PredictionSeries {
    std::vector<PredictionPoint> entries;
    double segment_spacing_s = 5.0;
    std::string source;
};

std::vector<double> predict(const BaselineModel& model, const FeatureTable& features);

/// One probability per timed segment, ordered oldest first. Segments need t_onset_min.
PredictionSeries predict_series(const BaselineModel& model, const FeatureTable& features,
                                std::span<const SegmentRef> segments, std::string source = "baseline");

/// Exchange CSV "t_onset_min,y" with six decimals.
void export_predictions(const PredictionSeries& series, const std::filesystem::path& path);
PredictionSeries import_predictions(const std::filesystem::path& path);
PredictionSeries parse_predictions(std::string_view text, const std::string& source = "import");

}  // namespace preictal

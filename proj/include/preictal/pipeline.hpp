#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "preictal/classifier.hpp"
#include "preictal/config.hpp"
#include "preictal/dataset.hpp"
#include "preictal/report.hpp"

namespace preictal {

/// Loads the preprocessed recording of one file by name.
using RecordingLoader = std::function<Recording(const std::string& file)>;

/// Features keyed by (file, offset). `ensure` loads each needed file once.
class FeatureCache {
public:
    FeatureCache(RecordingLoader loader, double sample_rate_hz, double epoch_s);

    void ensure(const std::vector<SegmentRef>& refs);
    FeatureTable table(const std::vector<SegmentRef>& refs) const;
    std::size_t size() const noexcept { return features_.size(); }

private:
    RecordingLoader loader_;
    double rate_;
    std::size_t epoch_samples_;
    std::map<std::pair<std::string, std::int64_t>, FeatureVector> features_;
};

/// Timeline and labeled ranges of one patient.
struct PatientContext {
    PatientTimeline timeline;
    LabeledRanges ranges;
};

PatientContext make_context(const std::string& patient_id, const Summary& summary,
                            const std::map<std::string, double>& durations_s, double sample_rate_hz,
                            const RuleConfig& rules);

std::uint64_t patient_seed(std::uint64_t seed, const std::string& patient_id);

std::vector<SplitSpec> make_splits(const PatientContext& ctx, PreictalDefinition def, const Config& config);

BaselineModel train_split(const SplitSpec& split, const FeatureCache& cache, const Config& config);

struct SplitScores {
    std::string seizure_id;
    int run = 0;
    std::vector<int> labels;
    std::vector<double> scores;
};

SplitScores score_split(const SplitSpec& split, const BaselineModel& model, const FeatureCache& cache);

/// Pools the test predictions of every fold for each definition.
PatientMetrics patient_metrics(const std::string& patient_id, std::size_t n_seizures,
                               const std::map<int, std::vector<SplitScores>>& by_definition, double epoch_s);

/// CIOPR for each (seizure, run) over the definitions present.
std::vector<CioprRow> ciopr_rows(const std::string& patient_id,
                                 const std::map<std::pair<std::string, int>, std::vector<SeriesByDefinition>>& series,
                                 double block_min);

/// Whole pipeline on a generated corpus without touching disk.
struct CorpusResult {
    std::vector<PatientMetrics> metrics;
    std::vector<CioprRow> ciopr;
    std::vector<SeizureCiopr> seizures;
    std::vector<OppDecision> opp;
};

CorpusResult run_synthetic_in_memory(const Config& config);

// CLI stages. Each reads and writes under the work directory `work`.
void stage_synth(const Config& config, const std::filesystem::path& work);
void stage_preprocess(const Config& config, const std::filesystem::path& work,
                      const std::optional<std::filesystem::path>& raw_dir = std::nullopt);
void stage_dataset(const Config& config, const std::filesystem::path& work);
void stage_train(const Config& config, const std::filesystem::path& work);
void stage_evaluate(const Config& config, const std::filesystem::path& work);
void stage_ciopr(const Config& config, const std::filesystem::path& work);
void stage_opp(const Config& config, const std::filesystem::path& work);
void stage_stats(const Config& config, const std::filesystem::path& work);
void stage_report(const Config& config, const std::filesystem::path& work);

/// CAR followed by the configured bandpass.
Recording preprocess_recording(const Recording& rec, const FilterKernel& kernel);

}  // namespace preictal

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preictal/preprocess.hpp"
#include "preictal/signal_io.hpp"

namespace preictal {

/// Preictal period length in minutes; one of 60, 45, 30, 15.
class PreictalDefinition {
public:
    explicit PreictalDefinition(int minutes);
    int minutes() const noexcept { return minutes_; }
    double seconds() const noexcept { return minutes_ * 60.0; }
    auto operator<=>(const PreictalDefinition&) const = default;

    static const std::vector<PreictalDefinition>& all();

private:
    int minutes_;
};

struct Interval {
    double start = 0.0;
    double end = 0.0;
    double length() const noexcept { return end > start ? end - start : 0.0; }
};

/// Recording file placed on the patient's session timeline (seconds).
struct FileSpan {
    std::string file;
    double start_s = 0.0;
    double duration_s = 0.0;
    bool has_data = true;  // false when the file was skipped (e.g. missing canonical channels)
    double end_s() const noexcept { return start_s + duration_s; }
};

struct Seizure {
    std::string id;
    std::string file;
    double onset_s = 0.0;  // session time
    double offset_s = 0.0;
};

struct PatientTimeline {
    std::string patient_id;
    double sample_rate_hz = 256.0;
    std::vector<FileSpan> files;  // chronological
    std::vector<Seizure> seizures;

    const FileSpan* file_at(double t) const;
    const FileSpan* file_named(const std::string& name) const;
};

/// Places summary blocks on one timeline. Clock times that decrease are taken to have
/// crossed midnight. Files without clock times are treated as disconnected from their
/// predecessor. `durations_s` gives the recorded length of files that have data.
PatientTimeline build_timeline(const std::string& patient_id, const Summary& summary,
                               const std::map<std::string, double>& durations_s, double sample_rate_hz);

struct RuleConfig {
    double interictal_pre_h = 4.0;   // exclusion before onset
    double interictal_post_h = 1.0;  // exclusion after offset
    double preictal_max_min = 60.0;
    double postictal_guard_h = 1.0;  // no preictal data within this long after a prior seizure
    double min_preictal_min = 1.0;
    double ciopr_min_h = 2.5;
    double ciopr_max_h = 10.0;
    double gap_tolerance_s = 10.0;  // file gaps up to this long still count as continuous
};

struct SeizureRanges {
    Seizure seizure;
    std::vector<Interval> preictal;  // recorded pieces of the candidate window
    double preictal_available_s = 0.0;
    bool eligible = false;
    std::string exclusion_reason;
    double continuous_pre_onset_s = 0.0;  // uninterrupted EEG before onset, after any prior seizure
    bool ciopr_eligible = false;
    Interval ciopr_window;  // capped at ciopr_max_h
};

struct LabeledRanges {
    std::string patient_id;
    std::vector<Interval> interictal;
    std::vector<SeizureRanges> seizures;
    bool patient_eligible = false;
    std::string patient_reason;

    std::vector<const SeizureRanges*> eligible_seizures() const;
    std::vector<const SeizureRanges*> ciopr_seizures() const;
};

LabeledRanges classify_time_ranges(const PatientTimeline& timeline, const RuleConfig& rules = {});

/// Contiguous stretch of preictal data inside one file, anchored to the seizure onset.
struct Stretch {
    std::string patient_id;
    std::string file;
    std::string seizure_id;
    double file_start_s = 0.0;  // session time of the file's first sample
    double start_s = 0.0;       // session time
    double end_s = 0.0;
    double onset_s = 0.0;
};

/// Re-segments a stretch with stride epoch_s * (1 - overlap) on a grid anchored at onset
/// (epochs end at onset - k * stride). Throws ValidationError for stretches shorter than one epoch.
std::vector<SegmentRef> oversample(const Stretch& stretch, double overlap, double sample_rate_hz,
                                   double epoch_s = 5.0);

/// Preictal stretches of one seizure restricted to the last `def` minutes before onset.
std::vector<Stretch> preictal_stretches(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                        PreictalDefinition def);

/// Non-overlapping preictal epochs for a definition (onset-anchored grid).
std::vector<SegmentRef> extract_preictal(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                         PreictalDefinition def, double epoch_s = 5.0);

/// Non-overlapping interictal epochs, each inside one file.
std::vector<SegmentRef> interictal_pool(const PatientTimeline& timeline, const LabeledRanges& ranges,
                                        double epoch_s = 5.0);

/// Onset-anchored non-overlapping epochs covering the CIOPR window, oldest first.
std::vector<SegmentRef> continuous_segments(const PatientTimeline& timeline, const SeizureRanges& seizure,
                                            double epoch_s = 5.0);

struct SampleResult {
    std::vector<SegmentRef> segments;
    bool short_pool = false;  // fewer than requested were available
};

/// Uniform sampling without replacement; results keep pool order. Throws on an empty pool.
SampleResult sample_interictal(const std::vector<SegmentRef>& pool, std::size_t n, std::uint64_t seed);

struct SplitSpec {
    std::string patient_id;
    std::string test_seizure_id;
    int run_index = 0;
    PreictalDefinition definition{60};
    std::vector<SegmentRef> train;
    std::vector<SegmentRef> validation;
    std::vector<SegmentRef> test;
    std::vector<std::string> warnings;
};

struct SplitConfig {
    int n_runs = 4;
    double overlap = 0.66;
    double validation_fraction = 0.1;
    double epoch_s = 5.0;
};

/// Leave-one-seizure-out splits for one definition: k eligible seizures times n_runs.
std::vector<SplitSpec> loocv_splits(const PatientTimeline& timeline, const LabeledRanges& ranges,
                                    PreictalDefinition def, std::uint64_t seed, const SplitConfig& config = {});

/// Manifest CSV: patient,seizure,run,role,file,offset_s,label,t_onset_min
void write_manifest(const std::vector<SplitSpec>& splits, double sample_rate_hz, const std::filesystem::path& path);
std::vector<SplitSpec> read_manifest(const std::filesystem::path& path, double sample_rate_hz,
                                     PreictalDefinition def);

void write_eligibility(const std::vector<LabeledRanges>& patients, const std::filesystem::path& path);

}  // namespace preictal

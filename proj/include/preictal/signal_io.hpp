#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace preictal {

/// Multichannel EEG held channel-major in microvolts. Immutable after construction.
class Recording {
public:
    Recording() = default;

    /// `channel_major` holds n_channels consecutive runs of n_samples values.
    Recording(std::string patient_id, std::vector<std::string> channel_labels, double sample_rate_hz,
              std::vector<double> channel_major, double start_time_s = 0.0);

    const std::string& patient_id() const noexcept { return patient_id_; }
    const std::vector<std::string>& channel_labels() const noexcept { return labels_; }
    double sample_rate_hz() const noexcept { return rate_; }
    double start_time_s() const noexcept { return start_time_; }
    std::size_t n_channels() const noexcept { return labels_.size(); }
    std::size_t n_samples() const noexcept { return n_samples_; }
    double duration_s() const noexcept { return static_cast<double>(n_samples_) / rate_; }

    std::span<const double> channel(std::size_t c) const {
        return {data_.data() + c * n_samples_, n_samples_};
    }
    double at(std::size_t t, std::size_t c) const { return data_[c * n_samples_ + t]; }
    std::span<const double> data() const noexcept { return data_; }

    /// Copy with new samples but the same metadata.
    Recording with_data(std::vector<double> channel_major) const;
    Recording with_start_time(double start_time_s) const;
    /// Keeps the listed channels, in that order. Throws ValidationError for unknown labels.
    Recording select_channels(std::span<const std::string> labels) const;

private:
    std::string patient_id_;
    std::vector<std::string> labels_;
    double rate_ = 0.0;
    std::vector<double> data_;
    std::size_t n_samples_ = 0;
    double start_time_ = 0.0;
};

struct SeizureAnnotation {
    int index_in_file = 0;  // 1-based order within the file
    double onset_s = 0.0;   // seconds from file start
    double offset_s = 0.0;
    bool operator==(const SeizureAnnotation&) const = default;
};

using AnnotationSet = std::vector<SeizureAnnotation>;

/// One "File Name:" block of a CHB-MIT style summary.
struct SummaryFile {
    std::string file_name;
    std::optional<double> start_clock_s;  // "File Start Time" as seconds after midnight
    std::optional<double> end_clock_s;
    AnnotationSet seizures;
};

struct Summary {
    std::optional<double> sample_rate_hz;
    std::vector<SummaryFile> files;  // document order

    std::map<std::string, AnnotationSet> annotations() const;
    const SummaryFile* find(std::string_view file_name) const;
};

/// Decodes the continuous 16-bit EDF subset. Throws ParseError with the failing byte offset.
Recording parse_edf(std::span<const std::uint8_t> bytes, std::string patient_id = {});
Recording read_edf(const std::filesystem::path& path, std::string patient_id = {});

/// Parses a chbXX-summary.txt document.
Summary parse_summary(std::string_view text);
std::map<std::string, AnnotationSet> parse_summary_annotations(std::string_view text);

/// Header row of labels, one sample per row. An empty `labels` keeps the file's header.
Recording load_csv(const std::filesystem::path& path, double sample_rate_hz,
                   std::vector<std::string> labels = {}, std::string patient_id = {});
void save_csv(const Recording& rec, const std::filesystem::path& path);

/// Engine recording format for preprocessed data: a JSON header line followed by
/// float32 little-endian samples, channel-major.
void write_prec(const Recording& rec, const std::filesystem::path& path);
Recording read_prec(const std::filesystem::path& path);

/// Minimal EDF writer used by the synthetic corpus and test fixtures. Samples are
/// quantized to 16 bits over [physical_min, physical_max].
std::vector<std::uint8_t> encode_edf(const Recording& rec, double physical_min = -3276.8,
                                     double physical_max = 3276.7, int record_seconds = 1);

}  // namespace preictal

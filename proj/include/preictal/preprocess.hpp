#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "preictal/signal_io.hpp"

namespace preictal {

enum class WindowKind { hamming };

struct FilterDesign {
    double low_hz = 0.5;
    double high_hz = 45.0;
    WindowKind window = WindowKind::hamming;
    double sample_rate_hz = 256.0;
};

/// Linear-phase FIR kernel; taps.size() == order + 1.
struct FilterKernel {
    std::vector<double> taps;
    int order = 0;
    FilterDesign design;
};

/// Windowed-sinc bandpass: difference of two Hamming-windowed low-pass sincs, each
/// normalized to unit DC gain. Band edges sit at the -6 dB points.
FilterKernel design_fir_bandpass(double sample_rate_hz, double low_hz = 0.5, double high_hz = 45.0,
                                 int order = 1690);

/// |H(f)| evaluated directly from the taps.
double magnitude_response(const FilterKernel& kernel, double freq_hz);

/// Subtracts the instantaneous cross-channel mean. Needs at least two channels.
Recording common_average_reference(const Recording& rec);

/// Zero-phase application: delay-compensated convolution with reflection padding,
/// computed by FFT overlap-add. Output length equals input length.
Recording apply_filter(const Recording& rec, const FilterKernel& kernel);

/// Single-channel form of apply_filter.
std::vector<double> filter_channel(std::span<const double> x, const FilterKernel& kernel);

enum class Label : int { interictal = 0, preictal = 1, unlabeled = 2 };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

/// Position of one epoch inside a recording file.
struct SegmentRef {
    std::string patient_id;
    std::string file;
    std::int64_t offset_sample = 0;  // from file start
    Label label = Label::unlabeled;
    std::optional<double> t_onset_min;  // minutes before the associated onset, measured at the segment start
    std::string seizure_id;             // associated seizure, empty for interictal
};

/// One epoch with its samples copied out, channel-major.
struct Segment {
    SegmentRef ref;
    std::size_t n_channels = 0;
    std::size_t n_samples = 0;
    std::vector<double> samples;

    std::span<const double> channel(std::size_t c) const { return {samples.data() + c * n_samples, n_samples}; }
};

/// Start offsets (in samples) of floor(n/epoch) non-overlapping epochs.
std::vector<std::int64_t> epoch_offsets(std::size_t n_samples, double sample_rate_hz, double epoch_s = 5.0);

/// Splits a recording into non-overlapping unlabeled epochs; the remainder is dropped.
std::vector<Segment> epoch(const Recording& rec, double epoch_s = 5.0, const std::string& file = {});

/// Copies the samples of one epoch. Throws ValidationError when out of range.
Segment extract_segment(const Recording& rec, const SegmentRef& ref, std::size_t epoch_samples);

}  // namespace preictal

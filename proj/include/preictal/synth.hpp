#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "preictal/config.hpp"
#include "preictal/signal_io.hpp"

namespace preictal {

struct SynthSeizure {
    double onset_s;   // session time
    double offset_s;
};

/// Layout of one synthetic patient: contiguous fixed-length files, seizures placed so each
/// one has a full exclusion zone and uninterrupted EEG before it.
struct SynthPatient {
    std::string id;
    std::vector<std::string> files;
    double file_s = 3600.0;
    double duration_s = 0.0;
    std::vector<SynthSeizure> seizures;
    std::vector<std::string> channel_labels;
    std::vector<double> beta_hz;   // ramp component frequencies
    std::uint64_t seed = 0;
};

SynthPatient plan_synthetic_patient(const SynthConfig& config, int index, std::uint64_t seed);

/// Samples of one file. Interictal activity is pink noise with an alpha rhythm and shared
/// common-mode and line interference; the last `ramp_min` minutes before each onset add a
/// beta component whose amplitude grows linearly from zero to `ramp_peak_uv`.
Recording render_synthetic_file(const SynthConfig& config, const SynthPatient& patient, std::size_t file_index);

/// CHB-MIT style summary text for the patient.
std::string synthetic_summary(const SynthPatient& patient, double sample_rate_hz);

/// Writes <out>/<id>/<id>_NN.edf, <out>/<id>/<id>-summary.txt and <out>/truth.csv.
std::vector<SynthPatient> write_synthetic_corpus(const SynthConfig& config, std::uint64_t seed,
                                                 const std::filesystem::path& out_dir);

}  // namespace preictal

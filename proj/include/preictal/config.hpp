#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "preictal/classifier.hpp"
#include "preictal/dataset.hpp"

namespace preictal {

struct FilterConfig {
    double low_hz = 0.5;
    double high_hz = 45.0;
    int order = 1690;
};

struct SynthConfig {
    int patients = 2;
    int seizures = 3;
    int channels = 4;
    double sample_rate_hz = 256.0;
    double ramp_min = 45.0;          // planted preictal ramp length
    double ramp_peak_uv = 60.0;      // beta amplitude reached at onset
    double noise_rms_uv = 30.0;
    double lead_interictal_h = 4.0;  // recorded before the first exclusion zone
    double gap_interictal_h = 3.0;   // between consecutive exclusion zones
    double onset_jitter_min = 20.0;
    double file_h = 1.0;
};

/// Engine configuration; every field has a default matching the documented method.
struct Config {
    std::vector<std::string> channels;  // canonical montage; empty uses each patient's first file
    FilterConfig filter;
    double epoch_s = 5.0;
    std::vector<int> definitions{60, 45, 30, 15};
    double overlap = 0.66;
    int runs = 4;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    TrainConfig train;
    RuleConfig rules;
    double smoothing_block_min = 8.0;
    SynthConfig synth;

    std::vector<PreictalDefinition> preictal_definitions() const;
    SplitConfig split_config() const;
};

/// Reads a JSON configuration; unknown keys are rejected. Throws IoError for a missing
/// file and ValidationError for bad content.
Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& json_text);
std::string dump_config(const Config& config);

}  // namespace preictal

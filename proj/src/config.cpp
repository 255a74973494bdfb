#include "preictal/config.hpp"

#include <json.hpp>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"

namespace preictal {

using nlohmann::json;

std::vector<PreictalDefinition> Config::preictal_definitions() const {
    std::vector<PreictalDefinition> out;
    for (int d : definitions) out.emplace_back(d);
    return out;
}

SplitConfig Config::split_config() const {
    SplitConfig s;
    s.n_runs = runs;
    s.overlap = overlap;
    s.validation_fraction = validation_fraction;
    s.epoch_s = epoch_s;
    return s;
}

namespace {

template <typename T>
void take(const json& obj, const char* key, T& dst) {
    if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, _] : obj.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ValidationError("unknown config key '" + where + k + "'");
    }
}

}  // namespace

Config parse_config(const std::string& json_text) {
    Config c;
    try {
        const auto j = json::parse(json_text);
        reject_unknown(j,
                       {"channels", "filter", "epoch_s", "definitions", "overlap", "runs", "validation_fraction", "seed",
                        "train", "rules", "smoothing_block_min", "synth"},
                       "");
        take(j, "channels", c.channels);
        take(j, "epoch_s", c.epoch_s);
        take(j, "definitions", c.definitions);
        take(j, "overlap", c.overlap);
        take(j, "runs", c.runs);
        take(j, "validation_fraction", c.validation_fraction);
        take(j, "seed", c.seed);
        take(j, "smoothing_block_min", c.smoothing_block_min);
        if (j.contains("filter")) {
            const auto& f = j.at("filter");
            reject_unknown(f, {"low_hz", "high_hz", "order"}, "filter.");
            take(f, "low_hz", c.filter.low_hz);
            take(f, "high_hz", c.filter.high_hz);
            take(f, "order", c.filter.order);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            reject_unknown(t, {"learning_rate", "batch_size", "max_epochs", "patience"}, "train.");
            take(t, "learning_rate", c.train.learning_rate);
            take(t, "batch_size", c.train.batch_size);
            take(t, "max_epochs", c.train.max_epochs);
            take(t, "patience", c.train.patience);
        }
        if (j.contains("rules")) {
            const auto& r = j.at("rules");
            reject_unknown(r,
                           {"interictal_pre_h", "interictal_post_h", "preictal_max_min", "postictal_guard_h",
                            "min_preictal_min", "ciopr_min_h", "ciopr_max_h", "gap_tolerance_s"},
                           "rules.");
            take(r, "interictal_pre_h", c.rules.interictal_pre_h);
            take(r, "interictal_post_h", c.rules.interictal_post_h);
            take(r, "preictal_max_min", c.rules.preictal_max_min);
            take(r, "postictal_guard_h", c.rules.postictal_guard_h);
            take(r, "min_preictal_min", c.rules.min_preictal_min);
            take(r, "ciopr_min_h", c.rules.ciopr_min_h);
            take(r, "ciopr_max_h", c.rules.ciopr_max_h);
            take(r, "gap_tolerance_s", c.rules.gap_tolerance_s);
        }
        if (j.contains("synth")) {
            const auto& s = j.at("synth");
            reject_unknown(s,
                           {"patients", "seizures", "channels", "sample_rate_hz", "ramp_min", "ramp_peak_uv",
                            "noise_rms_uv", "lead_interictal_h", "gap_interictal_h", "onset_jitter_min", "file_h"},
                           "synth.");
            take(s, "patients", c.synth.patients);
            take(s, "seizures", c.synth.seizures);
            take(s, "channels", c.synth.channels);
            take(s, "sample_rate_hz", c.synth.sample_rate_hz);
            take(s, "ramp_min", c.synth.ramp_min);
            take(s, "ramp_peak_uv", c.synth.ramp_peak_uv);
            take(s, "noise_rms_uv", c.synth.noise_rms_uv);
            take(s, "lead_interictal_h", c.synth.lead_interictal_h);
            take(s, "gap_interictal_h", c.synth.gap_interictal_h);
            take(s, "onset_jitter_min", c.synth.onset_jitter_min);
            take(s, "file_h", c.synth.file_h);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid config: ") + e.what());
    }
    (void)c.preictal_definitions();  // validates the listed definitions
    if (c.definitions.empty()) throw ValidationError("config lists no preictal definitions");
    if (c.runs < 1) throw ValidationError("config runs must be >= 1");
    if (c.epoch_s <= 0) throw ValidationError("config epoch_s must be positive");
    return c;
}

Config load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path.string());
    return parse_config(csv::read_text(path));
}

std::string dump_config(const Config& c) {
    json j = {{"channels", c.channels},
              {"filter", {{"low_hz", c.filter.low_hz}, {"high_hz", c.filter.high_hz}, {"order", c.filter.order}}},
              {"epoch_s", c.epoch_s},
              {"definitions", c.definitions},
              {"overlap", c.overlap},
              {"runs", c.runs},
              {"validation_fraction", c.validation_fraction},
              {"seed", c.seed},
              {"train",
               {{"learning_rate", c.train.learning_rate},
                {"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience}}},
              {"rules",
               {{"interictal_pre_h", c.rules.interictal_pre_h},
                {"interictal_post_h", c.rules.interictal_post_h},
                {"preictal_max_min", c.rules.preictal_max_min},
                {"postictal_guard_h", c.rules.postictal_guard_h},
                {"min_preictal_min", c.rules.min_preictal_min},
                {"ciopr_min_h", c.rules.ciopr_min_h},
                {"ciopr_max_h", c.rules.ciopr_max_h},
                {"gap_tolerance_s", c.rules.gap_tolerance_s}}},
              {"smoothing_block_min", c.smoothing_block_min},
              {"synth",
               {{"patients", c.synth.patients},
                {"seizures", c.synth.seizures},
                {"channels", c.synth.channels},
                {"sample_rate_hz", c.synth.sample_rate_hz},
                {"ramp_min", c.synth.ramp_min},
                {"ramp_peak_uv", c.synth.ramp_peak_uv},
                {"noise_rms_uv", c.synth.noise_rms_uv},
                {"lead_interictal_h", c.synth.lead_interictal_h},
                {"gap_interictal_h", c.synth.gap_interictal_h},
                {"onset_jitter_min", c.synth.onset_jitter_min},
                {"file_h", c.synth.file_h}}}};
    return j.dump(2);
}

}  // namespace preictal

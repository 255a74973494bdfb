#include "preictal/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

namespace {

const char* kMontage[] = {"FP1-F7", "F7-T7", "T7-P7", "P7-O1", "FP1-F3", "F3-C3", "C3-P3", "P3-O1",
                          "FP2-F4", "F4-C4", "C4-P4", "P4-O2", "FP2-F8", "F8-T8", "T8-P8", "P8-O2",
                          "FZ-CZ",  "CZ-PZ", "P7-T7", "T7-FT9", "FT9-FT10", "FT10-T8", "T8-P8-1"};

std::string clock_text(double seconds) {
    const auto total = static_cast<long>(std::llround(seconds)) % 86400;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", total / 3600, (total / 60) % 60, total % 60);
    return buf;
}

constexpr double kSessionClockStart = 9.0 * 3600.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

SynthPatient plan_synthetic_patient(const SynthConfig& config, int index, std::uint64_t seed) {
    if (config.patients < 1 || config.seizures < 1) throw ValidationError("synth needs patients and seizures >= 1");
    if (config.channels < 2 || config.channels > static_cast<int>(std::size(kMontage))) {
        throw ValidationError("synth channels must lie in [2, 23]");
    }
    SynthPatient p;
    char id[16];
    std::snprintf(id, sizeof id, "syn%02d", index + 1);
    p.id = id;
    p.seed = derive_seed(seed, static_cast<std::uint64_t>(index));
    p.file_s = config.file_h * 3600.0;
    Rng rng(p.seed);
    for (int c = 0; c < config.channels; ++c) p.channel_labels.emplace_back(kMontage[c]);
    for (int m = 0; m < 4; ++m) p.beta_hz.push_back(rng.uniform(15.0, 27.0));

    // Each seizure: 4 h excluded before onset, 1 h after offset; interictal gaps between.
    double cursor = config.lead_interictal_h * 3600.0;
    for (int s = 0; s < config.seizures; ++s) {
        const double jitter = rng.uniform(0.0, config.onset_jitter_min * 60.0);
        double onset = cursor + 4.0 * 3600.0 + jitter;
        const double duration = rng.uniform(40.0, 90.0);
        // Keep each seizure inside one file.
        const double file_end = (std::floor(onset / p.file_s) + 1.0) * p.file_s;
        if (onset + duration > file_end - 1.0) onset = file_end - duration - 120.0;
        // Annotations carry whole seconds, so the planted events do too.
        onset = std::round(onset);
        p.seizures.push_back({onset, onset + std::round(duration)});
        cursor = onset + duration + 1.0 * 3600.0 + config.gap_interictal_h * 3600.0;
    }
    const double end = p.seizures.back().offset_s + 3600.0;
    const auto n_files = static_cast<std::size_t>(std::ceil(end / p.file_s));
    p.duration_s = static_cast<double>(n_files) * p.file_s;
    for (std::size_t f = 0; f < n_files; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "%s_%02zu.edf", p.id.c_str(), f + 1);
        p.files.emplace_back(name);
    }
    return p;
}

Recording render_synthetic_file(const SynthConfig& config, const SynthPatient& patient, std::size_t file_index) {
    const double rate = config.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(patient.file_s * rate));
    const std::size_t nc = patient.channel_labels.size();
    const double t0 = static_cast<double>(file_index) * patient.file_s;
    Rng rng(derive_seed(patient.seed, 0xF11Eu, file_index));

    std::vector<double> data(n * nc, 0.0);
    const std::size_t warmup = static_cast<std::size_t>(4 * rate);
    for (std::size_t c = 0; c < nc; ++c) {
        // Paul Kellet's pink filter over uniform white noise.
        double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
        double* dst = data.data() + c * n;
        double sumsq = 0.0;
        for (std::size_t i = 0; i < n + warmup; ++i) {
            const double w = (rng.uniform() * 2.0 - 1.0) * 1.7320508075688772;
            b0 = 0.99886 * b0 + w * 0.0555179;
            b1 = 0.99332 * b1 + w * 0.0750759;
            b2 = 0.96900 * b2 + w * 0.1538520;
            b3 = 0.86650 * b3 + w * 0.3104856;
            b4 = 0.55000 * b4 + w * 0.5329522;
            b5 = -0.7616 * b5 - w * 0.0168980;
            const double pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
            b6 = w * 0.115926;
            if (i >= warmup) {
                dst[i - warmup] = pink;
                sumsq += pink * pink;
            }
        }
        const double scale = config.noise_rms_uv / std::sqrt(sumsq / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) dst[i] *= scale;
    }

    Rng phase_rng(derive_seed(patient.seed, 0xBE7Au));
    std::vector<double> alpha_phase(nc), ictal_gain(nc);
    std::vector<std::vector<double>> beta_phase(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        alpha_phase[c] = phase_rng.uniform(0.0, kTwoPi);
        ictal_gain[c] = phase_rng.uniform(0.6, 1.4);
        for (std::size_t m = 0; m < patient.beta_hz.size(); ++m) beta_phase[c].push_back(phase_rng.uniform(0.0, kTwoPi));
    }

    const double ramp_s = config.ramp_min * 60.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) / rate;
        const double common = 40.0 * std::sin(kTwoPi * 0.07 * t) + 8.0 * std::sin(kTwoPi * 60.0 * t);
        double ramp = 0.0;
        double ictal = 0.0;
        for (const auto& s : patient.seizures) {
            if (t >= s.onset_s - ramp_s && t < s.onset_s) ramp = (t - (s.onset_s - ramp_s)) / ramp_s;
            if (t >= s.onset_s && t < s.offset_s) {
                ictal = 150.0 * (std::sin(kTwoPi * 3.0 * t) + 0.4 * std::sin(kTwoPi * 6.0 * t));
            }
        }
        for (std::size_t c = 0; c < nc; ++c) {
            double v = common + 6.0 * std::sin(kTwoPi * 10.0 * t + alpha_phase[c]) + ictal * ictal_gain[c];
            if (ramp > 0.0) {
                double beta = 0.0;
                for (std::size_t m = 0; m < patient.beta_hz.size(); ++m) {
                    beta += std::sin(kTwoPi * patient.beta_hz[m] * t + beta_phase[c][m]);
                }
                v += ramp * config.ramp_peak_uv * beta / 2.0;
            }
            data[c * n + i] += v;
        }
    }
    return Recording(patient.id, patient.channel_labels, rate, std::move(data), t0);
}

std::string synthetic_summary(const SynthPatient& patient, double sample_rate_hz) {
    std::string s = "Data Sampling Rate: " + std::to_string(static_cast<int>(sample_rate_hz)) + " Hz\n";
    s += "*************************\n\nChannels in EDF Files:\n**********************\n";
    for (std::size_t c = 0; c < patient.channel_labels.size(); ++c) {
        s += "Channel " + std::to_string(c + 1) + ": " + patient.channel_labels[c] + "\n";
    }
    s += "\n";
    for (std::size_t f = 0; f < patient.files.size(); ++f) {
        const double start = static_cast<double>(f) * patient.file_s;
        const double end = start + patient.file_s;
        s += "File Name: " + patient.files[f] + "\n";
        s += "File Start Time: " + clock_text(kSessionClockStart + start) + "\n";
        s += "File End Time: " + clock_text(kSessionClockStart + end) + "\n";
        std::vector<SynthSeizure> in_file;
        for (const auto& z : patient.seizures) {
            if (z.onset_s >= start && z.onset_s < end) in_file.push_back(z);
        }
        s += "Number of Seizures in File: " + std::to_string(in_file.size()) + "\n";
        for (std::size_t k = 0; k < in_file.size(); ++k) {
            const std::string tag = in_file.size() > 1 ? "Seizure " + std::to_string(k + 1) + " " : "Seizure ";
            s += tag + "Start Time: " + std::to_string(std::llround(in_file[k].onset_s - start)) + " seconds\n";
            s += tag + "End Time: " + std::to_string(std::llround(in_file[k].offset_s - start)) + " seconds\n";
        }
        s += "\n";
    }
    return s;
}

std::vector<SynthPatient> write_synthetic_corpus(const SynthConfig& config, std::uint64_t seed,
                                                 const std::filesystem::path& out_dir) {
    std::vector<SynthPatient> patients;
    auto truth = csv::open_out(out_dir / "truth.csv");
    truth << "patient,seizure,onset_s,offset_s,ramp_min\n";
    for (int p = 0; p < config.patients; ++p) {
        auto patient = plan_synthetic_patient(config, p, seed);
        const auto dir = out_dir / patient.id;
        for (std::size_t f = 0; f < patient.files.size(); ++f) {
            const auto rec = render_synthetic_file(config, patient, f);
            const auto bytes = encode_edf(rec);
            auto out = csv::open_out(dir / patient.files[f]);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw IoError("failed writing " + (dir / patient.files[f]).string());
        }
        auto summary = csv::open_out(dir / (patient.id + "-summary.txt"));
        summary << synthetic_summary(patient, config.sample_rate_hz);
        for (std::size_t s = 0; s < patient.seizures.size(); ++s) {
            truth << patient.id << ',' << patient.id << "_s" << (s + 1) << ',' << csv::fixed(patient.seizures[s].onset_s, 3)
                  << ',' << csv::fixed(patient.seizures[s].offset_s, 3) << ',' << csv::fixed(config.ramp_min, 3) << '\n';
        }
        patients.push_back(std::move(patient));
    }
    return patients;
}

}  // namespace preictal

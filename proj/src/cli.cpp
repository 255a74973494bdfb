#include "preictal/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "preictal/config.hpp"
#include "preictal/error.hpp"
#include "preictal/pipeline.hpp"

namespace preictal {

namespace fs = std::filesystem;

namespace {

Recording read_any(const fs::path& path, double rate) {
    const auto ext = path.extension().string();
    if (ext == ".edf" || ext == ".EDF") return read_edf(path);
    if (ext == ".prec") return read_prec(path);
    if (ext == ".csv") {
        if (rate <= 0.0) throw ValidationError("--rate is required for CSV input");
        return load_csv(path, rate);
    }
    throw ValidationError("unsupported recording format: " + path.string());
}

void write_any(const Recording& rec, const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".prec") return write_prec(rec, path);
    if (ext == ".csv") return save_csv(rec, path);
    throw ValidationError("unsupported output format: " + path.string() + " (use .prec or .csv)");
}

}  // namespace

int cli(const std::vector<std::string>& args) {
    CLI::App app{"Preictal period optimization engine", "preictal"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out_dir = "work";
    app.add_option("--seed", seed, "Base seed for every random choice");
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "Work directory")->capture_default_str();

    // Overrides collected per subcommand and applied after the config is loaded.
    std::optional<int> patients, seizures, channels, order, runs, epochs;
    std::optional<double> ramp_min, ramp_peak, noise_rms, low, high, epoch_s, overlap, rate;
    std::string raw_dir, input, output;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted preictal ramps");
    synth->add_option("--patients", patients);
    synth->add_option("--seizures", seizures, "Seizures per patient");
    synth->add_option("--channels", channels);
    synth->add_option("--ramp-min", ramp_min, "Length of the planted preictal ramp in minutes");
    synth->add_option("--ramp-peak", ramp_peak, "Ramp amplitude at onset in microvolts");
    synth->add_option("--noise-rms", noise_rms, "Background RMS in microvolts");

    auto* pre = app.add_subcommand("preprocess", "Common average reference and bandpass filtering");
    pre->add_option("--low", low, "Lower band edge in Hz");
    pre->add_option("--high", high, "Upper band edge in Hz");
    pre->add_option("--order", order, "FIR order (even)");
    pre->add_option("--epoch", epoch_s, "Segment length in seconds");
    pre->add_option("--raw", raw_dir, "Directory of patient folders (default <out>/raw)");
    pre->add_option("--input", input, "Process a single recording (.edf, .csv or .prec)");
    pre->add_option("--output", output, "Output for --input (.prec or .csv)");
    pre->add_option("--rate", rate, "Sample rate for CSV input");

    auto* dataset = app.add_subcommand("dataset", "Label time ranges and write split manifests");
    dataset->add_option("--overlap", overlap, "Preictal oversampling overlap");
    dataset->add_option("--runs", runs, "Runs per left-out seizure");

    auto* train = app.add_subcommand("train", "Train one baseline model per split");
    train->add_option("--epochs", epochs, "Maximum training epochs");

    app.add_subcommand("evaluate", "Score test sets and continuous pre-onset data");
    app.add_subcommand("ciopr", "Fit output profiles and compute CIOPR");
    app.add_subcommand("opp", "Pool metrics and select the optimal preictal period");
    app.add_subcommand("stats", "Friedman tests across preictal definitions");
    app.add_subcommand("report", "Write tables and output-profile plots");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        Config config = config_path.empty() ? Config{} : load_config(config_path);
        if (seed) config.seed = *seed;
        if (patients) config.synth.patients = *patients;
        if (seizures) config.synth.seizures = *seizures;
        if (channels) config.synth.channels = *channels;
        if (ramp_min) config.synth.ramp_min = *ramp_min;
        if (ramp_peak) config.synth.ramp_peak_uv = *ramp_peak;
        if (noise_rms) config.synth.noise_rms_uv = *noise_rms;
        if (low) config.filter.low_hz = *low;
        if (high) config.filter.high_hz = *high;
        if (order) config.filter.order = *order;
        if (epoch_s) config.epoch_s = *epoch_s;
        if (overlap) config.overlap = *overlap;
        if (runs) config.runs = *runs;
        if (epochs) config.train.max_epochs = *epochs;
        // Re-validate after overrides.
        config = parse_config(dump_config(config));

        const fs::path work(out_dir);
        const auto name = app.get_subcommands().front()->get_name();
        if (name == "synth") {
            stage_synth(config, work);
        } else if (name == "preprocess") {
            if (!input.empty()) {
                if (output.empty()) throw ValidationError("--input needs --output");
                const auto rec = read_any(input, rate.value_or(0.0));
                const auto kernel = design_fir_bandpass(rec.sample_rate_hz(), config.filter.low_hz,
                                                        config.filter.high_hz, config.filter.order);
                write_any(preprocess_recording(rec, kernel), output);
            } else {
                stage_preprocess(config, work, raw_dir.empty() ? std::nullopt : std::optional<fs::path>(raw_dir));
            }
        } else if (name == "dataset") {
            stage_dataset(config, work);
        } else if (name == "train") {
            stage_train(config, work);
        } else if (name == "evaluate") {
            stage_evaluate(config, work);
        } else if (name == "ciopr") {
            stage_ciopr(config, work);
        } else if (name == "opp") {
            stage_opp(config, work);
        } else if (name == "stats") {
            stage_stats(config, work);
        } else if (name == "report") {
            stage_report(config, work);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace preictal

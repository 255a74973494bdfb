#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "preictal/ciopr.hpp"
#include "preictal/classifier.hpp"
#include "preictal/cli.hpp"
#include "preictal/curvefit.hpp"
#include "preictal/error.hpp"
#include "preictal/metrics.hpp"
#include "preictal/preprocess.hpp"
#include "preictal/report.hpp"
#include "preictal/stats.hpp"

namespace py = pybind11;
using namespace preictal;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

// Rows are channels, columns are samples.
Recording to_recording(const Array& data, double rate) {
    if (data.ndim() != 2) throw ValidationError("expected a 2-D array shaped (channels, samples)");
    std::vector<std::string> labels;
    for (py::ssize_t c = 0; c < data.shape(0); ++c) labels.push_back("ch" + std::to_string(c));
    return Recording("py", labels, rate, to_vector(data));
}

py::array_t<double> from_recording(const Recording& rec) {
    py::array_t<double> out({rec.n_channels(), rec.n_samples()});
    std::copy(rec.data().begin(), rec.data().end(), out.mutable_data());
    return out;
}

PredictionSeries to_series(const Array& t_onset_min, const Array& y) {
    if (t_onset_min.size() != y.size()) throw ValidationError("t_onset_min and y lengths differ");
    PredictionSeries s;
    for (py::ssize_t i = 0; i < y.size(); ++i) s.entries.push_back({t_onset_min.data()[i], y.data()[i]});
    std::stable_sort(s.entries.begin(), s.entries.end(),
                     [](const auto& a, const auto& b) { return a.t_onset_min > b.t_onset_min; });
    return s;
}

py::dict fit_dict(const SigmoidFit& f) {
    py::dict d;
    d["a"] = f.a;
    d["b"] = f.b;
    d["c"] = f.c;
    d["d"] = f.d;
    d["rho"] = f.rho ? py::cast(*f.rho) : py::none();
    d["converged"] = f.converged;
    d["status"] = f.status;
    d["residual_norm"] = f.residual_norm;
    d["window_min"] = f.window_min;
    d["inflection_min"] = f.inflection_min();
    return d;
}

py::dict report_dict(const CioprReport& r) {
    py::dict d;
    d["definition_min"] = r.definition_min;
    d["nd_min"] = r.nd_min;
    d["tp_min"] = r.tp_min;
    d["spc_min"] = r.spc_min;
    d["spc_err"] = r.spc_err;
    d["nd_err"] = r.nd_err;
    d["spc_eff"] = r.spc_eff;
    d["nd_eff"] = r.nd_eff;
    d["infl_comp"] = r.infl_comp;
    d["eta"] = r.eta;
    d["ciopc"] = r.ciopc;
    d["ciopr"] = r.ciopr ? py::cast(*r.ciopr) : py::none();
    d["transition_start_min"] = r.transition_start_min;
    d["transition_end_min"] = r.transition_end_min;
    d["fit"] = fit_dict(r.fit);
    return d;
}

py::object opt(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Preictal period optimization engine";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "design_bandpass",
        [](double rate, double low, double high, int order) {
            return to_array(design_fir_bandpass(rate, low, high, order).taps);
        },
        py::arg("sample_rate_hz"), py::arg("low_hz") = 0.5, py::arg("high_hz") = 45.0, py::arg("order") = 1690,
        "Hamming-windowed sinc bandpass taps.");

    m.def(
        "magnitude_response",
        [](double rate, double freq, double low, double high, int order) {
            return magnitude_response(design_fir_bandpass(rate, low, high, order), freq);
        },
        py::arg("sample_rate_hz"), py::arg("freq_hz"), py::arg("low_hz") = 0.5, py::arg("high_hz") = 45.0,
        py::arg("order") = 1690);

    m.def(
        "common_average_reference",
        [](const Array& data) { return from_recording(common_average_reference(to_recording(data, 1.0))); },
        py::arg("data"), "Subtracts the per-sample channel mean from a (channels, samples) array.");

    m.def(
        "preprocess",
        [](const Array& data, double rate, double low, double high, int order) {
            const auto kernel = design_fir_bandpass(rate, low, high, order);
            return from_recording(apply_filter(common_average_reference(to_recording(data, rate)), kernel));
        },
        py::arg("data"), py::arg("sample_rate_hz"), py::arg("low_hz") = 0.5, py::arg("high_hz") = 45.0,
        py::arg("order") = 1690, "Common average reference followed by zero-phase bandpass filtering.");

    m.def(
        "extract_features",
        [](const Array& data, double rate) {
            const auto rec = to_recording(data, rate);
            Segment seg;
            seg.n_channels = rec.n_channels();
            seg.n_samples = rec.n_samples();
            seg.samples.assign(rec.data().begin(), rec.data().end());
            return to_array(extract_features(seg, rate));
        },
        py::arg("segment"), py::arg("sample_rate_hz") = 256.0, "Log band powers, five per channel.");

    m.def(
        "smooth",
        [](const Array& t, const Array& y, double block_min) {
            const auto sm = smooth(to_series(t, y), block_min);
            std::vector<double> bt, by;
            for (const auto& p : sm.entries) {
                bt.push_back(p.t_onset_min);
                by.push_back(p.y);
            }
            return py::make_tuple(to_array(bt), to_array(by));
        },
        py::arg("t_onset_min"), py::arg("y"), py::arg("block_min") = 8.0,
        "Block means of a prediction series as (t_onset_min, y), oldest first.");

    m.def(
        "fit_4pl",
        [](const Array& t, const Array& y, double block_min) { return fit_dict(fit_4pl(smooth(to_series(t, y), block_min))); },
        py::arg("t_onset_min"), py::arg("y"), py::arg("block_min") = 8.0,
        "Smooths a prediction series and fits a four-parameter logistic curve.");

    m.def(
        "fit_logistic4",
        [](const Array& x, const Array& y) { return fit_dict(fit_logistic4(to_vector(x), to_vector(y))); },
        py::arg("x"), py::arg("y"));

    m.def(
        "evaluate_group",
        [](const std::map<int, std::pair<Array, Array>>& series, double block_min) {
            std::vector<SeriesByDefinition> group;
            for (auto it = series.rbegin(); it != series.rend(); ++it) {
                group.push_back({it->first, to_series(it->second.first, it->second.second)});
            }
            const auto g = evaluate_group(group, {}, block_min);
            py::dict out;
            out["excluded"] = g.excluded;
            out["reason"] = g.reason;
            py::list reports;
            for (const auto& r : g.reports) reports.append(report_dict(r));
            out["reports"] = reports;
            return out;
        },
        py::arg("series"), py::arg("block_min") = 8.0,
        "CIOPR terms for one seizure; `series` maps definition minutes to (t_onset_min, y).");

    m.def("ciopc", &ciopc_value, py::arg("spc_eff"), py::arg("nd_eff"), py::arg("infl_comp") = 0.0);
    m.def(
        "ciopr_normalize", [](const std::vector<double>& v) { return ciopr_normalize(v); }, py::arg("ciopc"));

    m.def(
        "auc", [](const Array& s, const std::vector<int>& l) { return auc(to_vector(s), l); }, py::arg("scores"),
        py::arg("labels"));

    m.def(
        "confusion_metrics",
        [](const Array& p, const std::vector<int>& l, double threshold) {
            const auto r = confusion_metrics(to_vector(p), l, threshold);
            py::dict d;
            d["tp"] = r.counts.tp;
            d["fp"] = r.counts.fp;
            d["tn"] = r.counts.tn;
            d["fn"] = r.counts.fn;
            d["sen"] = opt(r.sen);
            d["spe"] = opt(r.spe);
            d["acc"] = opt(r.acc);
            d["f1"] = opt(r.f1);
            d["precision"] = opt(r.precision);
            return d;
        },
        py::arg("predictions"), py::arg("labels"), py::arg("threshold") = 0.5);

    m.def(
        "friedman",
        [](const std::vector<std::vector<double>>& scores, double alpha) {
            const auto r = friedman(scores, alpha);
            py::dict d;
            d["statistic"] = r.statistic;
            d["df"] = r.df;
            d["p"] = r.p;
            d["mean_ranks"] = r.mean_ranks;
            py::list pairs;
            for (const auto& pc : r.pairs) {
                py::dict e;
                e["i"] = pc.group_i;
                e["j"] = pc.group_j;
                e["z"] = pc.z;
                e["p_raw"] = pc.p_raw;
                e["p_adjusted"] = pc.p_adjusted;
                e["reject"] = pc.reject;
                pairs.append(e);
            }
            d["pairs"] = pairs;
            return d;
        },
        py::arg("scores"), py::arg("alpha") = 0.05, "Friedman test with Bonferroni-adjusted Dunn comparisons.");

    m.def(
        "select_opp",
        [](const std::map<int, double>& ciopr_means, const std::map<int, double>& f1_means) {
            const auto d = select_opp("py", ciopr_means, f1_means);
            return py::make_tuple(d.opp_min ? py::cast(*d.opp_min) : py::none(), std::string(to_string(d.criterion)));
        },
        py::arg("ciopr_means"), py::arg("f1_means") = std::map<int, double>{},
        "Optimal preictal period and the criterion that chose it.");

    m.def(
        "read_predictions",
        [](const std::string& path) {
            const auto s = import_predictions(path);
            std::vector<double> t, y;
            for (const auto& e : s.entries) {
                t.push_back(e.t_onset_min);
                y.push_back(e.y);
            }
            return py::make_tuple(to_array(t), to_array(y));
        },
        py::arg("path"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            py::gil_scoped_release release;
            return cli(args);
        },
        py::arg("args"), "Runs one command-line subcommand and returns its exit code.");
}

#include "preictal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "preictal/csv.hpp"
#include "preictal/error.hpp"

namespace preictal {

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::fixed(*v) : std::string(); }

std::string cell_text(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::optional<double> opt_cell(const std::string& cell, const std::string& ctx) {
    if (csv::trim(cell).empty()) return std::nullopt;
    return csv::to_double(cell, ctx);
}

/// Header-indexed CSV reader for the engine's own tables.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string name;

    std::size_t col(const std::string& key) const {
        const auto it = std::find(header.begin(), header.end(), key);
        if (it == header.end()) throw ValidationError(name + ": missing column '" + key + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

Table read_table(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ValidationError(path.string() + ": empty table");
    Table t;
    t.name = path.string();
    for (const auto& h : csv::split(lines[0])) t.header.emplace_back(csv::trim(h));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = csv::split(lines[i]);
        if (cells.size() != t.header.size()) {
            throw ValidationError(t.name + " row " + std::to_string(i + 1) + ": expected " +
                                  std::to_string(t.header.size()) + " cells");
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

void check(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

const std::vector<std::string> kMetricNames = {"sen", "spe", "acc", "f1", "auc", "far_per_hour"};

std::optional<double> metric_value(const MetricsReport& r, const std::string& name) {
    if (name == "sen") return r.sen;
    if (name == "spe") return r.spe;
    if (name == "acc") return r.acc;
    if (name == "f1") return r.f1;
    if (name == "auc") return r.auc;
    if (name == "far_per_hour") return r.far_per_hour;
    if (name == "precision") return r.precision;
    throw ValidationError("unknown metric '" + name + "'");
}

}  // namespace

const char* to_string(OppCriterion c) { return c == OppCriterion::ciopr ? "CIOPR" : "F1"; }

OppDecision select_opp(const std::string& patient_id, const std::map<int, double>& ciopr_means,
                       const std::map<int, double>& f1_means) {
    OppDecision d;
    d.patient_id = patient_id;
    d.ciopr_means = ciopr_means;
    d.f1_means = f1_means;
    const auto& source = ciopr_means.empty() ? f1_means : ciopr_means;
    d.criterion = ciopr_means.empty() ? OppCriterion::f1 : OppCriterion::ciopr;
    // std::map iterates shortest definition first, so a strict comparison keeps it on ties.
    for (const auto& [def, value] : source) {
        if (!d.opp_min || value > source.at(*d.opp_min)) d.opp_min = def;
    }
    return d;
}

std::map<int, double> ciopr_means(const std::vector<SeizureCiopr>& seizures, const std::string& patient_id) {
    std::map<int, double> sum;
    std::map<int, int> count;
    for (const auto& s : seizures) {
        if (s.patient_id != patient_id || s.excluded) continue;
        for (const auto& [def, v] : s.ciopr) {
            if (!v) continue;
            sum[def] += *v;
            ++count[def];
        }
    }
    std::map<int, double> out;
    for (const auto& [def, total] : sum) out[def] = total / count[def];
    return out;
}

std::vector<SeizureCiopr> summarize_ciopr(const std::vector<CioprRow>& rows) {
    std::vector<SeizureCiopr> out;
    auto find = [&](const CioprRow& r) -> SeizureCiopr& {
        for (auto& s : out) {
            if (s.patient_id == r.patient_id && s.seizure_id == r.seizure_id) return s;
        }
        out.push_back({r.patient_id, r.seizure_id, 0, false, {}, {}, {}, {}});
        return out.back();
    };
    // (seizure, run) groups are all-or-nothing, so count runs from one definition's rows.
    std::map<std::pair<std::string, std::string>, std::set<int>> fitted_runs;
    std::map<std::pair<std::string, std::string>, std::map<int, std::pair<double, int>>> spc, ciopc, ciopr;
    for (const auto& r : rows) {
        auto& s = find(r);
        const auto key = std::make_pair(r.patient_id, r.seizure_id);
        if (r.excluded) {
            if (s.reason.empty()) s.reason = r.reason;
            continue;
        }
        fitted_runs[key].insert(r.run);
        const int def = r.report.definition_min;
        auto add = [&](auto& acc, double v) {
            acc[key][def].first += v;
            acc[key][def].second += 1;
        };
        add(spc, r.report.spc_min);
        add(ciopc, r.report.ciopc);
        if (r.report.ciopr) add(ciopr, *r.report.ciopr);
    }
    for (auto& s : out) {
        const auto key = std::make_pair(s.patient_id, s.seizure_id);
        s.n_runs = fitted_runs[key].size();
        s.excluded = s.n_runs == 0;
        if (!s.excluded) s.reason.clear();
        for (const auto& [def, acc] : spc[key]) s.spc_min[def] = acc.first / acc.second;
        for (const auto& [def, acc] : ciopc[key]) s.ciopc[def] = acc.first / acc.second;
        for (const auto& [def, acc] : spc[key]) {
            const auto it = ciopr[key].find(def);
            s.ciopr[def] = it == ciopr[key].end() ? std::nullopt
                                                  : std::optional<double>(it->second.first / it->second.second);
        }
    }
    return out;
}

std::vector<MetricStats> definition_stats(const std::vector<PatientMetrics>& metrics,
                                          const std::vector<SeizureCiopr>& seizures,
                                          const std::vector<int>& definitions, double alpha) {
    std::vector<MetricStats> out;
    auto run = [&](const std::string& name, const std::string& subjects, const std::vector<std::vector<double>>& rows) {
        MetricStats s{name, subjects, std::nullopt, {}};
        if (definitions.size() < 2) {
            s.note = "fewer than two definitions";
        } else if (rows.size() < 2) {
            s.note = "fewer than two " + subjects + " with complete values";
        } else {
            s.report = friedman(rows, alpha);
        }
        out.push_back(std::move(s));
    };
    for (const auto& name : kMetricNames) {
        std::vector<std::vector<double>> rows;
        for (const auto& p : metrics) {
            std::vector<double> row;
            for (int def : definitions) {
                const auto it = std::find_if(p.by_definition.begin(), p.by_definition.end(),
                                             [&](const DefinitionMetrics& d) { return d.definition_min == def; });
                if (it == p.by_definition.end()) break;
                const auto v = metric_value(it->report, name);
                if (!v) break;
                row.push_back(*v);
            }
            if (row.size() == definitions.size()) rows.push_back(std::move(row));
        }
        run(name, "patients", rows);
    }
    for (const std::string name : {"spc_min", "ciopr"}) {
        std::vector<std::vector<double>> rows;
        for (const auto& s : seizures) {
            if (s.excluded) continue;
            std::vector<double> row;
            for (int def : definitions) {
                if (name == "spc_min") {
                    const auto it = s.spc_min.find(def);
                    if (it == s.spc_min.end()) break;
                    row.push_back(it->second);
                } else {
                    const auto it = s.ciopr.find(def);
                    if (it == s.ciopr.end() || !it->second) break;
                    row.push_back(*it->second);
                }
            }
            if (row.size() == definitions.size()) rows.push_back(std::move(row));
        }
        run(name, "seizures", rows);
    }
    return out;
}

std::string profile_svg(const SmoothedSeries& sm, const CioprReport& report, const std::string& title) {
    const double W = 760, H = 380, left = 64, right = 24, top = 40, bottom = 52;
    const double pw = W - left - right, ph = H - top - bottom;
    const double span = std::max(sm.window_min, 1.0);
    const double y_lo = -0.05, y_hi = 1.05;
    // Minutes before onset run right to left, so onset sits at the right edge.
    auto px = [&](double t_onset_min) {
        const double t = std::clamp(t_onset_min, 0.0, span);
        return left + pw * (1.0 - t / span);
    };
    auto py = [&](double y) { return top + ph * (1.0 - (std::clamp(y, y_lo, y_hi) - y_lo) / (y_hi - y_lo)); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    s << "<rect class=\"axes\" x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        s << "<line x1=\"" << left - 4 << "\" y1=\"" << num(py(y)) << "\" x2=\"" << left << "\" y2=\"" << num(py(y))
          << "\" stroke=\"#444\"/><text x=\"" << left - 8 << "\" y=\"" << num(py(y) + 4)
          << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
    }
    const double tick = span > 300 ? 60.0 : span > 120 ? 30.0 : 10.0;
    for (double t = 0.0; t <= span + 1e-9; t += tick) {
        s << "<line x1=\"" << num(px(t)) << "\" y1=\"" << top + ph << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << top + ph + 4 << "\" stroke=\"#444\"/><text x=\"" << num(px(t)) << "\" y=\"" << top + ph + 18
          << "\" text-anchor=\"middle\">" << static_cast<int>(t) << "</text>\n";
    }
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">minutes before onset</text>\n";
    s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\">classifier output</text>\n";

    s << "<polyline class=\"smoothed\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : sm.entries) s << num(px(p.t_onset_min)) << ',' << num(py(p.y)) << ' ';
    s << "\"/>\n";
    for (const auto& p : sm.entries) {
        s << "<circle cx=\"" << num(px(p.t_onset_min)) << "\" cy=\"" << num(py(p.y)) << "\" r=\"2\" fill=\"#1f77b4\"/>\n";
    }
    s << "<polyline class=\"fit\" fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2\" points=\"";
    const int n_curve = 240;
    for (int i = 0; i <= n_curve; ++i) {
        const double x = sm.window_min * i / n_curve;
        s << num(px(sm.window_min - x)) << ',' << num(py(report.fit(x))) << ' ';
    }
    s << "\"/>\n";
    for (double t : {report.transition_start_min, report.transition_end_min}) {
        s << "<line class=\"tp-boundary\" x1=\"" << num(px(t)) << "\" y1=\"" << top << "\" x2=\"" << num(px(t))
          << "\" y2=\"" << top + ph << "\" stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"2,3\"/>\n";
    }
    s << "<line class=\"spc-start\" x1=\"" << num(px(report.spc_min)) << "\" y1=\"" << top << "\" x2=\""
      << num(px(report.spc_min)) << "\" y2=\"" << top + ph
      << "\" stroke=\"red\" stroke-width=\"1.2\" stroke-dasharray=\"2,3\"/>\n";
    s << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 << "\">TP " << num(report.tp_min) << " min, SPC "
      << num(report.spc_min) << " min, CIOPR " << (report.ciopr ? num(*report.ciopr) : std::string("n/a"))
      << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

void write_patient_metrics(const PatientMetrics& m, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "definition_min,sen,spe,acc,f1,auc,far_per_hour,tp,fp,tn,fn\n";
    for (const auto& d : m.by_definition) {
        const auto& r = d.report;
        out << d.definition_min << ',' << opt(r.sen) << ',' << opt(r.spe) << ',' << opt(r.acc) << ',' << opt(r.f1)
            << ',' << opt(r.auc) << ',' << opt(r.far_per_hour) << ',' << r.counts.tp << ',' << r.counts.fp << ','
            << r.counts.tn << ',' << r.counts.fn << '\n';
    }
    check(out, path);
}

void write_metrics_long(const std::vector<PatientMetrics>& all, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "patient,n_seizures,definition_min,tp,fp,tn,fn,sen,spe,acc,f1,precision,auc,far_per_hour\n";
    for (const auto& m : all) {
        for (const auto& d : m.by_definition) {
            const auto& r = d.report;
            out << m.patient_id << ',' << m.n_seizures << ',' << d.definition_min << ',' << r.counts.tp << ','
                << r.counts.fp << ',' << r.counts.tn << ',' << r.counts.fn << ',' << opt(r.sen) << ',' << opt(r.spe)
                << ',' << opt(r.acc) << ',' << opt(r.f1) << ',' << opt(r.precision) << ',' << opt(r.auc) << ','
                << opt(r.far_per_hour) << '\n';
        }
    }
    check(out, path);
}

std::vector<PatientMetrics> read_metrics_long(const std::filesystem::path& path) {
    const auto t = read_table(path);
    std::vector<PatientMetrics> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const auto ctx = t.name + " row " + std::to_string(i + 2);
        const auto pid = r[t.col("patient")];
        if (out.empty() || out.back().patient_id != pid) {
            out.push_back({pid, static_cast<std::size_t>(csv::to_double(r[t.col("n_seizures")], ctx)), {}});
        }
        DefinitionMetrics d;
        d.definition_min = static_cast<int>(csv::to_double(r[t.col("definition_min")], ctx));
        auto count = [&](const char* k) { return static_cast<std::size_t>(csv::to_double(r[t.col(k)], ctx)); };
        d.report.counts = {count("tp"), count("fp"), count("tn"), count("fn")};
        d.report.sen = opt_cell(r[t.col("sen")], ctx);
        d.report.spe = opt_cell(r[t.col("spe")], ctx);
        d.report.acc = opt_cell(r[t.col("acc")], ctx);
        d.report.f1 = opt_cell(r[t.col("f1")], ctx);
        d.report.precision = opt_cell(r[t.col("precision")], ctx);
        d.report.auc = opt_cell(r[t.col("auc")], ctx);
        d.report.far_per_hour = opt_cell(r[t.col("far_per_hour")], ctx);
        out.back().by_definition.push_back(d);
    }
    return out;
}

namespace {
const char* kCioprHeader =
    "patient,seizure,run,definition_min,excluded,reason,a,b,c,d,rho,converged,residual_norm,window_min,inflection_min,tp_min,"
    "transition_start_min,transition_end_min,nd_min,spc_min,n_spc,n_nd,spc_err,nd_err,spc_eff,nd_eff,"
    "infl_comp,eta,ciopc,ciopr";
}

void write_ciopr_rows(const std::vector<CioprRow>& rows, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << kCioprHeader << '\n';
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << row.patient_id << ',' << row.seizure_id << ',' << row.run << ',' << r.definition_min << ','
            << (row.excluded ? 1 : 0) << ',' << cell_text(row.reason);
        if (row.excluded) {
            out << std::string(24, ',') << '\n';
            continue;
        }
        out << ',' << csv::fixed(r.fit.a) << ',' << csv::fixed(r.fit.b) << ',' << csv::fixed(r.fit.c) << ','
            << csv::fixed(r.fit.d) << ',' << opt(r.fit.rho) << ',' << (r.fit.converged ? 1 : 0) << ','
            << csv::fixed(r.fit.residual_norm, 9) << ',' << csv::fixed(r.window_min) << ','
            << csv::fixed(r.inflection_min) << ',' << csv::fixed(r.tp_min) << ','
            << csv::fixed(r.transition_start_min) << ',' << csv::fixed(r.transition_end_min) << ','
            << csv::fixed(r.nd_min) << ',' << csv::fixed(r.spc_min) << ',' << r.n_spc << ',' << r.n_nd << ','
            << csv::fixed(r.spc_err) << ',' << csv::fixed(r.nd_err) << ',' << csv::fixed(r.spc_eff) << ','
            << csv::fixed(r.nd_eff) << ',' << csv::fixed(r.infl_comp) << ',' << csv::fixed(r.eta) << ','
            << csv::fixed(r.ciopc) << ',' << opt(r.ciopr) << '\n';
    }
    check(out, path);
}

std::vector<CioprRow> read_ciopr_rows(const std::filesystem::path& path) {
    const auto t = read_table(path);
    std::vector<CioprRow> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& c = t.rows[i];
        const auto ctx = t.name + " row " + std::to_string(i + 2);
        CioprRow row;
        row.patient_id = c[t.col("patient")];
        row.seizure_id = c[t.col("seizure")];
        row.run = static_cast<int>(csv::to_double(c[t.col("run")], ctx));
        row.report.definition_min = static_cast<int>(csv::to_double(c[t.col("definition_min")], ctx));
        row.excluded = csv::trim(c[t.col("excluded")]) == "1";
        row.reason = c[t.col("reason")];
        if (!row.excluded) {
            auto num = [&](const char* k) { return csv::to_double(c[t.col(k)], ctx); };
            auto& r = row.report;
            r.fit.a = num("a");
            r.fit.b = num("b");
            r.fit.c = num("c");
            r.fit.d = num("d");
            r.fit.rho = opt_cell(c[t.col("rho")], ctx);
            r.fit.converged = csv::trim(c[t.col("converged")]) == "1";
            r.fit.status = r.fit.converged ? "ok" : "flagged";
            r.fit.residual_norm = num("residual_norm");
            r.window_min = num("window_min");
            r.fit.window_min = r.window_min;
            r.inflection_min = num("inflection_min");
            r.tp_min = num("tp_min");
            r.transition_start_min = num("transition_start_min");
            r.transition_end_min = num("transition_end_min");
            r.nd_min = num("nd_min");
            r.spc_min = num("spc_min");
            r.n_spc = static_cast<std::size_t>(num("n_spc"));
            r.n_nd = static_cast<std::size_t>(num("n_nd"));
            r.spc_err = num("spc_err");
            r.nd_err = num("nd_err");
            r.spc_eff = num("spc_eff");
            r.nd_eff = num("nd_eff");
            r.infl_comp = num("infl_comp");
            r.eta = num("eta");
            r.ciopc = num("ciopc");
            r.ciopr = opt_cell(c[t.col("ciopr")], ctx);
        }
        out.push_back(std::move(row));
    }
    return out;
}

void write_ciopr_table(const std::vector<SeizureCiopr>& seizures, const std::vector<int>& definitions,
                       const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "patient,seizure,n_runs,excluded,reason";
    for (int d : definitions) out << ",spc_" << d << ",ciopr_" << d;
    out << '\n';
    for (const auto& s : seizures) {
        out << s.patient_id << ',' << s.seizure_id << ',' << s.n_runs << ',' << (s.excluded ? 1 : 0) << ','
            << cell_text(s.reason);
        for (int d : definitions) {
            const auto spc = s.spc_min.find(d);
            const auto ciopr = s.ciopr.find(d);
            out << ',' << (spc == s.spc_min.end() ? "" : csv::fixed(spc->second)) << ','
                << (ciopr == s.ciopr.end() ? "" : opt(ciopr->second));
        }
        out << '\n';
    }
    check(out, path);
}

void write_opp_summary(const std::vector<OppDecision>& decisions, const std::vector<PatientMetrics>& metrics,
                       const std::vector<int>& definitions, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "patient,n_seizures,opp_min,criterion,sen,spe,acc,f1,auc,far_per_hour";
    for (int d : definitions) out << ",ciopr_mean_" << d;
    for (int d : definitions) out << ",f1_" << d;
    out << '\n';
    for (const auto& dec : decisions) {
        const PatientMetrics* pm = nullptr;
        for (const auto& m : metrics) {
            if (m.patient_id == dec.patient_id) pm = &m;
        }
        const MetricsReport* at = nullptr;
        if (pm && dec.opp_min) {
            for (const auto& d : pm->by_definition) {
                if (d.definition_min == *dec.opp_min) at = &d.report;
            }
        }
        out << dec.patient_id << ',' << (pm ? pm->n_seizures : 0) << ','
            << (dec.opp_min ? std::to_string(*dec.opp_min) : "") << ',' << (dec.opp_min ? to_string(dec.criterion) : "");
        if (at) {
            out << ',' << opt(at->sen) << ',' << opt(at->spe) << ',' << opt(at->acc) << ',' << opt(at->f1) << ','
                << opt(at->auc) << ',' << opt(at->far_per_hour);
        } else {
            out << ",,,,,,";
        }
        for (int d : definitions) {
            const auto it = dec.ciopr_means.find(d);
            out << ',' << (it == dec.ciopr_means.end() ? "" : csv::fixed(it->second));
        }
        for (int d : definitions) {
            const auto it = dec.f1_means.find(d);
            out << ',' << (it == dec.f1_means.end() ? "" : csv::fixed(it->second));
        }
        out << '\n';
    }
    check(out, path);
}

void write_stats(const std::vector<MetricStats>& stats, const std::vector<int>& definitions,
                 const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "metric,subjects,n,k,statistic,df,p,pair,mean_rank_i,mean_rank_j,z,p_raw,p_adjusted,reject,note\n";
    for (const auto& s : stats) {
        if (!s.report) {
            out << s.metric << ',' << s.subjects << ",,,,,,,,,,,,," << cell_text(s.note) << '\n';
            continue;
        }
        const auto& r = *s.report;
        const std::string head = s.metric + ',' + s.subjects + ',' + std::to_string(r.n_subjects) + ',' +
                                 std::to_string(r.k_groups) + ',' + csv::fixed(r.statistic) + ',' +
                                 std::to_string(r.df) + ',' + csv::fixed(r.p);
        for (const auto& pc : r.pairs) {
            const auto name = [&](std::size_t g) {
                return g < definitions.size() ? std::to_string(definitions[g]) : std::to_string(g);
            };
            out << head << ',' << name(pc.group_i) << "-vs-" << name(pc.group_j) << ',' << csv::fixed(pc.mean_rank_i)
                << ',' << csv::fixed(pc.mean_rank_j) << ',' << csv::fixed(pc.z) << ',' << csv::fixed(pc.p_raw) << ','
                << csv::fixed(pc.p_adjusted) << ',' << (pc.reject ? 1 : 0) << ",\n";
        }
    }
    check(out, path);
}

}  // namespace preictal

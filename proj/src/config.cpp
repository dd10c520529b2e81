#include "sdelab/config.hpp"
#include "sdelab/analysis.hpp"
#include "sdelab/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace sdelab {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& scope, const std::string& key) {
    if (!j.contains(key))
        throw ConfigError("config: missing field " + scope + key);
    return j.at(key);
}

double get_num(const json& j, const std::string& scope, const std::string& key) {
    const json& v = require(j, scope, key);
    if (!v.is_number())
        throw ConfigError("config: field " + scope + key + " must be a number");
    return v.get<double>();
}

std::int64_t get_int(const json& j, const std::string& scope, const std::string& key) {
    const json& v = require(j, scope, key);
    if (!v.is_number_integer())
        throw ConfigError("config: field " + scope + key + " must be an integer");
    return v.get<std::int64_t>();
}

std::string get_str(const json& j, const std::string& scope, const std::string& key) {
    const json& v = require(j, scope, key);
    if (!v.is_string())
        throw ConfigError("config: field " + scope + key + " must be a string");
    return v.get<std::string>();
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.name = get_str(j, "", "name");

    const json& jm = require(j, "", "model");
    cfg.model.h = get_num(jm, "model.", "h");
    cfg.model.x0 = get_num(jm, "model.", "x0");
    cfg.model.a_f = get_num(jm, "model.", "a_f");
    cfg.model.mu_f = get_num(jm, "model.", "mu_f");
    cfg.model.a_g = get_num(jm, "model.", "a_g");
    cfg.model.mu_g = get_num(jm, "model.", "mu_g");
    cfg.model.cap = jm.contains("cap") ? get_num(jm, "model.", "cap") : 1.0;

    const json& jn = require(j, "", "noise");
    cfg.noise.kind = noise_kind_from_string(get_str(jn, "noise.", "kind"));
    if (jn.contains("params")) {
        const json& p = jn.at("params");
        if (!p.is_array()) throw ConfigError("config: field noise.params must be an array");
        for (const auto& v : p) {
            if (!v.is_number()) throw ConfigError("config: noise.params entries must be numbers");
            cfg.noise.params.push_back(v.get<double>());
        }
    }
    cfg.seed = static_cast<std::uint64_t>(get_int(jn, "noise.", "seed"));

    const json& jr = require(j, "", "run");
    cfg.n_paths = get_int(jr, "run.", "n_paths");
    cfg.n_steps = get_int(jr, "run.", "n_steps");
    if (jr.contains("checkpoints_per_decade"))
        cfg.checkpoints_per_decade =
            static_cast<int>(get_int(jr, "run.", "checkpoints_per_decade"));
    if (jr.contains("lambda")) cfg.lambda_override = get_num(jr, "run.", "lambda");
    if (jr.contains("mu")) cfg.mu_override = get_num(jr, "run.", "mu");

    const json& js = require(j, "", "statistics");
    if (!js.is_array()) throw ConfigError("config: field statistics must be an array");
    for (const auto& v : js) {
        if (!v.is_string()) throw ConfigError("config: statistics entries must be strings");
        cfg.statistics.push_back(v.get<std::string>());
    }

    cfg.output_dir = get_str(j, "", "output_dir");

    if (j.contains("tolerances")) {
        const json& jt = j.at("tolerances");
        if (!jt.is_object()) throw ConfigError("config: field tolerances must be an object");
        for (auto it = jt.begin(); it != jt.end(); ++it) {
            if (!it.value().is_number())
                throw ConfigError("config: tolerances entries must be numbers");
            cfg.tolerances[it.key()] = it.value().get<double>();
        }
    }

    if (j.contains("ito")) {
        const json& ji = j.at("ito");
        ItoScanConfig scan;
        const std::string kind = get_str(ji, "ito.", "phi");
        const double alpha = ji.contains("alpha") ? get_num(ji, "ito.", "alpha") : 0.0;
        scan.phi = make_phi(phi_kind_from_string(kind), alpha);
        scan.f = get_num(ji, "ito.", "f");
        scan.g = get_num(ji, "ito.", "g");
        const json& grid = require(ji, "ito.", "h_grid");
        if (!grid.is_array() || grid.empty())
            throw ConfigError("config: field ito.h_grid must be a nonempty array");
        for (const auto& v : grid) {
            if (!v.is_number()) throw ConfigError("config: ito.h_grid entries must be numbers");
            scan.h_grid.push_back(v.get<double>());
        }
        cfg.ito = scan;
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["model"] = {{"h", cfg.model.h},     {"x0", cfg.model.x0},   {"a_f", cfg.model.a_f},
                  {"mu_f", cfg.model.mu_f}, {"a_g", cfg.model.a_g}, {"mu_g", cfg.model.mu_g},
                  {"cap", cfg.model.cap}};
    j["noise"] = {{"kind", to_string(cfg.noise.kind)},
                  {"params", cfg.noise.params},
                  {"seed", cfg.seed}};
    j["run"] = {{"n_paths", cfg.n_paths},
                {"n_steps", cfg.n_steps},
                {"checkpoints_per_decade", cfg.checkpoints_per_decade}};
    if (cfg.lambda_override) j["run"]["lambda"] = *cfg.lambda_override;
    if (cfg.mu_override) j["run"]["mu"] = *cfg.mu_override;
    j["statistics"] = cfg.statistics;
    j["output_dir"] = cfg.output_dir;
    if (!cfg.tolerances.empty()) j["tolerances"] = cfg.tolerances;
    if (cfg.ito) {
        j["ito"] = {{"phi", to_string(cfg.ito->phi.kind)},
                    {"f", cfg.ito->f},
                    {"g", cfg.ito->g},
                    {"h_grid", cfg.ito->h_grid}};
        if (cfg.ito->phi.kind == PhiKind::power_alpha ||
            cfg.ito->phi.kind == PhiKind::inv_power_alpha)
            j["ito"]["alpha"] = cfg.ito->phi.alpha;
    }
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

const std::set<std::string> kKnownStatistics = {
    "loglog_slope",    "comparison_ratio_g", "comparison_ratio_f", "exact_rate",
    "oscillation_records", "martingale_diag", "ln_invert"};

bool stable_case(CaseTag tag) {
    return tag == CaseTag::case_i || tag == CaseTag::case_ii || tag == CaseTag::case_iii;
}

} // namespace

void validate_config(const ExperimentConfig& cfg) {
    validate_model(cfg.model);
    make_noise(cfg.noise, cfg.seed); // validates noise parameters
    if (cfg.n_paths < 1) throw ConfigError("config: run.n_paths must be >= 1");
    if (cfg.n_steps < 1) throw ConfigError("config: run.n_steps must be >= 1");
    if (cfg.checkpoints_per_decade < 1)
        throw ConfigError("config: run.checkpoints_per_decade must be >= 1");
    if (cfg.output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
    for (const auto& s : cfg.statistics)
        if (!kKnownStatistics.count(s))
            throw ConfigError("config: unknown statistic '" + s + "'");
}

void check_statistics_allowed(const ExperimentConfig& cfg, bool force) {
    validate_config(cfg);
    if (cfg.statistics.empty()) return;

    const NoiseSource noise = make_noise(cfg.noise, cfg.seed);
    RegimeReport regime;
    try {
        regime = classify_regime(cfg.model);
    } catch (const ConfigError&) {
        if (force) return;
        throw;
    }

    auto refuse = [&](const std::string& stat, const std::string& why) {
        if (force) return;
        throw ConfigError("config: statistic '" + stat + "' refused: " + why +
                          " (use --force to override)");
    };

    for (const auto& s : cfg.statistics) {
        if (!stable_case(regime.case_tag))
            refuse(s, "model classifies as " + to_string(regime.case_tag) +
                          ", not a converging regime");
        if ((s == "loglog_slope" || s == "comparison_ratio_g" || s == "comparison_ratio_f" ||
             s == "martingale_diag") &&
            !noise.assumption1_ok)
            refuse(s, "noise violates the density/third-moment condition the comparison "
                      "machinery assumes");
        if ((s == "exact_rate" || s == "oscillation_records") && !noise.assumption2_ok)
            refuse(s, "noise lacks finite moments of all orders (all-moment condition)");
        if ((s == "exact_rate" || s == "comparison_ratio_f") &&
            regime.case_tag != CaseTag::case_iii)
            refuse(s, "requires the drift-dominated regime (case_iii), model is " +
                          to_string(regime.case_tag));
        if (s == "oscillation_records" &&
            !(regime.case_tag == CaseTag::case_i || regime.case_tag == CaseTag::case_ii))
            refuse(s, "requires the noise-dominated regime (case_i/case_ii), model is " +
                          to_string(regime.case_tag));
    }
}

std::pair<double, double> effective_lambda_mu(const ExperimentConfig& cfg) {
    double lambda = 1.0, mu = 1.0;
    try {
        const RegimeReport regime = classify_regime(cfg.model);
        if (regime.lambda) lambda = mu = *regime.lambda;
    } catch (const ConfigError&) {
        // unclassifiable models may still be simulated with explicit overrides
    }
    if (cfg.lambda_override) lambda = *cfg.lambda_override;
    if (cfg.mu_override) mu = *cfg.mu_override;
    return {lambda, mu};
}

namespace {

std::string meta_line(std::uint64_t cfg_hash, std::uint64_t seed) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "# config_hash=%016" PRIx64 " seed=%" PRIu64 "\n",
                  cfg_hash, seed);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    return out;
}

std::string path_join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

} // namespace

void write_path_csv(const std::string& path, const PathRecord& rec,
                    std::uint64_t cfg_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << meta_line(cfg_hash, seed);
    out << "n,sign,log_abs_x,acc_g2,acc_absf,acc_xlam\n";
    for (const auto& cp : rec.checkpoints) {
        out << cp.n << ',' << cp.sign << ',' << format_double(cp.log_abs_x) << ','
            << format_double(cp.acc_g2) << ',' << format_double(cp.acc_absf) << ','
            << format_double(cp.acc_xlam) << '\n';
    }
}

void write_decades_csv(const std::string& path, const PathRecord& rec,
                       std::uint64_t cfg_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << meta_line(cfg_hash, seed);
    out << "decade,max_stat,min_stat\n";
    for (const auto& d : rec.decade_extremes) {
        if (std::isinf(d.max_stat) && std::isinf(d.min_stat)) continue;
        out << d.decade << ',' << format_double(d.max_stat) << ','
            << format_double(d.min_stat) << '\n';
    }
}

void write_summary_csv(const std::string& path, const EnsembleSummary& summary,
                       std::uint64_t cfg_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << meta_line(cfg_hash, seed);
    if (!summary.rows.empty()) {
        auto lx = [](const PathTerminal& r) { return r.log_abs_x; };
        out << "# n_steps=" << summary.n_steps
            << " median_log_abs_x=" << format_double(summary.median_of(lx))
            << " q10_log_abs_x=" << format_double(summary.quantile_of(0.1, lx))
            << " q90_log_abs_x=" << format_double(summary.quantile_of(0.9, lx)) << '\n';
    }
    out << "stream,n,sign,log_abs_x,acc_g2,acc_absf,acc_xlam,absorbed_at\n";
    for (const auto& r : summary.rows) {
        out << r.stream << ',' << r.n << ',' << r.sign << ',' << format_double(r.log_abs_x)
            << ',' << format_double(r.acc_g2) << ',' << format_double(r.acc_absf) << ','
            << format_double(r.acc_xlam) << ',' << r.absorbed_at << '\n';
    }
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows,
                      std::uint64_t cfg_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << meta_line(cfg_hash, seed);
    out << "experiment,stream,statistic,window_lo,window_hi,value\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.stream << ',' << r.statistic << ',' << r.window_lo
            << ',' << r.window_hi << ',' << format_double(r.value) << '\n';
    }
}

void write_ito_csv(const std::string& path, const std::vector<ItoReport>& reports,
                   std::uint64_t cfg_hash, std::uint64_t seed) {
    auto out = open_out(path);
    out << meta_line(cfg_hash, seed);
    out << "phi,alpha,f,g,h,lhs,rhs,err,norm_err\n";
    for (const auto& r : reports) {
        out << to_string(r.phi.kind) << ',' << format_double(r.phi.alpha) << ','
            << format_double(r.f) << ',' << format_double(r.g) << ',' << format_double(r.h)
            << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
            << format_double(r.err) << ',' << format_double(r.norm_err) << '\n';
    }
}

void write_regime_json(const std::string& path, const RegimeReport& report) {
    json j;
    j["beta"] = std::isfinite(report.beta) ? json(report.beta)
                                           : json(report.beta > 0 ? "inf" : "-inf");
    j["L"] = std::isfinite(report.L) ? json(report.L) : json(report.L > 0 ? "inf" : "-inf");
    j["case"] = to_string(report.case_tag);
    if (report.lambda) j["lambda"] = *report.lambda;
    if (report.exact_constant) j["exact_constant"] = *report.exact_constant;
    j["oscillatory"] = report.oscillatory;
    j["headline"] = report.headline;
    if (!report.note.empty()) j["note"] = report.note;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

RegimeReport run_regime(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const RegimeReport report = classify_regime(cfg.model);
    std::filesystem::create_directories(cfg.output_dir);
    write_regime_json(path_join(cfg.output_dir, "regime.json"), report);
    return report;
}

namespace {

std::string stream_file(const char* prefix, std::int64_t stream) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04" PRId64 ".csv", prefix, stream);
    return buf;
}

} // namespace

EnsembleRun run_simulate(const ExperimentConfig& cfg, bool force, ExecMode mode) {
    check_statistics_allowed(cfg, force);
    const auto [lambda, mu] = effective_lambda_mu(cfg);
    const NoiseSource source = make_noise(cfg.noise, cfg.seed);
    SimOptions opts;
    opts.checkpoints_per_decade = cfg.checkpoints_per_decade;

    EnsembleRun run =
        run_ensemble(cfg.model, source, cfg.n_paths, cfg.n_steps, lambda, mu, opts, mode);

    std::filesystem::create_directories(cfg.output_dir);
    const std::uint64_t hash = config_hash(cfg);
    for (const auto& rec : run.records) {
        const auto s = static_cast<std::int64_t>(rec.meta.stream);
        write_path_csv(path_join(cfg.output_dir, stream_file("path", s)), rec, hash, cfg.seed);
        write_decades_csv(path_join(cfg.output_dir, stream_file("decades", s)), rec, hash,
                          cfg.seed);
    }
    write_summary_csv(path_join(cfg.output_dir, "summary.csv"), run.summary, hash, cfg.seed);
    return run;
}

std::vector<ReportRow> run_report(const ExperimentConfig& cfg, bool force, ExecMode mode) {
    EnsembleRun run = run_simulate(cfg, force, mode);
    const NoiseSource source = make_noise(cfg.noise, cfg.seed);
    const auto [lambda, mu] = effective_lambda_mu(cfg);
    (void)lambda;

    std::vector<ReportRow> rows;
    auto add = [&](std::int64_t stream, const std::string& stat, std::int64_t lo,
                   std::int64_t hi, double value) {
        rows.push_back({cfg.name, stream, stat, lo, hi, value});
    };
    auto add_median = [&](const std::string& stat, std::vector<double> vals,
                          std::int64_t lo, std::int64_t hi) {
        if (vals.empty()) return;
        std::sort(vals.begin(), vals.end());
        const size_t n = vals.size();
        const double med =
            (n % 2 == 1) ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        add(-1, stat + "_median", lo, hi, med);
    };

    std::optional<RegimeReport> regime;
    try {
        regime = classify_regime(cfg.model);
    } catch (const ConfigError&) {
    }

    for (const auto& stat : cfg.statistics) {
        std::vector<double> vals;
        std::int64_t wlo = 0, whi = 0;
        for (const auto& rec : run.records) {
            const auto s = static_cast<std::int64_t>(rec.meta.stream);
            const auto& t = rec.terminal();
            if (stat == "loglog_slope") {
                const IndexWindow w = default_fit_window(rec);
                const DecayEstimate est = loglog_slope(rec, w);
                wlo = w.lo;
                whi = w.hi;
                add(s, stat, w.lo, w.hi, est.slope);
                vals.push_back(est.slope);
            } else if (stat == "comparison_ratio_g") {
                const double v = comparison_ratio_g(rec);
                wlo = whi = t.n;
                add(s, stat, t.n, t.n, v);
                vals.push_back(v);
            } else if (stat == "comparison_ratio_f") {
                const double v = comparison_ratio_f(rec);
                wlo = whi = t.n;
                add(s, stat, t.n, t.n, v);
                vals.push_back(v);
            } else if (stat == "exact_rate") {
                if (!regime || !regime->exact_constant)
                    throw ConfigError("config: statistic 'exact_rate' needs a case_iii model");
                const auto traj = exact_rate_statistic(rec, rec.meta.mu, *regime->exact_constant);
                const double v = traj.back().second;
                wlo = whi = t.n;
                add(s, stat, t.n, t.n, v);
                vals.push_back(v);
            } else if (stat == "oscillation_records") {
                const OscillationReport rep = oscillation_records(rec);
                const auto& last = rep.rows.back();
                wlo = whi = t.n;
                add(s, "oscillation_new_max_final", t.n, t.n, last.new_max ? 1.0 : 0.0);
                add(s, "oscillation_new_min_final", t.n, t.n, last.new_min ? 1.0 : 0.0);
            } else if (stat == "martingale_diag") {
                const MartingaleDiag diag =
                    log_martingale_diag(cfg.model, source, rec.meta.stream, cfg.n_steps);
                wlo = whi = t.n;
                add(s, "martingale_m_over_qv", t.n, t.n, diag.m_over_qv);
                add(s, "martingale_qv_ratio", t.n, t.n, diag.qv_over_h_acc_g2);
                vals.push_back(diag.m_over_qv);
            } else if (stat == "ln_invert") {
                wlo = whi = t.n;
                const double b_hat = (t.acc_xlam > 0.0) ? -t.log_abs_x / t.acc_xlam : 0.0;
                add(s, "ln_invert_b_hat", t.n, t.n, b_hat);
                vals.push_back(b_hat);
            }
        }
        if (stat == "martingale_diag") add_median("martingale_m_over_qv", vals, wlo, whi);
        else if (stat == "ln_invert") add_median("ln_invert_b_hat", vals, wlo, whi);
        else if (stat != "oscillation_records") add_median(stat, vals, wlo, whi);
    }

    std::filesystem::create_directories(cfg.output_dir);
    write_report_csv(path_join(cfg.output_dir, "report.csv"), rows, config_hash(cfg), cfg.seed);
    return rows;
}

ItoScanResult run_ito(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (!cfg.ito) throw ConfigError("config: 'ito' section required for the ito scan");
    const ItoScanResult res =
        ito_error_scan(cfg.ito->phi, cfg.ito->f, cfg.ito->g, cfg.ito->h_grid, cfg.noise);
    std::filesystem::create_directories(cfg.output_dir);
    write_ito_csv(path_join(cfg.output_dir, "ito_scan.csv"), res.reports, config_hash(cfg),
                  cfg.seed);
    return res;
}

} // namespace sdelab

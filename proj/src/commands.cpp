#include "ibcforecast/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ibcforecast/artifact.hpp"
#include "ibcforecast/classify.hpp"
#include "ibcforecast/dataio.hpp"
#include "ibcforecast/distfit.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/service.hpp"

namespace ibc {

namespace fs = std::filesystem;

namespace {

constexpr double kReferenceSnrLo = 0.25;
constexpr double kReferenceSnrHi = 8.0;

std::string out_path(const RunConfig& config, const std::string& name) {
    fs::create_directories(config.output_dir);
    return (fs::path(config.output_dir) / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::NotFound, "cannot write " + path);
    out << text;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

// Last month of window 1's training span.
TimePoint split_cutoff(const RunConfig& config, const MonthlySeries& series) {
    const BacktestConfig b = config.backtest_for(series);
    if (static_cast<std::size_t>(b.validation_tail) + kMinTrainingMonths > series.size()) {
        throw Error(ErrorCode::DegenerateData,
                    "route " + series.route_id + " is too short for a " +
                        std::to_string(b.validation_tail) + "-month validation tail");
    }
    return series.last().plus_months(-b.validation_tail);
}

const char* case_slug(ClassCase c) {
    switch (c) {
        case ClassCase::Precise: return "precise";
        case ClassCase::Mean: return "mean";
        case ClassCase::Approximated: return "approx";
    }
    return "mean";
}

}  // namespace

RunConfig apply_overrides(RunConfig config, const CommandOptions& opts) {
    if (opts.seed) {
        config.seed = *opts.seed;
        config.backtest.seed = *opts.seed;
        config.backtest.forecast.seed = *opts.seed;
        config.mc.seed = *opts.seed;
    }
    if (opts.out) config.output_dir = *opts.out;
    if (opts.class_case) config.class_case = *opts.class_case;
    if (opts.class_top) config.class_top = *opts.class_top;
    if (opts.route) config.routes = {*opts.route};
    return config;
}

std::vector<MonthlySeries> selected_routes(const RunConfig& config) {
    if (config.data_path.empty()) throw Error(ErrorCode::ConfigError, "config key 'data' is required");
    auto all = read_ibc_csv(config.data_path);
    if (config.routes.empty()) return all;
    std::vector<MonthlySeries> out;
    for (const auto& id : config.routes) out.push_back(find_route(all, id));
    return out;
}

std::string cmd_ingest(const RunConfig& config) {
    if (config.data_path.empty()) throw Error(ErrorCode::ConfigError, "config key 'data' is required");
    const auto all = read_ibc_csv(config.data_path);
    write_file(out_path(config, "dataset.csv"), serialize_ibc_csv(all));

    std::ostringstream out;
    out << "route  start    end      months  total\n";
    for (const auto& s : all) {
        std::int64_t total = 0;
        for (auto v : s.values) total += v;
        char line[128];
        std::snprintf(line, sizeof line, "%-6s %s  %s  %6zu  %lld\n", s.route_id.c_str(),
                      s.start.str().c_str(), s.last().str().c_str(), s.size(),
                      static_cast<long long>(total));
        out << line;
    }
    return out.str();
}

std::string cmd_stats(const RunConfig& config) {
    std::vector<RouteClassTable> tables;
    for (const auto& s : selected_routes(config)) tables.push_back(class_frequency_table(s));
    write_file(out_path(config, "class_table.csv"), class_table_csv(tables));
    const std::string text = format_class_table(tables);
    write_file(out_path(config, "class_table.txt"), text);
    return text;
}

std::string cmd_classify(const RunConfig& config) {
    std::ostringstream summary;
    for (const auto& s : selected_routes(config)) {
        const ClassSeries classes = classify_series(s, monthly_stats(s));
        std::ostringstream csv;
        csv << "route,year,month,class,provenance\n";
        std::array<int, 3> count{};
        for (std::size_t i = 0; i < s.size(); ++i) {
            const TimePoint t = s.start.plus_months(static_cast<int>(i));
            const double c = classes.values[i];
            csv << s.route_id << ',' << t.year << ',' << t.month << ',' << c << ','
                << to_string(classes.provenance) << "\n";
            ++count[c == 0.0 ? 0 : (c == 0.5 ? 1 : 2)];
        }
        const std::string file = "classes_" + s.route_id + ".csv";
        write_file(out_path(config, file), csv.str());
        summary << s.route_id << ": " << count[0] << " class 0, " << count[1] << " class 0.5, "
                << count[2] << " class 1 -> " << file << "\n";
    }
    return summary.str();
}

std::string cmd_tune(const RunConfig& config, const ProgressFn& progress) {
    std::ostringstream summary;
    for (const auto& s : selected_routes(config)) {
        const TimePoint cutoff = split_cutoff(config, s);
        if (progress) progress(s.route_id + ": tuning through " + cutoff.str());
        const auto prep = prepare_training(s.before(cutoff.plus_months(1)));
        CvOptions cv = config.backtest.cv;
        cv.seed = tuning_seed(config.seed);
        cv.threads = config.backtest.threads;
        const TuneResult r = tune_hyperparams(prep.data, prep.scaling.target, config.backtest.grid, cv,
                                              config.backtest.lm);

        nlohmann::json doc;
        doc["route"] = s.route_id;
        doc["training_cutoff"] = cutoff.str();
        doc["chosen"] = r.chosen.str();
        doc["seed"] = config.seed;
        doc["grid"] = nlohmann::json::array();
        summary << s.route_id << " (through " << cutoff.str() << ")\n";
        for (const auto& e : r.grid) {
            doc["grid"].push_back({{"spec", e.spec.str()}, {"mean_rmse", e.mean_rmse}, {"mean_mae", e.mean_mae}});
            summary << "  " << e.spec.str() << "  rmse " << fmt("%.2f", e.mean_rmse) << "  mae "
                    << fmt("%.2f", e.mean_mae) << (e.spec.str() == r.chosen.str() ? "  *" : "") << "\n";
        }
        write_file(out_path(config, "tune_" + s.route_id + ".json"), doc.dump(1) + "\n");
    }
    return summary.str();
}

std::string cmd_train(const RunConfig& config, std::optional<TimePoint> cutoff,
                      const ProgressFn& progress) {
    std::ostringstream summary;
    fs::create_directories(config.artifacts_dir);
    for (const auto& s : selected_routes(config)) {
        const TimePoint last = cutoff ? *cutoff : (config.cutoff ? *config.cutoff : s.last());
        if (last < s.start || s.last() < last) {
            throw Error(ErrorCode::InvalidArgument,
                        "cutoff " + last.str() + " is outside route " + s.route_id);
        }
        const MonthlySeries training = s.before(last.plus_months(1));

        NetworkSpec spec;
        if (config.backtest.fixed_spec) {
            spec = *config.backtest.fixed_spec;
        } else {
            if (progress) progress(s.route_id + ": tuning");
            const auto prep = prepare_training(training);
            CvOptions cv = config.backtest.cv;
            cv.seed = tuning_seed(config.seed);
            cv.threads = config.backtest.threads;
            spec = tune_hyperparams(prep.data, prep.scaling.target, config.backtest.grid, cv,
                                    config.backtest.lm).chosen;
        }

        if (progress) progress(s.route_id + ": training " + spec.str() + " through " + last.str());
        SieveOptions sieve = config.backtest.sieve;
        sieve.seed = config.seed;
        sieve.threads = config.backtest.threads;
        Ensemble e = train_ensemble(training, spec, sieve, config.backtest.lm);
        e.created_at = config.created_at;
        const std::string path =
            (fs::path(config.artifacts_dir) / (s.route_id + "_" + last.str() + ".json")).string();
        write_ensemble(e, path);
        summary << s.route_id << ": " << e.networks.size() << " networks (" << spec.str() << ") -> "
                << path << "\n";
    }
    return summary.str();
}

std::string cmd_forecast(const RunConfig& config, const CommandOptions& opts) {
    Ensemble ensemble;
    if (opts.artifact) {
        ensemble = read_ensemble(*opts.artifact);
    } else {
        if (!opts.route) throw Error(ErrorCode::InvalidArgument, "forecast needs --route or --artifact");
        const Service svc({}, load_artifacts(config.artifacts_dir), config.backtest.forecast);
        ensemble = svc.model_for(*opts.route).ensemble;
    }
    if (!opts.class_vector) throw Error(ErrorCode::InvalidArgument, "forecast needs --class-vector");

    HorizonRequest req;
    req.route_id = ensemble.route_id;
    req.class_vector = parse_class_vector(*opts.class_vector);
    req.months = opts.months ? *opts.months : static_cast<int>(req.class_vector.size());
    req.start = opts.start ? *opts.start : ensemble.training_cutoff.plus_months(1);

    ForecastOptions fo = config.backtest.forecast;
    fo.threads = config.backtest.threads;
    fo.seed = opts.seed ? *opts.seed : ensemble.seed;
    const nlohmann::json resp = forecast_response(ensemble, req, fo);

    std::ostringstream csv;
    csv.precision(17);
    csv << "month,class,min,q10,median,q90,max,retained\n";
    std::ostringstream text;
    text << ensemble.route_id << " " << req.start.str() << " + " << req.months << " months, seed "
         << fo.seed << "\n";
    text << "range [" << fmt("%.2f", resp["range"]["low"].get<double>()) << ", " << fmt("%.2f", resp["range"]["high"].get<double>())
         << "]\n";
    text << "month    class      min      q10   median      q90      max\n";
    for (std::size_t m = 0; m < resp["per_month"].size(); ++m) {
        const auto& p = resp["per_month"][m];
        const double c = req.class_vector[m];
        csv << p["month"].get<std::string>() << ',' << c << ',' << p["min"].get<double>() << ','
            << p["q10"].get<double>() << ',' << p["median"].get<double>() << ','
            << p["q90"].get<double>() << ',' << p["max"].get<double>() << ','
            << p["retained"].get<int>() << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%s  %5.2f %8.1f %8.1f %8.1f %8.1f %8.1f\n",
                      p["month"].get<std::string>().c_str(), c, p["min"].get<double>(),
                      p["q10"].get<double>(), p["median"].get<double>(), p["q90"].get<double>(),
                      p["max"].get<double>());
        text << line;
    }
    write_file(out_path(config, "forecast_" + ensemble.route_id + ".csv"), csv.str());
    write_file(out_path(config, "forecast_" + ensemble.route_id + ".json"), resp.dump(1) + "\n");
    return text.str();
}

std::string cmd_validate(const RunConfig& config, const ProgressFn& progress) {
    std::vector<MetricsReport> reports;
    const char* slug = case_slug(config.class_case);
    for (const auto& s : selected_routes(config)) {
        BacktestConfig b = config.backtest_for(s);
        const BacktestRun run = train_backtest(s, b, [&](const std::string& msg) {
            if (progress) progress(s.route_id + ": " + msg);
        });
        MetricsReport r = score_backtest(run, b, config.class_case, config.class_top);
        const std::string stem = s.route_id + "_" + slug;
        write_file(out_path(config, "windows_" + stem + ".csv"), window_results_csv(r));
        write_file(out_path(config, "plot_" + stem + ".csv"), window_plot_csv(r));
        reports.push_back(std::move(r));
    }
    const std::string table = format_metrics_table(reports);
    write_file(out_path(config, std::string("metrics_") + slug + ".txt"), table);
    write_file(out_path(config, std::string("metrics_") + slug + ".csv"), metrics_csv(reports));
    return table;
}

std::string cmd_sensitivity(const RunConfig& config, const ProgressFn& progress) {
    std::vector<SensitivityReport> reports;
    for (const auto& s : selected_routes(config)) {
        BacktestConfig b = config.backtest_for(s);
        const BacktestRun run = train_backtest(s, b, [&](const std::string& msg) {
            if (progress) progress(s.route_id + ": " + msg);
        });
        reports.push_back(sensitivity(run, b, config.class_top));
    }
    const std::string table = format_sensitivity_table(reports);
    write_file(out_path(config, "sensitivity.txt"), table);
    write_file(out_path(config, "sensitivity.csv"), sensitivity_csv(reports));
    return table;
}

std::string cmd_distfit(const RunConfig& config) {
    std::vector<BandRow> rows;
    std::ostringstream fits_csv;
    fits_csv.precision(17);
    fits_csv << "route,month,shape,scale,snr,n,iterations\n";
    std::ostringstream summary;
    for (const auto& s : selected_routes(config)) {
        std::vector<WeibullFit> fits;
        auto r = route_band_rows(s, config.mc, &fits);
        rows.insert(rows.end(), r.begin(), r.end());
        for (const auto& f : fits) {
            fits_csv << f.route_id << ',' << f.month << ',' << f.shape << ',' << f.scale << ','
                     << weibull_snr(f.shape) << ',' << f.sample_n << ',' << f.iterations << "\n";
        }
        summary << s.route_id << ": " << fits.size() << " Weibull fits\n";
    }
    write_file(out_path(config, "weibull_fits.csv"), fits_csv.str());
    write_file(out_path(config, "class_bands.csv"), band_rows_csv(rows));

    McOptions ref = config.mc;
    ref.n = config.reference_n;
    ref.repetitions = config.reference_repetitions;
    ref.round_to_integer = false;
    const auto curve = reference_band_curve(kReferenceSnrLo, kReferenceSnrHi, config.reference_points, ref);
    write_file(out_path(config, "reference_curve.csv"), reference_curve_csv(curve));
    summary << "reference curve: " << curve.size() << " SNR points in [" << kReferenceSnrLo << ", "
            << kReferenceSnrHi << "]\n";
    return summary.str();
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError: return 2;
        case ErrorCode::NotFound: return 3;
        case ErrorCode::SchemaMismatch: return 4;
        case ErrorCode::NumericalFailure: return 5;
        default: return 1;
    }
}

}  // namespace ibc

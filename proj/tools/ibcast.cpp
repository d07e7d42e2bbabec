#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ibcforecast/commands.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/service.hpp"

using namespace ibc;

int main(int argc, char** argv) {
    CLI::App app{"ibcast: monthly border-crossing range forecasts"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string route, class_case, cutoff, start, class_vector, out, artifact;
    std::uint64_t seed = 0;
    int months = 0;
    double class_top = 0.0;
    bool quiet = false;

    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--route", route, "restrict to one route");
    app.add_option("--seed", seed, "override the config master seed");
    app.add_option("--out", out, "output directory");
    app.add_flag("--quiet", quiet, "no progress on stderr");

    auto* ingest = app.add_subcommand("ingest", "validate the dataset and write its canonical form");
    auto* stats = app.add_subcommand("stats", "class frequencies per route and month");
    auto* classify = app.add_subcommand("classify", "class series CSV per route");
    auto* tune = app.add_subcommand("tune", "hyperparameter search on the window-1 training span");
    auto* train = app.add_subcommand("train", "train and save an ensemble per route");
    train->add_option("--cutoff", cutoff, "last training month, YYYY-MM");
    auto* forecast = app.add_subcommand("forecast", "range forecast from a saved ensemble");
    forecast->add_option("--artifact", artifact, "artifact file (default: latest for --route)");
    forecast->add_option("--months", months, "horizon length");
    forecast->add_option("--start", start, "first horizon month, YYYY-MM");
    forecast->add_option("--class-vector", class_vector, "comma list or @file")->required();
    auto* validate = app.add_subcommand("validate", "rolling 12-month backtest");
    validate->add_option("--case", class_case, "precise|mean|approx");
    validate->add_option("--class-top", class_top, "value replacing the top class");
    auto* sens = app.add_subcommand("sensitivity", "backtest under all three class cases");
    sens->add_option("--class-top", class_top, "value replacing the top class");
    auto* distfit = app.add_subcommand("distfit", "Weibull fits and Monte Carlo class bands");
    auto* serve = app.add_subcommand("serve", "read-only HTTP service over saved ensembles");

    CLI11_PARSE(app, argc, argv);

    try {
        CommandOptions opts;
        opts.quiet = quiet;
        if (!route.empty()) opts.route = route;
        if (app.count("--seed")) opts.seed = seed;
        if (!out.empty()) opts.out = out;
        if (!class_case.empty()) opts.class_case = parse_class_case(class_case);
        if (class_top > 0.0) opts.class_top = class_top;
        if (!artifact.empty()) opts.artifact = artifact;
        if (!class_vector.empty()) opts.class_vector = class_vector;
        if (forecast->count("--months")) opts.months = months;
        if (!start.empty()) opts.start = TimePoint::parse(start);
        if (!cutoff.empty()) opts.cutoff = TimePoint::parse(cutoff);

        const RunConfig config = apply_overrides(RunConfig::load(config_path), opts);
        ProgressFn progress;
        if (!quiet) progress = [](const std::string& msg) { std::cerr << msg << "\n"; };

        if (*ingest) std::cout << cmd_ingest(config);
        else if (*stats) std::cout << cmd_stats(config);
        else if (*classify) std::cout << cmd_classify(config);
        else if (*tune) std::cout << cmd_tune(config, progress);
        else if (*train) std::cout << cmd_train(config, opts.cutoff, progress);
        else if (*forecast) std::cout << cmd_forecast(config, opts);
        else if (*validate) std::cout << cmd_validate(config, progress);
        else if (*sens) std::cout << cmd_sensitivity(config, progress);
        else if (*distfit) std::cout << cmd_distfit(config);
        else if (*serve) {
            const Service svc = Service::from_config(config);
            std::cerr << "serving " << svc.models().size() << " models on " << config.bind << "\n";
            run_server(svc, config.bind);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

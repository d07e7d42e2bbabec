#include "ibcforecast/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ibcforecast/error.hpp"

namespace ibc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value) {
    throw Error(ErrorCode::ConfigError,
                "config key '" + key + "' has invalid value '" + std::string(value) + "'");
}

template <class T>
T parse_number(const std::string& key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
    return out;
}

bool parse_bool(const std::string& key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value);
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = trim(text.substr(pos, comma - pos));
        if (!item.empty()) out.emplace_back(item);
        pos = comma + 1;
    }
    return out;
}

std::vector<double> parse_class_vector(std::string_view text) {
    std::string body(text);
    if (!body.empty() && body.front() == '@') {
        std::ifstream in(body.substr(1));
        if (!in) throw Error(ErrorCode::NotFound, "cannot open class vector file " + body.substr(1));
        std::ostringstream buf;
        buf << in.rdbuf();
        body = buf.str();
        std::replace(body.begin(), body.end(), '\n', ',');
    }
    std::vector<double> out;
    for (const auto& item : split_list(body)) {
        out.push_back(parse_number<double>("class_vector", item));
    }
    return out;
}

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys{
        "data", "routes", "cutoff", "validation_tail", "horizon", "grid", "spec",
        "cv_repetitions", "cv_holdout", "cv_restarts", "cv_epochs", "cv_tie_tolerance",
        "sieve_initial", "sieve_survivors", "sieve_reduction", "sieve_stages",
        "sieve_final_epochs", "lm_mu0", "lm_mu_up", "lm_mu_down", "lm_mu_max", "lm_grad_tol",
        "bootstrap_samples", "q_lo", "q_hi", "class_reference", "case", "class_top",
        "mc_repetitions", "mc_round", "reference_points", "reference_repetitions", "reference_n",
        "artifacts", "out", "bind", "created_at", "seed", "threads"};
    return keys;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& base_dir) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ConfigError,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto& known = known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
        }
        if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
            throw Error(ErrorCode::ConfigError, "config key '" + key + "' given twice");
        }
    }

    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).lexically_normal().string();
    };

    RunConfig c;
    auto it = kv.find("seed");
    if (it == kv.end()) throw Error(ErrorCode::ConfigError, "config key 'seed' is required");
    c.seed = parse_number<std::uint64_t>("seed", it->second);
    c.backtest.seed = c.seed;
    c.backtest.forecast.seed = c.seed;
    c.mc.seed = c.seed;

    for (const auto& [key, value] : kv) {
        if (key == "seed") continue;
        try {
            if (key == "data") c.data_path = resolve(value);
            else if (key == "routes") c.routes = split_list(value);
            else if (key == "cutoff") c.cutoff = TimePoint::parse(value);
            else if (key == "validation_tail") c.backtest.validation_tail = parse_number<int>(key, value);
            else if (key == "horizon") c.backtest.horizon = parse_number<int>(key, value);
            else if (key == "grid") {
                c.backtest.grid.clear();
                for (const auto& s : split_list(value)) c.backtest.grid.push_back(NetworkSpec::parse(s));
                if (c.backtest.grid.empty()) bad_value(key, value);
            }
            else if (key == "spec") c.backtest.fixed_spec = NetworkSpec::parse(value);
            else if (key == "cv_repetitions") c.backtest.cv.repetitions = parse_number<int>(key, value);
            else if (key == "cv_holdout") c.backtest.cv.holdout_fraction = parse_number<double>(key, value);
            else if (key == "cv_restarts") c.backtest.cv.restarts = parse_number<int>(key, value);
            else if (key == "cv_epochs") c.backtest.cv.epochs = parse_number<int>(key, value);
            else if (key == "cv_tie_tolerance") c.backtest.cv.tie_tolerance = parse_number<double>(key, value);
            else if (key == "sieve_initial") c.backtest.sieve.initial_candidates = parse_number<int>(key, value);
            else if (key == "sieve_survivors") c.backtest.sieve.survivor_target = parse_number<int>(key, value);
            else if (key == "sieve_reduction") c.backtest.sieve.reduction_factor = parse_number<double>(key, value);
            else if (key == "sieve_stages") {
                c.backtest.sieve.stage_epochs.clear();
                for (const auto& s : split_list(value)) c.backtest.sieve.stage_epochs.push_back(parse_number<int>(key, s));
            }
            else if (key == "sieve_final_epochs") c.backtest.sieve.final_epochs = parse_number<int>(key, value);
            else if (key == "lm_mu0") c.backtest.lm.mu0 = parse_number<double>(key, value);
            else if (key == "lm_mu_up") c.backtest.lm.mu_up = parse_number<double>(key, value);
            else if (key == "lm_mu_down") c.backtest.lm.mu_down = parse_number<double>(key, value);
            else if (key == "lm_mu_max") c.backtest.lm.mu_max = parse_number<double>(key, value);
            else if (key == "lm_grad_tol") c.backtest.lm.grad_tol = parse_number<double>(key, value);
            else if (key == "bootstrap_samples") c.backtest.forecast.samples = parse_number<int>(key, value);
            else if (key == "q_lo") c.backtest.forecast.q_lo = parse_number<double>(key, value);
            else if (key == "q_hi") c.backtest.forecast.q_hi = parse_number<double>(key, value);
            else if (key == "class_reference") {
                if (value == "training") c.backtest.class_reference = ClassReference::TrainingSpan;
                else if (value == "full") c.backtest.class_reference = ClassReference::FullHistory;
                else bad_value(key, value);
            }
            else if (key == "case") c.class_case = parse_class_case(value);
            else if (key == "class_top") c.class_top = parse_number<double>(key, value);
            else if (key == "mc_repetitions") c.mc.repetitions = parse_number<int>(key, value);
            else if (key == "mc_round") c.mc.round_to_integer = parse_bool(key, value);
            else if (key == "reference_points") c.reference_points = parse_number<int>(key, value);
            else if (key == "reference_repetitions") c.reference_repetitions = parse_number<int>(key, value);
            else if (key == "reference_n") c.reference_n = parse_number<int>(key, value);
            else if (key == "artifacts") c.artifacts_dir = resolve(value);
            else if (key == "out") c.output_dir = resolve(value);
            else if (key == "bind") c.bind = value;
            else if (key == "created_at") c.created_at = value;
            else if (key == "threads") {
                c.backtest.threads = parse_number<unsigned>(key, value);
                c.mc.threads = c.backtest.threads;
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ConfigError) throw;
            throw Error(ErrorCode::ConfigError, "config key '" + key + "': " + e.what());
        }
    }

    try {
        c.backtest.sieve.validate();
        c.backtest.lm.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    if (c.backtest.horizon < 1) bad_value("horizon", std::to_string(c.backtest.horizon));
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse(buf.str(), dir.empty() ? "." : dir);
}

BacktestConfig RunConfig::backtest_for(const MonthlySeries& series) const {
    BacktestConfig b = backtest;
    if (cutoff) {
        if (series.empty() || !(*cutoff >= series.start) || !(*cutoff < series.last())) {
            throw Error(ErrorCode::ConfigError,
                        "cutoff " + cutoff->str() + " is not strictly inside route " + series.route_id);
        }
        b.validation_tail = cutoff->months_until(series.last());
    }
    return b;
}

}  // namespace ibc

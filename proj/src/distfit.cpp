#include "ibcforecast/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ibcforecast/error.hpp"
#include "ibcforecast/parallel.hpp"
#include "ibcforecast/quantile.hpp"
#include "ibcforecast/rng.hpp"

namespace ibc {

double weibull_log_likelihood(std::span<const double> values, double shape, double scale) {
    double ll = 0.0;
    for (double x : values) {
        const double z = x / scale;
        ll += std::log(shape / scale) + (shape - 1.0) * std::log(z) - std::pow(z, shape);
    }
    return ll;
}

double weibull_snr(double shape) {
    if (!(shape > 0.0)) throw Error(ErrorCode::InvalidArgument, "Weibull shape must be positive");
    // Var/mean^2 = Gamma(1+2/k)/Gamma(1+1/k)^2 - 1, evaluated in log space.
    const double log_ratio = std::lgamma(1.0 + 2.0 / shape) - 2.0 * std::lgamma(1.0 + 1.0 / shape);
    return 1.0 / std::sqrt(std::expm1(log_ratio));
}

double weibull_shape_for_snr(double snr) {
    if (!(snr > 0.0)) throw Error(ErrorCode::InvalidArgument, "SNR must be positive");
    double lo = std::log(0.02);
    double hi = std::log(200.0);
    if (snr <= weibull_snr(std::exp(lo))) return std::exp(lo);
    if (snr >= weibull_snr(std::exp(hi))) return std::exp(hi);
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (weibull_snr(std::exp(mid)) < snr ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

namespace {

std::vector<double> corrected(std::span<const double> values) {
    if (values.size() < 5) {
        throw Error(ErrorCode::DegenerateData,
                    "Weibull fit needs at least 5 values, got " + std::to_string(values.size()));
    }
    std::vector<double> x(values.begin(), values.end());
    for (double& v : x) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "Weibull fit needs nonnegative finite values");
        }
        if (v == 0.0) v = kZeroReplacement;
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw Error(ErrorCode::DegenerateData, "Weibull fit of all-equal values");
    return x;
}

// Profile score and its derivative for data normalized to (0, 1].
struct Profile {
    std::vector<double> log_y;
    double mean_log = 0.0;

    void eval(double k, double& f, double& df) const {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double ly : log_y) {
            const double w = std::exp(k * ly);
            s0 += w;
            s1 += w * ly;
            s2 += w * ly * ly;
        }
        f = s1 / s0 - 1.0 / k - mean_log;
        df = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
    }
};

}  // namespace

WeibullFit weibull_moments(std::span<const double> values) {
    const auto x = corrected(values);
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double s = std::sqrt(ss / static_cast<double>(x.size() - 1));
    WeibullFit fit;
    fit.shape = weibull_shape_for_snr(mean / s);
    fit.scale = mean / std::exp(std::lgamma(1.0 + 1.0 / fit.shape));
    fit.sample_n = static_cast<int>(x.size());
    return fit;
}

WeibullFit fit_weibull(std::span<const double> values) {
    const auto x = corrected(values);
    const double x_max = *std::max_element(x.begin(), x.end());
    Profile p;
    p.log_y.reserve(x.size());
    for (double v : x) p.log_y.push_back(std::log(v / x_max));
    for (double ly : p.log_y) p.mean_log += ly;
    p.mean_log /= static_cast<double>(x.size());

    // f is increasing in k, negative near 0; grow the bracket until it
    // straddles the root.
    double lo = 1e-3;
    double hi = 1.0;
    double f = 0.0;
    double df = 0.0;
    p.eval(hi, f, df);
    for (int i = 0; f < 0.0; ++i) {
        if (i > 60) throw Error(ErrorCode::NumericalFailure, "Weibull shape bracket diverged");
        lo = hi;
        hi *= 2.0;
        p.eval(hi, f, df);
    }

    double k = std::clamp(weibull_moments(values).shape, lo, hi);
    WeibullFit fit;
    bool converged = false;
    for (int it = 1; it <= 100; ++it) {
        p.eval(k, f, df);
        (f < 0.0 ? lo : hi) = k;
        double next = k - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double rel = std::abs(next - k) / k;
        k = next;
        fit.iterations = it;
        if (rel < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(ErrorCode::NumericalFailure, "Weibull shape iteration did not converge");

    double mean_pow = 0.0;
    for (double ly : p.log_y) mean_pow += std::exp(k * ly);
    mean_pow /= static_cast<double>(x.size());
    fit.shape = k;
    fit.scale = x_max * std::pow(mean_pow, 1.0 / k);
    fit.sample_n = static_cast<int>(x.size());
    return fit;
}

std::array<double, 3> class_frequencies(std::span<const double> values, double s) {
    std::array<double, 3> counts{};
    for (double v : values) {
        const double c = classify_value(v, s);
        counts[c == 0.0 ? 0 : (c == 0.5 ? 1 : 2)] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(values.size());
    return counts;
}

ClassBand mc_class_bands(const WeibullFit& fit, const McOptions& opts) {
    if (opts.n < 2) throw Error(ErrorCode::InvalidArgument, "Monte Carlo sample size must be >= 2");
    if (opts.repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
    if (!(fit.shape > 0.0 && fit.scale > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "Weibull parameters must be positive");
    }
    const auto reps = static_cast<std::size_t>(opts.repetitions);
    std::vector<std::array<double, 3>> freqs(reps);
    std::vector<char> usable(reps, 0);
    parallel_for(reps, opts.threads, [&](std::size_t r) {
        Rng rng(derive_seed(opts.seed, r));
        std::vector<double> draw(static_cast<std::size_t>(opts.n));
        double sum = 0.0;
        for (double& v : draw) {
            v = rng.weibull(fit.shape, fit.scale);
            if (opts.round_to_integer) v = std::round(v);
            sum += v;
        }
        const double mean = sum / opts.n;
        double ss = 0.0;
        for (double v : draw) ss += (v - mean) * (v - mean);
        const double s = std::sqrt(ss / (opts.n - 1));
        if (s > 0.0) {
            freqs[r] = class_frequencies(draw, s);
            usable[r] = 1;
        }
    });

    ClassBand band;
    band.snr = weibull_snr(fit.shape);
    band.n_used = opts.n;
    band.rounded = opts.round_to_integer;
    band.repetitions = opts.repetitions;
    std::array<std::vector<double>, 3> columns;
    for (std::size_t r = 0; r < reps; ++r) {
        if (!usable[r]) {
            ++band.discarded;
            continue;
        }
        for (int c = 0; c < 3; ++c) columns[c].push_back(freqs[r][c]);
    }
    if (band.discarded * 10 > opts.repetitions) {
        throw Error(ErrorCode::DegenerateData,
                    std::to_string(band.discarded) + " of " + std::to_string(opts.repetitions) +
                        " Monte Carlo repetitions had zero variance");
    }
    for (int c = 0; c < 3; ++c) {
        std::sort(columns[c].begin(), columns[c].end());
        band.q05[c] = quantile_sorted(columns[c], 0.05);
        band.q95[c] = quantile_sorted(columns[c], 0.95);
    }
    return band;
}

// ---------------------------------------------------------------------------

namespace {

int class_slot(double c) { return c == 0.0 ? 0 : (c == 0.5 ? 1 : 2); }

ClassCounts count_classes(std::span<const double> values, double s) {
    ClassCounts cc;
    for (double v : values) ++cc.count[class_slot(classify_value(v, s))];
    cc.n = static_cast<int>(values.size());
    return cc;
}

std::array<std::vector<double>, 12> by_calendar_month(const MonthlySeries& series) {
    std::array<std::vector<double>, 12> groups;
    for (std::size_t i = 0; i < series.size(); ++i) {
        groups[series.at(i).month - 1].push_back(static_cast<double>(series.values[i]));
    }
    return groups;
}

std::uint64_t route_seed(std::uint64_t base, const std::string& route) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : route) h = (h ^ ch) * 0x100000001b3ULL;
    return derive_seed(base, h);
}

std::string pct(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g %%", 100.0 * f);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const char* kMonthNames[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

}  // namespace

RouteClassTable class_frequency_table(const MonthlySeries& series) {
    RouteClassTable t;
    t.route_id = series.route_id;
    const MonthlyStats stats = monthly_stats(series);
    t.stationary = stats.stationary;
    t.month_stats = stats.by_month;

    std::vector<double> all;
    for (auto v : series.values) all.push_back(static_cast<double>(v));
    t.stationary_classes = count_classes(all, stats.stationary.s);

    const auto groups = by_calendar_month(series);
    for (int m = 0; m < 12; ++m) {
        t.month_classes[m] = count_classes(groups[m], stats.by_month[m].s);
        for (int c = 0; c < 3; ++c) t.cyclostationary_classes.count[c] += t.month_classes[m].count[c];
        t.cyclostationary_classes.n += t.month_classes[m].n;
    }
    return t;
}

std::string format_class_table(std::span<const RouteClassTable> tables) {
    static const char* labels[3] = {"Class \"0\"   [0, s)", "Class \"0.5\" [s, 2s)",
                                    "Class \"1\"   [2s, max]"};
    std::ostringstream out;
    for (const auto& t : tables) {
        out << t.route_id << "\n";
        out << "  stationary: mean " << num(t.stationary.mean) << ", s " << num(t.stationary.s)
            << ", SNR " << num(t.stationary.snr) << ", N " << t.stationary.n << "\n";
        out << "  " << std::string(22, ' ');
        for (const char* name : kMonthNames) out << ' ' << std::string(8 - std::string(name).size(), ' ') << name;
        out << "\n  SNR by month          ";
        for (const auto& m : t.month_stats) {
            const std::string v = num(m.snr);
            out << ' ' << std::string(v.size() < 8 ? 8 - v.size() : 0, ' ') << v;
        }
        out << "\n  N by month            ";
        for (const auto& m : t.month_classes) {
            const std::string v = std::to_string(m.n);
            out << ' ' << std::string(v.size() < 8 ? 8 - v.size() : 0, ' ') << v;
        }
        out << "\n";
        for (int c = 0; c < 3; ++c) {
            out << "  " << labels[c] << "\n";
            out << "    stationary " << pct(t.stationary_classes.freq(c)) << " ("
                << t.stationary_classes.count[c] << ")\n    by month  ";
            for (const auto& m : t.month_classes) {
                const std::string v = pct(m.freq(c));
                out << ' ' << std::string(v.size() < 8 ? 8 - v.size() : 0, ' ') << v;
            }
            out << "   pooled " << pct(t.cyclostationary_classes.freq(c)) << " ("
                << t.cyclostationary_classes.count[c] << ")\n";
        }
    }
    return out.str();
}

std::string class_table_csv(std::span<const RouteClassTable> tables) {
    std::ostringstream out;
    out.precision(17);
    out << "route,scope,month,mean,s,snr,n,freq_0,freq_05,freq_1\n";
    for (const auto& t : tables) {
        auto row = [&](const char* scope, int month, const DispersionStats& d, const ClassCounts& cc) {
            out << t.route_id << ',' << scope << ',' << month << ',' << d.mean << ',' << d.s << ','
                << d.snr << ',' << d.n << ',' << cc.freq(0) << ',' << cc.freq(1) << ','
                << cc.freq(2) << "\n";
        };
        row("stationary", 0, t.stationary, t.stationary_classes);
        for (int m = 0; m < 12; ++m) row("month", m + 1, t.month_stats[m], t.month_classes[m]);
    }
    return out.str();
}

std::vector<BandRow> route_band_rows(const MonthlySeries& series, const McOptions& base,
                                     std::vector<WeibullFit>* fits_out) {
    const MonthlyStats stats = monthly_stats(series);
    const auto groups = by_calendar_month(series);
    const std::uint64_t seed = route_seed(base.seed, series.route_id);
    std::vector<BandRow> rows;
    for (int m = 0; m < 12; ++m) {
        WeibullFit fit = fit_weibull(groups[m]);
        fit.route_id = series.route_id;
        fit.month = m + 1;
        McOptions o = base;
        o.n = static_cast<int>(groups[m].size());
        o.seed = derive_seed(seed, static_cast<std::uint64_t>(m + 1));
        const ClassBand band = mc_class_bands(fit, o);
        const auto empirical = class_frequencies(groups[m], stats.by_month[m].s);
        static const double classes[3] = {0.0, 0.5, 1.0};
        for (int c = 0; c < 3; ++c) {
            rows.push_back({series.route_id, m + 1, stats.by_month[m].snr, classes[c], empirical[c],
                            band.q05[c], band.q95[c], o.n});
        }
        if (fits_out) fits_out->push_back(fit);
    }
    return rows;
}

std::string band_rows_csv(std::span<const BandRow> rows) {
    std::ostringstream out;
    out.precision(17);
    out << "route,month,snr,class,freq_empirical,freq_weibull_q05,freq_weibull_q95,n\n";
    for (const auto& r : rows) {
        out << r.route_id << ',' << r.month << ',' << r.snr << ',' << r.class_value << ','
            << r.freq_empirical << ',' << r.q05 << ',' << r.q95 << ',' << r.n << "\n";
    }
    return out.str();
}

std::vector<ReferencePoint> reference_band_curve(double snr_lo, double snr_hi, int points,
                                                 const McOptions& opts) {
    if (!(snr_lo > 0.0 && snr_lo < snr_hi) || points < 2) {
        throw Error(ErrorCode::InvalidArgument, "reference curve needs 0 < snr_lo < snr_hi and >= 2 points");
    }
    std::vector<ReferencePoint> curve;
    const double step = std::log(snr_hi / snr_lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        ReferencePoint p;
        p.snr = snr_lo * std::exp(step * i);
        p.shape = weibull_shape_for_snr(p.snr);
        WeibullFit fit;
        fit.shape = p.shape;
        fit.scale = 1.0;
        McOptions o = opts;
        o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(i));
        p.band = mc_class_bands(fit, o);
        curve.push_back(p);
    }
    return curve;
}

std::string reference_curve_csv(std::span<const ReferencePoint> curve) {
    std::ostringstream out;
    out.precision(17);
    out << "snr,shape,class,freq_weibull_q05,freq_weibull_q95,n\n";
    static const double classes[3] = {0.0, 0.5, 1.0};
    for (const auto& p : curve) {
        for (int c = 0; c < 3; ++c) {
            out << p.snr << ',' << p.shape << ',' << classes[c] << ',' << p.band.q05[c] << ','
                << p.band.q95[c] << ',' << p.band.n_used << "\n";
        }
    }
    return out.str();
}

}  // namespace ibc

#include "pelhd/experiment.hpp"

#include "pelhd/errors.hpp"
#include "pelhd/parallel.hpp"
#include "pelhd/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace pelhd {

using Eigen::VectorXd;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
}

long long to_integer(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    }
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string mode_name(ExperimentMode mode)
{
    switch (mode) {
    case ExperimentMode::Level: return "level";
    case ExperimentMode::Power: return "power";
    case ExperimentMode::CalibrationCompare: return "compare";
    }
    return "unknown";
}

std::string alpha_label(const DependenceSpec& spec)
{
    switch (spec.kind) {
    case DependenceKind::NonErgodic: return "0";
    case DependenceKind::ShortRangeArma: return "inf";
    case DependenceKind::LongRange: return format_double(spec.alpha);
    }
    return "";
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (n < 4)
        throw ConfigError("n must be >= 4");
    if (p_values.empty())
        throw ConfigError("at least one p is required");
    for (int p : p_values)
        if (p < 2)
            throw ConfigError("every p must be >= 2");
    if (!(c_star > 0.0) || !std::isfinite(c_star))
        throw ConfigError("c_star must be positive");
    if (levels.empty())
        throw ConfigError("at least one level is required");
    for (double a : levels)
        if (!(a > 0.0 && a < 1.0))
            throw ConfigError("levels must lie in (0, 1), got " + format_double(a));
    if (m_rules.empty())
        throw ConfigError("at least one m rule is required");
    for (const auto& r : m_rules)
        if (!(r.c0 > 0.0))
            throw ConfigError("m rule constants must be positive");
    if (n_replicates < 1)
        throw ConfigError("replicates must be >= 1");
    if (threads < 1)
        throw ConfigError("threads must be >= 1");
    if (dependence.kind == DependenceKind::LongRange && !(dependence.alpha > 0.0 && dependence.alpha <= 1.0))
        throw ConfigError("lrd alpha must lie in (0, 1]");
    if (dependence.kind == DependenceKind::ShortRangeArma) {
        try {
            check_causal(dependence.arma);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    if (mode == ExperimentMode::CalibrationCompare) {
        if (dependence.kind == DependenceKind::NonErgodic)
            throw ConfigError("Normal calibration is undefined for non-ergodic dependence");
        if (dependence.kind == DependenceKind::LongRange && !(dependence.alpha > 0.5))
            throw ConfigError("Normal calibration needs alpha > 1/2");
        for (int p : p_values)
            if (p < 4)
                throw ConfigError("Normal calibration needs p >= 4");
    }
}

ExperimentConfig parse_experiment_config(const std::string& text)
{
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    std::map<std::string, std::string> kv;
    for (const auto& [key, node] : tree) {
        if (!node.empty())
            throw ConfigError("sections are not supported; use flat key = value lines");
        kv[key] = trim(node.data());
    }
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    ExperimentConfig cfg;
    if (auto v = take("mode")) {
        if (*v == "level") cfg.mode = ExperimentMode::Level;
        else if (*v == "power") cfg.mode = ExperimentMode::Power;
        else if (*v == "compare") cfg.mode = ExperimentMode::CalibrationCompare;
        else throw ConfigError("unknown mode '" + *v + "' (expected level, power or compare)");
    }

    const std::string kind = take("kind").value_or("srd");
    if (kind == "ne") {
        cfg.dependence = DependenceSpec::non_ergodic();
    } else if (kind == "lrd") {
        auto a = take("alpha");
        if (!a)
            throw ConfigError("kind = lrd requires alpha");
        cfg.dependence = DependenceSpec::long_range(to_double("alpha", *a));
    } else if (kind == "srd") {
        cfg.dependence = DependenceSpec::short_range();
    } else {
        throw ConfigError("unknown kind '" + kind + "' (expected ne, lrd or srd)");
    }
    if (auto v = take("ar")) {
        const auto items = split_list(*v);
        if (items.size() != 2)
            throw ConfigError("ar needs exactly 2 coefficients");
        for (int i = 0; i < 2; ++i)
            cfg.dependence.arma.ar[i] = to_double("ar", items[i]);
    }
    if (auto v = take("ma")) {
        const auto items = split_list(*v);
        if (items.size() != 3)
            throw ConfigError("ma needs exactly 3 coefficients");
        for (int i = 0; i < 3; ++i)
            cfg.dependence.arma.ma[i] = to_double("ma", items[i]);
    }
    if (auto v = take("burn_in"))
        cfg.dependence.arma.burn_in = static_cast<int>(to_integer("burn_in", *v));

    if (auto v = take("n"))
        cfg.n = static_cast<int>(to_integer("n", *v));
    if (auto v = take("p")) {
        cfg.p_values.clear();
        for (const auto& item : split_list(*v))
            cfg.p_values.push_back(static_cast<int>(to_integer("p", item)));
    }
    if (auto v = take("c_star"))
        cfg.c_star = to_double("c_star", *v);
    if (auto v = take("levels")) {
        cfg.levels.clear();
        for (const auto& item : split_list(*v))
            cfg.levels.push_back(to_double("levels", item));
    }
    if (auto v = take("m_rules")) {
        cfg.m_rules.clear();
        for (const auto& item : split_list(*v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("m rule '" + item + "' must look like <rule>:<c0>");
            cfg.m_rules.push_back({parse_rule(trim(item.substr(0, colon))),
                                   to_double("m_rules", trim(item.substr(colon + 1)))});
        }
    }
    if (auto v = take("replicates"))
        cfg.n_replicates = static_cast<int>(to_integer("replicates", *v));
    if (auto v = take("seed")) {
        const long long s = to_integer("seed", *v);
        if (s < 0)
            throw ConfigError("seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = take("shift"))
        cfg.shift = to_double("shift", *v);
    if (auto v = take("kappa")) {
        if (*v == "plugin") cfg.kappa_source = KappaSource::Plugin;
        else if (*v == "exact") cfg.kappa_source = KappaSource::Exact;
        else throw ConfigError("kappa must be plugin or exact");
    }
    if (auto v = take("output"))
        cfg.output_path = *v;
    if (auto v = take("threads"))
        cfg.threads = static_cast<int>(to_integer("threads", *v));

    if (!kv.empty())
        throw ConfigError("unknown config key '" + kv.begin()->first + "'");
    if (cfg.mode == ExperimentMode::Power && !std::isfinite(cfg.shift))
        throw ConfigError("power mode needs a finite shift");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& cfg)
{
    std::ostringstream os;
    os << "mode=" << mode_name(cfg.mode) << ";kind=" << cfg.dependence.kind_name();
    if (cfg.dependence.kind == DependenceKind::LongRange)
        os << ";alpha=" << format_double(cfg.dependence.alpha);
    if (cfg.dependence.kind == DependenceKind::ShortRangeArma) {
        const auto& a = cfg.dependence.arma;
        os << ";ar=" << format_double(a.ar[0]) << ',' << format_double(a.ar[1]) << ";ma=" << format_double(a.ma[0])
           << ',' << format_double(a.ma[1]) << ',' << format_double(a.ma[2]) << ";burn_in=" << a.burn_in;
    }
    os << ";n=" << cfg.n << ";p=";
    for (std::size_t i = 0; i < cfg.p_values.size(); ++i)
        os << (i ? "," : "") << cfg.p_values[i];
    os << ";c_star=" << format_double(cfg.c_star) << ";levels=";
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        os << (i ? "," : "") << format_double(cfg.levels[i]);
    os << ";m_rules=";
    for (std::size_t i = 0; i < cfg.m_rules.size(); ++i)
        os << (i ? "," : "") << rule_name(cfg.m_rules[i].rule) << ':' << format_double(cfg.m_rules[i].c0);
    os << ";replicates=" << cfg.n_replicates;
    if (cfg.mode == ExperimentMode::Power)
        os << ";shift=" << format_double(cfg.shift);
    if (cfg.mode == ExperimentMode::CalibrationCompare)
        os << ";kappa=" << (cfg.kappa_source == KappaSource::Exact ? "exact" : "plugin");
    return os.str();
}

std::string config_hash(const ExperimentConfig& cfg)
{
    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double exact_kappa_sq(const DependenceSpec& spec, double c_star)
{
    double sum = 0.0;
    switch (spec.kind) {
    case DependenceKind::NonErgodic:
        throw ConfigError("kappa^2 is undefined in the non-ergodic regime");
    case DependenceKind::ShortRangeArma:
        sum = arma_autocorrelation(spec.arma, 5000).squaredNorm();
        break;
    case DependenceKind::LongRange: {
        if (!(spec.alpha > 0.5))
            throw ConfigError("kappa^2 needs alpha > 1/2");
        constexpr int lags = 1000000;
        sum = fgn_autocorrelation(lags, spec.alpha).squaredNorm();
        // rho(k) ~ H(2H-1) k^{-alpha}; add the integral of the squared tail.
        const double h = spec.hurst();
        const double c = h * (2.0 * h - 1.0);
        const double a2 = 2.0 * spec.alpha;
        sum += c * c * std::pow(static_cast<double>(lags), 1.0 - a2) / (a2 - 1.0);
        break;
    }
    }
    return 2.0 * c_star * c_star * sum;
}

double estimate_alpha_for_scaling(const DataMatrix& data)
{
    if (data.p() >= 32)
        return estimate_alpha_hurst(data);
    return estimate_alpha_invariant(data);
}

TestReport run_pel_test(const DataMatrix& data, const VectorXd& mu0, const TestOptions& opts,
                        std::uint64_t seed_used)
{
    PelConfig cfg;
    cfg.c_star = opts.c_star;
    TestReport rep;
    rep.seed_used = seed_used;
    rep.m = opts.m;
    rep.raw_statistic = neg_log_pel_ratio(data, mu0, cfg);
    if (opts.regime == Regime::NonErgodic) {
        rep.regime = LimitKind::NonErgodic;
        rep.curve = build_curve_ne(data, mu0, opts.m, cfg, opts.threads);
        rep.statistic = rep.raw_statistic;
    } else {
        rep.alpha_hat = estimate_alpha_for_scaling(data);
        const auto p = static_cast<int>(data.p());
        const LimitRegime lr = LimitRegime::ergodic(std::max(rep.alpha_hat, 1e-12), p, opts.c_star);
        rep.regime = lr.kind;
        rep.curve = build_curve_ergodic(data, mu0, opts.m, rep.alpha_hat, cfg, opts.threads);
        const double b_hat = std::pow(static_cast<double>(p), std::min(rep.alpha_hat, 0.5));
        rep.statistic = b_hat * (rep.raw_statistic - opts.c_star);
    }
    const Decision d = decide(rep.statistic, rep.curve, opts.level);
    rep.threshold = d.threshold;
    rep.rejected = d.rejected;
    return rep;
}

namespace {

// Rejection indicators of one replicate; ok[r] is false when the curve for
// m rule r (or the full-sample solve) failed.
struct ReplicateOutcome {
    std::vector<char> ok;                 // per m rule
    std::vector<std::vector<char>> ss;    // [rule][level]
    bool g_ok = false;
    std::vector<char> g;                  // [level], compare mode only
};

ReplicateOutcome run_replicate(const ExperimentConfig& cfg, const DataGenerator& gen, const std::vector<int>& ms,
                               double exact_kappa, std::uint64_t seed)
{
    const int p = gen.p();
    const std::size_t rules = cfg.m_rules.size();
    ReplicateOutcome out;
    out.ok.assign(rules, 0);
    out.ss.assign(rules, std::vector<char>(cfg.levels.size(), 0));
    out.g.assign(cfg.levels.size(), 0);

    Eigen::MatrixXd x = gen.sample(cfg.n, seed);
    if (cfg.mode == ExperimentMode::Power)
        x.leftCols(p / 2).array() += cfg.shift;
    const DataMatrix data = compute_column_stats(std::move(x));
    const VectorXd mu0 = VectorXd::Zero(p);

    PelConfig pel;
    pel.c_star = cfg.c_star;
    double stat = 0.0;
    try {
        stat = neg_log_pel_ratio(data, mu0, pel);
    } catch (const NumericError&) {
        return out;
    }

    const bool ne = cfg.dependence.kind == DependenceKind::NonErgodic;
    double alpha_hat = 0.0;
    double b_hat = 1.0;
    if (!ne) {
        try {
            alpha_hat = estimate_alpha_for_scaling(data);
        } catch (const NumericError&) {
            return out;
        }
        b_hat = std::pow(static_cast<double>(p), std::min(alpha_hat, 0.5));
    }
    const double v_n = ne ? stat : b_hat * (stat - cfg.c_star);

    for (std::size_t r = 0; r < rules; ++r) {
        CalibrationCurve curve;
        try {
            curve = ne ? build_curve_ne(data, mu0, ms[r], pel) : build_curve_ergodic(data, mu0, ms[r], alpha_hat, pel);
        } catch (const NumericError&) {
            continue;
        }
        out.ok[r] = 1;
        for (std::size_t l = 0; l < cfg.levels.size(); ++l)
            out.ss[r][l] = decide(v_n, curve, cfg.levels[l]).rejected ? 1 : 0;
    }

    if (cfg.mode == ExperimentMode::CalibrationCompare) {
        double kappa = exact_kappa;
        if (cfg.kappa_source == KappaSource::Plugin) {
            try {
                kappa = std::sqrt(estimate_kappa_sq_plugin(data, cfg.c_star));
            } catch (const NumericError&) {
                return out;
            }
        }
        out.g_ok = true;
        const double z = std::sqrt(static_cast<double>(p)) * (stat - cfg.c_star);
        for (std::size_t l = 0; l < cfg.levels.size(); ++l)
            out.g[l] = z > kappa * normal_quantile(1.0 - cfg.levels[l]) ? 1 : 0;
    }
    return out;
}

ResultRow make_row(const ExperimentConfig& cfg, const std::string& hash, int p, const std::string& rule, double c0,
                   int m, double level, const std::string& mode, int rejections, int successes)
{
    ResultRow row;
    row.alpha = alpha_label(cfg.dependence);
    row.p = p;
    row.n = cfg.n;
    row.m_rule = rule;
    row.c0 = c0;
    row.m = m;
    row.level = level;
    row.mode = mode;
    row.n_reps = successes;
    row.failures = cfg.n_replicates - successes;
    row.seed = cfg.seed;
    row.config_hash = hash;
    // A cell is invalidated when more than 2% of its replicates failed.
    if (successes == 0 || row.failures > 0.02 * cfg.n_replicates) {
        row.a_hat = std::numeric_limits<double>::quiet_NaN();
        row.abs_err = std::numeric_limits<double>::quiet_NaN();
    } else {
        row.a_hat = static_cast<double>(rejections) / successes;
        row.abs_err = std::abs(level - row.a_hat);
    }
    return row;
}

std::vector<ResultRow> run_grid(const ExperimentConfig& cfg)
{
    cfg.validate();
    const std::string hash = config_hash(cfg);
    const bool compare = cfg.mode == ExperimentMode::CalibrationCompare;
    const std::string ss_mode = compare ? "compare_ss" : mode_name(cfg.mode);
    const double m_alpha = cfg.dependence.kind == DependenceKind::LongRange ? cfg.dependence.alpha : 0.0;

    std::vector<ResultRow> rows;
    for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
        const int p = cfg.p_values[pi];
        const DataGenerator gen(cfg.dependence, p);
        std::vector<int> ms;
        for (const auto& r : cfg.m_rules)
            ms.push_back(subsample_size(cfg.n, p, r.rule, r.c0, m_alpha));
        const double exact_kappa =
            compare && cfg.kappa_source == KappaSource::Exact ? std::sqrt(exact_kappa_sq(cfg.dependence, cfg.c_star))
                                                              : 0.0;
        const std::uint64_t p_seed = derive_seed(cfg.seed, pi);

        std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.n_replicates));
        parallel_for(outcomes.size(), cfg.threads, [&](std::size_t rep) {
            outcomes[rep] = run_replicate(cfg, gen, ms, exact_kappa, derive_seed(p_seed, rep));
        });

        for (std::size_t r = 0; r < cfg.m_rules.size(); ++r) {
            for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
                int rejections = 0;
                int successes = 0;
                for (const auto& o : outcomes) {
                    if (!o.ok[r])
                        continue;
                    ++successes;
                    rejections += o.ss[r][l];
                }
                rows.push_back(make_row(cfg, hash, p, rule_name(cfg.m_rules[r].rule), cfg.m_rules[r].c0, ms[r],
                                        cfg.levels[l], ss_mode, rejections, successes));
            }
        }
        if (compare) {
            for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
                int rejections = 0;
                int successes = 0;
                for (const auto& o : outcomes) {
                    if (!o.g_ok)
                        continue;
                    ++successes;
                    rejections += o.g[l];
                }
                rows.push_back(
                    make_row(cfg, hash, p, "normal", 0.0, 0, cfg.levels[l], "compare_g", rejections, successes));
            }
        }
    }
    return rows;
}

}  // namespace

std::vector<ResultRow> run_level_experiment(const ExperimentConfig& cfg)
{
    if (cfg.mode != ExperimentMode::Level)
        throw ConfigError("run_level_experiment needs mode = level");
    return run_grid(cfg);
}

std::vector<ResultRow> run_power_experiment(const ExperimentConfig& cfg)
{
    if (cfg.mode != ExperimentMode::Power)
        throw ConfigError("run_power_experiment needs mode = power");
    return run_grid(cfg);
}

std::vector<ResultRow> run_calibration_compare(const ExperimentConfig& cfg)
{
    if (cfg.mode != ExperimentMode::CalibrationCompare)
        throw ConfigError("run_calibration_compare needs mode = compare");
    return run_grid(cfg);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg)
{
    return run_grid(cfg);
}

std::string format_results_csv(const std::vector<ResultRow>& rows)
{
    std::string out = "alpha,p,n,m_rule,c0,level,mode,a_hat,abs_err,n_reps,seed,config_hash\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%s,%s,%s,%.6f,%.6f,%d,%llu,%s\n", r.alpha.c_str(), r.p, r.n,
                      r.m_rule.c_str(), format_double(r.c0).c_str(), format_double(r.level).c_str(), r.mode.c_str(),
                      r.a_hat, r.abs_err, r.n_reps, static_cast<unsigned long long>(r.seed), r.config_hash.c_str());
        out += buf;
    }
    return out;
}

}  // namespace pelhd

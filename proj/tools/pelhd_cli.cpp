#include "pelhd/pelhd.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Failure {
    int code;
    std::string message;
};

int exit_code(pelhd_status s)
{
    switch (s) {
    case PELHD_OK: return 0;
    case PELHD_ERR_NUMERIC:
    case PELHD_ERR_CONVERGENCE:
    case PELHD_ERR_INTERNAL: return kExitNumeric;
    default: return kExitConfig;
    }
}

void check(pelhd_status s)
{
    if (s != PELHD_OK)
        throw Failure{exit_code(s), std::string(pelhd_status_name(s)) + ": " + pelhd_last_error()};
}

using Matrix = std::unique_ptr<pelhd_matrix, decltype(&pelhd_matrix_free)>;
using Curve = std::unique_ptr<pelhd_curve, decltype(&pelhd_curve_free)>;
using Experiment = std::unique_ptr<pelhd_experiment, decltype(&pelhd_experiment_free)>;

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { pelhd_string_free(s); }
};

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Failure{kExitConfig, "cannot write '" + path + "'"};
    out << text;
}

Matrix read_data(const std::string& path)
{
    pelhd_matrix* m = nullptr;
    check(pelhd_matrix_read_csv(path.c_str(), &m));
    return Matrix(m, pelhd_matrix_free);
}

// "zeros", "means", or a file of p comma/whitespace separated reals.
std::vector<double> read_mu(const std::string& spec, const pelhd_matrix* data)
{
    const size_t p = pelhd_matrix_cols(data);
    std::vector<double> mu(p, 0.0);
    if (spec == "zeros")
        return mu;
    if (spec == "means") {
        check(pelhd_matrix_column_means(data, mu.data()));
        return mu;
    }
    std::ifstream in(spec);
    if (!in)
        throw Failure{kExitConfig, "cannot open mu file '" + spec + "'"};
    mu.clear();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#')
            continue;
        for (char& c : line)
            if (c == ',')
                c = ' ';
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            try {
                size_t pos = 0;
                mu.push_back(std::stod(tok, &pos));
                if (pos != tok.size())
                    throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw Failure{kExitConfig, "malformed value '" + tok + "' in mu file"};
            }
        }
    }
    if (mu.size() != p)
        throw Failure{kExitConfig, "mu file has " + std::to_string(mu.size()) + " values, data has " +
                                       std::to_string(p) + " columns"};
    return mu;
}

pelhd_dependence make_dependence(const std::string& kind, double alpha)
{
    pelhd_dependence dep;
    if (kind == "ne") {
        dep = pelhd_dependence_default(PELHD_KIND_NE);
    } else if (kind == "lrd") {
        dep = pelhd_dependence_default(PELHD_KIND_LRD);
        dep.alpha = alpha;
    } else if (kind == "srd") {
        dep = pelhd_dependence_default(PELHD_KIND_SRD);
    } else {
        throw Failure{kExitConfig, "unknown kind '" + kind + "'"};
    }
    return dep;
}

double alpha_for_scaling(const pelhd_matrix* data)
{
    double a = 0.0;
    if (pelhd_matrix_cols(data) >= 32)
        check(pelhd_estimate_alpha_hurst(data, &a));
    else
        check(pelhd_estimate_alpha_invariant(data, &a));
    return a;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Penalized empirical likelihood tests for high-dimensional means"};
    app.require_subcommand(1);

    std::string out_path;
    std::uint64_t seed = 1;
    int threads = 1;
    double c_star = 1.0;

    // stat
    auto* stat = app.add_subcommand("stat", "Compute -log R_n(mu) for a CSV data set");
    std::string data_path;
    std::string mu_spec = "zeros";
    stat->add_option("--data", data_path, "Data CSV (n rows, p columns)")->required();
    stat->add_option("--mu", mu_spec, "zeros, means, or a file with p values");
    stat->add_option("--c-star", c_star, "Penalty constant");
    stat->add_option("--out", out_path, "Output path (default stdout)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Emit the subsampling calibration curve as CSV");
    int m = 0;
    std::string rule = "np13";
    double c0 = 1.0;
    std::string regime = "ergodic";
    double level = -1.0;
    cal->add_option("--data", data_path, "Data CSV")->required();
    cal->add_option("--mu", mu_spec, "zeros, means, or a file with p values");
    cal->add_option("--m", m, "Subsample size (overrides --rule)");
    cal->add_option("--rule", rule, "Subsample rule: np13, lrd, n13, n12");
    cal->add_option("--c0", c0, "Rule constant");
    cal->add_option("--regime", regime, "ne or ergodic")->check(CLI::IsMember({"ne", "ergodic"}));
    cal->add_option("--level", level, "Also decide the test at this level (printed to stderr)");
    cal->add_option("--c-star", c_star, "Penalty constant");
    cal->add_option("--threads", threads, "Worker threads");
    cal->add_option("--out", out_path, "Output path (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Emit generated data as CSV");
    std::string kind = "srd";
    double alpha = 0.8;
    int n = 200;
    int p = 100;
    sim->add_option("--kind", kind, "ne, lrd or srd");
    sim->add_option("--alpha", alpha, "LRD exponent in (0, 1]");
    sim->add_option("--n", n, "Observations");
    sim->add_option("--p", p, "Components");
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--out", out_path, "Output path (default stdout)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run an experiment config and emit the results CSV");
    std::string config_path;
    exp->add_option("--config", config_path, "Experiment config (key = value)")->required();
    auto* exp_seed = exp->add_option("--seed", seed, "Override the config seed");
    auto* exp_threads = exp->add_option("--threads", threads, "Override the config thread count");
    exp->add_option("--out", out_path, "Output path (default: config output, else stdout)");

    // limits
    auto* lim = app.add_subcommand("limits", "Sample a reference limit law");
    std::string law = "ne";
    int q = 100;
    int p_surrogate = 2048;
    int draws = 1000;
    lim->add_option("--kind", law, "ne or lrd")->check(CLI::IsMember({"ne", "lrd"}));
    lim->add_option("--alpha", alpha, "LRD exponent in (0, 1/2)");
    lim->add_option("--q", q, "Grid size for the non-ergodic law");
    lim->add_option("--p-surrogate", p_surrogate, "Surrogate length for the LRD law");
    lim->add_option("--draws", draws, "Number of draws");
    lim->add_option("--c-star", c_star, "Penalty constant");
    lim->add_option("--seed", seed, "Seed");
    lim->add_option("--out", out_path, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (*stat) {
            const Matrix data = read_data(data_path);
            const auto mu = read_mu(mu_spec, data.get());
            double value = 0.0;
            check(pelhd_stat(data.get(), mu.data(), c_star, &value));
            write_output(out_path, fmt(value) + "\n");
        } else if (*cal) {
            const Matrix data = read_data(data_path);
            const auto mu = read_mu(mu_spec, data.get());
            const int rows = static_cast<int>(pelhd_matrix_rows(data.get()));
            const int cols = static_cast<int>(pelhd_matrix_cols(data.get()));
            const pelhd_regime reg = regime == "ne" ? PELHD_REGIME_NON_ERGODIC : PELHD_REGIME_ERGODIC;
            const double a_hat = reg == PELHD_REGIME_ERGODIC ? alpha_for_scaling(data.get()) : 0.0;
            if (m <= 0)
                check(pelhd_subsample_size(rows, cols, rule.c_str(), c0, a_hat, &m));
            pelhd_curve* raw = nullptr;
            check(pelhd_curve_build(data.get(), mu.data(), m, reg, a_hat, c_star, threads, &raw));
            const Curve curve(raw, pelhd_curve_free);
            OwnedString csv;
            check(pelhd_curve_csv(curve.get(), &csv.s));
            write_output(out_path, csv.s);
            if (level >= 0.0) {
                pelhd_test_report rep{};
                check(pelhd_test(data.get(), mu.data(), reg, m, level, c_star, threads, &rep));
                std::cerr << "m=" << m << " statistic=" << fmt(rep.statistic) << " threshold=" << fmt(rep.threshold)
                          << " rejected=" << (rep.rejected ? "yes" : "no") << " alpha_hat=" << fmt(rep.alpha_hat)
                          << "\n";
            }
        } else if (*sim) {
            const pelhd_dependence dep = make_dependence(kind, alpha);
            OwnedString csv;
            check(pelhd_simulate_csv(&dep, n, p, seed, &csv.s));
            write_output(out_path, csv.s);
        } else if (*exp) {
            pelhd_experiment* raw = nullptr;
            check(pelhd_experiment_load(config_path.c_str(), &raw));
            const Experiment e(raw, pelhd_experiment_free);
            if (*exp_seed)
                check(pelhd_experiment_set_seed(e.get(), seed));
            if (*exp_threads)
                check(pelhd_experiment_set_threads(e.get(), threads));
            OwnedString csv;
            check(pelhd_experiment_run(e.get(), &csv.s));
            write_output(out_path.empty() ? pelhd_experiment_output_path(e.get()) : out_path, csv.s);
        } else if (*lim) {
            std::vector<double> values(draws > 0 ? static_cast<size_t>(draws) : 0);
            if (draws < 1)
                throw Failure{kExitConfig, "--draws must be >= 1"};
            if (law == "ne")
                check(pelhd_sample_ne_limit(q, c_star, draws, seed, values.data()));
            else
                check(pelhd_sample_lrd_limit(alpha, p_surrogate, c_star, draws, seed, values.data()));
            std::string text = "draw\n";
            for (double v : values)
                text += fmt(v) + "\n";
            write_output(out_path, text);
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    }
    return 0;
}

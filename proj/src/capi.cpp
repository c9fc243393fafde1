#include "pelhd/pelhd.h"

#include "pelhd/calibration.hpp"
#include "pelhd/errors.hpp"
#include "pelhd/experiment.hpp"
#include "pelhd/limits.hpp"
#include "pelhd/pel.hpp"
#include "pelhd/simulate.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct pelhd_matrix {
    pelhd::DataMatrix data;
};

struct pelhd_curve {
    pelhd::CalibrationCurve curve;
};

struct pelhd_experiment {
    pelhd::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

pelhd_status fail(pelhd_status status, const std::string& msg)
{
    g_last_error = msg;
    return status;
}

template <class F>
pelhd_status guarded(F&& f)
{
    try {
        f();
        g_last_error.clear();
        return PELHD_OK;
    } catch (const pelhd::ConvergenceError& e) {
        return fail(PELHD_ERR_CONVERGENCE, e.what());
    } catch (const pelhd::DimensionError& e) {
        return fail(PELHD_ERR_DIMENSION, e.what());
    } catch (const pelhd::DomainError& e) {
        return fail(PELHD_ERR_DOMAIN, e.what());
    } catch (const pelhd::ConfigError& e) {
        return fail(PELHD_ERR_CONFIG, e.what());
    } catch (const pelhd::RegimeError& e) {
        return fail(PELHD_ERR_REGIME, e.what());
    } catch (const pelhd::NumericError& e) {
        return fail(PELHD_ERR_NUMERIC, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PELHD_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PELHD_ERR_INTERNAL, e.what());
    }
}

void require(bool ok, const char* what)
{
    if (!ok)
        throw pelhd::DomainError(what);
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

pelhd::DependenceSpec to_spec(const pelhd_dependence* dep)
{
    require(dep != nullptr, "dependence must not be NULL");
    switch (dep->kind) {
    case PELHD_KIND_NE: return pelhd::DependenceSpec::non_ergodic();
    case PELHD_KIND_LRD: return pelhd::DependenceSpec::long_range(dep->alpha);
    case PELHD_KIND_SRD: {
        pelhd::ArmaParams a;
        a.ar = {dep->ar[0], dep->ar[1]};
        a.ma = {dep->ma[0], dep->ma[1], dep->ma[2]};
        a.burn_in = dep->burn_in;
        return pelhd::DependenceSpec::short_range(a);
    }
    }
    throw pelhd::ConfigError("unknown dependence kind");
}

Eigen::VectorXd to_mu(const pelhd_matrix* data, const double* mu0)
{
    require(data != nullptr && mu0 != nullptr, "data and mu0 must not be NULL");
    return Eigen::Map<const Eigen::VectorXd>(mu0, data->data.p());
}

pelhd_matrix* wrap(Eigen::MatrixXd values)
{
    auto* m = new pelhd_matrix{pelhd::compute_column_stats(std::move(values))};
    return m;
}

}  // namespace

extern "C" {

const char* pelhd_version(void)
{
    return "1.0.0";
}

const char* pelhd_last_error(void)
{
    return g_last_error.c_str();
}

const char* pelhd_status_name(pelhd_status status)
{
    switch (status) {
    case PELHD_OK: return "ok";
    case PELHD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PELHD_ERR_DIMENSION: return "dimension error";
    case PELHD_ERR_DOMAIN: return "domain error";
    case PELHD_ERR_CONFIG: return "config error";
    case PELHD_ERR_NUMERIC: return "numeric error";
    case PELHD_ERR_CONVERGENCE: return "convergence error";
    case PELHD_ERR_REGIME: return "regime error";
    case PELHD_ERR_IO: return "io error";
    case PELHD_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void pelhd_string_free(char* s)
{
    std::free(s);
}

pelhd_status pelhd_matrix_create(size_t n, size_t p, const double* row_major, pelhd_matrix** out)
{
    if (!row_major || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::MatrixXd x = Eigen::Map<const RowMajor>(row_major, static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(p));
        *out = wrap(std::move(x));
    });
}

pelhd_status pelhd_matrix_parse_csv(const char* text, pelhd_matrix** out)
{
    if (!text || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = wrap(pelhd::parse_matrix_csv(text)); });
}

pelhd_status pelhd_matrix_read_csv(const char* path, pelhd_matrix** out)
{
    if (!path || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    std::ifstream in(path);
    if (!in)
        return fail(PELHD_ERR_IO, std::string("cannot open '") + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return guarded([&] { *out = wrap(pelhd::parse_matrix_csv(ss.str())); });
}

size_t pelhd_matrix_rows(const pelhd_matrix* m)
{
    return m ? static_cast<size_t>(m->data.n()) : 0;
}

size_t pelhd_matrix_cols(const pelhd_matrix* m)
{
    return m ? static_cast<size_t>(m->data.p()) : 0;
}

pelhd_status pelhd_matrix_copy(const pelhd_matrix* m, double* row_major_out)
{
    if (!m || !row_major_out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    const auto& v = m->data.values;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            row_major_out[i * v.cols() + j] = v(i, j);
    return PELHD_OK;
}

pelhd_status pelhd_matrix_column_means(const pelhd_matrix* m, double* out)
{
    if (!m || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    Eigen::Map<Eigen::VectorXd>(out, m->data.p()) = m->data.col_mean;
    return PELHD_OK;
}

void pelhd_matrix_free(pelhd_matrix* m)
{
    delete m;
}

pelhd_dependence pelhd_dependence_default(pelhd_kind kind)
{
    const pelhd::ArmaParams a;
    pelhd_dependence d{};
    d.kind = kind;
    d.alpha = 0.8;
    d.ar[0] = a.ar[0];
    d.ar[1] = a.ar[1];
    d.ma[0] = a.ma[0];
    d.ma[1] = a.ma[1];
    d.ma[2] = a.ma[2];
    d.burn_in = a.burn_in;
    return d;
}

pelhd_status pelhd_simulate(const pelhd_dependence* dep, int n, int p, uint64_t seed, pelhd_matrix** out)
{
    if (!dep || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const pelhd::DataGenerator gen(to_spec(dep), p);
        *out = wrap(gen.sample(n, seed));
    });
}

pelhd_status pelhd_simulate_csv(const pelhd_dependence* dep, int n, int p, uint64_t seed, char** out)
{
    if (!dep || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const auto spec = to_spec(dep);
        const pelhd::DataGenerator gen(spec, p);
        const Eigen::MatrixXd x = gen.sample(n, seed);
        *out = dup_string(pelhd::format_matrix_csv(x, pelhd::simulation_header(x, spec, seed)));
    });
}

pelhd_status pelhd_exact_kappa_sq(const pelhd_dependence* dep, double c_star, double* out)
{
    if (!dep || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::exact_kappa_sq(to_spec(dep), c_star); });
}

pelhd_status pelhd_stat(const pelhd_matrix* data, const double* mu0, double c_star, double* out)
{
    if (!data || !mu0 || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        pelhd::PelConfig cfg;
        cfg.c_star = c_star;
        *out = pelhd::neg_log_pel_ratio(data->data, to_mu(data, mu0), cfg);
    });
}

pelhd_status pelhd_solve(const pelhd_matrix* data, const double* mu0, double c_star, double* stat_out,
                         double* pi_out, int* iterations_out)
{
    if (!data || !mu0 || !stat_out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        pelhd::PelConfig cfg;
        cfg.c_star = c_star;
        const auto sol = pelhd::solve_pel(data->data, to_mu(data, mu0), cfg);
        *stat_out = sol.stat;
        if (pi_out)
            Eigen::Map<Eigen::VectorXd>(pi_out, sol.pi.size()) = sol.pi;
        if (iterations_out)
            *iterations_out = sol.iterations;
    });
}

pelhd_status pelhd_subsample_size(int n, int p, const char* rule, double c0, double alpha, int* out)
{
    if (!rule || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::subsample_size(n, p, pelhd::parse_rule(rule), c0, alpha); });
}

pelhd_status pelhd_curve_build(const pelhd_matrix* data, const double* mu0, int m, pelhd_regime regime,
                               double alpha_hat, double c_star, int threads, pelhd_curve** out)
{
    if (!data || !mu0 || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        pelhd::PelConfig cfg;
        cfg.c_star = c_star;
        const auto mu = to_mu(data, mu0);
        auto curve = regime == PELHD_REGIME_NON_ERGODIC
                         ? pelhd::build_curve_ne(data->data, mu, m, cfg, threads)
                         : pelhd::build_curve_ergodic(data->data, mu, m, alpha_hat, cfg, threads);
        *out = new pelhd_curve{std::move(curve)};
    });
}

size_t pelhd_curve_size(const pelhd_curve* c)
{
    return c ? c->curve.size() : 0;
}

size_t pelhd_curve_failed(const pelhd_curve* c)
{
    return c ? c->curve.failed_blocks.size() : 0;
}

pelhd_status pelhd_curve_sorted_values(const pelhd_curve* c, double* out)
{
    if (!c || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    std::copy(c->curve.sorted_values.begin(), c->curve.sorted_values.end(), out);
    return PELHD_OK;
}

pelhd_status pelhd_curve_quantile(const pelhd_curve* c, double q, double* out)
{
    if (!c || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::quantile(c->curve, q); });
}

pelhd_status pelhd_curve_csv(const pelhd_curve* c, char** out)
{
    if (!c || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = dup_string(pelhd::format_curve_csv(c->curve)); });
}

void pelhd_curve_free(pelhd_curve* c)
{
    delete c;
}

pelhd_status pelhd_test(const pelhd_matrix* data, const double* mu0, pelhd_regime regime, int m, double level,
                        double c_star, int threads, pelhd_test_report* out)
{
    if (!data || !mu0 || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        pelhd::TestOptions opts;
        opts.regime = regime == PELHD_REGIME_NON_ERGODIC ? pelhd::Regime::NonErgodic : pelhd::Regime::Ergodic;
        opts.m = m;
        opts.level = level;
        opts.c_star = c_star;
        opts.threads = threads;
        const auto rep = pelhd::run_pel_test(data->data, to_mu(data, mu0), opts);
        out->statistic = rep.statistic;
        out->raw_statistic = rep.raw_statistic;
        out->threshold = rep.threshold;
        out->rejected = rep.rejected ? 1 : 0;
        out->limit_kind = static_cast<int>(rep.regime);
        out->alpha_hat = rep.alpha_hat;
        out->m = rep.m;
        out->seed_used = rep.seed_used;
    });
}

pelhd_status pelhd_estimate_alpha_invariant(const pelhd_matrix* data, double* out)
{
    if (!data || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::estimate_alpha_invariant(data->data); });
}

pelhd_status pelhd_estimate_alpha_hurst(const pelhd_matrix* data, double* out)
{
    if (!data || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::estimate_alpha_hurst(data->data); });
}

pelhd_status pelhd_estimate_kappa_sq_invariant(const pelhd_matrix* data, double c_star, double* out)
{
    if (!data || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::estimate_kappa_sq_invariant(data->data, c_star); });
}

pelhd_status pelhd_estimate_kappa_sq_plugin(const pelhd_matrix* data, double c_star, double* out)
{
    if (!data || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = pelhd::estimate_kappa_sq_plugin(data->data, c_star); });
}

pelhd_status pelhd_sample_ne_limit(int q, double c_star, int n_draws, uint64_t seed, double* out)
{
    if (!out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const auto draws = pelhd::sample_ne_limit(pelhd::ne_correlation_grid(q), c_star, n_draws, seed);
        std::copy(draws.begin(), draws.end(), out);
    });
}

pelhd_status pelhd_sample_ne_limit_grid(const double* rho0_grid, int q, double c_star, int n_draws, uint64_t seed,
                                        double* out)
{
    if (!rho0_grid || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        require(q >= 1, "q must be >= 1");
        const Eigen::MatrixXd grid = Eigen::Map<const Eigen::MatrixXd>(rho0_grid, q, q);
        const auto draws = pelhd::sample_ne_limit(grid, c_star, n_draws, seed);
        std::copy(draws.begin(), draws.end(), out);
    });
}

pelhd_status pelhd_sample_lrd_limit(double alpha, int p_surrogate, double c_star, int n_draws, uint64_t seed,
                                    double* out)
{
    if (!out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const auto draws = pelhd::sample_lrd_limit(alpha, p_surrogate, n_draws, seed, c_star);
        std::copy(draws.begin(), draws.end(), out);
    });
}

double pelhd_normal_quantile(double q)
{
    return pelhd::normal_quantile(q);
}

pelhd_status pelhd_experiment_load(const char* path, pelhd_experiment** out)
{
    if (!path || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = new pelhd_experiment{pelhd::load_experiment_config(path)}; });
}

pelhd_status pelhd_experiment_parse(const char* text, pelhd_experiment** out)
{
    if (!text || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = new pelhd_experiment{pelhd::parse_experiment_config(text)}; });
}

pelhd_status pelhd_experiment_set_seed(pelhd_experiment* e, uint64_t seed)
{
    if (!e)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    e->cfg.seed = seed;
    return PELHD_OK;
}

pelhd_status pelhd_experiment_set_threads(pelhd_experiment* e, int threads)
{
    if (!e)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    if (threads < 1)
        return fail(PELHD_ERR_CONFIG, "threads must be >= 1");
    e->cfg.threads = threads;
    return PELHD_OK;
}

const char* pelhd_experiment_output_path(const pelhd_experiment* e)
{
    return e ? e->cfg.output_path.c_str() : "";
}

pelhd_status pelhd_experiment_hash(const pelhd_experiment* e, char** out)
{
    if (!e || !out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *out = dup_string(pelhd::config_hash(e->cfg)); });
}

pelhd_status pelhd_experiment_run(const pelhd_experiment* e, char** csv_out)
{
    if (!e || !csv_out)
        return fail(PELHD_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] { *csv_out = dup_string(pelhd::format_results_csv(pelhd::run_experiment(e->cfg))); });
}

void pelhd_experiment_free(pelhd_experiment* e)
{
    delete e;
}

}  // extern "C"

#include "oracles.hpp"

#include "pelhd/errors.hpp"
#include "pelhd/experiment.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace pelhd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ExperimentConfig small_level()
{
    return parse_experiment_config("mode = level\n"
                                   "kind = srd\n"
                                   "n = 60\n"
                                   "p = 16, 32, 48\n"
                                   "m_rules = np13:0.5, np13:1, np13:2\n"
                                   "levels = 0.05, 0.1\n"
                                   "replicates = 6\n"
                                   "seed = 5\n");
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
        out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("config: parsing and defaults")
{
    const auto cfg = parse_experiment_config("# comment\n"
                                             "mode = power\n"
                                             "kind = lrd\n"
                                             "alpha = 0.3\n"
                                             "n = 40\n"
                                             "p = 20, 80\n"
                                             "m_rules = lrd:1, n13:2\n"
                                             "shift = 0.5\n"
                                             "threads = 2\n"
                                             "output = out.csv\n");
    CHECK(cfg.mode == ExperimentMode::Power);
    CHECK(cfg.dependence.kind == DependenceKind::LongRange);
    CHECK(cfg.dependence.alpha == 0.3);
    CHECK(cfg.n == 40);
    CHECK(cfg.p_values == std::vector<int>{20, 80});
    CHECK(cfg.m_rules.size() == 2);
    CHECK(cfg.m_rules[0].rule == SubsampleRule::LrdMax);
    CHECK(cfg.m_rules[1].c0 == 2.0);
    CHECK(cfg.shift == 0.5);
    CHECK(cfg.levels == std::vector<double>{0.05});
    CHECK(cfg.n_replicates == 500);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output_path == "out.csv");

    const auto arma = parse_experiment_config("ar = 0.2, 0.1\nma = 0, 0, 0.5\nburn_in = 50\n");
    CHECK(arma.dependence.arma.ar[0] == 0.2);
    CHECK(arma.dependence.arma.ma[2] == 0.5);
    CHECK(arma.dependence.arma.burn_in == 50);
}

TEST_CASE("config: validation errors")
{
    CHECK_THROWS_AS(parse_experiment_config("levels = 1.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("levels = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("replicates = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("mode = compare\nkind = ne\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("mode = compare\nkind = lrd\nalpha = 0.4\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("kind = lrd\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("n = ten\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("m_rules = np13\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("m_rules = np14:1\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("ar = 0.9, 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("[section]\nn = 5\n"), ConfigError);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.ini"), ConfigError);

    auto cfg = small_level();
    cfg.mode = ExperimentMode::Power;
    CHECK_THROWS_AS(run_level_experiment(cfg), ConfigError);
}

TEST_CASE("config hash ignores seed, threads and output")
{
    auto a = small_level();
    auto b = a;
    b.seed = 77;
    b.threads = 3;
    b.output_path = "x.csv";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.n_replicates = 7;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("results: one row per p, rule and level")
{
    const auto cfg = small_level();
    const auto rows = run_level_experiment(cfg);
    REQUIRE(rows.size() == 3 * 3 * 2);
    const auto csv = lines(format_results_csv(rows));
    CHECK(csv.front() == "alpha,p,n,m_rule,c0,level,mode,a_hat,abs_err,n_reps,seed,config_hash");
    CHECK(csv.size() == 19);
    CHECK(csv[1].rfind("inf,16,60,np13,0.5,0.05,level,", 0) == 0);
    for (const auto& r : rows) {
        CHECK(r.seed == 5);
        CHECK(r.config_hash == config_hash(cfg));
        CHECK(r.n_reps + r.failures == 6);
        CHECK(r.abs_err == doctest::Approx(std::abs(r.level - r.a_hat)));
    }
    CHECK(rows[0].m == subsample_size(60, 16, SubsampleRule::SrdCubeRoot, 0.5));
}

TEST_CASE("results: thread count does not change output")
{
    auto cfg = small_level();
    const auto one = format_results_csv(run_experiment(cfg));
    cfg.threads = 4;
    CHECK(format_results_csv(run_experiment(cfg)) == one);
    cfg.seed = 6;
    CHECK(format_results_csv(run_experiment(cfg)) != one);
}

TEST_CASE("results: a single replicate is a Bernoulli outcome")
{
    auto cfg = small_level();
    cfg.n_replicates = 1;
    for (const auto& r : run_level_experiment(cfg))
        CHECK((r.a_hat == 0.0 || r.a_hat == 1.0));
}

TEST_CASE("results: non-ergodic and long-range labels")
{
    auto cfg = small_level();
    cfg.n_replicates = 2;
    cfg.dependence = DependenceSpec::non_ergodic();
    cfg.m_rules = {{SubsampleRule::NeSqrt, 1.0}};
    CHECK(run_level_experiment(cfg).front().alpha == "0");
    cfg.dependence = DependenceSpec::long_range(0.25);
    cfg.m_rules = {{SubsampleRule::LrdMax, 1.0}};
    CHECK(run_level_experiment(cfg).front().alpha == "0.25");
}

TEST_CASE("power: zero shift gives the level, larger shifts do not lose power")
{
    auto cfg = parse_experiment_config("mode = power\n"
                                       "kind = srd\n"
                                       "n = 200\n"
                                       "p = 100\n"
                                       "m_rules = np13:2\n"
                                       "levels = 0.05\n"
                                       "replicates = 500\n"
                                       "shift = 0\n"
                                       "seed = 11\n");
    const auto null = run_power_experiment(cfg);
    CHECK(std::abs(null.front().a_hat - 0.05) <= 0.04);

    cfg.n_replicates = 100;
    double last = -1.0;
    for (double shift : {0.5, 1.0, 2.0}) {
        cfg.shift = shift;
        const double power = run_power_experiment(cfg).front().a_hat;
        CHECK(power >= last - 0.03);
        last = power;
    }
}

TEST_CASE("compare: G rows and sensitivity to the variance source")
{
    auto cfg = parse_experiment_config("mode = compare\n"
                                       "kind = srd\n"
                                       "n = 200\n"
                                       "p = 80\n"
                                       "m_rules = np13:1\n"
                                       "levels = 0.1\n"
                                       "replicates = 500\n"
                                       "seed = 12\n");
    const auto plug = run_calibration_compare(cfg);
    REQUIRE(plug.size() == 2);
    CHECK(plug[0].mode == "compare_ss");
    CHECK(plug[1].mode == "compare_g");
    CHECK(plug[1].m_rule == "normal");

    cfg.kappa_source = KappaSource::Exact;
    const auto exact = run_calibration_compare(cfg);
    CHECK(exact[0].a_hat == plug[0].a_hat);
    MESSAGE("G level with plug-in kappa " << plug[1].a_hat << ", exact kappa " << exact[1].a_hat);
    CHECK(std::abs(exact[1].a_hat - plug[1].a_hat) <= 0.05);
}

TEST_CASE("exact kappa")
{
    const auto [g0, rho] = oracle::arma_acf(-0.4, 0.1, {0.3, 0.5, 0.1}, 500);
    CHECK(exact_kappa_sq(DependenceSpec::short_range(), 1.0) == doctest::Approx(2.0 * rho.squaredNorm()).epsilon(1e-12));
    CHECK(exact_kappa_sq(DependenceSpec::long_range(1.0), 2.0) == doctest::Approx(8.0).epsilon(1e-12));

    // alpha = 0.8: direct sum to a large lag plus the integral tail.
    double s = 0.0;
    for (int k = 0; k < 4000000; ++k)
        s += std::pow(oracle::fgn_rho(k, 0.8), 2);
    CHECK(exact_kappa_sq(DependenceSpec::long_range(0.8), 1.0) == doctest::Approx(2.0 * s).epsilon(1e-4));
    CHECK_THROWS_AS(exact_kappa_sq(DependenceSpec::long_range(0.5), 1.0), ConfigError);
    CHECK_THROWS_AS(exact_kappa_sq(DependenceSpec::non_ergodic(), 1.0), ConfigError);
}

TEST_CASE("single test report")
{
    const DataGenerator gen(DependenceSpec::short_range(), 64);
    const auto data = compute_column_stats(gen.sample(100, 13));
    TestOptions opts;
    opts.m = 21;
    opts.level = 0.1;
    const auto rep = run_pel_test(data, VectorXd::Zero(64), opts, 13);
    CHECK(rep.rejected == (rep.statistic > rep.threshold));
    CHECK(rep.seed_used == 13);
    CHECK(rep.curve.size() == 80);
    CHECK(rep.alpha_hat == doctest::Approx(estimate_alpha_hurst(data)));
    CHECK(rep.statistic == doctest::Approx(std::pow(64.0, std::min(rep.alpha_hat, 0.5)) * (rep.raw_statistic - 1.0)));

    opts.regime = Regime::NonErgodic;
    const auto ne = run_pel_test(data, VectorXd::Zero(64), opts);
    CHECK(ne.regime == LimitKind::NonErgodic);
    CHECK(ne.statistic == ne.raw_statistic);

    const auto shifted = compute_column_stats(data.values.array() + 3.0);
    CHECK(run_pel_test(shifted, VectorXd::Zero(64), opts).rejected);
}

#include "pelhd/pelhd.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {

struct Csv {
    char* s = nullptr;
    ~Csv() { pelhd_string_free(s); }
};

}  // namespace

TEST_CASE("matrix handles")
{
    const double values[] = {0, 1, 2, 3, 4, 5};
    pelhd_matrix* m = nullptr;
    REQUIRE(pelhd_matrix_create(3, 2, values, &m) == PELHD_OK);
    CHECK(pelhd_matrix_rows(m) == 3);
    CHECK(pelhd_matrix_cols(m) == 2);
    double back[6];
    CHECK(pelhd_matrix_copy(m, back) == PELHD_OK);
    CHECK(std::memcmp(back, values, sizeof values) == 0);
    double means[2];
    CHECK(pelhd_matrix_column_means(m, means) == PELHD_OK);
    CHECK(means[0] == doctest::Approx(2.0));
    CHECK(means[1] == doctest::Approx(3.0));

    double stat = -1.0;
    CHECK(pelhd_stat(m, means, 1.0, &stat) == PELHD_OK);
    CHECK(std::abs(stat) < 1e-12);
    pelhd_matrix_free(m);
    pelhd_matrix_free(nullptr);
}

TEST_CASE("errors carry a status and a message")
{
    pelhd_matrix* m = nullptr;
    const double one[] = {1.0, 2.0};
    CHECK(pelhd_matrix_create(1, 2, one, &m) == PELHD_ERR_DIMENSION);
    CHECK(std::string(pelhd_last_error()).find("2 observations") != std::string::npos);
    CHECK(pelhd_matrix_parse_csv("1,2\n3\n", &m) == PELHD_ERR_CONFIG);
    CHECK(pelhd_matrix_read_csv("/nonexistent.csv", &m) == PELHD_ERR_IO);
    CHECK(pelhd_matrix_create(1, 2, nullptr, &m) == PELHD_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pelhd_status_name(PELHD_ERR_NUMERIC)) == "numeric error");

    pelhd_experiment* e = nullptr;
    CHECK(pelhd_experiment_parse("levels = 1.0\n", &e) == PELHD_ERR_CONFIG);
    CHECK(std::string(pelhd_last_error()).find("levels") != std::string::npos);

    double out[2];
    CHECK(pelhd_sample_ne_limit(30, 10.0, 2, 1, out) == PELHD_ERR_REGIME);
    CHECK(pelhd_sample_lrd_limit(0.7, 64, 1.0, 2, 1, out) == PELHD_ERR_DOMAIN);
}

TEST_CASE("simulation, statistic and calibration")
{
    pelhd_dependence dep = pelhd_dependence_default(PELHD_KIND_SRD);
    pelhd_matrix* m = nullptr;
    REQUIRE(pelhd_simulate(&dep, 80, 40, 3, &m) == PELHD_OK);
    const std::vector<double> mu(40, 0.0);

    double stat = 0.0;
    double stat2 = 0.0;
    std::vector<double> pi(80);
    int iterations = 0;
    CHECK(pelhd_stat(m, mu.data(), 1.0, &stat) == PELHD_OK);
    CHECK(pelhd_solve(m, mu.data(), 1.0, &stat2, pi.data(), &iterations) == PELHD_OK);
    CHECK(stat == stat2);
    CHECK(stat >= 0.0);
    double sum = 0.0;
    for (double w : pi)
        sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    int msub = 0;
    CHECK(pelhd_subsample_size(80, 40, "np13", 1.0, 0.0, &msub) == PELHD_OK);
    CHECK(msub == 15);
    CHECK(pelhd_subsample_size(80, 40, "bogus", 1.0, 0.0, &msub) == PELHD_ERR_CONFIG);

    pelhd_curve* c = nullptr;
    REQUIRE(pelhd_curve_build(m, mu.data(), msub, PELHD_REGIME_ERGODIC, 1.0, 1.0, 2, &c) == PELHD_OK);
    CHECK(pelhd_curve_size(c) == 66);
    CHECK(pelhd_curve_failed(c) == 0);
    std::vector<double> values(pelhd_curve_size(c));
    CHECK(pelhd_curve_sorted_values(c, values.data()) == PELHD_OK);
    double q = 0.0;
    CHECK(pelhd_curve_quantile(c, 0.95, &q) == PELHD_OK);
    CHECK(q == values[62]);
    Csv csv;
    CHECK(pelhd_curve_csv(c, &csv.s) == PELHD_OK);
    CHECK(std::string(csv.s).rfind("block_start_index,statistic\n1,", 0) == 0);
    pelhd_curve_free(c);

    pelhd_test_report rep{};
    CHECK(pelhd_test(m, mu.data(), PELHD_REGIME_ERGODIC, msub, 0.05, 1.0, 1, &rep) == PELHD_OK);
    CHECK(rep.rejected == (rep.statistic > rep.threshold));
    CHECK(rep.raw_statistic == stat);
    CHECK(rep.m == msub);

    double a = 0.0;
    CHECK(pelhd_estimate_alpha_hurst(m, &a) == PELHD_OK);
    CHECK(rep.alpha_hat == a);
    CHECK(pelhd_estimate_alpha_invariant(m, &a) == PELHD_OK);
    CHECK(pelhd_estimate_kappa_sq_invariant(m, 1.0, &a) == PELHD_OK);
    CHECK(pelhd_estimate_kappa_sq_plugin(m, 1.0, &a) == PELHD_OK);
    CHECK(a > 0.0);
    pelhd_matrix_free(m);
}

TEST_CASE("simulation csv is deterministic and parses back")
{
    pelhd_dependence dep = pelhd_dependence_default(PELHD_KIND_LRD);
    dep.alpha = 0.8;
    Csv a;
    Csv b;
    REQUIRE(pelhd_simulate_csv(&dep, 20, 10, 7, &a.s) == PELHD_OK);
    REQUIRE(pelhd_simulate_csv(&dep, 20, 10, 7, &b.s) == PELHD_OK);
    CHECK(std::string(a.s) == std::string(b.s));
    CHECK(std::string(a.s).rfind("# n=20 p=10 kind=lrd seed=7\n", 0) == 0);

    pelhd_matrix* m = nullptr;
    REQUIRE(pelhd_matrix_parse_csv(a.s, &m) == PELHD_OK);
    pelhd_matrix* direct = nullptr;
    REQUIRE(pelhd_simulate(&dep, 20, 10, 7, &direct) == PELHD_OK);
    std::vector<double> x(200);
    std::vector<double> y(200);
    pelhd_matrix_copy(m, x.data());
    pelhd_matrix_copy(direct, y.data());
    CHECK(x == y);
    pelhd_matrix_free(m);
    pelhd_matrix_free(direct);

    dep.alpha = 1.5;
    CHECK(pelhd_simulate_csv(&dep, 20, 10, 7, &a.s) == PELHD_ERR_DOMAIN);
}

TEST_CASE("limit samplers")
{
    std::vector<double> draws(200);
    CHECK(pelhd_sample_ne_limit(40, 1.0, 200, 5, draws.data()) == PELHD_OK);
    for (double d : draws)
        CHECK(d >= 0.0);
    std::vector<double> grid(100, 0.0);
    for (int i = 0; i < 10; ++i)
        grid[i * 11] = 1.0;
    CHECK(pelhd_sample_ne_limit_grid(grid.data(), 10, 1.0, 200, 5, draws.data()) == PELHD_OK);
    CHECK(pelhd_sample_lrd_limit(0.3, 128, 1.0, 200, 5, draws.data()) == PELHD_OK);
    CHECK(pelhd_normal_quantile(0.5) == 0.0);

    double k = 0.0;
    pelhd_dependence white = pelhd_dependence_default(PELHD_KIND_LRD);
    white.alpha = 1.0;
    CHECK(pelhd_exact_kappa_sq(&white, 1.0, &k) == PELHD_OK);
    CHECK(k == doctest::Approx(2.0));
    pelhd_dependence ne = pelhd_dependence_default(PELHD_KIND_NE);
    CHECK(pelhd_exact_kappa_sq(&ne, 1.0, &k) == PELHD_ERR_CONFIG);
}

TEST_CASE("experiments")
{
    pelhd_experiment* e = nullptr;
    REQUIRE(pelhd_experiment_parse("n = 40\np = 16\nreplicates = 3\nm_rules = np13:1, np13:2\noutput = r.csv\n",
                                   &e) == PELHD_OK);
    CHECK(std::string(pelhd_experiment_output_path(e)) == "r.csv");
    Csv hash;
    CHECK(pelhd_experiment_hash(e, &hash.s) == PELHD_OK);
    CHECK(std::strlen(hash.s) == 16);

    Csv one;
    CHECK(pelhd_experiment_run(e, &one.s) == PELHD_OK);
    CHECK(pelhd_experiment_set_threads(e, 3) == PELHD_OK);
    Csv three;
    CHECK(pelhd_experiment_run(e, &three.s) == PELHD_OK);
    CHECK(std::string(one.s) == std::string(three.s));
    CHECK(std::string(one.s).find(hash.s) != std::string::npos);

    CHECK(pelhd_experiment_set_seed(e, 99) == PELHD_OK);
    Csv other;
    CHECK(pelhd_experiment_run(e, &other.s) == PELHD_OK);
    CHECK(std::string(other.s).find(",99,") != std::string::npos);
    CHECK(pelhd_experiment_set_threads(e, 0) == PELHD_ERR_CONFIG);
    pelhd_experiment_free(e);
}

#pragma once

#include "pelhd/calibration.hpp"
#include "pelhd/limits.hpp"
#include "pelhd/pel.hpp"
#include "pelhd/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pelhd {

enum class ExperimentMode { Level, Power, CalibrationCompare };

/// Source of the Normal-limit variance in calibration comparisons.
enum class KappaSource { Plugin, Exact };

struct MRule {
    SubsampleRule rule = SubsampleRule::SrdCubeRoot;
    double c0 = 1.0;
};

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::Level;
    DependenceSpec dependence;
    int n = 200;
    std::vector<int> p_values{100};
    double c_star = 1.0;
    std::vector<double> levels{0.05};
    std::vector<MRule> m_rules{{SubsampleRule::SrdCubeRoot, 1.0}};
    int n_replicates = 500;
    std::uint64_t seed = 1;
    double shift = 1.0;  ///< Power: value of the first p/2 components of mu1
    KappaSource kappa_source = KappaSource::Plugin;
    std::string output_path;
    int threads = 1;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Flat key = value text, one experiment per file.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical serialization of everything that affects results; excludes the
/// seed (its own column), the output path and the thread count.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct ResultRow {
    std::string alpha;  ///< "0" (ne), "inf" (srd) or the LRD exponent
    int p = 0;
    int n = 0;
    std::string m_rule;
    double c0 = 0.0;
    double level = 0.0;
    std::string mode;
    double a_hat = 0.0;  ///< NaN when the cell is invalidated
    double abs_err = 0.0;
    int n_reps = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    int m = 0;
    int failures = 0;
};

std::vector<ResultRow> run_level_experiment(const ExperimentConfig& cfg);
std::vector<ResultRow> run_power_experiment(const ExperimentConfig& cfg);
std::vector<ResultRow> run_calibration_compare(const ExperimentConfig& cfg);
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// alpha,p,n,m_rule,c0,level,mode,a_hat,abs_err,n_reps,seed,config_hash
std::string format_results_csv(const std::vector<ResultRow>& rows);

/// 2 c*^2 sum_{k>=0} rho(k)^2 from the exact correlations of the model.
/// Throws ConfigError for the non-ergodic model and for alpha <= 1/2.
double exact_kappa_sq(const DependenceSpec& spec, double c_star);

/// One calibrated PEL test of H0: mu = mu0 on a single data set.
struct TestOptions {
    Regime regime = Regime::Ergodic;
    int m = 0;
    double level = 0.05;
    double c_star = 1.0;
    int threads = 1;
};

struct TestReport {
    double statistic = 0.0;  ///< on the scale of the curve (V_n in the ergodic regime)
    double raw_statistic = 0.0;  ///< -log R_n(mu0)
    double threshold = 0.0;
    bool rejected = false;
    LimitKind regime = LimitKind::NonErgodic;
    double alpha_hat = 0.0;
    int m = 0;
    std::uint64_t seed_used = 0;
    CalibrationCurve curve;
};

/// Estimates alpha (Hurst route when p >= 32, permutation-invariant route
/// otherwise), builds the subsampling curve and decides.
TestReport run_pel_test(const DataMatrix& data, const Eigen::VectorXd& mu0, const TestOptions& opts,
                        std::uint64_t seed_used = 0);

/// alpha_hat used for the ergodic scaling.
double estimate_alpha_for_scaling(const DataMatrix& data);

}  // namespace pelhd

#pragma once

#include "pelhd/data_matrix.hpp"
#include "pelhd/pel.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pelhd {

enum class Regime { NonErgodic, Ergodic };

/// Subsample-size rules. All are multiplied by a constant c0 and rounded.
enum class SubsampleRule {
    SrdCubeRoot,  ///< (np)^{1/3}, short-range and alpha > 1/2
    LrdMax,       ///< max{(np)^{alpha/(1+alpha)}, n^{1/3}}, alpha < 1/2
    NeCubeRoot,   ///< n^{1/3}
    NeSqrt,       ///< n^{1/2}
};

std::string rule_name(SubsampleRule rule);
SubsampleRule parse_rule(const std::string& name);

/// round(c0 * rule(n, p, alpha)) clamped to [2, n - 1].
int subsample_size(int n, int p, SubsampleRule rule, double c0, double alpha = 0.0);

/// The n - m + 1 overlapping blocks {i, ..., i + m - 1} and the scaling used
/// for the centered subsample statistics in the ergodic regime.
struct SubsamplingPlan {
    int n = 0;
    int m = 0;
    Regime regime = Regime::NonErgodic;
    double b_hat = 1.0;  ///< p^{min(alpha_hat, 1/2)}; 1 in the non-ergodic regime
    double c_star = 1.0;

    int block_count() const { return n - m + 1; }
};

SubsamplingPlan make_plan(int n, int m, Regime regime, double c_star, int p = 1, double alpha_hat = 0.5);

/// Subsampling estimate of the null law: one value per overlapping block, kept
/// both in block order and sorted ascending.
struct CalibrationCurve {
    Regime regime = Regime::NonErgodic;
    std::vector<double> sorted_values;
    std::vector<int> block_start;     ///< 0-based start of each successful block
    std::vector<double> block_value;  ///< value for the matching block_start
    std::vector<int> failed_blocks;

    std::size_t size() const { return sorted_values.size(); }
};

/// -log R*_m(mu0; I) for every block, with penalty c* m / p re-applied.
CalibrationCurve build_curve_ne(const DataMatrix& data, const Eigen::VectorXd& mu0, int m,
                                const PelConfig& cfg, int threads = 1);

/// p^{min(alpha_hat, 1/2)} (-log R*_m(mu0; I) - c*) for every block.
CalibrationCurve build_curve_ergodic(const DataMatrix& data, const Eigen::VectorXd& mu0, int m,
                                     double alpha_hat, const PelConfig& cfg, int threads = 1);

/// Order statistic with 1-based index ceil(q N).
double quantile(const CalibrationCurve& curve, double q);

/// Permutation- and affine-invariant estimate of the correlation decay exponent.
double estimate_alpha_invariant(const DataMatrix& data);

/// 2 - 2 H_hat, with H_hat the row-average of aggregated-variance Hurst estimates.
double estimate_alpha_hurst(const DataMatrix& data);

/// Thresholded cross-correlation estimate of the Normal-limit variance.
double estimate_kappa_sq_invariant(const DataMatrix& data, double c_star);

/// 2 c*^2 (1 + sum_{k=1}^K rho_hat(k)^2) with K = floor(min(p/2, sqrt p)).
double estimate_kappa_sq_plugin(const DataMatrix& data, double c_star);

struct Decision {
    double statistic = 0.0;
    double threshold = 0.0;
    bool rejected = false;
};

/// Rejects iff statistic > quantile(curve, 1 - level).
Decision decide(double statistic, const CalibrationCurve& curve, double level);

/// Conservative rule for very large p: reject iff |c* - stat| > log(n) / n.
bool decide_conservative(double statistic, int n, double c_star);

/// Two-column CSV (block_start_index, statistic); indices are 1-based.
std::string format_curve_csv(const CalibrationCurve& curve);

}  // namespace pelhd

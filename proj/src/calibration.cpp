#include "pelhd/calibration.hpp"

#include "pelhd/errors.hpp"
#include "pelhd/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

namespace pelhd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string rule_name(SubsampleRule rule)
{
    switch (rule) {
    case SubsampleRule::SrdCubeRoot: return "np13";
    case SubsampleRule::LrdMax: return "lrd";
    case SubsampleRule::NeCubeRoot: return "n13";
    case SubsampleRule::NeSqrt: return "n12";
    }
    return "unknown";
}

SubsampleRule parse_rule(const std::string& name)
{
    if (name == "np13") return SubsampleRule::SrdCubeRoot;
    if (name == "lrd") return SubsampleRule::LrdMax;
    if (name == "n13") return SubsampleRule::NeCubeRoot;
    if (name == "n12") return SubsampleRule::NeSqrt;
    throw ConfigError("unknown subsample rule '" + name + "' (expected np13, lrd, n13 or n12)");
}

int subsample_size(int n, int p, SubsampleRule rule, double c0, double alpha)
{
    if (n < 3 || p < 1)
        throw DimensionError("subsampling needs n >= 3 and p >= 1");
    if (!(c0 > 0.0))
        throw DomainError("c0 must be positive");

    const double nd = n;
    const double np = nd * p;
    double base = 0.0;
    switch (rule) {
    case SubsampleRule::SrdCubeRoot: base = std::cbrt(np); break;
    case SubsampleRule::LrdMax:
        if (!(alpha > 0.0))
            throw DomainError("the LRD subsample rule needs alpha > 0");
        base = std::max(std::pow(np, alpha / (1.0 + alpha)), std::cbrt(nd));
        break;
    case SubsampleRule::NeCubeRoot: base = std::cbrt(nd); break;
    case SubsampleRule::NeSqrt: base = std::sqrt(nd); break;
    }
    const double m = std::round(c0 * base);
    return static_cast<int>(std::clamp(m, 2.0, nd - 1.0));
}

SubsamplingPlan make_plan(int n, int m, Regime regime, double c_star, int p, double alpha_hat)
{
    if (!(m > 1 && m < n))
        throw DomainError("subsample size must satisfy 1 < m < n (m=" + std::to_string(m) +
                          ", n=" + std::to_string(n) + ")");
    SubsamplingPlan plan;
    plan.n = n;
    plan.m = m;
    plan.regime = regime;
    plan.c_star = c_star;
    if (regime == Regime::Ergodic) {
        if (!std::isfinite(alpha_hat))
            throw DomainError("alpha_hat must be finite");
        plan.b_hat = std::pow(static_cast<double>(p), std::min(alpha_hat, 0.5));
    }
    return plan;
}

namespace {

CalibrationCurve build_curve(const DataMatrix& data, const VectorXd& mu0, const SubsamplingPlan& plan,
                             const PelConfig& cfg, int threads)
{
    const int blocks = plan.block_count();
    PelConfig sub_cfg = cfg;
    sub_cfg.lambda.reset();  // lambda_m = c* m / p

    std::vector<std::optional<double>> values(blocks);
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t i) {
        const DataMatrix sub = row_block(data, static_cast<Index>(i), plan.m);
        try {
            const double stat = neg_log_pel_ratio(sub, mu0, sub_cfg);
            values[i] = plan.regime == Regime::Ergodic ? plan.b_hat * (stat - plan.c_star) : stat;
        } catch (const ConvergenceError&) {
            values[i].reset();
        }
    });

    CalibrationCurve curve;
    curve.regime = plan.regime;
    for (int i = 0; i < blocks; ++i) {
        if (values[i]) {
            curve.block_start.push_back(i);
            curve.block_value.push_back(*values[i]);
        } else {
            curve.failed_blocks.push_back(i);
        }
    }
    if (static_cast<double>(curve.failed_blocks.size()) > 0.01 * blocks)
        throw NumericError("subsampling curve failed: " + std::to_string(curve.failed_blocks.size()) +
                           " of " + std::to_string(blocks) + " block solves did not converge");
    curve.sorted_values = curve.block_value;
    std::sort(curve.sorted_values.begin(), curve.sorted_values.end());
    return curve;
}

}  // namespace

CalibrationCurve build_curve_ne(const DataMatrix& data, const VectorXd& mu0, int m, const PelConfig& cfg,
                                int threads)
{
    const auto plan = make_plan(static_cast<int>(data.n()), m, Regime::NonErgodic, cfg.c_star);
    return build_curve(data, mu0, plan, cfg, threads);
}

CalibrationCurve build_curve_ergodic(const DataMatrix& data, const VectorXd& mu0, int m, double alpha_hat,
                                     const PelConfig& cfg, int threads)
{
    const auto plan = make_plan(static_cast<int>(data.n()), m, Regime::Ergodic, cfg.c_star,
                                static_cast<int>(data.p()), alpha_hat);
    return build_curve(data, mu0, plan, cfg, threads);
}

double quantile(const CalibrationCurve& curve, double q)
{
    if (curve.sorted_values.empty())
        throw DomainError("quantile of an empty calibration curve");
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("quantile level must lie in (0, 1)");
    const auto n = static_cast<double>(curve.size());
    // The slack keeps exact products such as 0.95 * 20 from rounding up.
    auto idx = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, curve.size());
    return curve.sorted_values[idx - 1];
}

namespace {

// (X_ij - mean_j) sqrt(delta_j)
MatrixXd standardized(const DataMatrix& data)
{
    return (data.values.rowwise() - data.col_mean.transpose()) * data.delta.cwiseSqrt().asDiagonal();
}

}  // namespace

double estimate_alpha_invariant(const DataMatrix& data)
{
    const Index p = data.p();
    if (p < 2)
        throw DimensionError("alpha estimate needs p >= 2");
    const double e_n = (data.delta.array() == 0.0).all() ? 1.0 : 0.0;
    const VectorXd row_avg = standardized(data).rowwise().sum() / static_cast<double>(p);
    const double inner = e_n + row_avg.squaredNorm() / static_cast<double>(data.n());
    if (!(inner > 0.0))
        throw NumericError("alpha estimate: log argument is not positive");
    return -std::log(inner) / std::log(static_cast<double>(p));
}

double estimate_alpha_hurst(const DataMatrix& data)
{
    const Index p = data.p();
    std::vector<int> sizes;
    for (int s = 2; s <= p / 4; s *= 2)
        sizes.push_back(s);
    if (sizes.size() < 3)
        throw DimensionError("aggregated-variance Hurst estimate needs p >= 32 (got " + std::to_string(p) +
                             ")");

    std::vector<double> log_s;
    for (int s : sizes)
        log_s.push_back(std::log(static_cast<double>(s)));
    double mean_x = 0.0;
    for (double x : log_s)
        mean_x += x;
    mean_x /= static_cast<double>(log_s.size());
    double sxx = 0.0;
    for (double x : log_s)
        sxx += (x - mean_x) * (x - mean_x);

    double h_sum = 0.0;
    int used = 0;
    for (Index i = 0; i < data.n(); ++i) {
        const auto row = data.values.row(i);
        std::vector<double> log_v;
        bool degenerate = false;
        for (int s : sizes) {
            const Index k = p / s;
            VectorXd means(k);
            for (Index b = 0; b < k; ++b)
                means(b) = row.segment(b * s, s).mean();
            const double var = (means.array() - means.mean()).square().sum() / static_cast<double>(k - 1);
            if (!(var > 0.0)) {
                degenerate = true;
                break;
            }
            log_v.push_back(std::log(var));
        }
        if (degenerate)
            continue;
        double sxy = 0.0;
        for (std::size_t t = 0; t < log_v.size(); ++t)
            sxy += (log_s[t] - mean_x) * log_v[t];
        const double slope = sxy / sxx;
        h_sum += 1.0 + slope / 2.0;
        ++used;
    }
    if (used == 0)
        throw NumericError("Hurst estimate degenerate: every row has zero block-mean variance");
    return 2.0 - 2.0 * (h_sum / used);
}

double estimate_kappa_sq_invariant(const DataMatrix& data, double c_star)
{
    const Index n = data.n();
    const Index p = data.p();
    if (n < 3 || p < 3)
        throw DimensionError("kappa estimate needs n >= 3 and p >= 3");

    const MatrixXd z = standardized(data);
    const double nd = static_cast<double>(n);
    const double threshold = 2.0 * std::log(nd) / std::sqrt(nd);
    double sum = 0.0;
    // Components 2..p-1 in 1-based numbering.
    for (Index j = 1; j + 1 < p; ++j) {
        const double c = z.col(0).dot(z.col(j)) / nd;
        if (std::abs(c) > threshold)
            sum += c * c;
    }
    return 2.0 * c_star * c_star * sum;
}

double estimate_kappa_sq_plugin(const DataMatrix& data, double c_star)
{
    const Index p = data.p();
    if (p < 4)
        throw DimensionError("plug-in kappa estimate needs p >= 4");
    const auto lags = static_cast<Index>(std::floor(std::min(p / 2.0, std::sqrt(static_cast<double>(p)))));

    const MatrixXd z = standardized(data);
    VectorXd rho = VectorXd::Zero(lags + 1);
    int used = 0;
    for (Index i = 0; i < data.n(); ++i) {
        const auto row = z.row(i);
        const double r0 = row.squaredNorm() / static_cast<double>(p);
        if (!(r0 > 0.0))
            continue;
        for (Index k = 1; k <= lags; ++k) {
            const double rk = row.head(p - k).dot(row.tail(p - k)) / static_cast<double>(p - k);
            rho(k) += rk / r0;
        }
        ++used;
    }
    if (used == 0)
        throw NumericError("plug-in kappa estimate: every row is degenerate");
    rho /= static_cast<double>(used);
    return 2.0 * c_star * c_star * (1.0 + rho.tail(lags).squaredNorm());
}

Decision decide(double statistic, const CalibrationCurve& curve, double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("level must lie in (0, 1)");
    Decision d;
    d.statistic = statistic;
    d.threshold = quantile(curve, 1.0 - level);
    d.rejected = statistic > d.threshold;
    return d;
}

bool decide_conservative(double statistic, int n, double c_star)
{
    if (n < 2)
        throw DimensionError("need n >= 2");
    const double nd = n;
    return std::abs(c_star - statistic) > std::log(nd) / nd;
}

std::string format_curve_csv(const CalibrationCurve& curve)
{
    std::string out = "block_start_index,statistic\n";
    char buf[40];
    for (std::size_t i = 0; i < curve.block_start.size(); ++i) {
        out += std::to_string(curve.block_start[i] + 1);
        out += ',';
        const auto res = std::to_chars(buf, buf + sizeof buf, curve.block_value[i]);
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

}  // namespace pelhd

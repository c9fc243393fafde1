#include "pelhd/limits.hpp"

#include "pelhd/errors.hpp"
#include "pelhd/rng.hpp"
#include "pelhd/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace pelhd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string limit_kind_name(LimitKind kind)
{
    switch (kind) {
    case LimitKind::NonErgodic: return "ne";
    case LimitKind::LrdNonNormal: return "lrd_nonnormal";
    case LimitKind::Boundary: return "boundary";
    case LimitKind::NormalErgodic: return "normal";
    }
    return "unknown";
}

LimitRegime LimitRegime::non_ergodic()
{
    return {};
}

LimitRegime LimitRegime::ergodic(double alpha, int p, double c_star)
{
    if (!(alpha > 0.0))
        throw DomainError("ergodic regimes need alpha > 0");
    if (p < 2)
        throw DimensionError("ergodic scaling needs p >= 2");
    LimitRegime r;
    r.alpha = alpha;
    r.center = c_star;
    const double pd = p;
    if (alpha > 0.5) {
        r.kind = LimitKind::NormalErgodic;
        r.scale = std::sqrt(pd);
    } else if (alpha == 0.5) {
        r.kind = LimitKind::Boundary;
        r.scale = std::sqrt(pd * std::log(pd));
    } else {
        r.kind = LimitKind::LrdNonNormal;
        r.scale = std::pow(pd, alpha);
    }
    return r;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double q)
{
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("normal quantile needs q in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

double normal_limit_cdf(double x, double kappa_sq)
{
    if (!(kappa_sq > 0.0))
        throw DomainError("kappa_sq must be positive");
    return normal_cdf(x / std::sqrt(kappa_sq));
}

namespace {

void check_grid(const MatrixXd& rho0)
{
    if (rho0.rows() != rho0.cols() || rho0.rows() < 1)
        throw DimensionError("rho0 grid must be a non-empty square matrix");
    if (!rho0.isApprox(rho0.transpose(), 1e-12))
        throw DomainError("rho0 grid must be symmetric");
    if ((rho0.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10)
        throw DomainError("rho0 grid must have a unit diagonal");
}

}  // namespace

double ne_spectral_condition(const MatrixXd& rho0_grid, double c_star)
{
    check_grid(rho0_grid);
    const double q = static_cast<double>(rho0_grid.rows());
    return 4.0 * c_star * c_star * rho0_grid.squaredNorm() / (q * q);
}

std::vector<double> sample_ne_limit(const MatrixXd& rho0_grid, double c_star, int n_draws, std::uint64_t seed)
{
    if (n_draws < 0)
        throw DomainError("n_draws must be >= 0");
    if (!(c_star >= 0.0))
        throw DomainError("c_star must be >= 0");
    const double cond = ne_spectral_condition(rho0_grid, c_star);
    if (!(cond < 1.0))
        throw RegimeError("4 c*^2 int int rho0^2 = " + std::to_string(cond) +
                          " >= 1; the non-ergodic limit series may diverge");

    const double q = static_cast<double>(rho0_grid.rows());
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(rho0_grid, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericError("eigen-decomposition of the rho0 grid failed");
    if (es.eigenvalues().minCoeff() < -1e-8 * es.eigenvalues().maxCoeff())
        throw DomainError("rho0 grid is not positive semi-definite");

    // With R0 = V diag(l) V^T and Z = V diag(sqrt l) z, the quadratic form is
    // sum_k w_k z_k^2 with w_k = (c*/q) l_k / (1 + 2 c* l_k / q).
    std::vector<double> weights;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double l = std::max(0.0, es.eigenvalues()(k));
        if (l > 0.0)
            weights.push_back((c_star / q) * l / (1.0 + 2.0 * c_star * l / q));
    }

    std::vector<double> draws(static_cast<std::size_t>(n_draws));
    for (int d = 0; d < n_draws; ++d) {
        Engine eng = make_engine(seed, static_cast<std::uint64_t>(d));
        std::normal_distribution<double> nd;
        double s = 0.0;
        for (double w : weights) {
            const double z = nd(eng);
            s += w * z * z;
        }
        draws[d] = s;
    }
    return draws;
}

LrdLimitSampler::LrdLimitSampler(double alpha, int p_surrogate, double c_star)
    : alpha_(alpha), p_(p_surrogate)
{
    if (!(alpha > 0.0 && alpha < 0.5))
        throw DomainError("the non-Normal LRD limit needs alpha in (0, 1/2)");
    if (p_surrogate < 2)
        throw DimensionError("surrogate length must be >= 2");
    factor_ = c_star * std::pow(static_cast<double>(p_surrogate), alpha - 1.0);

    const VectorXd rho = fgn_autocorrelation(p_, alpha);
    MatrixXd r(p_, p_);
    for (int i = 0; i < p_; ++i)
        for (int j = 0; j < p_; ++j)
            r(i, j) = rho(std::abs(i - j));
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(r, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericError("eigen-decomposition of the LRD correlation failed");
    eigenvalues_ = es.eigenvalues().cwiseMax(0.0);
}

std::vector<double> LrdLimitSampler::sample(int n_draws, std::uint64_t seed) const
{
    if (n_draws < 0)
        throw DomainError("n_draws must be >= 0");
    std::vector<double> draws(static_cast<std::size_t>(n_draws));
    for (int d = 0; d < n_draws; ++d) {
        Engine eng = make_engine(seed, static_cast<std::uint64_t>(d));
        std::normal_distribution<double> nd;
        double s = 0.0;
        for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
            const double z = nd(eng);
            s += eigenvalues_(k) * (z * z - 1.0);
        }
        draws[d] = factor_ * s;
    }
    return draws;
}

double LrdLimitSampler::variance() const
{
    // Var sum lambda_k (z_k^2 - 1) = 2 sum lambda_k^2 = 2 tr(R^2).
    return factor_ * factor_ * 2.0 * eigenvalues_.squaredNorm();
}

std::vector<double> sample_lrd_limit(double alpha, int p_surrogate, int n_draws, std::uint64_t seed,
                                     double c_star)
{
    return LrdLimitSampler(alpha, p_surrogate, c_star).sample(n_draws, seed);
}

}  // namespace pelhd

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace pelhd {

enum class LimitKind { NonErgodic, LrdNonNormal, Boundary, NormalErgodic };

std::string limit_kind_name(LimitKind kind);

/// Centering and scaling under which -log R_n(mu0) has a nondegenerate limit:
/// scale * (stat - center).
struct LimitRegime {
    LimitKind kind = LimitKind::NonErgodic;
    double alpha = 0.0;
    double center = 0.0;
    double scale = 1.0;

    static LimitRegime non_ergodic();
    /// Ergodic regimes; alpha > 1/2 gives sqrt(p), alpha == 1/2 gives
    /// sqrt(p log p) and alpha < 1/2 gives p^alpha.
    static LimitRegime ergodic(double alpha, int p, double c_star);

    double standardize(double stat) const { return scale * (stat - center); }
};

double normal_cdf(double x);
double normal_quantile(double q);

/// Phi(x / kappa).
double normal_limit_cdf(double x, double kappa_sq);

/// 4 c*^2 times the Riemann approximation of the double integral of rho0^2.
double ne_spectral_condition(const Eigen::MatrixXd& rho0_grid, double c_star);

/// Draws of (c*/q) Z^T (I + (2c*/q) R0)^{-1} Z with Z ~ N(0, R0), the grid
/// discretization of the non-ergodic limit. Throws RegimeError when
/// 4 c*^2 int int rho0^2 >= 1.
std::vector<double> sample_ne_limit(const Eigen::MatrixXd& rho0_grid, double c_star, int n_draws,
                                    std::uint64_t seed);

/// Sampler for c* p^{alpha-1} sum_j (Z_j^2 - 1) with Z stationary Gaussian
/// with fGn correlations. The spectrum of the correlation matrix is computed
/// once; each draw is then sum_k lambda_k (z_k^2 - 1).
class LrdLimitSampler {
public:
    LrdLimitSampler(double alpha, int p_surrogate = 2048, double c_star = 1.0);

    std::vector<double> sample(int n_draws, std::uint64_t seed) const;
    /// Exact variance of one draw at this surrogate length.
    double variance() const;

    double alpha() const { return alpha_; }
    int p_surrogate() const { return p_; }

private:
    double alpha_;
    int p_;
    double factor_;  ///< c* p^{alpha - 1}
    Eigen::VectorXd eigenvalues_;
};

std::vector<double> sample_lrd_limit(double alpha, int p_surrogate, int n_draws, std::uint64_t seed,
                                     double c_star = 1.0);

}  // namespace pelhd

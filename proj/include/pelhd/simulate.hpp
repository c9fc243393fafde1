#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pelhd {

enum class DependenceKind { NonErgodic, LongRange, ShortRangeArma };

/// ARMA(2,3) recursion X_t = a1 X_{t-1} + a2 X_{t-2} + e_t + b1 e_{t-1} + b2 e_{t-2} + b3 e_{t-3}.
struct ArmaParams {
    std::array<double, 2> ar{-0.4, 0.1};
    std::array<double, 3> ma{0.3, 0.5, 0.1};
    int burn_in = 500;
};

/// Tagged description of how the p components of one observation depend on
/// each other.
struct DependenceSpec {
    DependenceKind kind = DependenceKind::ShortRangeArma;
    double alpha = 0.0;  ///< LongRange only, in (0, 1]
    ArmaParams arma;     ///< ShortRangeArma only
    /// Per-component scales; empty means all ones.
    std::vector<double> sigma;

    static DependenceSpec non_ergodic();
    static DependenceSpec long_range(double alpha);
    static DependenceSpec short_range(ArmaParams arma = {});

    /// Hurst constant (2 - alpha) / 2 for LongRange.
    double hurst() const;
    /// "ne", "lrd" or "srd".
    std::string kind_name() const;
};

/// lag correlations rho(k), k = 0..p-1, of fractional Gaussian noise with
/// Hurst constant (2 - alpha)/2, and the upper Cholesky factor U of
/// R = Toeplitz(rho) = U^T U.
struct LrdCorrelation {
    Eigen::VectorXd rho;
    Eigen::MatrixXd chol_upper;
};

/// rho(k) = ((k+1)^{2H} + (k-1)^{2H} - 2k^{2H}) / 2 for k = 0..p-1, rho(0) = 1.
Eigen::VectorXd fgn_autocorrelation(int p, double alpha);
LrdCorrelation lrd_correlation(int p, double alpha);

/// One row per observation, each row sigma_j W(j/p) for the 31-term random
/// trigonometric series W.
Eigen::MatrixXd gen_non_ergodic(int n, int p, std::uint64_t seed, const std::vector<double>& sigma = {});
Eigen::MatrixXd gen_lrd(int n, int p, double alpha, std::uint64_t seed);
Eigen::MatrixXd gen_lrd(int n, const LrdCorrelation& corr, std::uint64_t seed);
Eigen::MatrixXd gen_srd_arma(int n, int p, const ArmaParams& arma, std::uint64_t seed);

/// Throws DomainError unless 1 - a1 z - a2 z^2 has no roots in the closed unit disk.
void check_causal(const ArmaParams& arma);

/// Exact autocorrelations rho(0..max_lag) of the stationary ARMA(2,3) process.
Eigen::VectorXd arma_autocorrelation(const ArmaParams& arma, int max_lag);

/// Correlation of W(s), W(t) at the grid points s, t in {1/q, ..., q/q}.
Eigen::MatrixXd ne_correlation_grid(int q);

/// Precomputes what a dependence model needs for a fixed p (the LRD factor in
/// particular) and draws n x p samples from it.
class DataGenerator {
public:
    DataGenerator(DependenceSpec spec, int p);

    Eigen::MatrixXd sample(int n, std::uint64_t seed) const;

    const DependenceSpec& spec() const { return spec_; }
    int p() const { return p_; }

private:
    DependenceSpec spec_;
    int p_;
    LrdCorrelation lrd_;
};

/// Writes `values` as CSV preceded by `# n=<n> p=<p> kind=<kind> seed=<seed>`.
std::string format_matrix_csv(const Eigen::MatrixXd& values, const std::string& header);
std::string simulation_header(const Eigen::MatrixXd& values, const DependenceSpec& spec, std::uint64_t seed);

/// Parses n rows of comma-separated reals; lines starting with '#' are skipped.
Eigen::MatrixXd parse_matrix_csv(const std::string& text);

}  // namespace pelhd

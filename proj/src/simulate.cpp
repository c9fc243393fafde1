#include "pelhd/simulate.hpp"

#include "pelhd/errors.hpp"
#include "pelhd/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pelhd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DependenceSpec DependenceSpec::non_ergodic()
{
    DependenceSpec s;
    s.kind = DependenceKind::NonErgodic;
    return s;
}

DependenceSpec DependenceSpec::long_range(double alpha)
{
    DependenceSpec s;
    s.kind = DependenceKind::LongRange;
    s.alpha = alpha;
    return s;
}

DependenceSpec DependenceSpec::short_range(ArmaParams arma)
{
    DependenceSpec s;
    s.kind = DependenceKind::ShortRangeArma;
    s.arma = arma;
    return s;
}

double DependenceSpec::hurst() const
{
    return 0.5 * (2.0 - alpha);
}

std::string DependenceSpec::kind_name() const
{
    switch (kind) {
    case DependenceKind::NonErgodic: return "ne";
    case DependenceKind::LongRange: return "lrd";
    case DependenceKind::ShortRangeArma: return "srd";
    }
    return "unknown";
}

namespace {

void check_dims(int n, int p)
{
    if (n < 1 || p < 1)
        throw DimensionError("need n >= 1 and p >= 1");
}

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("long-range alpha must lie in (0, 1]");
}

constexpr int kNeTerms = 31;

// p x 31 matrix of lambda_k phi_k(j/p), j = 1..p.
MatrixXd ne_basis(int p)
{
    const double scale = std::numbers::e + 1.0;
    const double two_pi = 2.0 * std::numbers::pi;
    MatrixXd phi(p, kNeTerms);
    for (int j = 0; j < p; ++j) {
        const double t = static_cast<double>(j + 1) / p;
        phi(j, 0) = scale;
        for (int k = 1; k <= 15; ++k)
            phi(j, k) = scale * std::sin(two_pi * k * t) / std::numbers::sqrt2;
        for (int k = 16; k <= 30; ++k)
            phi(j, k) = scale * std::cos(two_pi * (k - 15) * t) / std::numbers::sqrt2;
    }
    return phi;
}

VectorXd normals(Engine& eng, Eigen::Index count)
{
    std::normal_distribution<double> nd;
    VectorXd z(count);
    for (Eigen::Index i = 0; i < count; ++i)
        z(i) = nd(eng);
    return z;
}

void apply_sigma(MatrixXd& x, const std::vector<double>& sigma)
{
    if (sigma.empty())
        return;
    if (static_cast<Eigen::Index>(sigma.size()) != x.cols())
        throw DimensionError("sigma must have one entry per component");
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!(sigma[j] > 0.0))
            throw DomainError("component scales must be positive");
        x.col(j) *= sigma[j];
    }
}

}  // namespace

VectorXd fgn_autocorrelation(int p, double alpha)
{
    if (p < 1)
        throw DimensionError("need p >= 1");
    check_alpha(alpha);
    const double two_h = 2.0 - alpha;
    VectorXd rho(p);
    rho(0) = 1.0;
    for (int k = 1; k < p; ++k) {
        const double kd = k;
        rho(k) = 0.5 * (std::pow(kd + 1.0, two_h) + std::pow(kd - 1.0, two_h) - 2.0 * std::pow(kd, two_h));
    }
    return rho;
}

LrdCorrelation lrd_correlation(int p, double alpha)
{
    if (p < 1)
        throw DimensionError("need p >= 1");
    check_alpha(alpha);

    LrdCorrelation c;
    c.rho = fgn_autocorrelation(p, alpha);

    MatrixXd r(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            r(i, j) = c.rho(std::abs(i - j));

    Eigen::LLT<MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) {
        r.diagonal().array() += 1e-12;
        llt.compute(r);
        if (llt.info() != Eigen::Success)
            throw NumericError("Cholesky factorization of the LRD correlation failed even with 1e-12 jitter");
    }
    c.chol_upper = llt.matrixU();
    return c;
}

MatrixXd gen_non_ergodic(int n, int p, std::uint64_t seed, const std::vector<double>& sigma)
{
    check_dims(n, p);
    const MatrixXd phi = ne_basis(p);
    MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) {
        Engine eng = make_engine(seed, static_cast<std::uint64_t>(i));
        x.row(i) = (phi * normals(eng, kNeTerms)).transpose();
    }
    apply_sigma(x, sigma);
    return x;
}

MatrixXd gen_lrd(int n, const LrdCorrelation& corr, std::uint64_t seed)
{
    const auto p = corr.rho.size();
    check_dims(n, static_cast<int>(p));
    MatrixXd x(n, p);
    const auto lower = corr.chol_upper.transpose().triangularView<Eigen::Lower>();
    for (int i = 0; i < n; ++i) {
        Engine eng = make_engine(seed, static_cast<std::uint64_t>(i));
        x.row(i) = (lower * normals(eng, p)).transpose();
    }
    return x;
}

MatrixXd gen_lrd(int n, int p, double alpha, std::uint64_t seed)
{
    return gen_lrd(n, lrd_correlation(p, alpha), seed);
}

void check_causal(const ArmaParams& arma)
{
    const double a1 = arma.ar[0];
    const double a2 = arma.ar[1];
    // Stationarity triangle of an AR(2) polynomial.
    if (!(a1 + a2 < 1.0 && a2 - a1 < 1.0 && std::abs(a2) < 1.0))
        throw DomainError("AR coefficients are not causal: 1 - a1 z - a2 z^2 has a root in the unit disk");
    if (arma.burn_in < 0)
        throw DomainError("burn_in must be >= 0");
}

MatrixXd gen_srd_arma(int n, int p, const ArmaParams& arma, std::uint64_t seed)
{
    check_dims(n, p);
    check_causal(arma);
    const int total = arma.burn_in + p;
    const auto [a1, a2] = arma.ar;
    const auto [b1, b2, b3] = arma.ma;

    MatrixXd x(n, p);
    std::vector<double> xs(total);
    std::vector<double> es(total);
    for (int i = 0; i < n; ++i) {
        Engine eng = make_engine(seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> nd;
        for (int t = 0; t < total; ++t) {
            es[t] = nd(eng);
            double v = es[t];
            if (t >= 1) v += a1 * xs[t - 1] + b1 * es[t - 1];
            if (t >= 2) v += a2 * xs[t - 2] + b2 * es[t - 2];
            if (t >= 3) v += b3 * es[t - 3];
            xs[t] = v;
        }
        for (int j = 0; j < p; ++j)
            x(i, j) = xs[arma.burn_in + j];
    }
    return x;
}

VectorXd arma_autocorrelation(const ArmaParams& arma, int max_lag)
{
    check_causal(arma);
    if (max_lag < 0)
        throw DomainError("max_lag must be >= 0");

    // MA(infinity) weights psi_j; geometric decay lets us stop once negligible.
    std::vector<double> psi{1.0};
    for (int j = 1; j < 100000; ++j) {
        double v = j <= 3 ? arma.ma[j - 1] : 0.0;
        v += arma.ar[0] * psi[j - 1];
        if (j >= 2) v += arma.ar[1] * psi[j - 2];
        psi.push_back(v);
        if (j > 10 && std::abs(v) < 1e-18 && std::abs(psi[j - 1]) < 1e-18)
            break;
    }

    VectorXd gamma(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j + k < psi.size(); ++j)
            s += psi[j] * psi[j + k];
        gamma(k) = s;
    }
    return gamma / gamma(0);
}

MatrixXd ne_correlation_grid(int q)
{
    if (q < 1)
        throw DimensionError("need q >= 1");
    const MatrixXd phi = ne_basis(q);
    const MatrixXd cov = phi * phi.transpose();
    const VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
    return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

DataGenerator::DataGenerator(DependenceSpec spec, int p) : spec_(std::move(spec)), p_(p)
{
    check_dims(1, p);
    if (!spec_.sigma.empty() && static_cast<int>(spec_.sigma.size()) != p)
        throw DimensionError("sigma must have one entry per component");
    if (spec_.kind == DependenceKind::LongRange)
        lrd_ = lrd_correlation(p, spec_.alpha);
    if (spec_.kind == DependenceKind::ShortRangeArma)
        check_causal(spec_.arma);
}

MatrixXd DataGenerator::sample(int n, std::uint64_t seed) const
{
    MatrixXd x;
    switch (spec_.kind) {
    case DependenceKind::NonErgodic: x = gen_non_ergodic(n, p_, seed); break;
    case DependenceKind::LongRange: x = gen_lrd(n, lrd_, seed); break;
    case DependenceKind::ShortRangeArma: x = gen_srd_arma(n, p_, spec_.arma, seed); break;
    }
    apply_sigma(x, spec_.sigma);
    return x;
}

std::string simulation_header(const MatrixXd& values, const DependenceSpec& spec, std::uint64_t seed)
{
    std::ostringstream os;
    os << "# n=" << values.rows() << " p=" << values.cols() << " kind=" << spec.kind_name()
       << " seed=" << seed;
    return os.str();
}

std::string format_matrix_csv(const MatrixXd& values, const std::string& header)
{
    std::string out;
    if (!header.empty())
        out += header + "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j > 0)
                out += ',';
            const auto res = std::to_chars(buf, buf + sizeof buf, values(i, j));
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

MatrixXd parse_matrix_csv(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            while (p < end && (*p == ' ' || *p == '\t'))
                ++p;
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc())
                throw ConfigError("malformed number on CSV line " + std::to_string(lineno));
            row.push_back(v);
            p = res.ptr;
            while (p < end && (*p == ' ' || *p == '\t'))
                ++p;
            if (p == end)
                break;
            if (*p != ',')
                throw ConfigError("expected ',' on CSV line " + std::to_string(lineno));
            ++p;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("ragged CSV: line " + std::to_string(lineno) + " has " +
                              std::to_string(row.size()) + " fields");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ConfigError("CSV contains no data rows");

    MatrixXd x(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return x;
}

}  // namespace pelhd

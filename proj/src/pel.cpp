#include "pelhd/pel.hpp"

#include "pelhd/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace pelhd {

double PelConfig::penalty(Eigen::Index n, Eigen::Index p) const
{
    if (lambda) {
        if (!(*lambda >= 0.0))
            throw DomainError("penalty lambda must be >= 0");
        return *lambda;
    }
    if (!(c_star >= 0.0) || !std::isfinite(c_star))
        throw DomainError("c_star must be finite and >= 0");
    return c_star * static_cast<double>(n) / static_cast<double>(p);
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Centered, delta-scaled observations: y_ij = (X_ij - mu_j) sqrt(delta_j).
// With this, f(pi) = -sum log(n pi_i) + lambda |y^T pi|^2.
struct Problem {
    MatrixXd y;
    double lambda;

    Index n() const { return y.rows(); }
};

Problem make_problem(const DataMatrix& data, const VectorXd& mu, const PelConfig& cfg)
{
    if (mu.size() != data.p())
        throw DimensionError("mu has length " + std::to_string(mu.size()) + ", expected " +
                             std::to_string(data.p()));
    if (data.n() < 2)
        throw DimensionError("need at least 2 observations");
    if (!mu.allFinite() || !data.values.allFinite())
        throw DomainError("data and mu must be finite");

    Problem prob;
    prob.lambda = cfg.penalty(data.n(), data.p());
    prob.y = (data.values.rowwise() - mu.transpose()) * data.delta.cwiseSqrt().asDiagonal();
    return prob;
}

double log_term(const VectorXd& pi)
{
    const auto n = static_cast<double>(pi.size());
    double s = 0.0;
    for (Index i = 0; i < pi.size(); ++i)
        s += std::log1p(n * pi(i) - 1.0);
    return -s;
}

double value(const Problem& prob, const VectorXd& pi)
{
    return log_term(pi) + prob.lambda * (prob.y.transpose() * pi).squaredNorm();
}

VectorXd gradient(const Problem& prob, const VectorXd& pi)
{
    const VectorXd u = prob.y.transpose() * pi;
    return -pi.cwiseInverse() + 2.0 * prob.lambda * (prob.y * u);
}

// Max-norm of the Lagrange system n pi_k (1 + 2 gamma ((y u)_k - |u|^2)) = 1,
// gamma = lambda / n, u = y^T pi. Scale-free, unlike the raw gradient whose
// entries grow like 1 / pi_k.
double lagrange_residual(const Problem& prob, const VectorXd& pi)
{
    const VectorXd u = prob.y.transpose() * pi;
    const double msq = u.squaredNorm();
    const auto n = static_cast<double>(prob.n());
    const VectorXd r = (n * pi.array() + 2.0 * prob.lambda * pi.array() * ((prob.y * u).array() - msq)).matrix();
    return (r.array() - 1.0).abs().maxCoeff();
}

// H = diag(1/pi^2) + 2 lambda y y^T = P^-1 S P^-1 with P = diag(pi) and
// S = I + 2 lambda B B^T, B = P y. S is factored densely when n <= p and
// through its p x p capacitance matrix otherwise.
class HessianSolve {
public:
    HessianSolve(const Problem& prob, const VectorXd& pi) : pi_(pi)
    {
        b_ = pi.asDiagonal() * prob.y;
        const Index n = b_.rows();
        const Index p = b_.cols();
        woodbury_ = p < n;
        if (woodbury_) {
            MatrixXd cap = b_.transpose() * b_;
            cap.diagonal().array() += 1.0 / (2.0 * prob.lambda);
            llt_.compute(cap);
        } else {
            MatrixXd s = 2.0 * prob.lambda * (b_ * b_.transpose());
            s.diagonal().array() += 1.0;
            llt_.compute(s);
        }
        ok_ = llt_.info() == Eigen::Success;
    }

    bool ok() const { return ok_; }

    VectorXd solve(const VectorXd& v) const
    {
        const VectorXd w = pi_.cwiseProduct(v);
        VectorXd z;
        if (woodbury_)
            z = w - b_ * llt_.solve(b_.transpose() * w);
        else
            z = llt_.solve(w);
        return pi_.cwiseProduct(z);
    }

private:
    const VectorXd& pi_;
    MatrixXd b_;
    Eigen::LLT<MatrixXd> llt_;
    bool woodbury_ = false;
    bool ok_ = false;
};

bool strictly_positive(const VectorXd& v)
{
    return (v.array() > 0.0).all();
}

struct NewtonResult {
    VectorXd pi;
    double residual;
    int iterations;
    bool converged;
};

NewtonResult run_newton(const Problem& prob, const PelConfig& cfg)
{
    const Index n = prob.n();
    VectorXd pi = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    NewtonResult best{pi, std::numeric_limits<double>::infinity(), 0, false};
    const VectorXd ones = VectorXd::Ones(n);

    for (int it = 0;; ++it) {
        const VectorXd g = gradient(prob, pi);
        const double res = lagrange_residual(prob, pi);
        if (res < best.residual) {
            best.pi = pi;
            best.residual = res;
        }
        best.iterations = it;
        if (res < cfg.newton_tol) {
            best.converged = true;
            return best;
        }
        if (it >= cfg.max_newton_iters || !std::isfinite(res))
            return best;

        const HessianSolve hs(prob, pi);
        if (!hs.ok())
            return best;
        const VectorXd a = hs.solve(g);
        const VectorXd b = hs.solve(ones);
        const double nu = -a.sum() / b.sum();
        const VectorXd d = -(a + nu * b);
        const double dec2 = -g.dot(d);
        if (!std::isfinite(dec2))
            return best;

        // f is self-concordant, so a full step is safe and quadratically
        // convergent once the Newton decrement is small. Near the optimum
        // dec2 can round to a tiny negative number; the step is still valid.
        double t = 1.0;
        VectorXd trial = pi + d;
        if (!(std::sqrt(std::abs(dec2)) < 0.25 && strictly_positive(trial))) {
            if (!(dec2 > 0.0))
                return best;
            while (!strictly_positive(trial) && t > 1e-30) {
                t *= 0.5;
                trial = pi + t * d;
            }
            const double f0 = value(prob, pi);
            while (value(prob, trial) > f0 - 0.25 * t * dec2 && t > 1e-30) {
                t *= 0.5;
                trial = pi + t * d;
            }
            if (t <= 1e-30)
                return best;
        }
        pi = trial / trial.sum();
    }
}

struct FixedPointResult {
    VectorXd pi;
    double residual;
    int iterations;
    bool converged;
};

// pi_k <- 1 / [n (1 + 2 gamma sum_j delta_j M_j Y_kj - 2 gamma sum_j delta_j M_j^2)],
// averaged with the previous iterate.
FixedPointResult run_fixed_point(const Problem& prob, const PelConfig& cfg, VectorXd pi)
{
    const auto n = static_cast<double>(prob.n());
    const double gamma = prob.lambda / n;
    FixedPointResult out{pi, lagrange_residual(prob, pi), 0, false};

    for (int it = 1; it <= cfg.max_fixed_point_iters; ++it) {
        const VectorXd u = prob.y.transpose() * pi;
        const double msq = u.squaredNorm();
        const VectorXd denom =
            (n * (1.0 + 2.0 * gamma * (prob.y * u).array() - 2.0 * gamma * msq)).matrix();
        if (!strictly_positive(denom) || !denom.allFinite())
            break;
        VectorXd next = denom.cwiseInverse();
        next /= next.sum();
        pi = 0.5 * pi + 0.5 * next;
        pi /= pi.sum();

        const double res = lagrange_residual(prob, pi);
        out.iterations = it;
        if (res < out.residual) {
            out.pi = pi;
            out.residual = res;
        }
        if (res < cfg.newton_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

PelSolution finish(const DataMatrix& data, const VectorXd& mu, const Problem& prob, VectorXd pi)
{
    PelSolution sol;
    pi /= pi.sum();
    sol.stat = std::max(0.0, value(prob, pi));
    sol.m_vec = (data.values.rowwise() - mu.transpose()).transpose() * pi;
    sol.pi = std::move(pi);
    return sol;
}

}  // namespace

double objective(const VectorXd& pi, const DataMatrix& data, const VectorXd& mu, const PelConfig& cfg)
{
    if (pi.size() != data.n())
        throw DimensionError("pi has length " + std::to_string(pi.size()) + ", expected " +
                             std::to_string(data.n()));
    if (!strictly_positive(pi))
        throw DomainError("objective requires strictly positive weights");
    return value(make_problem(data, mu, cfg), pi);
}

double kkt_residual(const VectorXd& pi, const DataMatrix& data, const VectorXd& mu, const PelConfig& cfg)
{
    if (pi.size() != data.n())
        throw DimensionError("pi has the wrong length");
    if (!strictly_positive(pi))
        throw DomainError("kkt_residual requires strictly positive weights");
    return lagrange_residual(make_problem(data, mu, cfg), pi);
}

PelSolution solve_pel(const DataMatrix& data, const VectorXd& mu, const PelConfig& cfg)
{
    const Problem prob = make_problem(data, mu, cfg);
    const Index n = prob.n();

    if (prob.lambda == 0.0) {
        PelSolution sol = finish(data, mu, prob, VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
        sol.stat = 0.0;
        sol.converged = true;
        sol.method = SolverMethod::Trivial;
        return sol;
    }

    const NewtonResult nr = run_newton(prob, cfg);
    if (nr.converged) {
        PelSolution sol = finish(data, mu, prob, nr.pi);
        sol.iterations = nr.iterations;
        sol.converged = true;
        sol.kkt_residual = nr.residual;
        sol.method = SolverMethod::Newton;
        return sol;
    }

    const FixedPointResult fp = run_fixed_point(prob, cfg, nr.pi);
    if (fp.converged) {
        PelSolution sol = finish(data, mu, prob, fp.pi);
        sol.iterations = nr.iterations + fp.iterations;
        sol.converged = true;
        sol.kkt_residual = fp.residual;
        sol.method = SolverMethod::FixedPoint;
        return sol;
    }

    const bool fp_better = fp.residual < nr.residual;
    throw ConvergenceError("PEL solver did not converge (KKT residual " +
                               std::to_string(std::min(fp.residual, nr.residual)) + ")",
                           fp_better ? fp.pi : nr.pi, std::min(fp.residual, nr.residual));
}

double neg_log_pel_ratio(const DataMatrix& data, const VectorXd& mu, const PelConfig& cfg)
{
    return solve_pel(data, mu, cfg).stat;
}

}  // namespace pelhd

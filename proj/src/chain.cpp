#include "rlad/chain.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "rlad/error.hpp"

namespace rlad {

namespace {

std::vector<double> binomial_half(std::size_t m)
{
    std::vector<double> out(m + 1);
    const double md = static_cast<double>(m);
    const double lg = std::lgamma(md + 1.0);
    for (std::size_t k = 0; k <= m; ++k) {
        const double kd = static_cast<double>(k);
        out[k] = std::exp(lg - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0) -
                          md * std::log(2.0));
    }
    return out;
}

}  // namespace

ChainParams::ChainParams(std::size_t nodes, double alpha) : nodes_(nodes), alpha_(alpha)
{
    if (nodes < 2) {
        throw DomainError("node count N must be >= 2, got " + std::to_string(nodes));
    }
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in [0,1), got " + num(alpha));
    }
    links_ = nodes * (nodes - 1) / 2;
}

ChainParams ChainParams::from_links(std::size_t links, double alpha)
{
    if (links < 1) {
        throw DomainError("link capacity M must be >= 1");
    }
    std::size_t n = 2;
    while (n * (n - 1) / 2 < links) {
        ++n;
    }
    ChainParams p(n, alpha);
    if (p.links_ != links) {
        p.nodes_ = 0;
        p.links_ = links;
    }
    return p;
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd q) : q_(std::move(q))
{
    if (q_.rows() == 0 || q_.rows() != q_.cols()) {
        throw DimensionError("transition matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < q_.rows(); ++i) {
        if ((q_.row(i).array() < 0.0).any() || !q_.row(i).allFinite()) {
            throw DomainError("transition matrix row " + std::to_string(i) +
                              " has a negative or non-finite entry");
        }
        const double s = q_.row(i).sum();
        if (std::abs(s - 1.0) > 1e-12) {
            throw DomainError("transition matrix row " + std::to_string(i) + " sums to " + num(s));
        }
    }
}

TransitionMatrix build_q(const ChainParams& p)
{
    const auto m = static_cast<Eigen::Index>(p.links());
    const double md = static_cast<double>(p.links());
    const double a = p.alpha();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (Eigen::Index k = 0; k <= m; ++k) {
        q(k, k) = a;
        if (k > 0) {
            q(k, k - 1) = (1.0 - a) * static_cast<double>(k) / md;
        }
        if (k < m) {
            q(k, k + 1) = (1.0 - a) * (1.0 - static_cast<double>(k) / md);
        }
    }
    return TransitionMatrix(std::move(q));
}

TransitionMatrix n_step(const TransitionMatrix& q, std::size_t n)
{
    const auto s = static_cast<Eigen::Index>(q.states());
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(s, s);
    Eigen::MatrixXd base = q.matrix();
    while (n > 0) {
        if (n & 1U) {
            result = result * base;
        }
        n >>= 1U;
        if (n > 0) {
            base = base * base;
        }
    }
    // Products drift off unit row sums by a few ulps per level; renormalise.
    for (Eigen::Index i = 0; i < s; ++i) {
        result.row(i) /= result.row(i).sum();
    }
    return TransitionMatrix(std::move(result));
}

std::vector<double> stationary(const ChainParams& p)
{
    return binomial_half(p.links());
}

std::vector<double> degree_distribution(const ChainParams& p)
{
    if (p.nodes() == 0) {
        throw DomainError("degree law needs a node count; M = " + std::to_string(p.links()) +
                          " is not N(N-1)/2");
    }
    return binomial_half(p.nodes() - 1);
}

Spectral spectral(const TransitionMatrix& q)
{
    const Eigen::MatrixXd& m = q.matrix();
    const Eigen::Index s = m.rows();
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < s; ++j) {
            if (std::abs(i - j) > 1 && m(i, j) != 0.0) {
                throw DomainError("spectral form needs a tridiagonal (birth-death) matrix");
            }
        }
        if (i + 1 < s && ((m(i, i + 1) > 0.0) != (m(i + 1, i) > 0.0))) {
            throw DomainError("birth-death matrix is not reversible at state " + std::to_string(i));
        }
    }

    // With pi from detailed balance, D^{1/2} Q D^{-1/2} is symmetric and its
    // off-diagonal entries are sqrt(q(k,k+1) q(k+1,k)); no ratio of pi is formed.
    Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(s, s);
    Eigen::VectorXd log_pi = Eigen::VectorXd::Zero(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        sym(i, i) = m(i, i);
        if (i + 1 < s) {
            const double off = std::sqrt(m(i, i + 1) * m(i + 1, i));
            sym(i, i + 1) = off;
            sym(i + 1, i) = off;
            log_pi(i + 1) = off > 0.0 ? log_pi(i) + std::log(m(i, i + 1)) - std::log(m(i + 1, i))
                                      : log_pi(i);
        }
    }
    log_pi.array() -= log_pi.maxCoeff();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw ConditioningError("symmetric eigensolver did not converge");
    }
    const Eigen::VectorXd half = (0.5 * log_pi.array()).exp();
    const Eigen::VectorXd inv_half = (-0.5 * log_pi.array()).exp();

    Spectral out;
    out.values = solver.eigenvalues();
    out.right = inv_half.asDiagonal() * solver.eigenvectors();
    out.left = solver.eigenvectors().transpose() * half.asDiagonal();
    const Eigen::MatrixXd rebuilt = out.right * out.values.asDiagonal() * out.left;
    out.reconstruction_error = (rebuilt - m).cwiseAbs().maxCoeff();
    if (!(out.reconstruction_error <= 1e-10)) {
        throw ConditioningError("spectral reconstruction error " + num(out.reconstruction_error) +
                                " exceeds 1e-10 for " + std::to_string(s) + " states");
    }
    return out;
}

}  // namespace rlad

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace rlad {

/// Link-count chain of an N-node undirected network: M = N(N-1)/2 possible links,
/// and each event leaves the network unchanged with probability alpha.
class ChainParams {
public:
    ChainParams(std::size_t nodes, double alpha);

    /// Ehrenfest chain with an arbitrary link capacity M >= 1. nodes() is the matching
    /// N when M is triangular and 0 otherwise.
    static ChainParams from_links(std::size_t links, double alpha);

    std::size_t nodes() const { return nodes_; }
    std::size_t links() const { return links_; }  // M
    std::size_t states() const { return links_ + 1; }
    double alpha() const { return alpha_; }

private:
    std::size_t nodes_;
    std::size_t links_;
    double alpha_;
};

/// Dense row-stochastic matrix on a finite state space.
class TransitionMatrix {
public:
    /// Validates non-negativity and unit row sums (1e-12).
    explicit TransitionMatrix(Eigen::MatrixXd q);

    const Eigen::MatrixXd& matrix() const { return q_; }
    std::size_t states() const { return static_cast<std::size_t>(q_.rows()); }
    double operator()(std::size_t i, std::size_t j) const
    {
        return q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

private:
    Eigen::MatrixXd q_;
};

/// alpha-delayed Ehrenfest chain:
///   q(k, k-1) = (1-alpha) k/M,  q(k, k+1) = (1-alpha)(1 - k/M),  q(k, k) = alpha.
TransitionMatrix build_q(const ChainParams& p);

/// Q^n by repeated squaring.
TransitionMatrix n_step(const TransitionMatrix& q, std::size_t n);

/// Binomial(M, 1/2).
std::vector<double> stationary(const ChainParams& p);

/// Binomial(N-1, 1/2): degree law of a single node under the stationary law.
/// Throws DomainError when the chain has no node count.
std::vector<double> degree_distribution(const ChainParams& p);

/// Q = V diag(lambda) V^{-1} with real eigenvalues in ascending order.
struct Spectral {
    Eigen::VectorXd values;
    Eigen::MatrixXd right;  // V, columns are right eigenvectors
    Eigen::MatrixXd left;   // V^{-1}, rows are left eigenvectors
    double reconstruction_error = 0.0;
};

/// Eigendecomposition of a reversible birth-death matrix through its symmetrised form.
/// Throws DomainError if q is not tridiagonal with matching off-diagonal support, and
/// ConditioningError if ||V diag(lambda) V^{-1} - Q||_max exceeds 1e-10.
Spectral spectral(const TransitionMatrix& q);

}  // namespace rlad

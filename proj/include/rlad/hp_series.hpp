#pragma once

#include <cstddef>
#include <vector>

namespace rlad::hp {

/// Result of a high-precision evaluation of the fractional Poisson masses
///
///   P_n(z) = sum_{k >= n} (-1)^{k-n} C(k, n) z^k / Gamma(1 + beta k),   z = (t/gamma)^beta,
///
/// for a contiguous block n in [first, first + probs.size()).
struct PmfBlock {
    std::size_t first = 0;
    std::vector<double> probs;
    /// Certified bound on |computed - exact| for every entry of the block,
    /// covering both MPFR rounding and the discarded alternating tail.
    double error_bound = 0.0;
    /// Working precision actually used.
    long precision_bits = 0;
    /// Highest series index summed.
    std::size_t last_term = 0;
};

struct KernelOptions {
    long min_precision_bits = 200;
    long max_precision_bits = 1L << 17;
    /// Required absolute accuracy per entry; precision is raised until met.
    double abs_tolerance = 1e-15;
};

/// OpenMP kernel, parallel across n within each series step. Output is independent
/// of thread count.
PmfBlock pmf_block(double beta, double z, std::size_t first, std::size_t count,
                   const KernelOptions& opts = {});

/// Serial reference implementation kept for testing and benchmarking.
PmfBlock pmf_block_serial(double beta, double z, std::size_t first, std::size_t count,
                          const KernelOptions& opts = {});

/// n-th derivative E_beta^{(n)}(-x) for x >= 0 with relative accuracy `rel_tol`.
/// Throws AccuracyError when the precision cap cannot certify the tolerance.
double mlf_derivative_hp(double beta, unsigned n, double x, double rel_tol = 1e-10,
                         long min_precision_bits = 200);

/// Reduce beta to an exact rational p/q (q <= 1000) when it is one to within a
/// few ulps; returns {0, 0} otherwise.
struct Rational {
    unsigned long p = 0;
    unsigned long q = 0;
};
Rational as_small_rational(double beta);

}  // namespace rlad::hp

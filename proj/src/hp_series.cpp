#include "rlad/hp_series.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlad/error.hpp"

namespace rlad::hp {

namespace {

class MpReal {
public:
    explicit MpReal(long prec) { mpfr_init2(v_, prec); }
    MpReal(MpReal&& other) noexcept
    {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_swap(v_, other.v_);
    }
    MpReal(const MpReal&) = delete;
    MpReal& operator=(const MpReal&) = delete;
    MpReal& operator=(MpReal&&) = delete;
    ~MpReal() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

// ln of C(k, n) z^k / Gamma(1 + beta k); lz = ln z.
double log_term(double lz, double beta, std::size_t k, std::size_t n)
{
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return std::lgamma(kd + 1.0) - std::lgamma(nd + 1.0) - std::lgamma(kd - nd + 1.0) + kd * lz -
           std::lgamma(1.0 + beta * kd);
}

struct Plan {
    std::size_t last_k = 0;
    double max_log = -std::numeric_limits<double>::infinity();
};

// Walk the terms of row n past their peak until they fall below exp(log_floor).
Plan plan_row(double lz, double beta, std::size_t n, double log_floor)
{
    Plan plan;
    double prev = -std::numeric_limits<double>::infinity();
    constexpr std::size_t hard_cap = 4'000'000;
    for (std::size_t k = n;; ++k) {
        const double lt = log_term(lz, beta, k, n);
        plan.max_log = std::max(plan.max_log, lt);
        if (lt < log_floor && lt < prev - std::log(2.0)) {
            plan.last_k = k;
            return plan;
        }
        prev = lt;
        if (k - n > hard_cap) {
            throw ResourceError("series term count exceeded " + std::to_string(hard_cap));
        }
    }
}

Plan plan_block(double lz, double beta, std::size_t first, std::size_t count, double log_floor)
{
    Plan plan;
    const std::size_t last = first + count - 1;
    // Row peaks move right with n, so one sweep finds every row maximum.
    std::size_t peak = first;
    for (std::size_t n = first; n <= last; ++n) {
        peak = std::max(peak, n);
        while (log_term(lz, beta, peak + 1, n) > log_term(lz, beta, peak, n)) {
            ++peak;
        }
        plan.max_log = std::max(plan.max_log, log_term(lz, beta, peak, n));
    }
    // For k >= 2n, C(k, n) increases with n, so the last row's cut-off covers the rest.
    const Plan tail = plan_row(lz, beta, last, log_floor);
    plan.last_k = tail.last_k;
    if (plan.last_k < 2 * last) {
        for (std::size_t n = first; n < last; ++n) {
            plan.last_k = std::max(plan.last_k, plan_row(lz, beta, n, log_floor).last_k);
        }
    }
    return plan;
}

// Coefficients a_k = z^k / Gamma(1 + beta k), k = 0..last_k.
std::vector<MpReal> coefficients(double beta, double z, std::size_t last_k, long prec)
{
    std::vector<MpReal> a;
    a.reserve(last_k + 1);
    for (std::size_t k = 0; k <= last_k; ++k) {
        a.emplace_back(prec);
    }

    MpReal zmp(prec);
    mpfr_set_d(zmp.get(), z, MPFR_RNDN);
    MpReal x(prec);

    const Rational r = as_small_rational(beta);
    if (r.q == 0) {
        // Generic order: Gamma evaluated at every index.
        MpReal lz(prec);
        mpfr_log(lz.get(), zmp.get(), MPFR_RNDN);
        MpReal bmp(prec);
        mpfr_set_d(bmp.get(), beta, MPFR_RNDN);
        int sign = 0;
        for (std::size_t k = 0; k <= last_k; ++k) {
            mpfr_mul_ui(x.get(), bmp.get(), k, MPFR_RNDN);
            mpfr_add_ui(x.get(), x.get(), 1, MPFR_RNDN);
            mpfr_lgamma(x.get(), &sign, x.get(), MPFR_RNDN);
            mpfr_mul_ui(a[k].get(), lz.get(), k, MPFR_RNDN);
            mpfr_sub(a[k].get(), a[k].get(), x.get(), MPFR_RNDN);
            mpfr_exp(a[k].get(), a[k].get(), MPFR_RNDN);
        }
        return a;
    }

    // beta = p/q: Gamma(1 + beta (k + q)) = Gamma(1 + beta k) prod_{m<p} (1 + beta k + m),
    // so only q Gamma evaluations are needed and the rest is integer arithmetic.
    const unsigned long p = r.p;
    const unsigned long q = r.q;
    for (std::size_t k = 0; k <= last_k && k < q; ++k) {
        mpfr_set_ui(x.get(), static_cast<unsigned long>(k) * p, MPFR_RNDN);
        mpfr_div_ui(x.get(), x.get(), q, MPFR_RNDN);
        mpfr_add_ui(x.get(), x.get(), 1, MPFR_RNDN);
        mpfr_gamma(x.get(), x.get(), MPFR_RNDN);
        mpfr_pow_ui(a[k].get(), zmp.get(), k, MPFR_RNDN);
        mpfr_div(a[k].get(), a[k].get(), x.get(), MPFR_RNDN);
    }
    MpReal zq(prec);
    mpfr_pow_ui(zq.get(), zmp.get(), q, MPFR_RNDN);
    for (std::size_t k = q; k <= last_k; ++k) {
        mpfr_ptr ak = a[k].get();
        mpfr_mul(ak, a[k - q].get(), zq.get(), MPFR_RNDN);
        const unsigned long j = static_cast<unsigned long>(k - q);
        // Multiply by prod_m q / (q + p j + m q), batching integers into 64-bit words.
        unsigned long num = 1;
        unsigned long den = 1;
        for (unsigned long m = 0; m < p; ++m) {
            const unsigned long d = q + p * j + m * q;
            unsigned long nn = 0;
            unsigned long dd = 0;
            if (__builtin_mul_overflow(num, q, &nn) || __builtin_mul_overflow(den, d, &dd)) {
                mpfr_mul_ui(ak, ak, num, MPFR_RNDN);
                mpfr_div_ui(ak, ak, den, MPFR_RNDN);
                num = q;
                den = d;
            } else {
                num = nn;
                den = dd;
            }
        }
        mpfr_mul_ui(ak, ak, num, MPFR_RNDN);
        mpfr_div_ui(ak, ak, den, MPFR_RNDN);
    }
    return a;
}

struct RowResult {
    double value = 0.0;
    mpfr_exp_t max_exp = std::numeric_limits<mpfr_exp_t>::min();
};

// Alternating binomial sum for one row n; `out` receives the exact MPFR sum.
RowResult sum_row(const std::vector<MpReal>& a, std::size_t n, std::size_t last_k, mpfr_ptr c,
                  mpfr_ptr term, mpfr_ptr out)
{
    RowResult res;
    mpfr_set_ui(c, 1, MPFR_RNDN);
    mpfr_set_zero(out, 1);
    for (std::size_t k = n; k <= last_k; ++k) {
        mpfr_mul(term, c, a[k].get(), MPFR_RNDN);
        if (((k - n) & 1U) == 0) {
            mpfr_add(out, out, term, MPFR_RNDN);
        } else {
            mpfr_sub(out, out, term, MPFR_RNDN);
        }
        if (!mpfr_zero_p(term)) {
            res.max_exp = std::max(res.max_exp, mpfr_get_exp(term));
        }
        mpfr_mul_ui(c, c, static_cast<unsigned long>(k + 1), MPFR_RNDN);
        mpfr_div_ui(c, c, static_cast<unsigned long>(k + 1 - n), MPFR_RNDN);
    }
    res.value = mpfr_get_d(out, MPFR_RNDN);
    return res;
}

// Rounding bound relative to 2^(max_exp - prec). Each term carries O(K * p) roundings.
double rounding_bound(mpfr_exp_t max_exp, long prec, std::size_t terms)
{
    if (max_exp == std::numeric_limits<mpfr_exp_t>::min()) {
        return 0.0;
    }
    const double k = static_cast<double>(terms) + 2.0;
    const double scale = std::max(k * k * 4096.0, 1e6);
    return std::ldexp(scale, static_cast<int>(max_exp - prec));
}

long precision_for(const Plan& plan, double log_tol, long min_bits)
{
    const double top = std::max(plan.max_log, 0.0) / std::log(2.0);
    const double tol_bits = -log_tol / std::log(2.0);
    const double k = static_cast<double>(plan.last_k) + 2.0;
    const double guard = 2.0 * std::log2(k) + 12.0 + 24.0;
    return std::max(min_bits, static_cast<long>(std::ceil(top + tol_bits + guard)));
}

// Binomial transform by Horner's rule in (s - 1):
//   sum_n P_n s^n = sum_k a_k (s - 1)^k,
// truncated at degree `last`. Each step maps p_j <- p_{j-1} - p_j (p_{-1} = a_k), so the
// whole block costs one subtraction per (k, j) pair. Rounding at step k reaches row n
// weighted by C(k, n - j), and by Vandermonde's identity the total stays below
// K * sum_k C(k, n) a_k, the same bound as direct row summation.
void horner_rows(const std::vector<MpReal>& a, std::size_t last_k, std::size_t last,
                 std::vector<MpReal>& cur, std::vector<MpReal>& nxt, bool parallel)
{
    for (std::size_t j = 0; j <= last; ++j) {
        mpfr_set_zero(cur[j].get(), 1);
        mpfr_set_zero(nxt[j].get(), 1);
    }
    std::vector<MpReal>* p = &cur;
    std::vector<MpReal>* q = &nxt;
    for (std::size_t k = last_k + 1; k-- > 0;) {
        // After this step p has degree min(last, last_k - k).
        const std::size_t deg = std::min(last, last_k - k);
        std::vector<MpReal>& src = *p;
        std::vector<MpReal>& dst = *q;
        mpfr_sub(dst[0].get(), a[k].get(), src[0].get(), MPFR_RNDN);
        if (parallel) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t j = 1; j <= static_cast<std::ptrdiff_t>(deg); ++j) {
                mpfr_sub(dst[j].get(), src[j - 1].get(), src[j].get(), MPFR_RNDN);
            }
        } else {
            for (std::size_t j = 1; j <= deg; ++j) {
                mpfr_sub(dst[j].get(), src[j - 1].get(), src[j].get(), MPFR_RNDN);
            }
        }
        std::swap(p, q);
    }
    if (p != &cur) {
        for (std::size_t j = 0; j <= last; ++j) {
            mpfr_swap(cur[j].get(), nxt[j].get());
        }
    }
}

PmfBlock block_impl(double beta, double z, std::size_t first, std::size_t count,
                    const KernelOptions& opts, bool parallel)
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0,1], got " + num(beta));
    }
    if (!(z >= 0.0) || !std::isfinite(z)) {
        throw DomainError("series argument must be finite and >= 0");
    }
    PmfBlock out;
    out.first = first;
    out.probs.assign(count, 0.0);
    if (count == 0) {
        return out;
    }
    if (z == 0.0) {
        if (first == 0) {
            out.probs[0] = 1.0;
        }
        return out;
    }

    const double lz = std::log(z);
    const double log_tol = std::log(opts.abs_tolerance);
    const double log_floor = log_tol - 30.0;
    const Plan plan = plan_block(lz, beta, first, count, log_floor);
    const std::size_t last = first + count - 1;
    long prec = precision_for(plan, log_tol, opts.min_precision_bits);

    for (int attempt = 0; attempt < 4; ++attempt) {
        if (prec > opts.max_precision_bits) {
            throw AccuracyError("required working precision " + std::to_string(prec) +
                                " bits exceeds cap " + std::to_string(opts.max_precision_bits));
        }
        const std::vector<MpReal> a = coefficients(beta, z, plan.last_k, prec);
        std::vector<MpReal> cur;
        std::vector<MpReal> nxt;
        cur.reserve(last + 1);
        nxt.reserve(last + 1);
        for (std::size_t j = 0; j <= last; ++j) {
            cur.emplace_back(prec);
            nxt.emplace_back(prec);
        }
        horner_rows(a, plan.last_k, last, cur, nxt, parallel);
        for (std::size_t i = 0; i < count; ++i) {
            out.probs[i] = mpfr_get_d(cur[first + i].get(), MPFR_RNDN);
        }

        // Largest row term, rounded up to a power of two with a safety bit for lgamma error.
        const auto emax =
            static_cast<mpfr_exp_t>(std::ceil(plan.max_log / std::log(2.0)) + 2.0);
        const double bound = rounding_bound(emax, prec, plan.last_k) + std::exp(log_floor);
        if (bound <= opts.abs_tolerance) {
            for (double& p : out.probs) {
                if (p < 0.0) {
                    if (-p > bound) {
                        throw AccuracyError("negative mass beyond certified bound");
                    }
                    p = 0.0;
                }
            }
            out.error_bound = bound;
            out.precision_bits = prec;
            out.last_term = plan.last_k;
            return out;
        }
        prec += static_cast<long>(std::ceil(std::log2(bound / opts.abs_tolerance))) + 32;
    }
    throw AccuracyError("could not certify series block after raising precision");
}

}  // namespace

Rational as_small_rational(double beta)
{
    for (unsigned long q = 1; q <= 1000; ++q) {
        const double pd = std::nearbyint(beta * static_cast<double>(q));
        if (pd < 1.0) {
            continue;
        }
        const double approx = pd / static_cast<double>(q);
        if (std::abs(approx - beta) <= 4.0 * std::numeric_limits<double>::epsilon() * beta) {
            return {static_cast<unsigned long>(pd), q};
        }
    }
    return {};
}

PmfBlock pmf_block(double beta, double z, std::size_t first, std::size_t count,
                   const KernelOptions& opts)
{
    return block_impl(beta, z, first, count, opts, true);
}

PmfBlock pmf_block_serial(double beta, double z, std::size_t first, std::size_t count,
                          const KernelOptions& opts)
{
    return block_impl(beta, z, first, count, opts, false);
}

double mlf_derivative_hp(double beta, unsigned n, double x, double rel_tol, long min_precision_bits)
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0,1], got " + num(beta));
    }
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError("derivative argument must satisfy z <= 0");
    }
    if (beta == 1.0) {
        return std::exp(-x);
    }
    if (x == 0.0) {
        // E^{(n)}(0) = n! / Gamma(1 + beta n)
        return std::exp(std::lgamma(n + 1.0) - std::lgamma(1.0 + beta * n));
    }

    // E^{(n)}(-x) = n! x^{-n} P_n(x); P_n may be far below the double range, so the
    // whole computation stays in MPFR and the tolerance is tightened until relative.
    const double lz = std::log(x);
    double log_tol = std::log(1e-30);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Plan plan = plan_block(lz, beta, n, 1, log_tol - 30.0);
        const long prec = precision_for(plan, log_tol, min_precision_bits);
        if (prec > (1L << 17)) {
            throw AccuracyError("derivative order " + std::to_string(n) +
                                " needs more than the precision cap");
        }
        const std::vector<MpReal> a = coefficients(beta, x, plan.last_k, prec);
        MpReal c(prec);
        MpReal term(prec);
        MpReal acc(prec);
        const RowResult r = sum_row(a, n, plan.last_k, c.get(), term.get(), acc.get());
        const double bound_log2 =
            std::log2(std::max(static_cast<double>(plan.last_k) + 2.0, 1e3)) * 2.0 + 12.0 +
            static_cast<double>(r.max_exp - prec);
        const double tail_log2 = (log_tol - 30.0) / std::log(2.0);
        const double err_log2 = std::max(bound_log2, tail_log2) + 1.0;

        if (mpfr_sgn(acc.get()) > 0) {
            const double val_log2 = static_cast<double>(mpfr_get_exp(acc.get())) - 1.0;
            if (err_log2 <= val_log2 + std::log2(rel_tol)) {
                MpReal scale(prec);
                mpfr_fac_ui(scale.get(), n, MPFR_RNDN);
                mpfr_mul(acc.get(), acc.get(), scale.get(), MPFR_RNDN);
                mpfr_set_d(scale.get(), x, MPFR_RNDN);
                mpfr_pow_ui(scale.get(), scale.get(), n, MPFR_RNDN);
                mpfr_div(acc.get(), acc.get(), scale.get(), MPFR_RNDN);
                const double v = mpfr_get_d(acc.get(), MPFR_RNDN);
                if (!std::isfinite(v)) {
                    throw AccuracyError("derivative overflows double range");
                }
                return v;
            }
            log_tol = (val_log2 + std::log2(rel_tol) - 20.0) * std::log(2.0);
        } else {
            log_tol -= 200.0 * std::log(2.0);
        }
    }
    throw AccuracyError("could not certify derivative of order " + std::to_string(n));
}

}  // namespace rlad::hp

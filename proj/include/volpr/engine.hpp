#pragma once

// Closed-form Volterra responses. Each Laguerre-filtered input
//
//   x_p(t) = int_0^t l_p(tau) f(t - tau) dtau
//          = sum_k beta_{p,k}/k! t^k e^{-at} + sum_l gamma_{p,l} e^{lambda_l t}
//
// is built once per (rate, order); the order-n response is the contraction
// of the coefficient tensor against products of these sums.

#include "volpr/coefficients.hpp"
#include "volpr/excitation.hpp"
#include "volpr/polyexp.hpp"

#include <span>
#include <vector>

namespace volpr {

inline constexpr double kCollisionTolerance = 1e-6;

struct FilteredInput {
    int order = 0;
    std::vector<ExtComplex> beta;   // beta_{p,k}, k = 0..p (not divided by k!)
    std::vector<ExtComplex> gamma;  // gamma_{p,l}, one per excitation component
    PolyExpSum sum;
};

/// gamma_{p,l} = alpha_l L[l_p](lambda_l). Throws PoleCollisionError when
/// |lambda_l + a| < kCollisionTolerance.
std::vector<ExtComplex> residues_gamma(const LaguerreBasis& basis, int p, const ExponentialSignal& f);

/// beta_{p,k} = -sum_l alpha_l sum_{q=1}^{p-k+1} b_p(k+q-1) / (lambda_l + a)^q,
/// accumulated in 113-bit arithmetic.
std::vector<ExtComplex> coeffs_beta(const LaguerreBasis& basis, int p, const ExponentialSignal& f);

/// Tags: SystemBasis with `basis_source` on e^{-at} terms, Excitation with
/// the component index on e^{lambda_l t} terms.
FilteredInput filtered_input(const LaguerreBasis& basis, int p, const ExponentialSignal& f,
                             std::uint16_t basis_source = 0);

struct ResponseOrders {
    std::vector<PolyExpSum> orders; // orders[n - 1] is y_n
    PolyExpSum total;
};

/// y_n = sum c_{p1..pn} x_{p1} ... x_{pn} for n = 1..N (N <= 3), with
/// coefficients[n - 1] of order n.
ResponseOrders assemble_response(std::span<const KernelCoefficients> coefficients,
                                 const ExponentialSignal& f, int N);

PolyExpParts decompose_response(const PolyExpSum& y);

/// Real series on a time grid: the orders, their sum and its natural, cross
/// and forced parts.
struct ResponseTable {
    std::vector<double> t;
    std::vector<std::vector<double>> orders;
    std::vector<double> total;
    std::vector<double> natural;
    std::vector<double> cross;
    std::vector<double> forced;
};

ResponseTable tabulate(const ResponseOrders& response, std::span<const double> t);

} // namespace volpr

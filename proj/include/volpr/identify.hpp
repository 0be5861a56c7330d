#pragma once

// Least-squares identification of first- and second-order Laguerre
// coefficients from an input/output record.

#include "volpr/coefficients.hpp"
#include "volpr/engine.hpp"
#include "volpr/excitation.hpp"

#include <Eigen/Core>

namespace volpr {

struct IoRecord {
    std::vector<double> input;
    std::vector<double> output;
    double dt = 0.0;
};

/// Column p holds x_p(t_i) = int_0^{t_i} l_p(tau) f(t_i - tau) dtau by the
/// trapezoidal rule, so x_p(0) = 0.
Eigen::MatrixXd regressors(const SampledSignal& f, const LaguerreBasis& basis);

struct FitOptions {
    int order = 2;       // 1 or 2
    double ridge = 0.0;  // Tikhonov weight on the normalised design; 0 = plain least squares
};

struct IdentifiedKernels {
    std::vector<KernelCoefficients> coefficients; // [0] order 1, [1] order 2
    double relative_residual = 0.0;               // ||y - X c|| / ||y||
    int rank = 0;
    int unknowns = 0;
};

/// Design columns are x_p, then x_p x_q for p <= q. The fitted weight w_pq
/// of an off-diagonal column equals 2 c_pq, so c_pq = c_qp = w_pq / 2.
/// Throws RankDeficientError when the design loses rank.
IdentifiedKernels fit(const IoRecord& record, const LaguerreBasis& basis, const FitOptions& options = {});

/// Closed-form response of the identified model to a pole-residue excitation.
ResponseOrders predict(const IdentifiedKernels& model, const ExponentialSignal& f);

} // namespace volpr

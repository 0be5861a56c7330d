#include "volpr/identify.hpp"

#include "volpr/error.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>

namespace volpr {

namespace {

std::size_t fft_size(std::size_t n)
{
    std::size_t m = 1;
    while (m < n)
        m <<= 1;
    return m;
}

} // namespace

Eigen::MatrixXd regressors(const SampledSignal& f, const LaguerreBasis& basis)
{
    const std::size_t n = f.size();
    const int P = basis.size();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), P);
    if (n == 0) return X;
    if (!(f.dt > 0.0)) throw DomainError("sample interval must be positive");

    const Eigen::MatrixXd L = eval_time_all(basis, f.times());
    const std::size_t m = fft_size(2 * n);
    const std::size_t bins = m / 2 + 1;

    std::vector<double> real(m, 0.0);
    std::vector<Complex> spec_f(bins), spec_l(bins);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), real.data(),
                                         reinterpret_cast<fftw_complex*>(spec_l.data()), FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(spec_l.data()),
                                         real.data(), FFTW_ESTIMATE);

    std::copy(f.samples.begin(), f.samples.end(), real.begin());
    fftw_execute_dft_r2c(fwd, real.data(), reinterpret_cast<fftw_complex*>(spec_f.data()));

    for (int p = 0; p < P; ++p) {
        std::fill(real.begin(), real.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            real[i] = L(static_cast<Eigen::Index>(i), p);
        fftw_execute_dft_r2c(fwd, real.data(), reinterpret_cast<fftw_complex*>(spec_l.data()));
        for (std::size_t k = 0; k < bins; ++k)
            spec_l[k] *= spec_f[k];
        fftw_execute_dft_c2r(inv, reinterpret_cast<fftw_complex*>(spec_l.data()), real.data());
        const double l0 = L(0, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double full = real[i] / static_cast<double>(m);
            // trapezoid: halve the tau = 0 and tau = t_i end points
            const double ends = 0.5 * (l0 * f.samples[i] + L(static_cast<Eigen::Index>(i), p) * f.samples[0]);
            X(static_cast<Eigen::Index>(i), p) = i == 0 ? 0.0 : f.dt * (full - ends);
        }
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    return X;
}

IdentifiedKernels fit(const IoRecord& record, const LaguerreBasis& basis, const FitOptions& options)
{
    if (record.input.size() != record.output.size())
        throw DomainError("input and output records differ in length");
    if (options.order < 1 || options.order > 2) throw DomainError("identification supports orders 1 and 2");

    const SampledSignal f{record.input, record.dt};
    const Eigen::MatrixXd x = regressors(f, basis);
    const Eigen::Index n = x.rows();
    const int P = basis.size();
    const int pairs = options.order == 2 ? P * (P + 1) / 2 : 0;
    const int unknowns = P + pairs;
    if (n < unknowns) throw RankDeficientError("record is shorter than the number of unknown coefficients");

    Eigen::MatrixXd design(n, unknowns);
    design.leftCols(P) = x;
    int col = P;
    for (int p = 0; p < P && options.order == 2; ++p)
        for (int q = p; q < P; ++q)
            design.col(col++) = x.col(p).cwiseProduct(x.col(q));

    Eigen::VectorXd norms = design.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < unknowns; ++j) {
        if (norms(j) == 0.0) norms(j) = 1.0;
        design.col(j) /= norms(j);
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(record.output.data(), n);

    Eigen::VectorXd w;
    int rank = unknowns;
    if (options.ridge > 0.0) {
        Eigen::MatrixXd aug(n + unknowns, unknowns);
        aug.topRows(n) = design;
        aug.bottomRows(unknowns) = std::sqrt(options.ridge) * Eigen::MatrixXd::Identity(unknowns, unknowns);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + unknowns);
        rhs.head(n) = y;
        w = aug.colPivHouseholderQr().solve(rhs);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-12);
        rank = static_cast<int>(qr.rank());
        if (rank < unknowns) {
            throw RankDeficientError("design matrix has rank " + std::to_string(rank) + " of "
                                     + std::to_string(unknowns)
                                     + "; use a richer excitation such as white noise");
        }
        w = qr.solve(y);
    }

    const double ynorm = y.norm();
    IdentifiedKernels out;
    out.rank = rank;
    out.unknowns = unknowns;
    out.relative_residual = ynorm > 0.0 ? (y - design * w).norm() / ynorm : (design * w).norm();
    w = w.cwiseQuotient(norms);

    auto c1 = KernelCoefficients::zeros({basis});
    for (int p = 0; p < P; ++p)
        c1.values[p] = w(p);
    out.coefficients.push_back(std::move(c1));
    if (options.order == 2) {
        auto c2 = KernelCoefficients::zeros({basis, basis});
        col = P;
        for (int p = 0; p < P; ++p)
            for (int q = p; q < P; ++q) {
                const double v = p == q ? w(col) : 0.5 * w(col);
                c2.values[static_cast<std::size_t>(p) * P + q] = v;
                c2.values[static_cast<std::size_t>(q) * P + p] = v;
                ++col;
            }
        out.coefficients.push_back(std::move(c2));
    }
    return out;
}

ResponseOrders predict(const IdentifiedKernels& model, const ExponentialSignal& f)
{
    return assemble_response(model.coefficients, f, static_cast<int>(model.coefficients.size()));
}

} // namespace volpr

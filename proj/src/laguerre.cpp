#include "volpr/laguerre.hpp"

#include "volpr/error.hpp"

#include <cmath>
#include <string>

namespace volpr {

namespace {

void check_order(const LaguerreBasis& basis, int p)
{
    if (p < 0 || p > basis.max_order())
        throw DomainError("Laguerre order " + std::to_string(p) + " outside [0, "
                          + std::to_string(basis.max_order()) + "]");
}

} // namespace

LaguerreBasis::LaguerreBasis(double rate, int max_order) : rate_(rate), max_order_(max_order)
{
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw DomainError("Laguerre damping rate must be positive and finite");
    if (max_order < 0)
        throw DomainError("Laguerre maximum order must be non-negative");
}

double eval_time(const LaguerreBasis& basis, int p, double t)
{
    check_order(basis, p);
    if (!(t >= 0.0)) throw DomainError("Laguerre functions are causal; t must be >= 0");
    const double a = basis.rate();
    const double x = 2.0 * a * t;
    double prev = 1.0;
    double cur = 1.0 - x;
    double lp = 1.0;
    if (p == 1) lp = cur;
    for (int n = 1; n < p; ++n) {
        const double next = ((2.0 * n + 1.0 - x) * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
        lp = cur;
    }
    const double scale = std::sqrt(2.0 * a) * std::exp(-a * t);
    return (p % 2 == 0 ? 1.0 : -1.0) * scale * lp;
}

std::vector<double> eval_time(const LaguerreBasis& basis, int p, std::span<const double> t)
{
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = eval_time(basis, p, t[i]);
    return out;
}

Eigen::MatrixXd eval_time_all(const LaguerreBasis& basis, std::span<const double> t)
{
    const int R = basis.max_order();
    const double a = basis.rate();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(t.size()), R + 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0)) throw DomainError("Laguerre functions are causal; t must be >= 0");
        const double x = 2.0 * a * t[i];
        const double scale = std::sqrt(2.0 * a) * std::exp(-a * t[i]);
        const auto row = static_cast<Eigen::Index>(i);
        double prev = 1.0;
        double cur = 1.0 - x;
        out(row, 0) = scale;
        if (R >= 1) out(row, 1) = -scale * cur;
        for (int n = 1; n < R; ++n) {
            const double next = ((2.0 * n + 1.0 - x) * cur - n * prev) / (n + 1.0);
            prev = cur;
            cur = next;
            out(row, n + 1) = ((n + 1) % 2 == 0 ? scale : -scale) * cur;
        }
    }
    return out;
}

std::vector<double> laplace_coeffs(const LaguerreBasis& basis, int p)
{
    check_order(basis, p);
    const double log2a = std::log(2.0 * basis.rate());
    std::vector<double> b(p + 1);
    for (int k = 0; k <= p; ++k) {
        const double log_binom = std::lgamma(p + 1.0) - std::lgamma(k + 1.0) - std::lgamma(p - k + 1.0);
        const double mag = std::exp(log_binom + (k + 0.5) * log2a);
        b[k] = ((p - k) % 2 == 0) ? mag : -mag;
    }
    return b;
}

Complex eval_laplace_expansion(const LaguerreBasis& basis, int p, Complex s)
{
    const auto b = laplace_coeffs(basis, p);
    const Complex u = 1.0 / (s + basis.rate());
    // Horner in u: sum_k b_k u^{k+1}
    Complex acc = 0.0;
    for (int k = p; k >= 0; --k)
        acc = (acc + b[k]) * u;
    return acc;
}

std::vector<Complex> eval_frequency(const LaguerreBasis& basis, int p, std::span<const double> omega)
{
    check_order(basis, p);
    std::vector<Complex> out(omega.size());
    for (std::size_t j = 0; j < omega.size(); ++j)
        out[j] = eval_laplace(basis, p, Complex(0.0, omega[j]));
    return out;
}

Eigen::MatrixXcd eval_frequency_all(const LaguerreBasis& basis, std::span<const double> omega)
{
    const double a = basis.rate();
    Eigen::MatrixXcd out(basis.size(), static_cast<Eigen::Index>(omega.size()));
    for (std::size_t j = 0; j < omega.size(); ++j) {
        const Complex s(0.0, omega[j]);
        const Complex ratio = -(s - a) / (s + a);
        Complex v = std::sqrt(2.0 * a) / (s + a);
        const auto col = static_cast<Eigen::Index>(j);
        for (int p = 0; p <= basis.max_order(); ++p) {
            out(p, col) = v;
            v *= ratio;
        }
    }
    return out;
}

} // namespace volpr

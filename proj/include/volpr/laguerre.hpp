#pragma once

// Orthonormal Laguerre functions on [0, inf) with damping rate a:
//
//   l_p(t) = sqrt(2a) sum_k (-1)^k C(p,k) (2at)^{p-k}/(p-k)! e^{-at}
//          = (-1)^p sqrt(2a) e^{-at} L_p(2at),
//
// so l_p(0) = (-1)^p sqrt(2a). Their Laplace transforms are
//
//   L[l_p](s) = sum_k b_p(k) / (s+a)^{k+1} = (-1)^p sqrt(2a) (s-a)^p / (s+a)^{p+1}.

#include "volpr/polyexp.hpp"

#include <Eigen/Core>

#include <complex>
#include <span>
#include <vector>

namespace volpr {

class LaguerreBasis {
public:
    LaguerreBasis(double rate, int max_order);

    double rate() const noexcept { return rate_; }
    int max_order() const noexcept { return max_order_; }
    int size() const noexcept { return max_order_ + 1; }

    bool operator==(const LaguerreBasis&) const = default;

private:
    double rate_;
    int max_order_;
};

double eval_time(const LaguerreBasis& basis, int p, double t);
std::vector<double> eval_time(const LaguerreBasis& basis, int p, std::span<const double> t);

/// All orders at once; row i holds l_0..l_R at t[i].
Eigen::MatrixXd eval_time_all(const LaguerreBasis& basis, std::span<const double> t);

/// b_p(k), k = 0..p, accumulated through log-factorials.
std::vector<double> laplace_coeffs(const LaguerreBasis& basis, int p);

/// Transform at complex s through the factored form. Works for double and
/// long double; the pole at s = -a is the caller's concern.
template <class T>
std::complex<T> eval_laplace(const LaguerreBasis& basis, int p, std::complex<T> s)
{
    const T a = static_cast<T>(basis.rate());
    const std::complex<T> ratio = (s - a) / (s + a);
    std::complex<T> v = std::sqrt(T(2) * a) / (s + a);
    for (int i = 0; i < p; ++i)
        v *= ratio;
    return (p % 2 == 0) ? v : -v;
}

/// Transform evaluated through the pole expansion sum_k b_p(k)/(s+a)^{k+1}.
Complex eval_laplace_expansion(const LaguerreBasis& basis, int p, Complex s);

/// L[l_p](i w) on a frequency grid.
std::vector<Complex> eval_frequency(const LaguerreBasis& basis, int p, std::span<const double> omega);

/// Row p holds L[l_p](i w_j) for every p in the basis.
Eigen::MatrixXcd eval_frequency_all(const LaguerreBasis& basis, std::span<const double> omega);

} // namespace volpr

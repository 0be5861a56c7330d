#pragma once

// Harmonic-probing FRFs of m y'' + c y' + k1 y + k2 y^2 + k3 y^3 = f, their
// inverse transforms, and the projection of the kernels onto Laguerre bases.

#include "volpr/coefficients.hpp"
#include "volpr/laguerre.hpp"

#include <array>
#include <span>
#include <vector>

namespace volpr {

struct OscillatorParams {
    double m = 1.0;
    double c = 1.0;
    double k1 = 10.0;
    double k2 = 20.0;
    double k3 = 20.0;

    /// Throws DomainError unless m > 0 and the linear part is underdamped.
    void validate() const;
    double omega0() const;
    double zeta() const;
};

/// The cubic FRF: `HarmonicProbing` carries 2 k2 / 3 in front of the
/// symmetrised H1 H2 sum; `AsPrinted` carries k2 / 3.
enum class Frf3Form { HarmonicProbing, AsPrinted };

Complex frf1(const OscillatorParams& p, double w);
Complex frf2(const OscillatorParams& p, double w1, double w2);
Complex frf3(const OscillatorParams& p, double w1, double w2, double w3,
             Frf3Form form = Frf3Form::HarmonicProbing);

/// Two-sided uniform grid w_j = (j - M) dw, j = 0..2M.
struct FrequencyGrid {
    double dw = 0.1;
    int half_width = 1024;

    int size() const noexcept { return 2 * half_width + 1; }
    double omega(int j) const noexcept { return (j - half_width) * dw; }
    double cutoff() const noexcept { return half_width * dw; }
    std::vector<double> omegas() const;
    /// Sample interval of the matching inverse DFT, 2 pi / (N dw).
    double time_step() const noexcept;
};

struct FrfGrid {
    int order = 1;
    FrequencyGrid grid;
    std::vector<Complex> values; // row-major, last axis fastest

    Complex at(int j) const { return values[static_cast<std::size_t>(j)]; }
    Complex at(int j1, int j2) const
    {
        return values[static_cast<std::size_t>(j1) * grid.size() + j2];
    }
};

/// Full tensor of H_n on the grid (order 3 only for small grids).
FrfGrid frf_grid(const OscillatorParams& p, int order, const FrequencyGrid& grid,
                 Frf3Form form = Frf3Form::HarmonicProbing);

/// H3(w, w, w) when `difference` is false, H3(w, w, -w) otherwise.
std::vector<Complex> frf3_diagonal(const OscillatorParams& p, std::span<const double> omega,
                                   bool difference, Frf3Form form = Frf3Form::HarmonicProbing);

/// Causal half of a sampled kernel; `length` samples per axis from t = 0.
struct SampledKernel {
    int order = 1;
    double dt = 0.0;
    std::size_t length = 0;
    std::vector<double> values;  // row-major
    double imag_residue = 0.0;   // max |Im| / RMS(Re) of the transform output

    std::vector<double> times() const;
    double at(std::size_t i) const { return values[i]; }
    double at(std::size_t i, std::size_t j) const { return values[i * length + j]; }
};

/// n-dimensional inverse DFT, h(t_k) = (dw/2pi)^n sum H e^{i sum w t}, for
/// n <= 2. Rejects grids that are not conjugate-symmetric.
SampledKernel kernel_time(const FrfGrid& frf);

/// h3(t, t, t) at the given times from the full cube of H3 on `grid`, by
/// collapsing the cube onto the sum frequency first.
std::vector<double> kernel3_diagonal_time(const OscillatorParams& p, const FrequencyGrid& grid,
                                          std::span<const double> t,
                                          Frf3Form form = Frf3Form::HarmonicProbing);

/// c = (dw/2pi)^n sum H prod_i L[l_{p_i}](-i w_i), by mode-wise contraction.
KernelCoefficients project_coefficients(const FrfGrid& frf, const LaguerreBasis& basis);

/// Third-order projection streamed slab by slab over w1; the H3 cube is
/// never stored.
KernelCoefficients project_coefficients3(const OscillatorParams& p, const FrequencyGrid& grid,
                                         const LaguerreBasis& basis,
                                         Frf3Form form = Frf3Form::HarmonicProbing);

struct ProjectionCheck {
    std::vector<std::array<int, 3>> indices; // unused trailing entries are -1
    std::vector<double> coarse;
    std::vector<double> fine;
    double max_change = 0.0;                 // relative to max |c|
    bool converged = true;
};

/// Recomputes a spot subset of coefficients with dw halved (same cutoff).
ProjectionCheck check_projection(const OscillatorParams& p, const FrequencyGrid& grid,
                                 const KernelCoefficients& coeffs, Frf3Form form = Frf3Form::HarmonicProbing,
                                 double tolerance = 1e-3);

/// sum c l_{p1}(t1)...l_{pn}(tn) on the full grid t x t (n <= 2).
SampledKernel reconstruct_kernel(const KernelCoefficients& coeffs, double dt, std::size_t length);

/// h_n(t, ..., t) from the coefficients.
std::vector<double> reconstruct_diagonal(const KernelCoefficients& coeffs, std::span<const double> t);

} // namespace volpr

#include "volpr/frf.hpp"

#include "volpr/error.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace volpr {

void OscillatorParams::validate() const
{
    if (!(m > 0.0)) throw DomainError("oscillator mass must be positive");
    if (!(k1 > 0.0)) throw DomainError("oscillator linear stiffness must be positive");
    const double z = zeta();
    if (!(z > 0.0 && z < 1.0)) throw DomainError("oscillator must be underdamped (0 < zeta < 1)");
}

double OscillatorParams::omega0() const { return std::sqrt(k1 / m); }
double OscillatorParams::zeta() const { return c / (2.0 * m * omega0()); }

Complex frf1(const OscillatorParams& p, double w) { return 1.0 / Complex(p.k1 - p.m * w * w, p.c * w); }

Complex frf2(const OscillatorParams& p, double w1, double w2)
{
    return -p.k2 * frf1(p, w1) * frf1(p, w2) * frf1(p, w1 + w2);
}

namespace {

double quadratic_weight(const OscillatorParams& p, Frf3Form form)
{
    return form == Frf3Form::HarmonicProbing ? 2.0 * p.k2 / 3.0 : p.k2 / 3.0;
}

// H1 tabulated on every integer multiple of dw reachable by sums of up to
// three grid frequencies, so H2 and H3 on the grid are pure products.
class H1Table {
public:
    H1Table(const OscillatorParams& p, const FrequencyGrid& grid, int span)
        : offset_(span * grid.half_width), values_(2 * offset_ + 1)
    {
        for (int k = -offset_; k <= offset_; ++k)
            values_[k + offset_] = frf1(p, k * grid.dw);
    }
    // k is a signed frequency index, w = k dw
    Complex operator()(int k) const { return values_[k + offset_]; }

private:
    int offset_;
    std::vector<Complex> values_;
};

struct Cubic {
    const OscillatorParams& p;
    const H1Table& h1;
    double wq;

    Complex h2(int a, int b) const { return -p.k2 * h1(a) * h1(b) * h1(a + b); }
    Complex operator()(int a, int b, int c) const
    {
        const Complex ha = h1(a), hb = h1(b), hc = h1(c);
        const Complex quad = ha * h2(b, c) + hb * h2(a, c) + hc * h2(a, b);
        return -(wq * quad + p.k3 * ha * hb * hc) * h1(a + b + c);
    }
};

} // namespace

Complex frf3(const OscillatorParams& p, double w1, double w2, double w3, Frf3Form form)
{
    const Complex quad = frf1(p, w1) * frf2(p, w2, w3) + frf1(p, w2) * frf2(p, w1, w3)
                         + frf1(p, w3) * frf2(p, w1, w2);
    const Complex cubic = p.k3 * frf1(p, w1) * frf1(p, w2) * frf1(p, w3);
    return -(quadratic_weight(p, form) * quad + cubic) * frf1(p, w1 + w2 + w3);
}

std::vector<double> FrequencyGrid::omegas() const
{
    std::vector<double> w(size());
    for (int j = 0; j < size(); ++j)
        w[j] = omega(j);
    return w;
}

double FrequencyGrid::time_step() const noexcept { return 2.0 * std::numbers::pi / (size() * dw); }

FrfGrid frf_grid(const OscillatorParams& p, int order, const FrequencyGrid& grid, Frf3Form form)
{
    if (order < 1 || order > 3) throw DomainError("FRF order must be 1, 2 or 3");
    if (!(grid.dw > 0.0) || grid.half_width < 1) throw DomainError("frequency grid needs dw > 0 and M >= 1");
    const int N = grid.size();
    const int M = grid.half_width;
    const H1Table h1(p, grid, order);
    FrfGrid out;
    out.order = order;
    out.grid = grid;
    std::size_t total = 1;
    for (int i = 0; i < order; ++i)
        total *= static_cast<std::size_t>(N);
    out.values.resize(total);
    if (order == 1) {
        for (int j = 0; j < N; ++j)
            out.values[j] = h1(j - M);
    } else if (order == 2) {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                out.values[static_cast<std::size_t>(a) * N + b] =
                    -p.k2 * (h1(a - M) * h1(b - M)) * h1(a + b - 2 * M);
    } else {
        const Cubic h3{p, h1, quadratic_weight(p, form)};
        std::size_t idx = 0;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                for (int c = 0; c < N; ++c)
                    out.values[idx++] = h3(a - M, b - M, c - M);
    }
    return out;
}

std::vector<Complex> frf3_diagonal(const OscillatorParams& p, std::span<const double> omega, bool difference,
                                   Frf3Form form)
{
    std::vector<Complex> out(omega.size());
    for (std::size_t j = 0; j < omega.size(); ++j)
        out[j] = frf3(p, omega[j], omega[j], difference ? -omega[j] : omega[j], form);
    return out;
}

std::vector<double> SampledKernel::times() const
{
    std::vector<double> t(length);
    for (std::size_t i = 0; i < length; ++i)
        t[i] = static_cast<double>(i) * dt;
    return t;
}

namespace {

void require_conjugate_symmetric(const FrfGrid& frf)
{
    const int N = frf.grid.size();
    double peak = 0.0;
    for (const auto& v : frf.values)
        peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    if (frf.order == 1) {
        for (int j = 0; j < N; ++j)
            worst = std::max(worst, std::abs(frf.at(N - 1 - j) - std::conj(frf.at(j))));
    } else {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                worst = std::max(worst, std::abs(frf.at(N - 1 - a, N - 1 - b) - std::conj(frf.at(a, b))));
    }
    if (worst > 1e-10 * peak) throw DomainError("FRF grid is not conjugate-symmetric");
}

} // namespace

SampledKernel kernel_time(const FrfGrid& frf)
{
    if (frf.order < 1 || frf.order > 2)
        throw DomainError("full inverse transforms are limited to orders 1 and 2; use kernel3_diagonal_time");
    const int N = frf.grid.size();
    const int M = frf.grid.half_width;
    if (frf.values.size() != (frf.order == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N))
        throw DomainError("FRF tensor size does not match its grid");
    require_conjugate_symmetric(frf);

    std::vector<Complex> buf = frf.values;
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = frf.order == 1 ? fftw_plan_dft_1d(N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE)
                                    : fftw_plan_dft_2d(N, N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    // e^{i (j-M) dw k dt} = e^{2 pi i j k / N} e^{-2 pi i M k / N}
    const std::size_t len = static_cast<std::size_t>(M) + 1;
    std::vector<Complex> phase(len);
    for (std::size_t k = 0; k < len; ++k)
        phase[k] = std::polar(1.0, -2.0 * std::numbers::pi * M * static_cast<double>(k) / N);
    const double scale = std::pow(frf.grid.dw / (2.0 * std::numbers::pi), frf.order);

    SampledKernel out;
    out.order = frf.order;
    out.dt = frf.grid.time_step();
    out.length = len;
    double max_im = 0.0, sum_sq = 0.0;
    if (frf.order == 1) {
        out.values.resize(len);
        for (std::size_t k = 0; k < len; ++k) {
            const Complex v = buf[k] * phase[k] * scale;
            out.values[k] = v.real();
            max_im = std::max(max_im, std::abs(v.imag()));
            sum_sq += v.real() * v.real();
        }
    } else {
        out.values.resize(len * len);
        for (std::size_t a = 0; a < len; ++a)
            for (std::size_t b = 0; b < len; ++b) {
                const Complex v = buf[a * N + b] * phase[a] * phase[b] * scale;
                out.values[a * len + b] = v.real();
                max_im = std::max(max_im, std::abs(v.imag()));
                sum_sq += v.real() * v.real();
            }
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(out.values.size()));
    out.imag_residue = rms > 0.0 ? max_im / rms : max_im;
    return out;
}

std::vector<double> kernel3_diagonal_time(const OscillatorParams& p, const FrequencyGrid& grid,
                                          std::span<const double> t, Frf3Form form)
{
    const int M = grid.half_width;
    const H1Table h1(p, grid, 3);
    const Cubic h3{p, h1, quadratic_weight(p, form)};
    // G(m dw) = sum over j1 + j2 + j3 = m of H3
    std::vector<Complex> collapsed(6 * M + 1, Complex{});
    for (int a = -M; a <= M; ++a)
        for (int b = -M; b <= M; ++b)
            for (int c = -M; c <= M; ++c)
                collapsed[a + b + c + 3 * M] += h3(a, b, c);
    const double scale = std::pow(grid.dw / (2.0 * std::numbers::pi), 3);
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        Complex sum{};
        const Complex step = std::polar(1.0, grid.dw * t[i]);
        Complex rot = std::polar(1.0, -3.0 * M * grid.dw * t[i]);
        for (int m = 0; m <= 6 * M; ++m) {
            if (m % 64 == 0) rot = std::polar(1.0, (m - 3.0 * M) * grid.dw * t[i]);
            sum += collapsed[m] * rot;
            rot *= step;
        }
        out[i] = sum.real() * scale;
    }
    return out;
}

KernelCoefficients project_coefficients(const FrfGrid& frf, const LaguerreBasis& basis)
{
    const int N = frf.grid.size();
    const auto w = frf.grid.omegas();
    // L[l_p](-i w) = conj(L[l_p](i w))
    const Eigen::MatrixXcd L = eval_frequency_all(basis, w).conjugate();
    const double scale = std::pow(frf.grid.dw / (2.0 * std::numbers::pi), frf.order);
    const int P = basis.size();

    std::vector<LaguerreBasis> bases(static_cast<std::size_t>(frf.order), basis);
    auto out = KernelCoefficients::zeros(bases);
    if (frf.order == 1) {
        const Eigen::Map<const Eigen::VectorXcd> h(frf.values.data(), N);
        const Eigen::VectorXcd c = L * h;
        for (int p = 0; p < P; ++p)
            out.values[p] = c(p).real() * scale;
    } else if (frf.order == 2) {
        using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const Eigen::Map<const RowMajor> h(frf.values.data(), N, N);
        const Eigen::MatrixXcd c = L * h * L.transpose();
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                out.values[static_cast<std::size_t>(p) * P + q] = c(p, q).real() * scale;
    } else {
        using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        std::vector<Eigen::MatrixXcd> acc(P, Eigen::MatrixXcd::Zero(P, P));
        const std::size_t slab = static_cast<std::size_t>(N) * N;
        for (int a = 0; a < N; ++a) {
            const Eigen::Map<const RowMajor> h(frf.values.data() + a * slab, N, N);
            const Eigen::MatrixXcd t = L * h * L.transpose();
            for (int p = 0; p < P; ++p)
                acc[p] += L(p, a) * t;
        }
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                for (int r = 0; r < P; ++r)
                    out.values[(static_cast<std::size_t>(p) * P + q) * P + r] = acc[p](q, r).real() * scale;
    }
    return out;
}

KernelCoefficients project_coefficients3(const OscillatorParams& p, const FrequencyGrid& grid,
                                         const LaguerreBasis& basis, Frf3Form form)
{
    const int N = grid.size();
    const int M = grid.half_width;
    const int P = basis.size();
    const Eigen::MatrixXcd L = eval_frequency_all(basis, grid.omegas()).conjugate();
    const Eigen::MatrixXcd Lt = L.transpose();
    const H1Table h1(p, grid, 3);
    const Cubic h3{p, h1, quadratic_weight(p, form)};

    std::vector<Eigen::MatrixXcd> acc(P, Eigen::MatrixXcd::Zero(P, P));
    Eigen::MatrixXcd slab(N, N);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b)
            for (int c = b; c < N; ++c) {
                const Complex v = h3(a - M, b - M, c - M);
                slab(b, c) = v;
                slab(c, b) = v;
            }
        const Eigen::MatrixXcd t = L * slab * Lt;
        for (int q = 0; q < P; ++q)
            acc[q] += L(q, a) * t;
    }
    const double scale = std::pow(grid.dw / (2.0 * std::numbers::pi), 3);
    auto out = KernelCoefficients::zeros({basis, basis, basis});
    for (int q = 0; q < P; ++q)
        for (int r = 0; r < P; ++r)
            for (int s = 0; s < P; ++s)
                out.values[(static_cast<std::size_t>(q) * P + r) * P + s] = acc[q](r, s).real() * scale;
    return out;
}

ProjectionCheck check_projection(const OscillatorParams& p, const FrequencyGrid& grid,
                                 const KernelCoefficients& coeffs, Frf3Form form, double tolerance)
{
    const int n = coeffs.order;
    const int R = coeffs.bases.at(0).max_order();
    const int mid = R / 2;
    ProjectionCheck check;
    if (n == 1) {
        check.indices = {{0, -1, -1}, {mid, -1, -1}, {R, -1, -1}};
    } else if (n == 2) {
        check.indices = {{0, 0, -1}, {mid, mid, -1}, {R, R, -1}, {0, R, -1}};
    } else {
        check.indices = {{0, 0, 0}, {1, 0, 0}, {mid, mid, mid}, {R, R, R}};
    }

    const FrequencyGrid fine{grid.dw / 2.0, grid.half_width * 2};
    const int N = fine.size();
    const int M = fine.half_width;
    const Eigen::MatrixXcd L = eval_frequency_all(coeffs.bases[0], fine.omegas()).conjugate();
    const H1Table h1(p, fine, n);
    const Cubic h3{p, h1, quadratic_weight(p, form)};
    const std::size_t S = check.indices.size();
    std::vector<Complex> sums(S, Complex{});

    if (n == 1) {
        for (int a = 0; a < N; ++a)
            for (std::size_t s = 0; s < S; ++s)
                sums[s] += h1(a - M) * L(check.indices[s][0], a);
    } else if (n == 2) {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                const Complex h = -p.k2 * h1(a - M) * h1(b - M) * h1(a + b - 2 * M);
                for (std::size_t s = 0; s < S; ++s)
                    sums[s] += h * L(check.indices[s][0], a) * L(check.indices[s][1], b);
            }
    } else {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                for (int c = 0; c < N; ++c) {
                    const Complex h = h3(a - M, b - M, c - M);
                    for (std::size_t s = 0; s < S; ++s)
                        sums[s] += h * L(check.indices[s][0], a) * L(check.indices[s][1], b)
                                   * L(check.indices[s][2], c);
                }
    }

    const double scale = std::pow(fine.dw / (2.0 * std::numbers::pi), n);
    double peak = 0.0;
    for (double v : coeffs.values)
        peak = std::max(peak, std::abs(v));
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<int> idx(check.indices[s].begin(), check.indices[s].begin() + n);
        const double coarse = coeffs.values[coeffs.flat_index(idx)];
        const double refined = sums[s].real() * scale;
        check.coarse.push_back(coarse);
        check.fine.push_back(refined);
        check.max_change = std::max(check.max_change, std::abs(refined - coarse) / (peak > 0.0 ? peak : 1.0));
    }
    check.converged = check.max_change <= tolerance;
    return check;
}

SampledKernel reconstruct_kernel(const KernelCoefficients& coeffs, double dt, std::size_t length)
{
    if (coeffs.order > 2) throw DomainError("full kernel synthesis is limited to orders 1 and 2");
    SampledKernel out;
    out.order = coeffs.order;
    out.dt = dt;
    out.length = length;
    std::vector<double> t(length);
    for (std::size_t i = 0; i < length; ++i)
        t[i] = static_cast<double>(i) * dt;
    const Eigen::MatrixXd L0 = eval_time_all(coeffs.bases[0], t);
    if (coeffs.order == 1) {
        const Eigen::Map<const Eigen::VectorXd> c(coeffs.values.data(), coeffs.bases[0].size());
        const Eigen::VectorXd h = L0 * c;
        out.values.assign(h.data(), h.data() + h.size());
    } else {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const Eigen::MatrixXd L1 = eval_time_all(coeffs.bases[1], t);
        const Eigen::Map<const RowMajor> c(coeffs.values.data(), coeffs.bases[0].size(), coeffs.bases[1].size());
        const RowMajor h = L0 * c * L1.transpose();
        out.values.assign(h.data(), h.data() + h.size());
    }
    return out;
}

std::vector<double> reconstruct_diagonal(const KernelCoefficients& coeffs, std::span<const double> t)
{
    std::vector<Eigen::MatrixXd> L;
    for (const auto& b : coeffs.bases)
        L.push_back(eval_time_all(b, t));
    std::vector<double> out(t.size(), 0.0);
    const auto n0 = coeffs.extent(0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        double sum = 0.0;
        if (coeffs.order == 1) {
            for (std::size_t p = 0; p < n0; ++p)
                sum += coeffs.values[p] * L[0](row, p);
        } else if (coeffs.order == 2) {
            const auto n1 = coeffs.extent(1);
            for (std::size_t p = 0; p < n0; ++p)
                for (std::size_t q = 0; q < n1; ++q)
                    sum += coeffs.values[p * n1 + q] * L[0](row, p) * L[1](row, q);
        } else {
            const auto n1 = coeffs.extent(1), n2 = coeffs.extent(2);
            for (std::size_t p = 0; p < n0; ++p)
                for (std::size_t q = 0; q < n1; ++q) {
                    double inner = 0.0;
                    for (std::size_t r = 0; r < n2; ++r)
                        inner += coeffs.values[(p * n1 + q) * n2 + r] * L[2](row, r);
                    sum += inner * L[0](row, p) * L[1](row, q);
                }
        }
        out[i] = sum;
    }
    return out;
}

} // namespace volpr

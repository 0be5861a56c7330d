#include "volpr/error.hpp"
#include "volpr/identify.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace volpr;
using std::numbers::pi;

namespace {

// y = sum c1_p x_p + sum c2_pq x_p x_q from the regressors themselves.
std::vector<double> synthetic_output(const Eigen::MatrixXd& x, const KernelCoefficients& c1,
                                     const KernelCoefficients& c2)
{
    const int P = static_cast<int>(x.cols());
    std::vector<double> y(static_cast<std::size_t>(x.rows()), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double v = 0.0;
        for (int p = 0; p < P; ++p) {
            v += c1(p) * x(i, p);
            for (int q = 0; q < P; ++q)
                v += c2(p, q) * x(i, p) * x(i, q);
        }
        y[static_cast<std::size_t>(i)] = v;
    }
    return y;
}

KernelCoefficients random_symmetric(const LaguerreBasis& b, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    auto c = KernelCoefficients::zeros({b, b});
    const int P = b.size();
    for (int p = 0; p < P; ++p)
        for (int q = p; q < P; ++q) {
            const double v = n(rng);
            c.values[static_cast<std::size_t>(p) * P + q] = v;
            c.values[static_cast<std::size_t>(q) * P + p] = v;
        }
    return c;
}

} // namespace

TEST(Identify, ImpulseReproducesBasis)
{
    const LaguerreBasis b(2.0, 6);
    const double dt = 0.01;
    SampledSignal f{std::vector<double>(1000, 0.0), dt};
    f.samples[1] = 1.0 / dt;
    const auto x = regressors(f, b);
    const auto t = f.times();
    for (int p = 0; p <= 6; ++p)
        for (std::size_t i = 2; i < t.size(); ++i)
            ASSERT_NEAR(x(static_cast<Eigen::Index>(i), p), eval_time(b, p, t[i - 1]), 1e-11) << p << " " << i;
}

TEST(Identify, RegressorsStartAtZero)
{
    const LaguerreBasis b(2.0, 10);
    const auto f = white_noise(0.01, 0.01, 500, 3);
    const auto x = regressors(f, b);
    EXPECT_EQ(x.row(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Identify, RegressorsMatchClosedForm)
{
    const LaguerreBasis b(2.0, 12);
    std::vector<double> A{0.7, 0.4, 0.3}, W{1.1, 2.9, 5.3}, th{0.3, 1.9, 4.0};
    const auto m = multitone(A, W, th, 0.002, 20.0);
    const auto x = regressors(m.sampled, b);
    const auto t = m.sampled.times();
    for (int p = 0; p <= 12; ++p) {
        const auto closed = evaluate_real(filtered_input(b, p, m.exact).sum, t);
        std::vector<double> col(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            col[i] = x(static_cast<Eigen::Index>(i), p);
        EXPECT_LE(oracle::rms_diff(col, closed), 1e-4 * oracle::rms(closed)) << "p=" << p;
    }
}

TEST(Identify, RegressorsAreLinear)
{
    const LaguerreBasis b(1.5, 8);
    const auto f = white_noise(0.01, 0.01, 800, 4);
    const auto g = white_noise(0.01, 0.01, 800, 5);
    SampledSignal h{std::vector<double>(800), 0.01};
    for (std::size_t i = 0; i < 800; ++i)
        h.samples[i] = 2.0 * f.samples[i] - 0.5 * g.samples[i];
    const Eigen::MatrixXd lhs = regressors(h, b);
    const Eigen::MatrixXd rhs = 2.0 * regressors(f, b) - 0.5 * regressors(g, b);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(Identify, SyntheticRoundTrip)
{
    const LaguerreBasis b(2.0, 6);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    auto c1 = KernelCoefficients::zeros({b});
    for (auto& v : c1.values)
        v = n(rng);
    const auto c2 = random_symmetric(b, rng);

    const auto f = white_noise(0.05, 0.01, 20000, 21);
    const auto y = synthetic_output(regressors(f, b), c1, c2);
    const auto model = fit({f.samples, y, f.dt}, b);

    ASSERT_EQ(model.coefficients.size(), 2u);
    EXPECT_EQ(model.unknowns, 7 + 28);
    EXPECT_EQ(model.rank, model.unknowns);
    EXPECT_LE(model.relative_residual, 1e-10);
    for (std::size_t i = 0; i < c1.values.size(); ++i)
        EXPECT_NEAR(model.coefficients[0].values[i], c1.values[i], 1e-8);
    for (std::size_t i = 0; i < c2.values.size(); ++i)
        EXPECT_NEAR(model.coefficients[1].values[i], c2.values[i], 1e-8);
    EXPECT_EQ(model.coefficients[1].symmetry_defect(), 0.0);
}

TEST(Identify, ZeroOutputGivesZeroModel)
{
    const LaguerreBasis b(2.0, 5);
    const auto f = white_noise(0.05, 0.01, 5000, 2);
    const auto model = fit({f.samples, std::vector<double>(f.size(), 0.0), f.dt}, b);
    for (const auto& c : model.coefficients)
        for (double v : c.values)
            EXPECT_EQ(v, 0.0);
}

TEST(Identify, FirstOrderOnly)
{
    const LaguerreBasis b(2.0, 8);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    auto c1 = KernelCoefficients::zeros({b});
    for (auto& v : c1.values)
        v = n(rng);
    const auto f = white_noise(0.05, 0.01, 4000, 8);
    const auto x = regressors(f, b);
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(c1.values.data(), 9);
    const Eigen::VectorXd y = x * c;
    const auto model = fit({f.samples, std::vector<double>(y.data(), y.data() + y.size()), f.dt}, b, {.order = 1});
    ASSERT_EQ(model.coefficients.size(), 1u);
    for (int p = 0; p <= 8; ++p)
        EXPECT_NEAR(model.coefficients[0](p), c1(p), 1e-9);
}

// A single sinusoid excites too few directions for 66 unknowns.
TEST(Identify, PoorExcitationIsRankDeficient)
{
    const LaguerreBasis b(2.0, 10);
    const auto t = uniform_times(0.01, 200.0);
    IoRecord r{std::vector<double>(t.size()), std::vector<double>(t.size()), 0.01};
    for (std::size_t i = 0; i < t.size(); ++i) {
        r.input[i] = std::sin(pi * t[i]);
        r.output[i] = r.input[i];
    }
    EXPECT_THROW(fit(r, b), RankDeficientError);
    IoRecord tiny{std::vector<double>(10, 1.0), std::vector<double>(10, 1.0), 0.01};
    EXPECT_THROW(fit(tiny, b), RankDeficientError);
}

TEST(Identify, RidgeShrinksTowardZero)
{
    const LaguerreBasis b(2.0, 4);
    std::mt19937_64 rng(5);
    auto c1 = KernelCoefficients::zeros({b});
    c1.values = {1.0, -0.5, 0.25, 0.1, -0.2};
    const auto c2 = random_symmetric(b, rng);
    const auto f = white_noise(0.05, 0.01, 5000, 6);
    const auto y = synthetic_output(regressors(f, b), c1, c2);
    const auto plain = fit({f.samples, y, f.dt}, b);
    const auto ridge = fit({f.samples, y, f.dt}, b, {.order = 2, .ridge = 1.0});
    double n_plain = 0.0, n_ridge = 0.0;
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < plain.coefficients[k].values.size(); ++i) {
            n_plain += std::pow(plain.coefficients[k].values[i], 2);
            n_ridge += std::pow(ridge.coefficients[k].values[i], 2);
        }
    EXPECT_LT(n_ridge, n_plain);
    EXPECT_GT(ridge.relative_residual, plain.relative_residual);
}

TEST(Identify, PredictUsesIdentifiedOrders)
{
    const LaguerreBasis b(2.0, 4);
    std::mt19937_64 rng(9);
    auto c1 = KernelCoefficients::zeros({b});
    c1.values = {0.5, 0.1, -0.3, 0.2, 0.05};
    const auto c2 = random_symmetric(b, rng);
    IdentifiedKernels model;
    model.coefficients = {c1, c2};
    const auto y = predict(model, sinusoid_poles(1.0, 2.0));
    ASSERT_EQ(y.orders.size(), 2u);

    // closed form against the sampled regressor model on a fine grid
    const double dt = 1e-3;
    const auto t = uniform_times(dt, 15.0);
    SampledSignal f{std::vector<double>(t.size()), dt};
    for (std::size_t i = 0; i < t.size(); ++i)
        f.samples[i] = std::sin(2.0 * t[i]);
    const auto ref = synthetic_output(regressors(f, b), c1, c2);
    const auto closed = evaluate_real(y.total, t);
    EXPECT_LE(oracle::rms_diff(closed, ref), 1e-5 * oracle::rms(ref));
}

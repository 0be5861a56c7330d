#include "volpr/engine.hpp"

#include "volpr/error.hpp"

#include <cmath>
#include <map>

namespace volpr {

namespace {

using Quad = ExtReal;
using QuadComplex = ExtComplex;

QuadComplex to_quad(Complex z) { return QuadComplex(Quad(z.real()), Quad(z.imag())); }

void check_collision(const LaguerreBasis& basis, const ExponentialSignal& f)
{
    for (const auto& c : f.components) {
        if (std::abs(c.lambda + basis.rate()) < kCollisionTolerance) {
            throw PoleCollisionError("excitation pole " + std::to_string(c.lambda.real()) + "+"
                                     + std::to_string(c.lambda.imag())
                                     + "i coincides with the Laguerre pole -a; perturb the damping rate a by about 1%");
        }
    }
}

void check_order(const LaguerreBasis& basis, int p)
{
    if (p < 0 || p > basis.max_order()) throw DomainError("Laguerre order outside the basis");
}

// b_p(k) = (-1)^{p-k} C(p,k) (2a)^{k+1/2}, exact binomials in quad precision.
std::vector<Quad> quad_laplace_coeffs(double rate, int p)
{
    const Quad two_a = Quad(2) * Quad(rate);
    std::vector<Quad> b(p + 1);
    Quad binom = 1;
    Quad power = boost::multiprecision::sqrt(two_a);
    for (int k = 0; k <= p; ++k) {
        b[k] = ((p - k) % 2 == 0) ? binom * power : -binom * power;
        binom = binom * (p - k) / (k + 1);
        power *= two_a;
    }
    return b;
}

} // namespace

std::vector<ExtComplex> residues_gamma(const LaguerreBasis& basis, int p, const ExponentialSignal& f)
{
    check_order(basis, p);
    check_collision(basis, f);
    const Quad a = basis.rate();
    const Quad root = boost::multiprecision::sqrt(Quad(2) * a);
    std::vector<ExtComplex> gamma;
    gamma.reserve(f.size());
    for (const auto& c : f.components) {
        const QuadComplex lam = to_quad(c.lambda);
        const QuadComplex ratio = (lam - a) / (lam + a);
        QuadComplex v = QuadComplex(root) / (lam + a);
        for (int i = 0; i < p; ++i)
            v *= ratio;
        if (p % 2 == 1) v = -v;
        gamma.push_back(to_quad(c.alpha) * v);
    }
    return gamma;
}

std::vector<ExtComplex> coeffs_beta(const LaguerreBasis& basis, int p, const ExponentialSignal& f)
{
    check_order(basis, p);
    check_collision(basis, f);
    const auto b = quad_laplace_coeffs(basis.rate(), p);
    std::vector<QuadComplex> beta(p + 1, QuadComplex(0));
    std::vector<QuadComplex> S(p + 1);
    for (const auto& c : f.components) {
        const QuadComplex u = QuadComplex(1) / (to_quad(c.lambda) + Quad(basis.rate()));
        const QuadComplex alpha = to_quad(c.alpha);
        S[p] = b[p];
        for (int k = p - 1; k >= 0; --k)
            S[k] = b[k] + u * S[k + 1];
        for (int k = 0; k <= p; ++k)
            beta[k] -= alpha * u * S[k];
    }
    return beta;
}

FilteredInput filtered_input(const LaguerreBasis& basis, int p, const ExponentialSignal& f,
                             std::uint16_t basis_source)
{
    FilteredInput x;
    x.order = p;
    x.beta = coeffs_beta(basis, p, f);
    x.gamma = residues_gamma(basis, p, f);

    std::vector<PolyExpTerm> terms;
    terms.reserve(x.beta.size() + x.gamma.size());
    ExtReal factorial = 1;
    for (int k = 0; k <= p; ++k) {
        if (k > 0) factorial *= k;
        PolyExpTerm t;
        t.coefficient = x.beta[k] / factorial;
        t.power = k;
        t.exponent = Complex(-basis.rate(), 0.0);
        t.tags.push_back({PoleOrigin::SystemBasis, basis_source});
        terms.push_back(std::move(t));
    }
    for (std::size_t l = 0; l < x.gamma.size(); ++l) {
        PolyExpTerm t;
        t.coefficient = x.gamma[l];
        t.exponent = f.components[l].lambda;
        t.tags.push_back({PoleOrigin::Excitation, static_cast<std::uint16_t>(l)});
        terms.push_back(std::move(t));
    }
    x.sum = PolyExpSum(std::move(terms), f.horizon);
    return x;
}

namespace {

// Filtered inputs keyed by (rate, order); one SystemBasis source id per
// distinct rate.
class FilteredInputCache {
public:
    explicit FilteredInputCache(const ExponentialSignal& f) : f_(f) {}

    const PolyExpSum& get(const LaguerreBasis& basis, int p)
    {
        auto it = rates_.find(basis.rate());
        if (it == rates_.end()) it = rates_.emplace(basis.rate(), static_cast<std::uint16_t>(rates_.size())).first;
        auto key = std::make_pair(basis.rate(), p);
        auto found = sums_.find(key);
        if (found == sums_.end())
            found = sums_.emplace(key, filtered_input(basis, p, f_, it->second).sum).first;
        return found->second;
    }

private:
    const ExponentialSignal& f_;
    std::map<double, std::uint16_t> rates_;
    std::map<std::pair<double, int>, PolyExpSum> sums_;
};

// Products of filtered inputs commute, so over a shared basis the sum over
// all index orderings folds onto p <= q <= r with the coefficients of every
// distinct permutation added together. This holds for any tensor.
double permutation_sum(const KernelCoefficients& c, int p, int q, int r)
{
    if (p == q && q == r) return c(p, p, p);
    if (p == q) return c(p, p, r) + c(p, r, p) + c(r, p, p);
    if (q == r) return c(p, q, q) + c(q, p, q) + c(q, q, p);
    return c(p, q, r) + c(p, r, q) + c(q, p, r) + c(q, r, p) + c(r, p, q) + c(r, q, p);
}

void check_term_bound(const PolyExpSum& y, const KernelCoefficients& c, std::size_t n_poles)
{
    double bound = 1.0;
    for (const auto& b : c.bases)
        bound *= static_cast<double>(b.size()) + static_cast<double>(n_poles);
    if (static_cast<double>(y.size()) > bound)
        throw InvariantError("response term count " + std::to_string(y.size())
                             + " exceeds the product bound; like terms failed to merge");
}

} // namespace

ResponseOrders assemble_response(std::span<const KernelCoefficients> coefficients,
                                 const ExponentialSignal& f, int N)
{
    if (N < 1 || N > 3) throw DomainError("series order N must be 1, 2 or 3");
    if (static_cast<int>(coefficients.size()) < N)
        throw DomainError("coefficients are missing for the requested series order");
    for (int n = 1; n <= N; ++n) {
        const auto& c = coefficients[n - 1];
        if (c.order != n || static_cast<int>(c.bases.size()) != n)
            throw DomainError("coefficient tensor " + std::to_string(n) + " has order "
                              + std::to_string(c.order));
    }

    FilteredInputCache cache(f);
    ResponseOrders out;
    const double T = f.horizon;

    {
        const auto& c = coefficients[0];
        PolyExpAccumulator acc(T);
        for (int p = 0; p < c.bases[0].size(); ++p)
            if (c(p) != 0.0) acc.add(cache.get(c.bases[0], p), c(p));
        out.orders.push_back(std::move(acc).finish());
    }
    if (N >= 2) {
        const auto& c = coefficients[1];
        PolyExpAccumulator acc(T);
        const bool fold = c.bases[0] == c.bases[1];
        for (int p = 0; p < c.bases[0].size(); ++p) {
            PolyExpAccumulator inner(T);
            for (int q = fold ? p : 0; q < c.bases[1].size(); ++q) {
                const double w = fold && q != p ? c(p, q) + c(q, p) : c(p, q);
                if (w != 0.0) inner.add(cache.get(c.bases[1], q), w);
            }
            const PolyExpSum w = std::move(inner).finish();
            if (!w.empty()) acc.add_product(cache.get(c.bases[0], p), w);
        }
        out.orders.push_back(std::move(acc).finish());
    }
    if (N >= 3) {
        const auto& c = coefficients[2];
        PolyExpAccumulator acc(T);
        const bool fold = c.bases[0] == c.bases[1] && c.bases[1] == c.bases[2];
        for (int p = 0; p < c.bases[0].size(); ++p) {
            PolyExpAccumulator middle(T);
            for (int q = fold ? p : 0; q < c.bases[1].size(); ++q) {
                PolyExpAccumulator inner(T);
                for (int r = fold ? q : 0; r < c.bases[2].size(); ++r) {
                    const double w = fold ? permutation_sum(c, p, q, r) : c(p, q, r);
                    if (w != 0.0) inner.add(cache.get(c.bases[2], r), w);
                }
                const PolyExpSum w = std::move(inner).finish();
                if (!w.empty()) middle.add_product(cache.get(c.bases[1], q), w);
            }
            const PolyExpSum v = std::move(middle).finish();
            if (!v.empty()) acc.add_product(cache.get(c.bases[0], p), v);
        }
        out.orders.push_back(std::move(acc).finish());
    }

    PolyExpAccumulator total(T);
    for (int n = 0; n < N; ++n) {
        check_term_bound(out.orders[n], coefficients[n], f.size());
        total.add(out.orders[n]);
    }
    out.total = std::move(total).finish();
    return out;
}

PolyExpParts decompose_response(const PolyExpSum& y) { return classify(y); }

ResponseTable tabulate(const ResponseOrders& response, std::span<const double> t)
{
    ResponseTable table;
    table.t.assign(t.begin(), t.end());
    for (const auto& y : response.orders)
        table.orders.push_back(evaluate_real(y, t));
    table.total = evaluate_real(response.total, t);
    const auto parts = decompose_response(response.total);
    // conjugate partners always share a class, so each part is real as well
    table.natural = evaluate_real(parts.natural, t);
    table.cross = evaluate_real(parts.cross, t);
    table.forced = evaluate_real(parts.forced, t);
    return table;
}

} // namespace volpr

#include "volpr/polyexp.hpp"

#include "volpr/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace volpr {

namespace {

constexpr double kMergeTolerance = 1e-12;

using LComplex = std::complex<long double>;

// Complex multiplication goes through the Annex G NaN-recovery path;
// operands here are always finite.
inline ExtComplex mul(const ExtComplex& a, const ExtComplex& b)
{
    const ExtReal ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
    return {ar * br - ai * bi, ar * bi + ai * br};
}

inline LComplex mul(LComplex a, LComplex b) noexcept
{
    return {a.real() * b.real() - a.imag() * b.imag(),
            a.real() * b.imag() + a.imag() * b.real()};
}

inline LComplex narrow(const ExtComplex& z)
{
    return {static_cast<long double>(z.real()), static_cast<long double>(z.imag())};
}

const ExtComplex kZero{0};

inline std::uint64_t bits(double x) noexcept
{
    return std::bit_cast<std::uint64_t>(x + 0.0); // folds -0.0 into +0.0
}

struct TermKey {
    int power;
    ResponseClass cls;
    std::uint64_t re;
    std::uint64_t im;

    bool operator==(const TermKey&) const = default;
};

struct TermKeyHash {
    std::size_t operator()(const TermKey& k) const noexcept
    {
        auto mix = [](std::uint64_t x) {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        };
        std::uint64_t h = mix(k.re);
        h = mix(h ^ k.im);
        h = mix(h ^ (static_cast<std::uint64_t>(k.power) << 8 | static_cast<std::uint64_t>(k.cls)));
        return static_cast<std::size_t>(h);
    }
};

struct TagFlags {
    bool system = false;
    bool excitation = false;
};

TagFlags flags_of(const TagSet& tags) noexcept
{
    TagFlags f;
    for (const auto& t : tags) {
        if (t.origin == PoleOrigin::SystemBasis)
            f.system = true;
        else
            f.excitation = true;
    }
    return f;
}

ResponseClass class_of(TagFlags f) noexcept
{
    if (f.system && f.excitation) return ResponseClass::Cross;
    if (f.system) return ResponseClass::Natural;
    if (f.excitation) return ResponseClass::Forced;
    return ResponseClass::Untagged;
}

bool close(Complex a, Complex b) noexcept
{
    if (a == b) return true;
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= kMergeTolerance * scale;
}

void check_time(double t, double horizon)
{
    if (!(t >= 0.0) || !(t < horizon)) {
        throw DomainError("evaluation time " + std::to_string(t)
                          + " outside validity window [0, " + std::to_string(horizon) + ")");
    }
}

} // namespace

TagSet merge_tags(const TagSet& a, const TagSet& b)
{
    TagSet out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

ResponseClass classify_tags(const TagSet& tags) noexcept { return class_of(flags_of(tags)); }

LComplex PolyExpTerm::value(double t) const
{
    const LComplex e = std::exp(LComplex(exponent) * static_cast<long double>(t));
    long double tk = 1.0L;
    for (int i = 0; i < power; ++i)
        tk *= t;
    return mul(narrow(coefficient), e) * tk;
}

// ---------------------------------------------------------------------------
// PolyExpSum

PolyExpSum::PolyExpSum(double horizon) : horizon_(horizon) {}

PolyExpSum::PolyExpSum(std::vector<PolyExpTerm> terms, double horizon)
    : terms_(std::move(terms)), horizon_(horizon)
{
    for (auto& t : terms_) {
        if (t.power < 0) throw InvariantError("negative power in polynomial-exponential term");
        std::sort(t.tags.begin(), t.tags.end());
    }
    canonicalize();
}

PolyExpSum PolyExpSum::unit()
{
    PolyExpSum s;
    s.terms_.push_back(PolyExpTerm{ExtComplex(1), 0, {0.0, 0.0}, {}});
    return s;
}

PolyExpSum& PolyExpSum::operator+=(const PolyExpSum& other)
{
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    horizon_ = std::min(horizon_, other.horizon_);
    canonicalize();
    return *this;
}

PolyExpSum& PolyExpSum::operator*=(ExtComplex scale)
{
    if (scale == kZero) {
        terms_.clear();
        return *this;
    }
    for (auto& t : terms_)
        t.coefficient = mul(t.coefficient, scale);
    return *this;
}

// Sort by (class, power, Re, Im); cluster runs whose real parts agree to the
// merge tolerance, re-sort each run by imaginary part and merge neighbours.
void PolyExpSum::canonicalize()
{
    std::erase_if(terms_, [](const PolyExpTerm& t) {
        return t.coefficient == kZero;
    });
    if (terms_.empty()) return;

    std::vector<ResponseClass> cls(terms_.size());
    std::vector<std::size_t> order(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        cls[i] = classify_tags(terms_[i].tags);
        order[i] = i;
    }
    auto by_re = [&](std::size_t a, std::size_t b) {
        const auto& x = terms_[a];
        const auto& y = terms_[b];
        if (cls[a] != cls[b]) return cls[a] < cls[b];
        if (x.power != y.power) return x.power < y.power;
        if (x.exponent.real() != y.exponent.real()) return x.exponent.real() < y.exponent.real();
        return x.exponent.imag() < y.exponent.imag();
    };
    std::sort(order.begin(), order.end(), by_re);

    std::vector<PolyExpTerm> out;
    out.reserve(terms_.size());
    std::size_t begin = 0;
    while (begin < order.size()) {
        std::size_t end = begin + 1;
        while (end < order.size()) {
            const auto& prev = terms_[order[end - 1]];
            const auto& cur = terms_[order[end]];
            if (cls[order[end]] != cls[order[begin]] || cur.power != terms_[order[begin]].power)
                break;
            const double scale = std::max(std::abs(prev.exponent), std::abs(cur.exponent));
            if (cur.exponent.real() - prev.exponent.real() > kMergeTolerance * scale) break;
            ++end;
        }
        std::stable_sort(order.begin() + begin, order.begin() + end, [&](std::size_t a, std::size_t b) {
            return terms_[a].exponent.imag() < terms_[b].exponent.imag();
        });
        // Chains of neighbours within tolerance form one term. The kept
        // exponent depends only on the set (smallest |Im|, then smallest Re,
        // on the real axis if the chain straddles it), so a cluster and its
        // mirror image keep conjugate exponents and conjugate sums stay closed.
        for (std::size_t i = begin; i < end;) {
            std::size_t j = i + 1;
            while (j < end && close(terms_[order[j - 1]].exponent, terms_[order[j]].exponent))
                ++j;
            std::size_t keep = i;
            for (std::size_t m = i + 1; m < j; ++m) {
                const Complex x = terms_[order[m]].exponent, y = terms_[order[keep]].exponent;
                if (std::abs(x.imag()) < std::abs(y.imag())
                    || (std::abs(x.imag()) == std::abs(y.imag()) && x.real() < y.real()))
                    keep = m;
            }
            PolyExpTerm merged = terms_[order[keep]];
            merged.coefficient = kZero;
            for (std::size_t m = i; m < j; ++m)
                merged.coefficient += terms_[order[m]].coefficient;
            if (terms_[order[i]].exponent.imag() < 0.0 && terms_[order[j - 1]].exponent.imag() > 0.0)
                merged.exponent.imag(0.0);
            out.push_back(std::move(merged));
            i = j;
        }
        begin = end;
    }
    std::erase_if(out, [](const PolyExpTerm& t) { return t.coefficient == kZero; });
    std::sort(out.begin(), out.end(), [](const PolyExpTerm& x, const PolyExpTerm& y) {
        const auto cx = classify_tags(x.tags);
        const auto cy = classify_tags(y.tags);
        if (cx != cy) return cx < cy;
        if (x.power != y.power) return x.power < y.power;
        if (x.exponent.real() != y.exponent.real()) return x.exponent.real() < y.exponent.real();
        return x.exponent.imag() < y.exponent.imag();
    });
    terms_ = std::move(out);
}

// ---------------------------------------------------------------------------
// PolyExpAccumulator

struct PolyExpAccumulator::Impl {
    double horizon;
    std::vector<PolyExpTerm> terms;
    std::unordered_map<TermKey, std::size_t, TermKeyHash> index;

    void insert(const ExtComplex& coefficient, int power, Complex exponent, ResponseClass cls,
                const TagSet* a, const TagSet* b)
    {
        const TermKey key{power, cls, bits(exponent.real()), bits(exponent.imag())};
        auto [it, inserted] = index.try_emplace(key, terms.size());
        if (!inserted) {
            terms[it->second].coefficient += coefficient;
            return;
        }
        PolyExpTerm t;
        t.coefficient = coefficient;
        t.power = power;
        t.exponent = exponent;
        t.tags = b ? merge_tags(*a, *b) : *a;
        terms.push_back(std::move(t));
    }
};

PolyExpAccumulator::PolyExpAccumulator(double horizon) : impl_(new Impl{horizon, {}, {}}) {}
PolyExpAccumulator::~PolyExpAccumulator() { delete impl_; }
PolyExpAccumulator::PolyExpAccumulator(PolyExpAccumulator&& o) noexcept : impl_(o.impl_)
{
    o.impl_ = nullptr;
}
PolyExpAccumulator& PolyExpAccumulator::operator=(PolyExpAccumulator&& o) noexcept
{
    std::swap(impl_, o.impl_);
    return *this;
}

void PolyExpAccumulator::add(const PolyExpTerm& term, ExtComplex scale)
{
    TagSet sorted = term.tags;
    std::sort(sorted.begin(), sorted.end());
    impl_->insert(mul(term.coefficient, scale), term.power, term.exponent,
                  classify_tags(sorted), &sorted, nullptr);
}

void PolyExpAccumulator::add(const PolyExpSum& sum, ExtComplex scale)
{
    impl_->horizon = std::min(impl_->horizon, sum.horizon());
    for (const auto& t : sum.terms())
        impl_->insert(mul(t.coefficient, scale), t.power, t.exponent, classify_tags(t.tags),
                      &t.tags, nullptr);
}

void PolyExpAccumulator::add_product(const PolyExpSum& a, const PolyExpSum& b, ExtComplex scale)
{
    impl_->horizon = std::min({impl_->horizon, a.horizon(), b.horizon()});
    std::vector<TagFlags> fb(b.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        fb[j] = flags_of(b.terms()[j].tags);
    for (const auto& ta : a.terms()) {
        const ExtComplex ca = mul(ta.coefficient, scale);
        const TagFlags fa = flags_of(ta.tags);
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto& tb = b.terms()[j];
            const ResponseClass cls =
                class_of({fa.system || fb[j].system, fa.excitation || fb[j].excitation});
            impl_->insert(mul(ca, tb.coefficient), ta.power + tb.power, ta.exponent + tb.exponent,
                          cls, &ta.tags, &tb.tags);
        }
    }
}

std::size_t PolyExpAccumulator::size() const noexcept { return impl_->terms.size(); }

PolyExpSum PolyExpAccumulator::finish() &&
{
    PolyExpSum s(impl_->horizon);
    s.terms_ = std::move(impl_->terms);
    impl_->index.clear();
    s.canonicalize();
    return s;
}

PolyExpSum multiply(const PolyExpSum& a, const PolyExpSum& b)
{
    PolyExpAccumulator acc(std::min(a.horizon(), b.horizon()));
    acc.add_product(a, b);
    return std::move(acc).finish();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Terms sharing an exponent, as a polynomial in t. Polynomials of positive
// degree can cancel internally: products of high-order Laguerre responses
// have monomial coefficients far larger than their sum. Evaluation runs in
// long double with a running Horner error bound; points whose bound is not
// negligible against the scale of the series are recomputed from Taylor
// expansions about the nearest anchor point, computed once in quad precision
// and cached.
constexpr long double kAnchorSpacing = 1.0L;
constexpr long double kMaxCancellation = 100.0L;
constexpr long double kTargetAccuracy = 1e-16L;
// Decaying groups are dropped once their bound falls below this fraction of
// the tolerance. Past t = degree/decay every t^k e^{-decay t} term decreases,
// so the bound stays below it from then on.
constexpr long double kNegligible = 1e-3L;

struct ExponentGroup {
    Complex exponent;
    std::vector<ExtComplex> poly;     // poly[k] multiplies t^k
    std::vector<LComplex> near_poly;  // poly narrowed to long double
    std::vector<long double> magnitude;
    std::unordered_map<long, std::vector<LComplex>> anchors;
    // beyond this time a decaying group is below the negligible threshold
    long double cutoff = std::numeric_limits<long double>::infinity();
};

std::vector<ExponentGroup> group_by_exponent(const PolyExpSum& s)
{
    std::vector<ExponentGroup> groups;
    std::unordered_map<TermKey, std::size_t, TermKeyHash> index;
    for (const auto& t : s.terms()) {
        const TermKey key{0, ResponseClass::Untagged, bits(t.exponent.real()), bits(t.exponent.imag())};
        auto [it, inserted] = index.try_emplace(key, groups.size());
        if (inserted) groups.push_back({t.exponent, {}, {}, {}, {}});
        auto& poly = groups[it->second].poly;
        if (poly.size() <= static_cast<std::size_t>(t.power)) poly.resize(t.power + 1, kZero);
        poly[t.power] += t.coefficient;
    }
    for (auto& g : groups) {
        for (const auto& c : g.poly) {
            g.near_poly.push_back(narrow(c));
            g.magnitude.push_back(std::abs(g.near_poly.back()));
        }
    }
    return groups;
}

LComplex horner(const std::vector<LComplex>& poly, long double t) noexcept
{
    long double re = 0.0L, im = 0.0L;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
        re = re * t + it->real();
        im = im * t + it->imag();
    }
    return {re, im};
}

long double horner(const std::vector<long double>& poly, long double t) noexcept
{
    long double acc = 0.0L;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it)
        acc = acc * t + *it;
    return acc;
}

// Coefficients of p(t0 + d) in powers of d, by repeated synthetic division.
std::vector<LComplex> taylor_shift(const std::vector<ExtComplex>& poly, long double t0)
{
    const std::size_t n = poly.size();
    const ExtReal x = t0;
    std::vector<ExtReal> re(n), im(n);
    for (std::size_t k = 0; k < n; ++k) {
        re[k] = poly[k].real();
        im[k] = poly[k].imag();
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t k = n - 1; k-- > i;) {
            re[k] += x * re[k + 1];
            im[k] += x * im[k + 1];
        }
    std::vector<LComplex> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = {static_cast<long double>(re[k]), static_cast<long double>(im[k])};
    return out;
}

// Log-magnitude evaluation, term by term, when t^k or e^{lambda t} leaves the
// representable range.
LComplex group_value_log(const ExponentGroup& g, long double t)
{
    LComplex sum{0.0L, 0.0L};
    const LComplex lt = LComplex(g.exponent) * t;
    const long double logt = t > 0.0L ? std::log(t) : -std::numeric_limits<long double>::infinity();
    for (std::size_t k = 0; k < g.near_poly.size(); ++k) {
        const LComplex c = g.near_poly[k];
        if (c == LComplex{}) continue;
        if (k > 0 && t == 0.0L) continue;
        sum += std::exp(std::log(c) + static_cast<long double>(k) * logt + lt);
    }
    return sum;
}

constexpr long double kExpLimit = 11000.0L;

struct GroupValue {
    LComplex value;
    long double error = 0.0L; // bound on the long double rounding error
};

GroupValue group_value(const ExponentGroup& g, long double t, LComplex e)
{
    if (g.near_poly.size() == 1) return {mul(g.near_poly[0], e)};
    const LComplex p = horner(g.near_poly, t);
    const long double bound = horner(g.magnitude, t);
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || !std::isfinite(bound))
        return {group_value_log(g, t)};
    const long double error = 2.0L * static_cast<long double>(g.near_poly.size())
                              * std::numeric_limits<long double>::epsilon() * bound * std::abs(e);
    return {mul(p, e), error};
}

LComplex refined_value(ExponentGroup& g, long double t, LComplex e, long double tolerance)
{
    const GroupValue v = group_value(g, t, e);
    if (v.error <= tolerance) return v.value;
    const LComplex p = horner(g.near_poly, t);
    if (horner(g.magnitude, t) <= kMaxCancellation * std::abs(p)) return v.value;

    const long anchor = std::lround(t / kAnchorSpacing);
    const long double t0 = static_cast<long double>(anchor) * kAnchorSpacing;
    auto it = g.anchors.find(anchor);
    if (it == g.anchors.end()) it = g.anchors.emplace(anchor, taylor_shift(g.poly, t0)).first;
    return mul(horner(it->second, t - t0), e);
}

// Grid step when t is uniform, 0 otherwise.
double uniform_step(std::span<const double> t)
{
    if (t.size() < 3) return 0.0;
    const double h = t[1] - t[0];
    if (!(h > 0.0)) return 0.0;
    const double tol = 1e-9 * h;
    for (std::size_t i = 2; i < t.size(); ++i) {
        if (std::abs((t[i] - t[0]) - static_cast<double>(i) * h) > tol + 1e-15 * std::abs(t[i]))
            return 0.0;
    }
    return h;
}

} // namespace

std::vector<Complex> evaluate(const PolyExpSum& s, std::span<const double> t)
{
    for (double ti : t)
        check_time(ti, s.horizon());

    const std::size_t n = t.size();
    std::vector<LComplex> constant(n, LComplex{}), polynomial(n, LComplex{});
    std::vector<long double> error(n, 0.0L);
    auto groups = group_by_exponent(s);
    const long double h = uniform_step(t);
    constexpr std::size_t kReanchor = 64;

    // constant groups first: their peak sets the threshold for dropping the
    // decaying polynomial groups
    std::stable_partition(groups.begin(), groups.end(),
                          [](const ExponentGroup& g) { return g.near_poly.size() == 1; });
    long double negligible = -1.0L;

    for (auto& g : groups) {
        if (g.near_poly.size() > 1 && negligible < 0.0L) {
            long double peak = 0.0L;
            for (const auto& v : constant)
                peak = std::max(peak, std::abs(v));
            negligible = kNegligible * kTargetAccuracy * peak / static_cast<long double>(groups.size());
        }
        const LComplex lam(g.exponent);
        const long double decay = -lam.real();
        const long double monotone = decay > 0.0L
                                         ? static_cast<long double>(g.near_poly.size() - 1) / decay
                                         : std::numeric_limits<long double>::infinity();
        auto& acc = g.near_poly.size() == 1 ? constant : polynomial;
        const LComplex step = h > 0.0L ? std::exp(lam * h) : LComplex{};
        LComplex e{};
        bool stale = true; // the running e^{lambda t} missed a point
        for (std::size_t i = 0; i < n; ++i) {
            const long double ti = t[i];
            const long double re = lam.real() * ti;
            if (ti >= g.cutoff || re > kExpLimit) {
                if (ti < g.cutoff) acc[i] += group_value_log(g, ti);
                stale = true;
                continue;
            }
            if (stale || h == 0.0L || i % kReanchor == 0 || re < -kExpLimit)
                e = std::exp(lam * ti);
            else
                e = mul(e, step);
            stale = false;
            if (ti >= monotone && negligible > 0.0L
                && horner(g.magnitude, ti) * std::abs(e) <= negligible) {
                g.cutoff = ti;
                stale = true;
                continue;
            }
            const GroupValue v = group_value(g, ti, e);
            acc[i] += v.value;
            error[i] += v.error;
        }
    }

    // scale of the series from the points whose bound is already small
    long double scale = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double v = std::abs(constant[i] + polynomial[i]);
        if (error[i] <= 1e-3L * v) scale = std::max(scale, v);
    }
    const long double tolerance = kTargetAccuracy * scale;
    for (std::size_t i = 0; i < n; ++i) {
        if (error[i] <= tolerance) continue;
        const long double ti = t[i];
        LComplex sum{};
        for (auto& g : groups) {
            if (g.near_poly.size() == 1 || ti >= g.cutoff) continue;
            const LComplex lam(g.exponent);
            if (lam.real() * ti > kExpLimit) {
                sum += group_value_log(g, ti);
                continue;
            }
            sum += refined_value(g, ti, std::exp(lam * ti), tolerance / static_cast<long double>(groups.size()));
        }
        polynomial[i] = sum;
    }

    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LComplex v = constant[i] + polynomial[i];
        out[i] = Complex(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    }
    return out;
}

Complex evaluate(const PolyExpSum& s, double t)
{
    const double grid[1] = {t};
    return evaluate(s, std::span<const double>(grid, 1))[0];
}

double imaginary_residue(std::span<const Complex> values)
{
    if (values.empty()) return 0.0;
    double sum_sq = 0.0;
    double max_im = 0.0;
    for (const auto& v : values) {
        sum_sq += v.real() * v.real();
        max_im = std::max(max_im, std::abs(v.imag()));
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(values.size()));
    if (rms == 0.0) return max_im == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return max_im / rms;
}

std::vector<double> evaluate_real(const PolyExpSum& s, std::span<const double> t, double imag_tolerance)
{
    const auto values = evaluate(s, t);
    const double residue = imaginary_residue(values);
    if (residue > imag_tolerance) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "imaginary residue %.3e of RMS exceeds tolerance %.1e; sum is not conjugate-closed",
                      residue, imag_tolerance);
        throw InvariantError(buf);
    }
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](Complex v) { return v.real(); });
    return out;
}

PolyExpParts classify(const PolyExpSum& s)
{
    std::vector<PolyExpTerm> natural, cross, forced;
    for (const auto& t : s.terms()) {
        switch (classify_tags(t.tags)) {
        case ResponseClass::Natural: natural.push_back(t); break;
        case ResponseClass::Cross: cross.push_back(t); break;
        case ResponseClass::Forced: forced.push_back(t); break;
        case ResponseClass::Untagged:
            throw InvariantError("untagged term cannot be classified by pole provenance");
        }
    }
    return {PolyExpSum(std::move(natural), s.horizon()), PolyExpSum(std::move(cross), s.horizon()),
            PolyExpSum(std::move(forced), s.horizon())};
}

} // namespace volpr

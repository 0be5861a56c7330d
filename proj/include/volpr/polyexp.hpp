#pragma once

///
/// \file polyexp.hpp
///
/// Polynomial-exponential sums
///
///   s(t) = sum_j c_j t^{k_j} exp(lambda_j t),   0 <= t < T,
///
/// the closed-form representation of every response quantity. Each
/// exponential factor that went into a term is remembered as a PoleTag so
/// that a response can later be split by pole provenance into its natural
/// (system poles only), forced (excitation poles only) and cross parts.
///
/// Coefficients are held in quad precision: the monomial expansion of
/// high-order Laguerre products cancels heavily. For a third-order response
/// at 25 basis functions the terms of one exponent reach 1e24 while their sum
/// is O(1e-5), beyond what long double can absorb.
///

#include <boost/container/small_vector.hpp>
#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/float128.hpp>

#include <complex>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace volpr {

using Complex = std::complex<double>;
using ExtReal = boost::multiprecision::float128;
using ExtComplex = boost::multiprecision::complex128;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

enum class PoleOrigin : std::uint8_t { SystemBasis = 0, Excitation = 1 };

struct PoleTag {
    PoleOrigin origin = PoleOrigin::SystemBasis;
    std::uint16_t source = 0;

    friend auto operator<=>(const PoleTag&, const PoleTag&) = default;
};

/// Sorted multiset of tags, one per exponential factor.
using TagSet = boost::container::small_vector<PoleTag, 4>;

/// Multiset union of two sorted tag sets.
TagSet merge_tags(const TagSet& a, const TagSet& b);

enum class ResponseClass : std::uint8_t { Untagged, Natural, Cross, Forced };

ResponseClass classify_tags(const TagSet& tags) noexcept;

struct PolyExpTerm {
    ExtComplex coefficient{0};
    int power = 0;
    Complex exponent{0.0, 0.0};
    TagSet tags;

    /// c t^k e^{lambda t} at a single time.
    std::complex<long double> value(double t) const;
};

class PolyExpSum {
public:
    PolyExpSum() = default;
    explicit PolyExpSum(double horizon);

    /// Canonicalises (merges like terms, drops exact zeros) on construction.
    PolyExpSum(std::vector<PolyExpTerm> terms, double horizon);

    /// The multiplicative identity {(1, 0, 0)}, untagged, unbounded horizon.
    static PolyExpSum unit();

    const std::vector<PolyExpTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    /// Evaluation is valid on [0, horizon).
    double horizon() const noexcept { return horizon_; }

    PolyExpSum& operator+=(const PolyExpSum& other);
    PolyExpSum& operator*=(ExtComplex scale);

    friend PolyExpSum operator+(PolyExpSum a, const PolyExpSum& b) { return a += b; }
    friend PolyExpSum operator*(PolyExpSum a, ExtComplex s) { return a *= s; }

private:
    void canonicalize();

    std::vector<PolyExpTerm> terms_;
    double horizon_ = kUnbounded;

    friend class PolyExpAccumulator;
};

/// Accumulates many products/scaled terms before a single canonical merge.
/// Like terms (same power, bit-identical exponent, same class) are combined
/// on insertion; numerically coincident exponents are merged by `finish`.
class PolyExpAccumulator {
public:
    explicit PolyExpAccumulator(double horizon = kUnbounded);
    ~PolyExpAccumulator();
    PolyExpAccumulator(PolyExpAccumulator&&) noexcept;
    PolyExpAccumulator& operator=(PolyExpAccumulator&&) noexcept;

    void add(const PolyExpTerm& term, ExtComplex scale = ExtComplex(1));
    void add(const PolyExpSum& sum, ExtComplex scale = ExtComplex(1));
    /// Adds scale * a * b.
    void add_product(const PolyExpSum& a, const PolyExpSum& b,
                     ExtComplex scale = ExtComplex(1));

    std::size_t size() const noexcept;
    PolyExpSum finish() &&;

private:
    struct Impl;
    Impl* impl_;
};

/// Pointwise sum c t^k e^{lambda t}. Throws DomainError for t outside [0, T).
/// Decaying exponent groups are dropped once their magnitude bound falls
/// below 1e-19 of the peak of the non-decaying part divided by the group
/// count, so long steady-state stretches cost a few complex products a point.
std::vector<Complex> evaluate(const PolyExpSum& s, std::span<const double> t);
Complex evaluate(const PolyExpSum& s, double t);

/// Real part of `evaluate`, with a check that the imaginary residue stays
/// below `imag_tolerance` times the RMS of the real part.
/// Throws InvariantError when it does not.
std::vector<double> evaluate_real(const PolyExpSum& s, std::span<const double> t,
                                  double imag_tolerance = 1e-8);

/// Term-by-term product; the horizon of the result is the smaller of the two.
PolyExpSum multiply(const PolyExpSum& a, const PolyExpSum& b);

struct PolyExpParts {
    PolyExpSum natural;
    PolyExpSum cross;
    PolyExpSum forced;
};

/// Partition by provenance. Throws InvariantError on an untagged term.
PolyExpParts classify(const PolyExpSum& s);

/// Largest |Im s(t)| / RMS(Re s(t)) over the grid; 0 for an all-zero series.
double imaginary_residue(std::span<const Complex> values);

} // namespace volpr

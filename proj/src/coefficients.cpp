#include "volpr/coefficients.hpp"

#include "volpr/error.hpp"

#include <algorithm>
#include <cmath>

namespace volpr {

KernelCoefficients KernelCoefficients::zeros(std::vector<LaguerreBasis> bases)
{
    if (bases.empty() || bases.size() > 3) throw DomainError("coefficient order must be 1, 2 or 3");
    KernelCoefficients c;
    c.order = static_cast<int>(bases.size());
    std::size_t n = 1;
    for (const auto& b : bases)
        n *= static_cast<std::size_t>(b.size());
    c.bases = std::move(bases);
    c.values.assign(n, 0.0);
    return c;
}

std::size_t KernelCoefficients::flat_index(std::span<const int> idx) const
{
    if (static_cast<int>(idx.size()) != order) throw DomainError("index rank differs from tensor order");
    std::size_t flat = 0;
    for (int axis = 0; axis < order; ++axis) {
        if (idx[axis] < 0 || static_cast<std::size_t>(idx[axis]) >= extent(axis))
            throw DomainError("coefficient index out of range");
        flat = flat * extent(axis) + static_cast<std::size_t>(idx[axis]);
    }
    return flat;
}

double KernelCoefficients::symmetry_defect() const
{
    if (order == 1) return 0.0;
    for (int axis = 1; axis < order; ++axis)
        if (!(bases[axis] == bases[0])) return std::numeric_limits<double>::infinity();
    const int P = bases[0].size();
    double worst = 0.0;
    if (order == 2) {
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                worst = std::max(worst, std::abs((*this)(p, q) - (*this)(q, p)));
        return worst;
    }
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
            for (int r = 0; r < P; ++r) {
                const double v = (*this)(p, q, r);
                worst = std::max({worst, std::abs(v - (*this)(q, p, r)), std::abs(v - (*this)(p, r, q)),
                                  std::abs(v - (*this)(r, q, p))});
            }
    return worst;
}

} // namespace volpr

#pragma once

#include "volpr/laguerre.hpp"

#include <vector>

namespace volpr {

/// Order-n Laguerre coefficient tensor c_{p1..pn}, row-major with the last
/// axis fastest. One basis per axis.
struct KernelCoefficients {
    int order = 0;
    std::vector<LaguerreBasis> bases;
    std::vector<double> values;

    static KernelCoefficients zeros(std::vector<LaguerreBasis> bases);

    std::size_t extent(int axis) const { return static_cast<std::size_t>(bases.at(axis).size()); }
    std::size_t flat_index(std::span<const int> idx) const;

    double operator()(int p) const { return values[static_cast<std::size_t>(p)]; }
    double operator()(int p, int q) const { return values[static_cast<std::size_t>(p) * extent(1) + q]; }
    double operator()(int p, int q, int r) const
    {
        return values[(static_cast<std::size_t>(p) * extent(1) + q) * extent(2) + r];
    }

    /// Largest |c - c^T| over all axis permutations; 0 for order 1.
    double symmetry_defect() const;
};

} // namespace volpr

#ifndef RIGIDITY_CONTRACTION_RATIO_UTIL_HPP
#define RIGIDITY_CONTRACTION_RATIO_UTIL_HPP

#include <cmath>
#include <vector>

#include "rigidity/errors.hpp"

namespace rigidity {

/// log(rho_min)/log(rho_max) for a set of contracting moduli in (0,1).
inline double contraction_ratio_from_moduli(const std::vector<double>& ss_moduli) {
    if (ss_moduli.empty()) throw Error("contraction_ratio: empty ss block");
    double lo = ss_moduli.front(), hi = ss_moduli.front();
    for (double m : ss_moduli) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    return std::log(lo) / std::log(hi);
}

} // namespace rigidity

#endif

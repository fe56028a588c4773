#include "rigidity/poly_roots.hpp"
#include "rigidity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rigidity {

namespace {

using cd = std::complex<double>;

// Horner evaluation with a running bound on the floating-point error.
cd eval_with_error(const std::vector<double>& c, cd z, double& err) {
    cd acc(0.0, 0.0);
    double e = 0.0;
    double az = std::abs(z);
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        e = e * az + std::abs(acc) * az * 1e-16 + std::abs(*it) * 1e-16;
        acc = acc * z + *it;
    }
    err = 2.0 * e + 1e-300;
    return acc;
}

std::vector<cd> aberth(const std::vector<double>& c) {
    int n = static_cast<int>(c.size()) - 1;
    std::vector<double> dc(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i) dc[static_cast<size_t>(i - 1)] = c[static_cast<size_t>(i)] * i;

    // Cauchy bound for the initial circle
    double r0 = 0.0;
    for (int i = 0; i < n; ++i) r0 = std::max(r0, std::abs(c[static_cast<size_t>(i)] / c.back()));
    r0 = 1.0 + r0;
    std::vector<cd> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * i / n + 0.41;
        z[static_cast<size_t>(i)] = std::polar(0.5 * r0 + 0.1, th);
    }

    double dummy;
    for (int iter = 0; iter < 600; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            cd zi = z[static_cast<size_t>(i)];
            cd p = eval_with_error(c, zi, dummy);
            cd dp = eval_with_error(dc, zi, dummy);
            cd w = (dp == cd(0.0, 0.0)) ? cd(1e-30, 0) : p / dp;
            cd s(0.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (zi - z[static_cast<size_t>(j)]);
            cd corr = w / (1.0 - w * s);
            z[static_cast<size_t>(i)] -= corr;
            worst = std::max(worst, std::abs(corr) / (1.0 + std::abs(zi)));
        }
        if (worst < 5e-16) break;
    }
    return z;
}

} // namespace

std::vector<std::complex<double>> roots_fast(const std::vector<double>& coeffs) {
    std::vector<double> c = coeffs;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() <= 1) return {};
    return aberth(c);
}

std::vector<RootEnclosure> certified_roots(const IntPoly& p) {
    if (p.degree() < 1) return {};
    std::vector<double> c(static_cast<size_t>(p.degree()) + 1);
    for (int i = 0; i <= p.degree(); ++i) {
        const mpz_class& v = p[i];
        if (mpz_sizeinbase(v.get_mpz_t(), 2) > 53)
            throw Error("certified_roots: coefficient exceeds exact double range");
        c[static_cast<size_t>(i)] = v.get_d();
    }
    auto z = aberth(c);
    int n = static_cast<int>(z.size());

    // symmetrize conjugate pairs and snap near-real roots; Aberth residuals
    // decide whether the snap is acceptable via the disks below
    for (int i = 0; i < n; ++i) {
        if (std::abs(z[static_cast<size_t>(i)].imag()) < 1e-14 * (1.0 + std::abs(z[static_cast<size_t>(i)].real())))
            z[static_cast<size_t>(i)].imag(0.0);
    }

    // a posteriori inclusion disks: |p(z_i)| * n / |lc * prod(z_i - z_j)|
    std::vector<RootEnclosure> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        cd zi = z[static_cast<size_t>(i)];
        double everr;
        cd pv = eval_with_error(c, zi, everr);
        double denom = std::abs(c.back());
        for (int j = 0; j < n; ++j)
            if (j != i) denom *= std::abs(zi - z[static_cast<size_t>(j)]);
        double r = (denom == 0.0) ? std::numeric_limits<double>::infinity()
                                  : n * (std::abs(pv) + everr) / denom;
        out[static_cast<size_t>(i)] = {zi, r};
    }

    // disjointness: disks must isolate the roots (input squarefree)
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = std::abs(out[static_cast<size_t>(i)].z - out[static_cast<size_t>(j)].z);
            if (d <= out[static_cast<size_t>(i)].radius + out[static_cast<size_t>(j)].radius)
                throw Error("certified_roots: inclusion disks overlap (input not squarefree or ill-conditioned)");
        }

    std::sort(out.begin(), out.end(), [](const RootEnclosure& a, const RootEnclosure& b) {
        double ma = std::abs(a.z), mb = std::abs(b.z);
        if (ma != mb) return ma < mb;
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    return out;
}

} // namespace rigidity

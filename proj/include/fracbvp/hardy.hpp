#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "fracbvp/errors.hpp"
#include "fracbvp/symbols.hpp"
#include "fracbvp/xi_grid.hpp"

namespace fracbvp {

// Numerical controls for the Hardy-projection machinery. The window tails of
// an order-0 slice decay only like 1/xi_n; before any discrete transform we
// fit and subtract a short sum of chi_+^{-k}/chi_-^{-k} terms (plus a
// constant), transform the fast-decaying remainder, and re-add the analytic
// transforms of the fitted terms.
struct HardyParams {
    int tail_terms = 4;             // chi powers fitted per side
    double band_start_sigma = 4.0;  // fit on |xi| >= band_start_sigma * sigma_basis;
                                    // the multi-octave band keeps the chi powers
                                    // identifiable (a narrow edge band is
                                    // multicollinear and the fit diverges mid-range)
    // z = 0+ boundary rule for the half-line transforms. Gregory4 applies the
    // order-4 endpoint-corrected trapezoid weights {3/8, 7/6, 23/24}; Half is
    // the plain symmetric 1/2 split.
    enum class Endpoint { Gregory4, Half } endpoint = Endpoint::Gregory4;
    double min_decay_exponent = 0.5;   // below this the slice is rejected
    double limit_tolerance = 1e-4;     // Richardson subset disagreement bound
};

// Analytic transforms of the basis terms, cf. F^{-1}[(sigma + i xi)^{-mu}] =
// H(z) z^{mu-1} e^{-sigma z} / Gamma(mu) and its reflection.
inline Complex inv_transform_chi_plus(double mu, double sigma, double z) {
    if (z <= 0.0) return {0.0, 0.0};
    // Nonpositive integer mu: the transform is a delta derivative at 0.
    if (mu <= 0.0 && mu == std::floor(mu)) return {0.0, 0.0};
    return std::pow(z, mu - 1.0) * std::exp(-sigma * z) / std::tgamma(mu);
}
inline Complex inv_transform_chi_minus(double mu, double sigma, double z) {
    if (z >= 0.0) return {0.0, 0.0};
    if (mu <= 0.0 && mu == std::floor(mu)) return {0.0, 0.0};
    return std::pow(-z, mu - 1.0) * std::exp(sigma * z) / std::tgamma(mu);
}

// Which half of the chi basis the fit may use; callers that know the slice is
// one-sided halve the columns and avoid the cancelling cp/cm direction.
enum class BasisSide { both, plus_only, minus_only };

// Decomposition f = c0 + sum_k cp[k] chi_+^{-(mu0+k)} + sum_k cm[k] chi_-^{-(mu0+k)} + remainder,
// with the remainder decaying fast enough for windowed transforms.
struct SliceDecomposition {
    std::shared_ptr<const XiGrid> grid;
    double sigma_basis = 1.0;
    double mu0 = 1.0;
    Complex c0{0.0, 0.0};
    std::vector<Complex> cp, cm;
    std::vector<Complex> remainder;        // at the xi nodes
    std::vector<Complex> remainder_z;      // dual samples, FFT-natural order
    double decay_exponent = 0.0;
    double remainder_scale = 0.0;

    // F^{-1}[f - c0](x) with analytic basis transforms plus a direct
    // trapezoid sum for the remainder; valid at arbitrary x.
    Complex transform_at(double x) const {
        Complex v{0.0, 0.0};
        for (std::size_t k = 0; k < cp.size(); ++k)
            v += cp[k] * inv_transform_chi_plus(mu0 + static_cast<double>(k), sigma_basis, x);
        for (std::size_t k = 0; k < cm.size(); ++k)
            v += cm[k] * inv_transform_chi_minus(mu0 + static_cast<double>(k), sigma_basis, x);
        const std::size_t n = grid->size();
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = grid->xi(j);
            s += remainder[j] * Complex(std::cos(x * xi), std::sin(x * xi));
        }
        v += s * (grid->dxi() / (2.0 * kPi));
        return v;
    }

    // Same, restricted to the dual grid nodes where the remainder transform
    // is already available from the FFT.
    Complex transform_at_node(long k) const {
        const double z = static_cast<double>(k) * grid->hz();
        Complex v{0.0, 0.0};
        for (std::size_t j = 0; j < cp.size(); ++j)
            v += cp[j] * inv_transform_chi_plus(mu0 + static_cast<double>(j), sigma_basis, z);
        for (std::size_t j = 0; j < cm.size(); ++j)
            v += cm[j] * inv_transform_chi_minus(mu0 + static_cast<double>(j), sigma_basis, z);
        return v + remainder_z[grid->z_slot(k)];
    }
};

namespace detail {

inline Complex lagrange_at_zero(const std::vector<Complex>& vals) {
    // Equispaced nodes z = h, 2h, ..., extrapolated to 0.
    const std::size_t m = vals.size();
    Complex out{0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
        double w = 1.0;
        const double xi = static_cast<double>(i + 1);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const double xj = static_cast<double>(j + 1);
            w *= (0.0 - xj) / (xi - xj);
        }
        out += w * vals[i];
    }
    return out;
}

}  // namespace detail

// Fit the constant and the chi-power tails on a wide band and split off a
// fast-decaying remainder. When c0_hint is provided it is subtracted first;
// the constant column then only absorbs the residual offset. The fit starts
// at the requested tail order and backs off when the least-squares solution
// overfits (transcendental slices can feed the near-degenerate cancelling
// direction of the high chi powers).
inline SliceDecomposition decompose_slice(const std::vector<Complex>& samples,
                                          std::shared_ptr<const XiGrid> grid, double sigma_basis,
                                          std::optional<Complex> c0_hint = std::nullopt,
                                          double mu0 = 1.0, const HardyParams& params = {},
                                          BasisSide basis_side = BasisSide::both) {
    const std::size_t n = grid->size();
    if (samples.size() != n) throw PreconditionError("decompose_slice: sample length mismatch");

    SliceDecomposition dec;
    dec.grid = grid;
    dec.sigma_basis = sigma_basis;
    dec.mu0 = mu0;

    Complex base_c0{0.0, 0.0};
    if (c0_hint) {
        base_c0 = *c0_hint;
    } else {
        Complex s{0.0, 0.0};
        const std::size_t m = 8;
        for (std::size_t j = 0; j < m; ++j) s += samples[j] + samples[n - 1 - j];
        base_c0 = s / static_cast<double>(2 * m);
    }

    // Fit band: starts a few sigma out so the slice's own structure region
    // stays with the FFT path, and spans out to the window edge so the chi
    // powers stay mutually identifiable.
    std::vector<std::size_t> band;
    const double cut = params.band_start_sigma * std::abs(sigma_basis);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(grid->xi(j)) >= cut) band.push_back(j);
    }
    if (band.size() < static_cast<std::size_t>(4 * params.tail_terms + 4))
        throw ResolutionError("decompose_slice: fit band too small for the tail order");

    double data_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        data_scale = std::max(data_scale, std::abs(samples[j] - base_c0));

    const bool use_plus = basis_side != BasisSide::minus_only;
    const bool use_minus = basis_side != BasisSide::plus_only;
    // A supplied constant is trusted: fitting a constant column alongside
    // would let the least squares absorb mid-band misfit into an offset that
    // never decays at the window edges.
    const bool fit_constant = !c0_hint.has_value();

    auto attempt = [&](int K) {
        const int npl = use_plus ? K : 0;
        const int nmn = use_minus ? K : 0;
        const int ncols = (fit_constant ? 1 : 0) + npl + nmn;
        const int base = fit_constant ? 1 : 0;
        Eigen::MatrixXcd A(band.size(), ncols);
        Eigen::VectorXcd b(band.size());
        for (std::size_t r = 0; r < band.size(); ++r) {
            const double xi = grid->xi(band[r]);
            if (fit_constant) A(r, 0) = Complex(1.0, 0.0);
            for (int k = 0; k < npl; ++k) A(r, base + k) = chi_plus(-(mu0 + k), sigma_basis, xi);
            for (int k = 0; k < nmn; ++k)
                A(r, base + npl + k) = chi_minus(-(mu0 + k), sigma_basis, xi);
            b(r) = samples[band[r]] - base_c0;
        }
        Eigen::VectorXd colscale(ncols);
        for (int c = 0; c < ncols; ++c) {
            colscale(c) = A.col(c).norm();
            if (colscale(c) == 0.0) colscale(c) = 1.0;
            A.col(c) /= colscale(c);
        }
        Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(b);
        for (int c = 0; c < ncols; ++c) coef(c) /= colscale(c);

        dec.c0 = base_c0 + (fit_constant ? Complex(coef(0)) : Complex{0.0, 0.0});
        dec.cp.assign(static_cast<std::size_t>(K), Complex{0.0, 0.0});
        dec.cm.assign(static_cast<std::size_t>(K), Complex{0.0, 0.0});
        for (int k = 0; k < npl; ++k) dec.cp[k] = coef(base + k);
        for (int k = 0; k < nmn; ++k) dec.cm[k] = coef(base + npl + k);

        dec.remainder.resize(n);
        double scale = 0.0, worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = grid->xi(j);
            Complex fit = dec.c0;
            for (int k = 0; k < K; ++k) {
                if (use_plus) fit += dec.cp[k] * chi_plus(-(mu0 + k), sigma_basis, xi);
                if (use_minus) fit += dec.cm[k] * chi_minus(-(mu0 + k), sigma_basis, xi);
            }
            dec.remainder[j] = samples[j] - fit;
            scale = std::max(scale, std::abs(samples[j] - dec.c0));
            worst = std::max(worst, std::abs(dec.remainder[j]));
        }
        dec.remainder_scale = scale;
        return worst;
    };

    for (int K = params.tail_terms; K >= 1; --K) {
        const double worst = attempt(K);
        // A sane fit never exceeds the data scale by much; overfit blow-ups
        // show up as a mid-range remainder far above the samples.
        if (worst <= 4.0 * (data_scale + std::abs(dec.c0 - base_c0)) + 1e-300) break;
        if (K == 1) break;
    }

    // Measured decay exponent of the remainder near the window edges (log-log
    // slope over the outer quarter); edge remainders below 1e-8 of the slice
    // scale, or at the roundoff floor of a unit-scale slice, are fit noise
    // rather than a tail and count as fully resolved.
    const double floor_level =
        std::max(1e-8 * dec.remainder_scale, 1e-13 * (1.0 + std::abs(dec.c0)));
    double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
    std::size_t cnt = 0, loud = 0;
    for (std::size_t j : band) {
        if (std::abs(grid->xi(j)) < 0.75 * grid->xi_max()) continue;
        const double r = std::abs(dec.remainder[j]);
        if (r < floor_level) continue;
        ++loud;
        const double lx = std::log(std::abs(grid->xi(j)));
        const double ly = std::log(r);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 16 || loud * 8 < band.size() / 4) {
        dec.decay_exponent = 99.0;
    } else {
        const double denom = static_cast<double>(cnt) * sxx - sx * sx;
        dec.decay_exponent = denom == 0.0 ? 0.0 : -((static_cast<double>(cnt) * sxy - sx * sy) / denom);
    }

    dec.remainder_z = grid->to_z(dec.remainder);
    return dec;
}

// ---------------------------------------------------------------------------
// Hardy projections
// ---------------------------------------------------------------------------

enum class HardySide { plus, minus, mixed };

struct HardyFunction {
    std::shared_ptr<const XiGrid> grid;
    std::vector<Complex> samples;    // total values at the xi nodes
    Complex c0{0.0, 0.0};            // constant part (belongs to the minus side)
    Complex c1{0.0, 0.0};            // chi^{-1} coefficient on this side
    HardySide side = HardySide::mixed;
    double sigma_basis = 1.0;
    std::vector<Complex> pole_plus, pole_minus;   // fitted chi coefficients
    std::vector<Complex> grid_part_z;             // z content of the grid remainder part
    double decay_exponent = 99.0;

    // Relative transform mass sitting on the wrong side of z = 0; for a
    // plus-side function this is the quantified H+ support property.
    double support_leak() const {
        if (!grid) return 0.0;
        double wrong = 0.0, total = 0.0;
        for (std::size_t kp = 0; kp < grid->size(); ++kp) {
            const long k = grid->z_index(kp);
            const double m = std::abs(grid_part_z[kp]);
            total += m;
            if (side == HardySide::plus && k < 0) wrong += m;
            if (side == HardySide::minus && k > 0) wrong += m;
        }
        for (std::size_t j = 0; j < pole_plus.size(); ++j) {
            const double m = std::abs(side == HardySide::plus ? pole_minus[j] : pole_plus[j]);
            wrong += m;
            total += m;
        }
        return total == 0.0 ? 0.0 : wrong / total;
    }
};

struct ProjectionPair {
    HardyFunction plus;
    HardyFunction minus;
};

inline double endpoint_weight(long k, HardyParams::Endpoint scheme) {
    // Weight applied to the z-node |index| = k of a half-line transform.
    if (scheme == HardyParams::Endpoint::Half) return k == 0 ? 0.5 : 1.0;
    switch (k) {
        case 0: return 3.0 / 8.0;
        case 1: return 7.0 / 6.0;
        case 2: return 23.0 / 24.0;
        default: return 1.0;
    }
}

// Complementary Hardy projections h+ and h-. The constant part and the
// chi_-^{-k} terms go to the minus side, the chi_+^{-k} terms to the plus
// side; the remainder is split through the z-domain with the endpoint rule.
// h+ f + h- f = f holds exactly by construction.
inline ProjectionPair hardy_project_pair(const std::vector<Complex>& samples,
                                         std::shared_ptr<const XiGrid> grid, double sigma_basis,
                                         std::optional<Complex> c0_hint = std::nullopt,
                                         const HardyParams& params = {}) {
    SliceDecomposition dec = decompose_slice(samples, grid, sigma_basis, c0_hint, 1.0, params);
    if (dec.decay_exponent < params.min_decay_exponent)
        throw AccuracyError("hardy_project: insufficient tail decay (measured exponent " +
                            std::to_string(dec.decay_exponent) + ")");

    const std::size_t n = grid->size();
    std::vector<Complex> plus_z(n, Complex{0.0, 0.0});
    for (std::size_t kp = 0; kp < n; ++kp) {
        const long k = grid->z_index(kp);
        if (k < 0) continue;
        plus_z[kp] = dec.remainder_z[kp] * endpoint_weight(k, params.endpoint);
    }
    std::vector<Complex> plus_grid = grid->to_xi(plus_z);

    ProjectionPair pair;
    pair.plus.grid = grid;
    pair.plus.side = HardySide::plus;
    pair.plus.sigma_basis = sigma_basis;
    pair.plus.pole_plus = dec.cp;
    pair.plus.pole_minus.assign(dec.cm.size(), Complex{0.0, 0.0});
    pair.plus.c0 = Complex{0.0, 0.0};
    pair.plus.c1 = dec.cp.empty() ? Complex{0.0, 0.0} : dec.cp[0];
    pair.plus.grid_part_z = plus_z;
    pair.plus.decay_exponent = dec.decay_exponent;
    pair.plus.samples.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = grid->xi(j);
        Complex v = plus_grid[j];
        for (std::size_t k = 0; k < dec.cp.size(); ++k)
            v += dec.cp[k] * chi_plus(-(1.0 + static_cast<double>(k)), sigma_basis, xi);
        pair.plus.samples[j] = v;
    }

    pair.minus.grid = grid;
    pair.minus.side = HardySide::minus;
    pair.minus.sigma_basis = sigma_basis;
    pair.minus.pole_plus.assign(dec.cp.size(), Complex{0.0, 0.0});
    pair.minus.pole_minus = dec.cm;
    pair.minus.c0 = dec.c0;
    pair.minus.c1 = dec.cm.empty() ? Complex{0.0, 0.0} : dec.cm[0];
    pair.minus.decay_exponent = dec.decay_exponent;
    pair.minus.grid_part_z.resize(n);
    for (std::size_t kp = 0; kp < n; ++kp)
        pair.minus.grid_part_z[kp] = dec.remainder_z[kp] - plus_z[kp];
    pair.minus.samples.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        pair.minus.samples[j] = samples[j] - pair.plus.samples[j];

    return pair;
}

inline HardyFunction hardy_project(const std::vector<Complex>& samples,
                                   std::shared_ptr<const XiGrid> grid, double sigma_basis,
                                   HardySide side, std::optional<Complex> c0_hint = std::nullopt,
                                   const HardyParams& params = {}) {
    ProjectionPair pair = hardy_project_pair(samples, grid, sigma_basis, c0_hint, params);
    return side == HardySide::plus ? std::move(pair.plus) : std::move(pair.minus);
}

// ---------------------------------------------------------------------------
// Plus-integral and one-sided limits
// ---------------------------------------------------------------------------

struct LimitResult {
    Complex value{0.0, 0.0};
    double disagreement = 0.0;   // between Richardson subsets
};

namespace detail {

inline LimitResult one_sided_limit_impl(const SliceDecomposition& dec, bool from_right,
                                        const HardyParams& params) {
    // Boundary value of the analytic part: only the chi^{-1} terms survive.
    Complex analytic{0.0, 0.0};
    if (dec.mu0 == 1.0) {
        analytic = from_right ? dec.cp[0] : dec.cm[0];
    } else {
        // General basis: evaluate the limit numerically alongside the grid part.
    }

    std::vector<Complex> vals;
    for (long k = 1; k <= 4; ++k) {
        const long idx = from_right ? k : -k;
        Complex v = dec.remainder_z[dec.grid->z_slot(idx)];
        if (dec.mu0 != 1.0) {
            const double z = static_cast<double>(idx) * dec.grid->hz();
            for (std::size_t j = 0; j < dec.cp.size(); ++j)
                v += dec.cp[j] * inv_transform_chi_plus(dec.mu0 + static_cast<double>(j),
                                                        dec.sigma_basis, z);
            for (std::size_t j = 0; j < dec.cm.size(); ++j)
                v += dec.cm[j] * inv_transform_chi_minus(dec.mu0 + static_cast<double>(j),
                                                         dec.sigma_basis, z);
        }
        vals.push_back(v);
    }
    const Complex full = lagrange_at_zero(vals);
    const Complex low = lagrange_at_zero({vals[0], vals[1], vals[2]});
    std::vector<Complex> shifted = {vals[1], vals[2], vals[3]};
    // Quadratic through nodes 2h, 3h, 4h extrapolated to zero.
    const Complex high = 6.0 * shifted[0] - 8.0 * shifted[1] + 3.0 * shifted[2];

    LimitResult res;
    res.value = analytic + full;
    res.disagreement = std::abs(low - high);
    if (res.disagreement > params.limit_tolerance * std::max(1.0, std::abs(res.value)))
        throw AccuracyError("one_sided_limit: Richardson subsets disagree by " +
                            std::to_string(res.disagreement));
    return res;
}

}  // namespace detail

// lim_{z -> 0+-} F^{-1}[f - c0](z). The constant contributes only a delta and
// is excluded; pass its value if known (defaults to 0, i.e. the caller has
// removed it already).
inline LimitResult one_sided_limit_full(const std::vector<Complex>& samples,
                                        std::shared_ptr<const XiGrid> grid, double sigma_basis,
                                        HardySide side, Complex c0 = Complex{0.0, 0.0},
                                        const HardyParams& params = {}) {
    if (side == HardySide::mixed) throw PreconditionError("one_sided_limit: side must be plus or minus");
    SliceDecomposition dec = decompose_slice(samples, grid, sigma_basis, c0, 1.0, params);
    return detail::one_sided_limit_impl(dec, side == HardySide::plus, params);
}

inline Complex one_sided_limit(const std::vector<Complex>& samples,
                               std::shared_ptr<const XiGrid> grid, double sigma_basis,
                               HardySide side, Complex c0 = Complex{0.0, 0.0},
                               const HardyParams& params = {}) {
    return one_sided_limit_full(samples, grid, sigma_basis, side, c0, params).value;
}

// (1/2pi) int^+ f dxi_n. Vanishes on the constant, on all of H-, and on H+
// functions that are O(xi^{-2}); equals the right limit of the inverse
// transform of f minus its delta part.
inline Complex plus_integral(const std::vector<Complex>& samples, std::shared_ptr<const XiGrid> grid,
                             double sigma_basis, std::optional<Complex> c0_hint = std::nullopt,
                             const HardyParams& params = {},
                             BasisSide side_hint = BasisSide::both) {
    SliceDecomposition dec =
        decompose_slice(samples, grid, sigma_basis, c0_hint, 1.0, params, side_hint);
    if (dec.decay_exponent < params.min_decay_exponent)
        throw AccuracyError("plus_integral: decomposition failure (decay exponent " +
                            std::to_string(dec.decay_exponent) + ")");
    return detail::one_sided_limit_impl(dec, true, params).value;
}

inline Complex plus_integral(const HardyFunction& f, const HardyParams& params = {}) {
    const BasisSide hint = f.side == HardySide::plus    ? BasisSide::plus_only
                           : f.side == HardySide::minus ? BasisSide::minus_only
                                                        : BasisSide::both;
    return plus_integral(f.samples, f.grid, f.sigma_basis, f.c0, params, hint);
}

// Jump at z = 0 of the bounded part of the inverse transform.
inline Complex transform_jump(const std::vector<Complex>& samples,
                              std::shared_ptr<const XiGrid> grid, double sigma_basis, Complex c0,
                              const HardyParams& params = {}) {
    SliceDecomposition dec = decompose_slice(samples, grid, sigma_basis, c0, 1.0, params);
    const LimitResult right = detail::one_sided_limit_impl(dec, true, params);
    const LimitResult left = detail::one_sided_limit_impl(dec, false, params);
    return right.value - left.value;
}

// ---------------------------------------------------------------------------
// Wiener-Hopf factorization of order-0 slices
// ---------------------------------------------------------------------------

struct FactorizationResult {
    std::shared_ptr<const XiGrid> grid;
    std::vector<Complex> q_plus;    // in 1 + H+
    std::vector<Complex> q_minus;   // in s0 (1 + H-_{-1})
    int winding = 0;
    double reconstruction_error = 0.0;
    HardyFunction psi_plus;         // log-split plus part
    std::vector<Complex> psi;       // unwrapped log(q/s0)
    Complex s0{1.0, 0.0};
    double sigma_basis = 1.0;
};

// Factorize q = q- q+ by splitting log(q/s0) with continuous phase
// unwrapping. Evenness plus ellipticity avoiding a ray forces winding 0; a
// nonzero winding is reported as a topological obstruction.
inline FactorizationResult wiener_hopf_factorize(const std::vector<Complex>& q_samples,
                                                 std::shared_ptr<const XiGrid> grid,
                                                 double sigma_basis, Complex s0,
                                                 const HardyParams& params = {}) {
    const std::size_t n = grid->size();
    if (q_samples.size() != n) throw PreconditionError("wiener_hopf_factorize: sample length mismatch");
    if (std::abs(s0) == 0.0) throw FactorizabilityError("wiener_hopf_factorize: s0 vanishes");

    double min_abs = std::numeric_limits<double>::infinity(), max_abs = 0.0;
    double dev = 0.0;
    for (const Complex& v : q_samples) {
        const double m = std::abs(v);
        min_abs = std::min(min_abs, m);
        max_abs = std::max(max_abs, m);
        dev = std::max(dev, std::abs(v / s0 - 1.0));
    }
    if (min_abs <= 1e-13 * max_abs)
        throw FactorizabilityError("wiener_hopf_factorize: q vanishes on the grid");

    if (dev <= 1e-12) {
        // q == s0 up to rounding: factor trivially rather than accumulating
        // phase noise through the unwrap.
        FactorizationResult res;
        res.grid = grid;
        res.s0 = s0;
        res.sigma_basis = sigma_basis;
        res.winding = 0;
        res.psi.assign(n, Complex{0.0, 0.0});
        res.q_plus.assign(n, Complex{1.0, 0.0});
        res.q_minus = q_samples;
        res.psi_plus.grid = grid;
        res.psi_plus.side = HardySide::plus;
        res.psi_plus.sigma_basis = sigma_basis;
        res.psi_plus.samples.assign(n, Complex{0.0, 0.0});
        res.psi_plus.grid_part_z.assign(n, Complex{0.0, 0.0});
        res.psi_plus.pole_plus.assign(params.tail_terms, Complex{0.0, 0.0});
        res.psi_plus.pole_minus.assign(params.tail_terms, Complex{0.0, 0.0});
        res.reconstruction_error = dev;
        return res;
    }

    // Unwrapped logarithm of q/s0 via phase-increment tracking.
    std::vector<Complex> psi(n);
    double phase = std::arg(q_samples[0] / s0);
    psi[0] = Complex(std::log(std::abs(q_samples[0] / s0)), phase);
    for (std::size_t j = 1; j < n; ++j) {
        const double step = std::arg(q_samples[j] / q_samples[j - 1]);
        if (std::abs(step) > 0.5 * kPi)
            throw ResolutionError("wiener_hopf_factorize: phase step exceeds pi/2; grid too coarse");
        phase += step;
        psi[j] = Complex(std::log(std::abs(q_samples[j] / s0)), phase);
    }
    const double span = (psi[n - 1].imag() - psi[0].imag()) / (2.0 * kPi);
    const int winding = static_cast<int>(std::lround(span));
    if (std::abs(span - winding) > 0.1)
        throw TopologicalObstructionError("wiener_hopf_factorize: non-integer winding residue " +
                                          std::to_string(span));
    if (winding != 0)
        throw TopologicalObstructionError("wiener_hopf_factorize: nonzero winding " +
                                          std::to_string(winding) +
                                          " (symbol not even/elliptic-compatible)");

    HardyFunction psi_plus =
        hardy_project(psi, grid, sigma_basis, HardySide::plus, Complex{0.0, 0.0}, params);

    FactorizationResult res;
    res.grid = grid;
    res.s0 = s0;
    res.sigma_basis = sigma_basis;
    res.winding = winding;
    res.psi = psi;
    res.psi_plus = psi_plus;
    res.q_plus.resize(n);
    res.q_minus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        res.q_plus[j] = std::exp(psi_plus.samples[j]);
        res.q_minus[j] = s0 * std::exp(psi[j] - psi_plus.samples[j]);
    }

    double recon = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(grid->xi(j)) > 0.9 * grid->xi_max()) continue;
        recon = std::max(recon,
                         std::abs(res.q_plus[j] * res.q_minus[j] - q_samples[j]) / std::abs(q_samples[j]));
    }
    res.reconstruction_error = recon;
    return res;
}

inline FactorizationResult wiener_hopf_factorize(const SymbolSlice& q,
                                                 std::shared_ptr<const XiGrid> grid,
                                                 const HardyParams& params = {}) {
    grid->check_sigma(q.sigma);
    return wiener_hopf_factorize(q.sample(*grid), grid, q.sigma, q.asymptotic_constant, params);
}

struct ParametrixPlus {
    std::vector<Complex> samples;   // 1/q+ pointwise, again in 1 + H+
    double support_leak = 0.0;      // wrong-side transform mass of samples - 1
};

// Exact slice-level parametrix of the plus factor: since q+ = exp(psi_+),
// the reciprocal exp(-psi_+) lies in 1 + H+ again. Membership is verified by
// a support check on the transform of q~+ - 1.
inline ParametrixPlus parametrix_plus(const std::vector<Complex>& q_plus,
                                      std::shared_ptr<const XiGrid> grid, double sigma_basis,
                                      const HardyParams& params = {}) {
    double min_abs = std::numeric_limits<double>::infinity();
    for (const Complex& v : q_plus) min_abs = std::min(min_abs, std::abs(v));
    if (min_abs <= 1e-13)
        throw SingularParametrixError("parametrix_plus: q+ vanishes on the grid");
    ParametrixPlus res;
    res.samples.resize(q_plus.size());
    for (std::size_t j = 0; j < q_plus.size(); ++j) res.samples[j] = 1.0 / q_plus[j];

    std::vector<Complex> dev(q_plus.size());
    for (std::size_t j = 0; j < q_plus.size(); ++j) dev[j] = res.samples[j] - 1.0;
    SliceDecomposition dec = decompose_slice(dev, grid, sigma_basis, Complex{0.0, 0.0}, 1.0, params);
    double wrong = 0.0, total = 0.0;
    for (std::size_t kp = 0; kp < grid->size(); ++kp) {
        const double m = std::abs(dec.remainder_z[kp]);
        total += m;
        if (grid->z_index(kp) < 0) wrong += m;
    }
    for (const Complex& c : dec.cm) {
        wrong += std::abs(c);
        total += std::abs(c);
    }
    for (const Complex& c : dec.cp) total += std::abs(c);
    res.support_leak = total == 0.0 ? 0.0 : wrong / total;
    return res;
}

}  // namespace fracbvp

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fracbvp/errors.hpp"
#include "fracbvp/expression.hpp"
#include "fracbvp/xi_grid.hpp"

namespace fracbvp {

// ---------------------------------------------------------------------------
// Frequency points and order-reducing symbols
// ---------------------------------------------------------------------------

struct FrequencyPoint {
    std::vector<double> xi_prime;
    double xi_n = 0.0;

    double xi_prime_norm2() const {
        double s = 0.0;
        for (double c : xi_prime) s += c * c;
        return s;
    }
    double xi_prime_norm() const { return std::sqrt(xi_prime_norm2()); }
    // sigma = <xi'> = (1 + |xi'|^2)^{1/2}, always >= 1.
    double sigma() const { return std::sqrt(1.0 + xi_prime_norm2()); }
    double norm2() const { return xi_prime_norm2() + xi_n * xi_n; }
    double norm() const { return std::sqrt(norm2()); }
};

enum class OrderReducingSign { plus, minus };

// chi_pm^t(xi) = (sigma +/- i xi_n)^t with the principal branch; the base has
// positive real part, so the power is single-valued and the group law
// chi^t chi^s = chi^{t+s} holds exactly up to rounding.
inline Complex order_reducing_symbol(double t, double sigma, double xi_n, OrderReducingSign sign) {
    if (!(sigma >= 1.0)) throw PreconditionError("order_reducing_symbol: sigma must be >= 1");
    const Complex base(sigma, sign == OrderReducingSign::plus ? xi_n : -xi_n);
    return std::pow(base, Complex(t, 0.0));
}

inline Complex order_reducing_symbol(double t, const FrequencyPoint& p, OrderReducingSign sign) {
    return order_reducing_symbol(t, p.sigma(), p.xi_n, sign);
}

// Shorthands for the per-slice factors at a fixed sigma.
inline Complex chi_plus(double t, double sigma, double xi_n) {
    return std::pow(Complex(sigma, xi_n), Complex(t, 0.0));
}
inline Complex chi_minus(double t, double sigma, double xi_n) {
    return std::pow(Complex(sigma, -xi_n), Complex(t, 0.0));
}

// ---------------------------------------------------------------------------
// Symbol models
// ---------------------------------------------------------------------------

enum class SymbolKind { FractLaplacian, ShiftedFractLaplacian, AnisotropicShifted, Expression };

// A classical even symbol of order 2a. The built-in families are evaluated in
// closed form; Expression symbols evaluate a parsed tree and are classified by
// large-t sampling.
struct SymbolModel {
    SymbolKind kind = SymbolKind::FractLaplacian;
    double a = 0.5;           // half the operator order
    double beta = 1.0;        // AnisotropicShifted only
    double lambda = 0.0;      // AnisotropicShifted only
    int dim = 2;              // spatial dimension n
    ExprPtr expr;             // Expression only
    std::string expr_text;

    // Classification flags; exact for built-ins, sampled for expressions.
    bool even = true;
    bool elliptic = true;

    void validate() const {
        if (!(a > 0.0)) throw PreconditionError("SymbolModel: a must be > 0");
        if (kind == SymbolKind::AnisotropicShifted) {
            if (!(beta > 0.0)) throw PreconditionError("SymbolModel: beta must be > 0");
            if (!(lambda >= 0.0)) throw PreconditionError("SymbolModel: lambda must be >= 0");
        }
        if (dim < 1) throw PreconditionError("SymbolModel: dim must be >= 1");
        if (kind == SymbolKind::Expression && !expr)
            throw PreconditionError("SymbolModel: missing expression tree");
    }

    bool homogeneous() const { return kind == SymbolKind::FractLaplacian; }

    static SymbolModel fract_laplacian(double a, int dim = 2) {
        SymbolModel m;
        m.kind = SymbolKind::FractLaplacian;
        m.a = a;
        m.dim = dim;
        m.validate();
        return m;
    }
    static SymbolModel shifted_fract_laplacian(double a, int dim = 2) {
        SymbolModel m;
        m.kind = SymbolKind::ShiftedFractLaplacian;
        m.a = a;
        m.dim = dim;
        m.validate();
        return m;
    }
    static SymbolModel anisotropic_shifted(double a, double beta, double lambda, int dim = 2) {
        SymbolModel m;
        m.kind = SymbolKind::AnisotropicShifted;
        m.a = a;
        m.beta = beta;
        m.lambda = lambda;
        m.dim = dim;
        m.validate();
        return m;
    }
};

// p(xi) for the model; exact closed forms for the built-in families.
inline Complex eval_symbol(const SymbolModel& model, const FrequencyPoint& p) {
    model.validate();
    switch (model.kind) {
        case SymbolKind::FractLaplacian: {
            const double r2 = p.norm2();
            if (r2 == 0.0) throw DomainError("eval_symbol: homogeneous symbol at xi = 0");
            return std::pow(r2, model.a);
        }
        case SymbolKind::ShiftedFractLaplacian:
            return std::pow(1.0 + p.norm2(), model.a);
        case SymbolKind::AnisotropicShifted:
            return std::pow(model.beta * p.xi_prime_norm2() + p.xi_n * p.xi_n + model.lambda, model.a);
        case SymbolKind::Expression: {
            Complex v = eval_expr(*model.expr, p.xi_prime, p.xi_n, model.dim);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NumericError("eval_symbol: expression evaluation not finite");
            return v;
        }
    }
    throw NumericError("eval_symbol: corrupt model");
}

// Principal symbol p_0(xi). Built-ins are known analytically; expressions use
// the homogeneous limit p(t xi)/t^{2a} at t in {2^8, 2^9, 2^10} with a
// Richardson consistency check.
inline Complex principal_symbol(const SymbolModel& model, const FrequencyPoint& p,
                                double* consistency = nullptr) {
    switch (model.kind) {
        case SymbolKind::FractLaplacian:
        case SymbolKind::ShiftedFractLaplacian: {
            const double r2 = p.norm2();
            if (r2 == 0.0) throw DomainError("principal_symbol: xi = 0");
            if (consistency) *consistency = 0.0;
            return std::pow(r2, model.a);
        }
        case SymbolKind::AnisotropicShifted: {
            if (consistency) *consistency = 0.0;
            return std::pow(model.beta * p.xi_prime_norm2() + p.xi_n * p.xi_n, model.a);
        }
        case SymbolKind::Expression: {
            const double scale = p.norm();
            if (scale == 0.0) throw DomainError("principal_symbol: xi = 0");
            auto scaled_eval = [&](double t) {
                FrequencyPoint q = p;
                for (double& c : q.xi_prime) c *= t;
                q.xi_n *= t;
                return eval_expr(*model.expr, q.xi_prime, q.xi_n, model.dim) /
                       std::pow(Complex(t, 0.0), Complex(2.0 * model.a, 0.0));
            };
            const Complex r8 = scaled_eval(256.0), r9 = scaled_eval(512.0), r10 = scaled_eval(1024.0);
            const double d1 = std::abs(r9 - r8), d2 = std::abs(r10 - r9);
            const double floor = 1e-12 * (std::abs(r10) + 1e-300);
            // A classical symbol converges at least like 1/t; demand the
            // increments shrink rather than grow.
            if (d2 > 0.75 * d1 + 1e4 * floor)
                throw ClassificationError("principal_symbol: no stable large-t limit (order mismatch?)");
            if (consistency) *consistency = d2;
            // Richardson step assuming O(1/t) convergence.
            return r10 + (r10 - r9);
        }
    }
    throw NumericError("principal_symbol: corrupt model");
}

namespace detail {

// Deterministic direction samples on the unit sphere of R^dim.
inline std::vector<std::vector<double>> sphere_directions(int dim, int count) {
    std::vector<std::vector<double>> dirs;
    if (dim == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = 2.0 * kPi * (static_cast<double>(i) + 0.5) / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    std::mt19937_64 rng(0x5eedf00dULL + static_cast<unsigned>(dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        std::vector<double> v(dim);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (auto& c : v) {
                c = gauss(rng);
                n2 += c * c;
            }
        } while (n2 < 1e-12);
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& c : v) c *= inv;
        dirs.push_back(v);
    }
    return dirs;
}

inline FrequencyPoint point_from_direction(const std::vector<double>& dir) {
    FrequencyPoint p;
    p.xi_prime.assign(dir.begin(), dir.end() - 1);
    p.xi_n = dir.back();
    return p;
}

}  // namespace detail

// Evenness of the principal part: p_0(-xi) = p_0(xi). Built-in families are
// even by inspection; expressions are sampled over directions.
inline bool check_evenness(const SymbolModel& model, int samples = 64) {
    model.validate();
    if (model.kind != SymbolKind::Expression) return true;
    const auto dirs = detail::sphere_directions(model.dim, samples);
    for (const auto& d : dirs) {
        FrequencyPoint p = detail::point_from_direction(d);
        FrequencyPoint m = p;
        for (double& c : m.xi_prime) c = -c;
        m.xi_n = -m.xi_n;
        const Complex v = principal_symbol(model, p);
        const Complex w = principal_symbol(model, m);
        if (std::abs(v - w) > 1e-10 * std::max(std::abs(v), 1e-30)) return false;
    }
    return true;
}

struct EllipticityResult {
    bool elliptic = false;
    std::optional<double> arg_gap_direction;  // arg of a ray avoided by p_0
    std::optional<std::vector<double>> offending_direction;
    double min_abs = 0.0;
    double gap = 0.0;
};

// Ellipticity with the principal symbol avoiding a ray: p_0 nonvanishing on
// the sphere and its arguments leaving an open angular gap.
inline EllipticityResult check_ellipticity_avoiding_ray(const SymbolModel& model, int directions = 64) {
    model.validate();
    EllipticityResult res;
    const auto dirs = detail::sphere_directions(model.dim, directions);
    std::vector<double> args;
    double max_abs = 0.0, min_abs = std::numeric_limits<double>::infinity();
    std::vector<double> worst;
    for (const auto& d : dirs) {
        const Complex v = principal_symbol(model, detail::point_from_direction(d));
        const double m = std::abs(v);
        max_abs = std::max(max_abs, m);
        if (m < min_abs) {
            min_abs = m;
            worst = d;
        }
        args.push_back(std::arg(v));
    }
    res.min_abs = min_abs;
    if (min_abs <= 1e-12 * max_abs) {
        res.elliptic = false;
        res.offending_direction = worst;
        return res;
    }
    std::sort(args.begin(), args.end());
    double best_gap = 2.0 * kPi - (args.back() - args.front());
    double gap_mid = args.back() + 0.5 * best_gap;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const double g = args[i] - args[i - 1];
        if (g > best_gap) {
            best_gap = g;
            gap_mid = args[i - 1] + 0.5 * g;
        }
    }
    if (gap_mid > kPi) gap_mid -= 2.0 * kPi;
    res.gap = best_gap;
    const double min_gap = std::max(0.1, 3.0 * 2.0 * kPi / std::max<std::size_t>(args.size(), 1));
    res.elliptic = best_gap > min_gap;
    if (res.elliptic) res.arg_gap_direction = gap_mid;
    return res;
}

// s_0 = p_0 at the flat-boundary interior normal (0,...,0,1).
inline Complex normal_principal_value(const SymbolModel& model) {
    FrequencyPoint nu;
    nu.xi_prime.assign(static_cast<std::size_t>(std::max(model.dim - 1, 0)), 0.0);
    nu.xi_n = 1.0;
    return principal_symbol(model, nu);
}

// ---------------------------------------------------------------------------
// Per-frequency slices
// ---------------------------------------------------------------------------

// A complex function of xi_n at fixed tangential frequency, with asymptotic
// metadata. `order` is the decay/growth order in xi_n; order-0 slices carry
// the limit value at xi_n -> +-infinity.
struct SymbolSlice {
    double sigma = 1.0;
    std::vector<double> xi_prime;
    double order = 0.0;
    Complex asymptotic_constant{0.0, 0.0};
    std::function<Complex(double)> eval;

    std::vector<Complex> sample(const XiGrid& grid) const {
        std::vector<Complex> v(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) v[j] = eval(grid.xi(j));
        return v;
    }
};

// Reduced symbol q = chi_-^{-a} p chi_+^{-a} (full mode) or the principal
// q_0 = s_0^{-1} p_0 |xi|^{-2a} (principal mode, restricted to |xi'| >= 1
// where the smoothed bracket equals |xi|).
inline SymbolSlice reduced_symbol(const SymbolModel& model, const std::vector<double>& xi_prime,
                                  bool principal_only = false) {
    model.validate();
    if (!model.even || !model.elliptic)
        throw FactorizabilityError("reduced_symbol: model must be even and elliptic");
    FrequencyPoint base;
    base.xi_prime = xi_prime;
    const double sigma = base.sigma();
    const double t2 = base.xi_prime_norm2();

    SymbolSlice s;
    s.sigma = sigma;
    s.xi_prime = xi_prime;
    s.order = 0.0;

    if (principal_only) {
        if (t2 < 1.0)
            throw DomainError("reduced_symbol: principal mode needs |xi'| >= 1 (bracket-smoothing region)");
        const Complex s0 = normal_principal_value(model);
        s.asymptotic_constant = Complex(1.0, 0.0);
        const SymbolModel m = model;
        const std::vector<double> xp = xi_prime;
        const double aa = model.a;
        s.eval = [m, xp, t2, s0, aa](double xi_n) {
            FrequencyPoint p;
            p.xi_prime = xp;
            p.xi_n = xi_n;
            const Complex p0 = principal_symbol(m, p);
            return p0 / (s0 * std::pow(t2 + xi_n * xi_n, aa));
        };
        return s;
    }

    const Complex s0 = normal_principal_value(model);
    s.asymptotic_constant = s0;
    const SymbolModel m = model;
    const std::vector<double> xp = xi_prime;
    const double aa = model.a;
    s.eval = [m, xp, sigma, aa](double xi_n) {
        FrequencyPoint p;
        p.xi_prime = xp;
        p.xi_n = xi_n;
        return chi_minus(-aa, sigma, xi_n) * eval_symbol(m, p) * chi_plus(-aa, sigma, xi_n);
    };
    return s;
}

// Closed-form plus/minus factors of the reduced symbol, available for the
// built-in families (Example-6.3 style): q^pm = ((mu +- i xi_n)/(sigma +- i xi_n))^a
// with mu^2 = beta |xi'|^2 + lambda (beta = 1, lambda in {0,1} for the
// isotropic families).
struct ClosedFormFactors {
    double mu = 1.0;      // inner scale
    double sigma = 1.0;
    double a = 0.5;
    Complex s0{1.0, 0.0};

    Complex plus(double xi_n) const {
        return std::pow(Complex(mu, xi_n) / Complex(sigma, xi_n), Complex(a, 0.0));
    }
    Complex minus(double xi_n) const {
        return s0 * std::pow(Complex(mu, -xi_n) / Complex(sigma, -xi_n), Complex(a, 0.0));
    }
};

inline std::optional<ClosedFormFactors> closed_form_factors(const SymbolModel& model,
                                                            const std::vector<double>& xi_prime) {
    FrequencyPoint base;
    base.xi_prime = xi_prime;
    ClosedFormFactors f;
    f.sigma = base.sigma();
    f.a = model.a;
    f.s0 = Complex(1.0, 0.0);
    switch (model.kind) {
        case SymbolKind::FractLaplacian:
            if (base.xi_prime_norm2() == 0.0) return std::nullopt;  // q vanishes at xi_n = 0
            f.mu = base.xi_prime_norm();
            return f;
        case SymbolKind::ShiftedFractLaplacian:
            f.mu = f.sigma;
            return f;
        case SymbolKind::AnisotropicShifted:
            f.mu = std::sqrt(model.beta * base.xi_prime_norm2() + model.lambda);
            if (f.mu == 0.0) return std::nullopt;
            return f;
        case SymbolKind::Expression:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace fracbvp

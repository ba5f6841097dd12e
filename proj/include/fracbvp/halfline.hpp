#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fracbvp/errors.hpp"
#include "fracbvp/hardy.hpp"
#include "fracbvp/xi_grid.hpp"

namespace fracbvp {

// ---------------------------------------------------------------------------
// Quadrature rules
// ---------------------------------------------------------------------------

// Gauss rule for int_0^1 f(x) x^mu dx (weight included in w), via the Jacobi
// recurrence and Golub-Welsch.
struct GaussRule {
    std::vector<double> x, w;
};

inline GaussRule gauss_jacobi_unit(int m, double mu) {
    if (m < 1) throw PreconditionError("gauss_jacobi_unit: need at least one node");
    if (!(mu > -1.0)) throw DivergenceError("gauss_jacobi_unit: weight exponent must be > -1");
    const double alpha = 0.0, beta = mu;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    auto diag = [&](int k) -> double {
        if (k == 0) return (beta - alpha) / (alpha + beta + 2.0);
        const double s = 2.0 * k + alpha + beta;
        return (beta * beta - alpha * alpha) / (s * (s + 2.0));
    };
    auto offdiag2 = [&](int k) -> double {
        if (k == 1)
            return 4.0 * (1.0 + alpha) * (1.0 + beta) /
                   ((2.0 + alpha + beta) * (2.0 + alpha + beta) * (3.0 + alpha + beta));
        const double s = 2.0 * k + alpha + beta;
        return 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
               (s * s * (s + 1.0) * (s - 1.0));
    };
    for (int k = 0; k < m; ++k) T(k, k) = diag(k);
    for (int k = 1; k < m; ++k) {
        const double b = std::sqrt(offdiag2(k));
        T(k, k - 1) = b;
        T(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0);
    GaussRule rule;
    rule.x.resize(m);
    rule.w.resize(m);
    // Map [-1,1] with weight (1+u)^beta to [0,1] with weight x^beta.
    const double scale = std::pow(2.0, -beta - 1.0);
    for (int i = 0; i < m; ++i) {
        const double u = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.x[i] = 0.5 * (1.0 + u);
        rule.w[i] = scale * mu0 * v0 * v0;
    }
    return rule;
}

inline GaussRule gauss_jacobi(int m, double mu, double length) {
    GaussRule unit = gauss_jacobi_unit(m, mu);
    const double s = std::pow(length, mu + 1.0);
    for (int i = 0; i < m; ++i) {
        unit.x[i] *= length;
        unit.w[i] *= s;
    }
    return unit;
}

inline GaussRule gauss_legendre(int m, double lo, double hi) {
    GaussRule unit = gauss_jacobi_unit(m, 0.0);
    GaussRule rule;
    rule.x.resize(m);
    rule.w.resize(m);
    for (int i = 0; i < m; ++i) {
        rule.x[i] = lo + (hi - lo) * unit.x[i];
        rule.w[i] = (hi - lo) * unit.w[i];
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Graded grid
// ---------------------------------------------------------------------------

// Quadrature/evaluation layout for half-line profiles u = x^{a-1} w(x):
// Gauss-Jacobi with weight x^{a-1} (and x^{2a-2} when integrable) on [0, T],
// a Gauss-Legendre tail on [T, T_tail], and evaluation nodes clustered near 0
// for trace extraction.
class GradedGrid {
public:
    static std::shared_ptr<const GradedGrid> make(double a, double sigma, double T = 0.0,
                                                  int m1 = 64, double T_tail = 0.0, int m2 = 64) {
        return std::shared_ptr<const GradedGrid>(new GradedGrid(a, sigma, T, m1, T_tail, m2));
    }

    double a() const { return a_; }
    double sigma() const { return sigma_; }
    double T() const { return T_; }
    double T_tail() const { return T_tail_; }

    const GaussRule& main_rule() const { return main_; }
    const std::optional<GaussRule>& pair_rule() const { return pair_; }
    const GaussRule& tail_rule() const { return tail_; }
    const std::vector<double>& trace_nodes() const { return trace_; }

    // int_0^{T_tail} F(x) x^mu dx for a pointwise-evaluable integrand factor F.
    Complex integrate(double mu, const std::function<Complex(double)>& F) const {
        const GaussRule* rule = rule_for(mu);
        GaussRule local;
        if (!rule) {
            local = gauss_jacobi(main_.x.size(), mu, T_);
            rule = &local;
        }
        Complex s{0.0, 0.0};
        for (std::size_t i = 0; i < rule->x.size(); ++i) s += rule->w[i] * F(rule->x[i]);
        for (std::size_t i = 0; i < tail_.x.size(); ++i)
            s += tail_.w[i] * std::pow(tail_.x[i], mu) * F(tail_.x[i]);
        return s;
    }

    // Same with the coarse companion rules; the difference is a quadrature
    // error estimate.
    Complex integrate_coarse(double mu, const std::function<Complex(double)>& F) const {
        GaussRule rule = gauss_jacobi(std::max<std::size_t>(main_.x.size() / 2, 8), mu, T_);
        Complex s{0.0, 0.0};
        for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * F(rule.x[i]);
        for (std::size_t i = 0; i < tail_coarse_.x.size(); ++i)
            s += tail_coarse_.w[i] * std::pow(tail_coarse_.x[i], mu) * F(tail_coarse_.x[i]);
        return s;
    }

private:
    GradedGrid(double a, double sigma, double T, int m1, double T_tail, int m2)
        : a_(a), sigma_(sigma) {
        if (!(a > 0.0)) throw PreconditionError("GradedGrid: a must be > 0");
        if (!(sigma >= 1.0)) throw PreconditionError("GradedGrid: sigma must be >= 1");
        T_ = T > 0.0 ? T : 12.0 * std::max(1.0, a) / sigma;
        T_tail_ = T_tail > 0.0 ? T_tail : std::max(40.0 / sigma, 2.0 * T_);
        main_ = gauss_jacobi(m1, a - 1.0, T_);
        if (2.0 * a - 2.0 > -1.0) pair_ = gauss_jacobi(m1, 2.0 * a - 2.0, T_);
        tail_ = gauss_legendre(m2, T_, T_tail_);
        tail_coarse_ = gauss_legendre(std::max(m2 / 2, 8), T_, T_tail_);
        const double delta = 1e-3 / sigma;
        for (int i = 1; i <= 5; ++i) trace_.push_back(delta * i);
        // quadrature sanity: strictly increasing nodes in (0, T]
        for (std::size_t i = 1; i < main_.x.size(); ++i) {
            if (!(main_.x[i] > main_.x[i - 1]))
                throw NumericError("GradedGrid: quadrature nodes not increasing");
        }
    }

    const GaussRule* rule_for(double mu) const {
        if (std::abs(mu - (a_ - 1.0)) < 1e-12) return &main_;
        if (pair_ && std::abs(mu - (2.0 * a_ - 2.0)) < 1e-12) return &*pair_;
        return nullptr;
    }

    double a_, sigma_, T_ = 0.0, T_tail_ = 0.0;
    GaussRule main_, tail_, tail_coarse_;
    std::optional<GaussRule> pair_;
    std::vector<double> trace_;
};

// ---------------------------------------------------------------------------
// Half-line profiles
// ---------------------------------------------------------------------------

struct TraceData {
    Complex u0{0.0, 0.0};   // Dirichlet trace gamma_0^{a-1} u
    Complex u1{0.0, 0.0};   // Neumann trace gamma_1^{a-1} u
};

// u(x) = x^{a-1} w(x) on the half-line, stored through its regularized factor
// w; model profiles u = sum_k phi_k I^{a-1+k}(x) e^{-sigma x} carry exact
// frequency-domain coefficients (hat u = sum_k phi_k (sigma + i xi)^{-a-k}).
class HalfLineProfile {
public:
    HalfLineProfile() = default;
    HalfLineProfile(double a, double sigma, std::shared_ptr<const GradedGrid> grid,
                    std::function<Complex(double)> w_eval,
                    std::optional<std::vector<Complex>> coeffs = std::nullopt)
        : a_(a), sigma_(sigma), grid_(std::move(grid)), w_(std::move(w_eval)),
          coeffs_(std::move(coeffs)) {
        cache_values();
    }

    double a() const { return a_; }
    double sigma() const { return sigma_; }
    const std::shared_ptr<const GradedGrid>& grid() const { return grid_; }
    bool has_model_coeffs() const { return coeffs_.has_value(); }
    const std::vector<Complex>& model_coeffs() const {
        if (!coeffs_) throw PreconditionError("HalfLineProfile: no model coefficients");
        return *coeffs_;
    }

    Complex w(double x) const { return w_(x); }
    Complex u(double x) const { return x <= 0.0 ? Complex{0.0, 0.0} : std::pow(x, a_ - 1.0) * w_(x); }
    const std::vector<Complex>& w_values() const { return w_values_; }      // at main rule nodes
    const std::vector<Complex>& w_trace_values() const { return w_trace_; } // at trace nodes

    bool zero() const { return !coeffs_ ? false : coeffs_->empty(); }

private:
    void cache_values() {
        w_values_.clear();
        w_trace_.clear();
        if (!grid_) return;
        for (double x : grid_->main_rule().x) w_values_.push_back(w_(x));
        for (double x : grid_->trace_nodes()) w_trace_.push_back(w_(x));
    }

    double a_ = 0.5, sigma_ = 1.0;
    std::shared_ptr<const GradedGrid> grid_;
    std::function<Complex(double)> w_;
    std::optional<std::vector<Complex>> coeffs_;
    std::vector<Complex> w_values_, w_trace_;
};

// Model profile u = sum_k phi_k I^{a-1+k}(x_n) e^{-sigma x_n}; the empty
// coefficient list gives the zero profile.
inline HalfLineProfile synth_model_profile(double a, double sigma, std::vector<Complex> phi,
                                           std::shared_ptr<const GradedGrid> grid) {
    if (!(a > 0.0)) throw PreconditionError("synth_model_profile: a must be > 0");
    if (!(sigma >= 1.0)) throw PreconditionError("synth_model_profile: sigma must be >= 1");
    auto coeffs = phi;
    auto w = [a, sigma, phi](double x) {
        Complex s{0.0, 0.0};
        double xk = 1.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            s += phi[k] * xk / std::tgamma(a + static_cast<double>(k));
            xk *= x;
        }
        return s * std::exp(-sigma * x);
    };
    return HalfLineProfile(a, sigma, std::move(grid), w, std::move(coeffs));
}

namespace detail {

// Least-squares polynomial fit at the clustered trace nodes; returns value
// and derivative at 0 plus a stability spread from refitting without the
// outermost node.
struct TraceFit {
    Complex value, deriv;
    double spread;
};

inline TraceFit fit_trace(const std::vector<double>& x, const std::vector<Complex>& v, int degree) {
    auto solve = [&](std::size_t count) {
        Eigen::MatrixXcd A(count, degree + 1);
        Eigen::VectorXcd b(count);
        for (std::size_t i = 0; i < count; ++i) {
            double p = 1.0;
            for (int d = 0; d <= degree; ++d) {
                A(i, d) = p;
                p *= x[i];
            }
            b(i) = v[i];
        }
        Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
        return std::pair<Complex, Complex>(c(0), degree >= 1 ? Complex(c(1)) : Complex{0.0, 0.0});
    };
    auto full = solve(x.size());
    auto part = solve(x.size() - 1);
    TraceFit f;
    f.value = full.first;
    f.deriv = full.second;
    f.spread = std::max(std::abs(full.first - part.first), std::abs(full.second - part.second) *
                                                               (x.back() - x.front()));
    return f;
}

}  // namespace detail

// gamma_0^{a-1} u = Gamma(a) w(0); equals phi_0 exactly for model profiles.
inline Complex trace_dirichlet(const HalfLineProfile& p) {
    if (p.has_model_coeffs()) {
        const auto& c = p.model_coeffs();
        return c.empty() ? Complex{0.0, 0.0} : c[0];
    }
    const auto fit = detail::fit_trace(p.grid()->trace_nodes(), p.w_trace_values(), 3);
    if (fit.spread > 1e-6 * (std::abs(fit.value) + 1.0))
        throw AccuracyError("trace_dirichlet: oscillatory w near 0 (spread " +
                            std::to_string(fit.spread) + ")");
    return std::tgamma(p.a()) * fit.value;
}

// gamma_1^{a-1} u = Gamma(a+1) w'(0); for model profiles u1 = phi_1 - a sigma phi_0.
inline Complex trace_neumann(const HalfLineProfile& p) {
    if (p.has_model_coeffs()) {
        const auto& c = p.model_coeffs();
        const Complex phi0 = c.size() > 0 ? c[0] : Complex{0.0, 0.0};
        const Complex phi1 = c.size() > 1 ? c[1] : Complex{0.0, 0.0};
        return phi1 - p.a() * p.sigma() * phi0;
    }
    const auto fit = detail::fit_trace(p.grid()->trace_nodes(), p.w_trace_values(), 3);
    if (fit.spread > 1e-6 * (std::abs(fit.value) + std::abs(fit.deriv) + 1.0))
        throw AccuracyError("trace_neumann: oscillatory w near 0");
    return std::tgamma(p.a() + 1.0) * fit.deriv;
}

// Coefficient transition phi_0 = u_0, phi_1 = u_1 + a <D'> u_0 (with <D'>
// acting as multiplication by sigma on a slice).
inline std::pair<Complex, Complex> coeff_transition(Complex u0, Complex u1, double sigma, double a) {
    return {u0, u1 + a * sigma * u0};
}

// Dual route to the traces: multiply hat u by (sigma + i xi_n)^{a-1} in the
// frequency domain and take boundary limits, cf. u_0 = gamma_0 Xi_+^{a-1} u
// and u_1 = gamma_0 dn Xi_+^{a-1} u - (a-1) <D'> u_0.
inline TraceData trace_via_multiplier(const HalfLineProfile& p, std::shared_ptr<const XiGrid> grid,
                                      const HardyParams& params = {}) {
    if (!p.has_model_coeffs())
        throw PreconditionError("trace_via_multiplier: model coefficients required");
    const auto& phi = p.model_coeffs();
    const double sigma = p.sigma();
    grid->check_sigma(sigma);

    const std::size_t n = grid->size();
    std::vector<Complex> xi_u(n), dn_xi_u(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = grid->xi(j);
        Complex s{0.0, 0.0};
        for (std::size_t k = 0; k < phi.size(); ++k)
            s += phi[k] * chi_plus(-(1.0 + static_cast<double>(k)), sigma, xi);
        xi_u[j] = s;
        dn_xi_u[j] = Complex(0.0, xi) * s;
    }
    const Complex phi0 = phi.empty() ? Complex{0.0, 0.0} : phi[0];

    TraceData t;
    t.u0 = one_sided_limit(xi_u, grid, sigma, HardySide::plus, Complex{0.0, 0.0}, params);
    // The constant part phi_0 of i xi_n * (Xi_+^{a-1}u)^ corresponds to the
    // delta phi_0 (x') x delta(x_n), excluded from the right-limit.
    const Complex g0 = one_sided_limit(dn_xi_u, grid, sigma, HardySide::plus, phi0, params);
    t.u1 = g0 - (p.a() - 1.0) * sigma * t.u0;
    return t;
}

// Poisson profile K_0: value * e^{-sigma x_n}, an unweighted half-line
// function (a = 1 so that w = u); gamma_0 K_0 = I.
inline HalfLineProfile poisson_K0(double sigma, Complex value, std::shared_ptr<const GradedGrid> grid) {
    if (!(sigma >= 1.0)) throw PreconditionError("poisson_K0: sigma must be >= 1");
    std::vector<Complex> coeffs;
    if (value != Complex{0.0, 0.0}) coeffs.push_back(value);
    auto w = [sigma, value](double x) { return value * std::exp(-sigma * x); };
    return HalfLineProfile(1.0, sigma, std::move(grid), w, std::move(coeffs));
}

// <f, g> = int_0^inf f conj(g) x^mu dx via the graded rules, with a coarse-rule
// error estimate. Profiles enter through their regularized factors, so the
// inner product of two profiles uses mu = 2a-2 and plain samplers use mu = 0.
struct InnerProduct {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
};

inline InnerProduct inner_product_halfline(const HalfLineProfile& f, const HalfLineProfile& g,
                                           double weight_exponent) {
    if (!(weight_exponent > -1.0))
        throw DivergenceError("inner_product_halfline: weight exponent <= -1 diverges at 0");
    const auto& grid = *f.grid();
    auto integrand = [&](double x) { return f.w(x) * std::conj(g.w(x)); };
    InnerProduct r;
    r.value = grid.integrate(weight_exponent, integrand);
    const Complex coarse = grid.integrate_coarse(weight_exponent, integrand);
    r.error_estimate = std::abs(r.value - coarse);
    return r;
}

// ---------------------------------------------------------------------------
// Truncated multiplier application on the extended line grid
// ---------------------------------------------------------------------------

// r+ F^{-1}[ m F[e+ f] ] for samples on the line grid (zero for x <= 0 is
// enforced on input and output). Fails when the outer 5% of the frequency
// window still carries relative energy above 1e-4.
inline std::vector<Complex> apply_truncated_multiplier(const std::vector<Complex>& f,
                                                       const LineGrid& grid,
                                                       const std::function<Complex(double)>& m,
                                                       double alias_tol = 1e-4) {
    const std::size_t n = grid.size();
    if (f.size() != n) throw PreconditionError("apply_truncated_multiplier: length mismatch");
    std::vector<Complex> ext(n);
    for (std::size_t j = 0; j < n; ++j) ext[j] = grid.x(j) > 0.0 ? f[j] : Complex{0.0, 0.0};
    // e+ keeps the x = 0 node out; the boundary value is recovered by the
    // half-open convention of the transform pair.
    if (grid.x(n / 2) == 0.0) ext[n / 2] = f[n / 2];

    std::vector<Complex> F = grid.x_to_freq(ext);
    double outer = 0.0, total = 0.0;
    for (std::size_t lp = 0; lp < n; ++lp) {
        const double e = std::norm(F[lp]);
        total += e;
        if (std::abs(grid.freq(lp)) > 0.95 * grid.freq_max()) outer += e;
    }
    if (total > 0.0 && outer / total > alias_tol)
        throw ResolutionError("apply_truncated_multiplier: aliasing detector tripped (" +
                              std::to_string(outer / total) + " of energy in outer band)");
    for (std::size_t lp = 0; lp < n; ++lp) F[lp] *= m(grid.freq(lp));
    std::vector<Complex> out = grid.freq_to_x(F);
    for (std::size_t j = 0; j < n; ++j) {
        if (grid.x(j) < 0.0) out[j] = Complex{0.0, 0.0};
    }
    return out;
}

}  // namespace fracbvp

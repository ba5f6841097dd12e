#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "fracbvp/errors.hpp"
#include "fracbvp/fft.hpp"

namespace fracbvp {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Uniform symmetric frequency window [-xi_max, xi_max) for one tangential
// frequency. The dual z-grid has spacing pi/xi_max; z-domain vectors are kept
// in FFT-natural order (index k' = 0..n-1 maps to the signed index
// k = k' < n/2 ? k' : k' - n).
//
// Transform conventions (matching F u = int e^{-i x xi} u dx):
//   to_z:   g_check(z_k) = (1/2pi) sum_j g(xi_j) e^{+i xi_j z_k} dxi
//   to_xi:  g(xi_j)      = sum_k g_check(z_k) e^{-i xi_j z_k} hz
class XiGrid {
public:
    XiGrid(double xi_max, std::size_t n_points) : xi_max_(xi_max), n_(n_points) {
        if (!(xi_max > 0.0)) throw PreconditionError("XiGrid: xi_max must be positive");
        if (!is_power_of_two(n_) || n_ < 256)
            throw PreconditionError("XiGrid: n_points must be a power of two >= 256");
        dxi_ = 2.0 * xi_max_ / static_cast<double>(n_);
        hz_ = kPi / xi_max_;
    }

    double xi_max() const { return xi_max_; }
    std::size_t size() const { return n_; }
    double dxi() const { return dxi_; }
    double hz() const { return hz_; }

    double xi(std::size_t j) const { return -xi_max_ + static_cast<double>(j) * dxi_; }

    // Signed dual index for storage slot k'.
    long z_index(std::size_t kp) const {
        return kp < n_ / 2 ? static_cast<long>(kp) : static_cast<long>(kp) - static_cast<long>(n_);
    }
    double z(std::size_t kp) const { return static_cast<double>(z_index(kp)) * hz_; }
    // Storage slot of the signed dual index k in [-n/2, n/2).
    std::size_t z_slot(long k) const {
        return k >= 0 ? static_cast<std::size_t>(k) : static_cast<std::size_t>(k + static_cast<long>(n_));
    }

    std::vector<double> xi_nodes() const {
        std::vector<double> v(n_);
        for (std::size_t j = 0; j < n_; ++j) v[j] = xi(j);
        return v;
    }

    // Resolution guard relative to the slice scale sigma.
    void check_sigma(double sigma) const {
        if (xi_max_ < 16.0 * sigma)
            throw ResolutionError("XiGrid: xi_max below 16*sigma resolution guard");
    }

    std::vector<Complex> to_z(const std::vector<Complex>& f) const {
        require_size(f);
        std::vector<Complex> v = fft(f, +1);
        const double scale = dxi_ / (2.0 * kPi);
        for (std::size_t kp = 0; kp < n_; ++kp) {
            v[kp] *= (kp % 2 == 0 ? scale : -scale);
        }
        return v;
    }

    std::vector<Complex> to_xi(const std::vector<Complex>& zvals) const {
        require_size(zvals);
        std::vector<Complex> w(n_);
        for (std::size_t kp = 0; kp < n_; ++kp) {
            w[kp] = (kp % 2 == 0 ? zvals[kp] : -zvals[kp]);
        }
        fft_inplace(w, -1);
        for (auto& c : w) c *= hz_;
        return w;
    }

private:
    void require_size(const std::vector<Complex>& f) const {
        if (f.size() != n_) throw PreconditionError("XiGrid: sample vector has wrong length");
    }

    double xi_max_;
    std::size_t n_;
    double dxi_;
    double hz_;
};

// Uniform spatial grid [-length, length) used for truncated multiplier
// application; x = 0 sits at slot n/2. Frequencies are kept in FFT-natural
// order with spacing pi/length.
class LineGrid {
public:
    LineGrid(double length, std::size_t n_points) : length_(length), n_(n_points) {
        if (!(length > 0.0)) throw PreconditionError("LineGrid: length must be positive");
        if (!is_power_of_two(n_) || n_ < 256)
            throw PreconditionError("LineGrid: n_points must be a power of two >= 256");
        dx_ = 2.0 * length_ / static_cast<double>(n_);
        dfreq_ = kPi / length_;
    }

    double length() const { return length_; }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double dfreq() const { return dfreq_; }
    double freq_max() const { return kPi / dx_; }

    double x(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(n_ / 2)) * dx_;
    }
    long freq_index(std::size_t lp) const {
        return lp < n_ / 2 ? static_cast<long>(lp) : static_cast<long>(lp) - static_cast<long>(n_);
    }
    double freq(std::size_t lp) const { return static_cast<double>(freq_index(lp)) * dfreq_; }

    // F[e+ f](xi_l) for samples given on the x-nodes.
    std::vector<Complex> x_to_freq(const std::vector<Complex>& f) const {
        require_size(f);
        std::vector<Complex> v(n_);
        for (std::size_t j = 0; j < n_; ++j) v[j] = f[j];
        fft_inplace(v, -1);
        for (std::size_t lp = 0; lp < n_; ++lp) {
            v[lp] *= (lp % 2 == 0 ? dx_ : -dx_);
        }
        return v;
    }

    std::vector<Complex> freq_to_x(const std::vector<Complex>& F) const {
        require_size(F);
        std::vector<Complex> w(n_);
        for (std::size_t lp = 0; lp < n_; ++lp) {
            w[lp] = (lp % 2 == 0 ? F[lp] : -F[lp]);
        }
        fft_inplace(w, +1);
        const double scale = dfreq_ / (2.0 * kPi);
        for (auto& c : w) c *= scale;
        return w;
    }

private:
    void require_size(const std::vector<Complex>& f) const {
        if (f.size() != n_) throw PreconditionError("LineGrid: sample vector has wrong length");
    }

    double length_;
    std::size_t n_;
    double dx_;
    double dfreq_;
};

}  // namespace fracbvp

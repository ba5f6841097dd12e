#pragma once

#include <complex>
#include <vector>

#include "fracbvp/errors.hpp"

namespace fracbvp {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place radix-2 FFT. sign = -1: sum_j v[j] e^{-2*pi*i*j*k/n} (forward),
// sign = +1: e^{+...} (inverse sum, no 1/n scaling).
inline void fft_inplace(std::vector<Complex>& v, int sign) {
    const std::size_t n = v.size();
    if (!is_power_of_two(n)) throw PreconditionError("fft: length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.141592653589793238462643383279502884 / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = v[i + k];
                Complex t = v[i + k + len / 2] * w;
                v[i + k] = u + t;
                v[i + k + len / 2] = u - t;
                w *= wlen;
            }
        }
    }
}

inline std::vector<Complex> fft(std::vector<Complex> v, int sign) {
    fft_inplace(v, sign);
    return v;
}

}  // namespace fracbvp

// fft.hpp — mixed-radix complex FFT for arbitrary sizes.

// Copyright 2026  the hush authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "hush/common.hpp"

namespace hush::fft {

using cd = std::complex<double>;

namespace detail {

inline std::size_t smallest_factor(std::size_t n) {
  for (std::size_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return p;
  return n;
}

// Twiddle table for one transform size, shared down the recursion.
struct Twiddles {
  std::size_t n;
  std::vector<cd> w;  // w[r] = exp(sign * 2*pi*i * r / n)
  Twiddles(std::size_t n_, bool inverse) : n(n_), w(n_) {
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      double ang = sign * 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
      w[r] = cd(std::cos(ang), std::sin(ang));
    }
  }
  // exp(sign*2*pi*i * (j*k) / m) for a sub-size m dividing n
  cd at(std::size_t jk, std::size_t m) const { return w[(jk % m) * (n / m)]; }
};

// Decimation in time over the smallest prime factor. Prime sizes fall out of
// the same combine step (m == 1 gives the naive DFT).
inline void fft_rec(const cd* in, cd* out, std::size_t n, std::size_t stride,
                    const Twiddles& tw) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = smallest_factor(n);
  const std::size_t m = n / p;
  for (std::size_t j = 0; j < p; ++j)
    fft_rec(in + j * stride, out + j * m, m, stride * p, tw);
  std::vector<cd> mix(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc(0.0, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      acc += tw.at(j * k, n) * out[j * m + k % m];
    mix[k] = acc;
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = mix[k];
}

}  // namespace detail

inline std::vector<cd> fft(const std::vector<cd>& x) {
  if (x.empty()) return {};
  std::vector<cd> y(x.size());
  detail::Twiddles tw(x.size(), false);
  detail::fft_rec(x.data(), y.data(), x.size(), 1, tw);
  return y;
}

inline std::vector<cd> ifft(const std::vector<cd>& x) {
  if (x.empty()) return {};
  std::vector<cd> y(x.size());
  detail::Twiddles tw(x.size(), true);
  detail::fft_rec(x.data(), y.data(), x.size(), 1, tw);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (auto& v : y) v *= inv;
  return y;
}

// Real-input DFT: keeps bins 0 .. n/2 (inclusive).
inline std::vector<cd> rdft(const std::vector<double>& x) {
  std::vector<cd> c(x.begin(), x.end());
  std::vector<cd> full = fft(c);
  full.resize(x.size() / 2 + 1);
  return full;
}

// Inverse of rdft for an even-or-odd full length n; reconstructs the missing
// bins by hermitian symmetry.
inline std::vector<double> irdft(const std::vector<cd>& bins, std::size_t n) {
  require(bins.size() == n / 2 + 1, "irdft: bin count does not match length");
  std::vector<cd> full(n);
  for (std::size_t k = 0; k < bins.size(); ++k) full[k] = bins[k];
  for (std::size_t k = bins.size(); k < n; ++k) full[k] = std::conj(full[n - k]);
  std::vector<cd> t = ifft(full);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = t[i].real();
  return y;
}

}  // namespace hush::fft

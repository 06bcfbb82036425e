#pragma once

// Shared fixtures: random admissible potentials and small numeric helpers.

#include <cmath>
#include <random>
#include <vector>

#include "homlab/potential.hpp"

namespace homlab::testing {

enum class Constraint { none, mean_zero, no_y_mean, no_tau_mean };

// Random real trig polynomial with |m_i| <= mmax, |n| <= nmax and the modes
// forbidden by `c` removed.
inline TrigField random_field(std::mt19937_64& rng, int dim, Constraint c, int mmax = 2, int nmax = 2,
                              double density = 0.5) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), coin(0.0, 1.0);
  std::vector<Mode> modes;
  const int m2max = dim == 2 ? mmax : 0;
  for (int m1 = -mmax; m1 <= mmax; ++m1)
    for (int m2 = -m2max; m2 <= m2max; ++m2)
      for (int n = -nmax; n <= nmax; ++n) {
        // one representative per Hermitian pair
        const ModeKey key{{m1, m2}, n};
        const ModeKey partner{{-m1, -m2}, -n};
        if (partner < key) continue;
        const bool m_zero = m1 == 0 && m2 == 0;
        if (c == Constraint::mean_zero && m_zero && n == 0) continue;
        if (c == Constraint::no_y_mean && m_zero) continue;
        if (c == Constraint::no_tau_mean && n == 0) continue;
        if (coin(rng) > density) continue;
        Complex z{amp(rng), key == partner ? 0.0 : amp(rng)};
        modes.push_back({{m1, m2}, n, z});
      }
  return TrigField::from_modes(dim, modes);
}

// Trapezoid average of f over a uniform N^{d+1} sample of the torus.
template <class F>
double torus_average(int dim, int N, F&& f) {
  double sum = 0.0;
  const int N2 = dim == 2 ? N : 1;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N2; ++b)
      for (int t = 0; t < N; ++t) sum += f(Point{static_cast<double>(a) / N, static_cast<double>(b) / N},
                                           static_cast<double>(t) / N);
  return sum / (static_cast<double>(N) * N2 * N);
}

// Values of f on the uniform N^{d+1} torus sample, index ((a * N + b) * N + t)
// (b absent for d = 1). Uses exact root-of-unity tables instead of per-point
// evaluation.
inline std::vector<double> sample_torus(const TrigField& f, int N) {
  std::vector<Complex> root(N);
  for (int i = 0; i < N; ++i) root[i] = std::polar(1.0, kTwoPi * i / N);
  const auto w = [&](long long e) { return root[((e % N) + N) % N]; };
  const int d = f.dim();
  const int N2 = d == 2 ? N : 1;
  std::vector<double> out(static_cast<std::size_t>(N) * N2 * N, 0.0);
  for (const auto& [key, c] : f.modes()) {
    std::size_t idx = 0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N2; ++b) {
        const Complex s = c * w(static_cast<long long>(key.m[0]) * a) * w(static_cast<long long>(key.m[1]) * b);
        for (int t = 0; t < N; ++t) out[idx++] += (s * w(static_cast<long long>(key.n) * t)).real();
      }
  }
  return out;
}

}  // namespace homlab::testing

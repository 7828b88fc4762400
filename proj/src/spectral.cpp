#include "qwalk/spectral.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qwalk/errors.hpp"
#include "qwalk/step_distribution.hpp"

namespace qwalk {

double SpectralMoments::variance_x1(std::int64_t t) const {
  const auto i = static_cast<std::size_t>(t - 1);
  return second_x1[i] - mean_x1[i] * mean_x1[i];
}

double SpectralMoments::variance_x2(std::int64_t t) const {
  const auto i = static_cast<std::size_t>(t - 1);
  return second_x2[i] - mean_x2[i] * mean_x2[i];
}

SpectralMoments spectral_moments(const CoinMatrix4& coin, const Amplitude4& initial,
                                 const std::vector<std::int64_t>& d1,
                                 const std::vector<std::int64_t>& d2, std::int64_t samples,
                                 std::uint64_t jitter_seed) {
  if (samples < 1) throw InvalidParameter(fmt::format("spectral samples must be >= 1, got {}", samples));
  if (d1.size() != d2.size()) throw DimensionMismatch("step sequences differ in length");
  auto side = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
  while (side * side < samples) ++side;

  const std::size_t steps = d1.size();
  SpectralMoments out;
  out.samples = side * side;
  out.mean_x1.assign(steps, 0.0);
  out.mean_x2.assign(steps, 0.0);
  out.second_x1.assign(steps, 0.0);
  out.second_x2.assign(steps, 0.0);
  out.coin_density.assign(steps, Eigen::Matrix4cd::Zero());

  const Eigen::Matrix4cd& c = coin.matrix();
  const Eigen::Vector4cd psi0(initial[0], initial[1], initial[2], initial[3]);
  const double cell = 2.0 * std::numbers::pi / static_cast<double>(side);
  const Complex i1(0.0, 1.0);
  RandomStream jitter(jitter_seed);

  for (std::int64_t a = 0; a < side; ++a) {
    for (std::int64_t b = 0; b < side; ++b) {
      const double k1 = -std::numbers::pi + cell * (static_cast<double>(a) + jitter.uniform());
      const double k2 = -std::numbers::pi + cell * (static_cast<double>(b) + jitter.uniform());
      Eigen::Vector4cd psi = psi0;
      Eigen::Vector4cd g1 = Eigen::Vector4cd::Zero();
      Eigen::Vector4cd g2 = Eigen::Vector4cd::Zero();
      for (std::size_t t = 0; t < steps; ++t) {
        psi = c * psi;
        g1 = c * g1;
        g2 = c * g2;
        const auto s1 = static_cast<double>(d1[t]);
        const auto s2 = static_cast<double>(d2[t]);
        const Complex e1 = std::polar(1.0, -k1 * s1);
        const Complex e2 = std::polar(1.0, -k2 * s2);
        for (int s = 0; s < 4; ++s) {
          const double sign1 = kSign1[s];
          const double sign2 = kSign2[s];
          const Complex ph = (sign1 > 0 ? e1 : std::conj(e1)) * (sign2 > 0 ? e2 : std::conj(e2));
          g1[s] = ph * (g1[s] - i1 * (sign1 * s1) * psi[s]);
          g2[s] = ph * (g2[s] - i1 * (sign2 * s2) * psi[s]);
          psi[s] = ph * psi[s];
        }
        out.mean_x1[t] += (psi.dot(i1 * g1)).real();
        out.mean_x2[t] += (psi.dot(i1 * g2)).real();
        out.second_x1[t] += g1.squaredNorm();
        out.second_x2[t] += g2.squaredNorm();
        out.coin_density[t].noalias() += psi * psi.adjoint();
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(out.samples);
  for (std::size_t t = 0; t < steps; ++t) {
    out.mean_x1[t] *= inv;
    out.mean_x2[t] *= inv;
    out.second_x1[t] *= inv;
    out.second_x2[t] *= inv;
    out.coin_density[t] *= inv;
    Eigen::Matrix4cd& rho = out.coin_density[t];
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }
  return out;
}

}  // namespace qwalk

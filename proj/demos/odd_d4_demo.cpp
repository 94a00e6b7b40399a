// Builds the odd-dimensional r = 4 family around a random gamma_1, runs the
// per-degree test and prints the certificate.

#include <cstdlib>
#include <iostream>

#include "fracdiv/fracdiv.hpp"

int main(int argc, char** argv) {
  const int d = argc > 1 ? std::atoi(argv[1]) : 3;
  fracdiv::Rng rng(argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1);
  const auto c = fracdiv::odd_d4_tuple(d, fracdiv::haar_sample(d, rng));

  fracdiv::DivisibilityOptions opts;
  opts.seed = 17;
  const auto report = fracdiv::divisibility_test(c.tuple, 3, opts);
  for (const auto& rec : report.degrees)
    std::cout << "n=" << rec.n << "  N_n=" << rec.N_n << "  sigma_min_rel=" << rec.sigma_min_rel << "  "
              << fracdiv::to_string(rec.verdict) << '\n';
  std::cout << report.overall() << '\n';
  if (report.certificate) {
    const auto pole = fracdiv::linear_pole(fracdiv::HarmonicFunction(
        std::make_shared<const fracdiv::ZonalBasis>(fracdiv::ZonalBasis::from_points(1, report.certificate->poles)),
        report.certificate->coeffs));
    std::cout << "witness pole . fixed point = " << pole.dot(c.pole)
              << "\nresidual max = " << report.certificate->verification.max_residual << '\n';
  }
  return 0;
}

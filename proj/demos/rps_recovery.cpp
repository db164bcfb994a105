// Simulates Rock-Paper-Scissors from a random interior point, fits a cubic
// SINDy model and prints the recovered equations next to the true ones.

#include <cstdint>
#include <cstdlib>
#include <iostream>

#include "repsindy/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace repsindy;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 42;

  const PayoffGame rps = builtin_game("rps");
  const SimplexPoint x0 = sample_simplex(3, seed);
  const Trajectory traj = exact_derivatives(rps, simulate(rps, x0, 10.0, 0.01));

  const FeatureLibrary library(3, 3, false);
  FitOptions opts;
  opts.stlsq.threshold = 0.05;
  opts.constraint_blocks = rps.blocks();
  const SparseModel model = fit(assemble_data({traj}), library, opts);
  const SparseModel truth = ground_truth_coefficients(rps, library);

  std::cout << "x0 = (" << x0(0) << ", " << x0(1) << ", " << x0(2) << "), "
            << traj.samples() << " samples\n\nidentified:\n";
  for (const auto& line : render_equations(model, rps.state_names())) std::cout << "  " << line << '\n';
  std::cout << "truth:\n";
  for (const auto& line : render_equations(truth, rps.state_names())) std::cout << "  " << line << '\n';

  const SupportMetrics s = support_metrics(model, truth);
  std::cout << "\nsupport F1 " << s.f1 << ", max coefficient error "
            << coefficient_error(model, truth).max_abs << '\n';
  return s.f1 == 1.0 ? 0 : 1;
}

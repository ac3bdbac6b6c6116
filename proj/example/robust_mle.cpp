// Robust covariance estimation with RAGDA on a small Gaussian instance,
// then a look at the estimated mean direction and the covariance spectrum.

#include <iostream>

#include "ragda/problems.hpp"
#include "ragda/solvers.hpp"

int main() {
  using namespace ragda;

  const auto problem = generate_gaussian_instance(/*d=*/5, /*n=*/40, /*c=*/-5.0, /*seed=*/1);

  SolverConfig cfg;
  cfg.method = Method::Ragda;
  cfg.max_iters = 2000;
  cfg.seed = 3;

  const Trace trace = run(problem, cfg, {[](const IterationRecord& r) {
                            if (r.t % 500 == 0)
                              std::cout << "t=" << r.t << "  |g_x|=" << r.grad_x_norm << "  |g_y|=" << r.grad_y_norm
                                        << "  f=" << r.f_value << "\n";
                          }});

  std::cout << "stop: " << to_string(trace.stop_reason) << " after " << trace.iterations << " steps\n";
  std::cout << "min stationarity: " << trace.min_stationarity << "\n";
  for (const auto& flag : trace.regime_flags) std::cout << "note: " << flag << "\n";

  const auto y = as_matrix(problem.my(), trace.final_state.y.data);
  std::cout << "x = " << trace.final_state.x.data.transpose() << "\n";
  std::cout << "eig(Y) = " << Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(y).eigenvalues().transpose() << "\n";
}

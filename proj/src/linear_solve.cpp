#include <Eigen/Dense>
#include <stdexcept>

#include "pasa/eval.hpp"

namespace pasa {

std::vector<double> true_q_linear(const TableMdp& mdp, const FixedPolicy& pi, double gamma) {
  const std::int64_t n = static_cast<std::int64_t>(mdp.S) * mdp.A;
  if (n > 20000)
    throw std::invalid_argument("true_q_linear: dense solve limited to S*A <= 20000");
  mdp.validate();
  pi.validate();

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r(n);
  for (int s = 1; s <= mdp.S; ++s) {
    for (int a = 1; a <= mdp.A; ++a) {
      const std::int64_t i = static_cast<std::int64_t>(s - 1) * mdp.A + (a - 1);
      r(i) = mdp.reward_mean(s, a);
      const SparseRow& row = mdp.row(s, a);
      for (auto [t, p] : row.entries) {
        for (int a2 = 1; a2 <= mdp.A; ++a2) {
          const std::int64_t j = static_cast<std::int64_t>(t - 1) * mdp.A + (a2 - 1);
          m(i, j) -= gamma * p * pi.prob(t, a2);
        }
      }
      if (row.uniform_mix > 0.0) {
        const double per_state = row.uniform_mix / mdp.S;
        for (int t = 1; t <= mdp.S; ++t)
          for (int a2 = 1; a2 <= mdp.A; ++a2) {
            const std::int64_t j = static_cast<std::int64_t>(t - 1) * mdp.A + (a2 - 1);
            m(i, j) -= gamma * per_state * pi.prob(t, a2);
          }
      }
    }
  }
  Eigen::VectorXd q = m.partialPivLu().solve(r);
  return std::vector<double>(q.data(), q.data() + n);
}

}  // namespace pasa

#ifndef ROBUSTNET_RENTAL_H_
#define ROBUSTNET_RENTAL_H_

#include <optional>
#include <vector>

#include "robustnet/instances.h"
#include "robustnet/network.h"
#include "robustnet/singlesink.h"

namespace robustnet {

// floor(log_d sqrt(n)) - 1 in integer arithmetic, clamped at 0.
int RentalRadius(int n, int d);

struct RentalOptions {
  // Any radius >= 0 gives a valid bound; defaults to RentalRadius.
  std::optional<int> radius;
};

// Flow split and bound for one terminal v. Each path P of the decomposed
// flow ends on a port w; the rented part of port w is pro-rated over the
// paths using it, the rest counts as bought, near (w in B(v)) or travelling.
struct TerminalSplit {
  NodeIndex terminal = -1;
  double mu_rent = 0.0;
  double mu_bought = 0.0;
  double mu_travel = 0.0;
  double port_rent = 0.0;  // sum_w c(wr) * rented share of port w
  int ball_size = 0;
  double gamma_ball_edges = 0.0;  // gamma^E(v): bought inside B(v)
  double gamma_ball_ports = 0.0;  // gamma^P(v): bought on ports of B(v)
  // port_rent + R mu_travel - gamma^E(v)
  double bound = 0.0;
  // port_rent + sum_{i<R} max(0, mu_travel - gamma(C_i)); at least `bound`.
  double cut_bound = 0.0;
  double rent = 0.0;  // actual rental cost of this terminal
};

struct RentalCertificate {
  int n = 0;
  int d = 0;
  int radius = 0;
  int log_n = 0;  // ceil(log2 n)
  std::vector<TerminalSplit> terminals;
  double gamma_expander = 0.0;  // gamma(E)
  double gamma_ports = 0.0;     // gamma(delta(r))
  double sum_gamma_ball_edges = 0.0;
  double sum_gamma_ball_ports = 0.0;
  int max_ball_size = 0;
  double rent_cost = 0.0;
  double lower_bound = 0.0;      // sum of TerminalSplit::bound
  double cut_lower_bound = 0.0;  // sum of TerminalSplit::cut_bound
  // R (n - sqrt(n) log n) - sqrt(n) log^2 n; meaningful only when
  // gamma(E) < log^2 n and gamma(delta(r)) < log n.
  double aggregate_bound = 0.0;
  bool aggregate_applies = false;
  double max_split_error = 0.0;

  bool splits_ok = false;           // |mu^r + mu^b + mu^t - 1| <= 1e-9
  bool rent_ok = false;             // per terminal and in total, tolerance 1e-6
  bool gamma_edges_ok = false;      // sum gamma^E(v) <= max|B(v)| gamma(E)
  bool gamma_ports_ok = false;      // sum gamma^P(v) <= max|B(v)| gamma(delta(r))
  bool bought_within_ports = false;  // mu^b_v <= gamma^P(v)

  bool ok() const { return splits_ok && rent_ok && gamma_edges_ok && gamma_ports_ok && bought_within_ports; }
};

// Throws StructuralError when the instance does not have the gap shape or
// the solution is invalid for it.
RentalCertificate VerifyRentalCertificate(const GapInstance& instance, const BarSolution& solution,
                                              const RentalOptions& options = {});

}  // namespace robustnet

#endif  // ROBUSTNET_RENTAL_H_

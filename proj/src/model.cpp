#include "feg/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace feg {

Weights::Weights(Eigen::VectorXd w) : w_(std::move(w)) {
  if (w_.size() == 0) throw std::invalid_argument("Weights: empty");
  if ((w_.array() < 0.0).any()) throw std::invalid_argument("Weights: negative entry");
  if (std::abs(w_.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("Weights: entries must sum to 1");
}

Weights Weights::barycenter(int n) {
  return Weights(Eigen::VectorXd::Constant(n, 1.0 / n));
}

Weights Weights::basis(int n, int i) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  w[i] = 1.0;
  return Weights(std::move(w));
}

EnvironmentKernel EnvironmentKernel::stationary(const Grid& state_grid, const Grid& action_grid,
                                                Table table) {
  return time_varying(state_grid, action_grid, {std::move(table)});
}

EnvironmentKernel EnvironmentKernel::time_varying(const Grid& state_grid, const Grid& action_grid,
                                                  std::vector<Table> tables) {
  if (tables.empty()) throw std::invalid_argument("EnvironmentKernel: no tables");
  EnvironmentKernel k;
  k.n_states_ = state_grid.flat_size();
  k.n_actions_ = action_grid.flat_size();
  k.state_grid_id_ = state_grid.id();
  k.action_grid_id_ = action_grid.id();
  const std::size_t expect = static_cast<std::size_t>(k.n_states_) * k.n_actions_;
  for (const auto& t : tables) {
    if (t.size() != expect)
      throw std::invalid_argument("EnvironmentKernel: table size does not match grids");
    for (const auto& row : t)
      if (row.grid_id() != state_grid.id())
        throw std::invalid_argument("EnvironmentKernel: row on wrong grid");
  }
  k.tables_ = std::move(tables);
  return k;
}

const FiniteDistribution& EnvironmentKernel::row(int k, int x, int u) const {
  const auto& t = tables_[detail::step_index(tables_.size(), k)];
  return t[static_cast<std::size_t>(x) * n_actions_ + u];
}

CostModel CostModel::stationary(Eigen::VectorXd state_cost, Eigen::VectorXd action_cost) {
  return time_varying({std::move(state_cost)}, {std::move(action_cost)});
}

CostModel CostModel::time_varying(std::vector<Eigen::VectorXd> state_costs,
                                  std::vector<Eigen::VectorXd> action_costs) {
  if (state_costs.empty() || action_costs.empty())
    throw std::invalid_argument("CostModel: empty cost list");
  for (const auto& c : state_costs)
    if (!c.allFinite()) throw std::invalid_argument("CostModel: non-finite state cost");
  for (const auto& c : action_costs)
    if (!c.allFinite()) throw std::invalid_argument("CostModel: non-finite action cost");
  CostModel m;
  m.state_costs_ = std::move(state_costs);
  m.action_costs_ = std::move(action_costs);
  return m;
}

PrimitiveSet PrimitiveSet::create(
    const Grid& action_grid, std::vector<std::vector<std::vector<FiniteDistribution>>> tables) {
  if (tables.empty() || tables[0].empty() || tables[0][0].empty())
    throw std::invalid_argument("PrimitiveSet: empty");
  PrimitiveSet p;
  p.n_prims_ = static_cast<int>(tables[0].size());
  p.n_states_ = static_cast<int>(tables[0][0].size());
  p.n_actions_ = action_grid.flat_size();
  p.action_grid_id_ = action_grid.id();
  for (const auto& per_step : tables) {
    if (static_cast<int>(per_step.size()) != p.n_prims_)
      throw std::invalid_argument("PrimitiveSet: ragged primitive count");
    for (const auto& per_prim : per_step) {
      if (static_cast<int>(per_prim.size()) != p.n_states_)
        throw std::invalid_argument("PrimitiveSet: ragged state count");
      for (const auto& d : per_prim) {
        if (d.grid_id() != action_grid.id())
          throw std::invalid_argument("PrimitiveSet: primitive on wrong grid");
        // Bounded and a valid pmf by construction; full support is what the
        // gating problem actually needs.
        if (d.probs().minCoeff() <= 0.0)
          throw std::invalid_argument("PrimitiveSet: primitive without full support");
      }
    }
  }
  p.tables_ = std::move(tables);
  return p;
}

Eigen::MatrixXd PrimitiveSet::matrix(int k, int x) const {
  Eigen::MatrixXd m(n_actions_, n_prims_);
  for (int i = 0; i < n_prims_; ++i) m.col(i) = primitive(k, i, x).probs();
  return m;
}

FiniteDistribution mix_policy(const PrimitiveSet& prims, int k, int x, const Weights& w) {
  if (w.size() != prims.n_primitives())
    throw std::invalid_argument("mix_policy: weight count does not match primitive count");
  Eigen::VectorXd mix = Eigen::VectorXd::Zero(prims.n_actions());
  for (int i = 0; i < prims.n_primitives(); ++i)
    mix += w[i] * prims.primitive(k, i, x).probs();
  // Renormalization only rounds off fp error; entries stay positive.
  return FiniteDistribution::on_same_grid(prims.primitive(k, 0, x), std::move(mix));
}

std::string FeasibilityReport::summary() const {
  std::ostringstream os;
  os << (feasible ? "feasible" : "INFEASIBLE") << "; violations=" << violations.size()
     << "; floor-rescued kernel entries=" << floor_rescued_kernel
     << "; floor-rescued policy entries=" << floor_rescued_policy;
  return os.str();
}

FeasibilityReport check_feasibility(const EnvironmentKernel& env, const GenerativeModel& gen,
                                    const PrimitiveSet& prims) {
  if (env.state_grid_id() != gen.ref_kernel.state_grid_id() ||
      env.action_grid_id() != gen.ref_kernel.action_grid_id())
    throw std::invalid_argument("check_feasibility: env and reference kernels on different grids");
  if (env.n_actions() != prims.n_actions())
    throw std::invalid_argument("check_feasibility: primitive action grid mismatch");

  FeasibilityReport rep;
  const int steps = std::max(env.steps(), gen.ref_kernel.steps());
  for (int k = 1; k <= steps; ++k) {
    for (int x = 0; x < env.n_states(); ++x) {
      for (int u = 0; u < env.n_actions(); ++u) {
        const auto& p = env.row(k, x, u);
        const auto& q = gen.ref_kernel.row(k, x, u);
        for (int j = 0; j < p.size(); ++j) {
          if (p[j] > 0.0 && q[j] <= 0.0) {
            rep.feasible = false;
            std::ostringstream os;
            os << "kernel row (k=" << k << ", x=" << x << ", u=" << u
               << ") has mass at x'=" << j << " where the reference has none";
            rep.violations.push_back(os.str());
            break;
          }
          if (p[j] > 0.0 && q.floor() > 0.0 && q[j] <= q.floor() * (1.0 + 1e-9) &&
              p[j] > 16.0 * p.floor())
            ++rep.floor_rescued_kernel;
        }
      }
    }
  }
  const std::size_t policy_steps = gen.ref_policy.size();
  for (std::size_t ks = 0; ks < policy_steps; ++ks) {
    const int k = static_cast<int>(ks) + 1;
    for (int x = 0; x < prims.n_states(); ++x) {
      const auto& rho = gen.policy_row(k, x);
      for (int i = 0; i < prims.n_primitives(); ++i) {
        const auto& pi = prims.primitive(k, i, x);
        for (int u = 0; u < pi.size(); ++u) {
          if (pi[u] > 0.0 && rho[u] <= 0.0) {
            rep.feasible = false;
            std::ostringstream os;
            os << "primitive " << i << " at (k=" << k << ", x=" << x << ") has mass at u=" << u
               << " where the reference policy has none";
            rep.violations.push_back(os.str());
            break;
          }
          if (pi[u] > 0.0 && rho.floor() > 0.0 && rho[u] <= rho.floor() * (1.0 + 1e-9) &&
              pi[u] > 16.0 * pi.floor())
            ++rep.floor_rescued_policy;
        }
      }
    }
  }
  return rep;
}

}  // namespace feg

// Copyright 2026 The OptiWB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optiwb/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include <ceres/ceres.h>

#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"

namespace optiwb {
namespace {

constexpr double kIkTolerance = 1e-12;
constexpr double kFdStep = 1e-6;
// Penalised clearances: margin below which a clearance costs, and the
// radius inside which a sample is re-checked during finite differences.
constexpr double kClearanceMargin = 0.01;
constexpr double kActiveRadius = kClearanceMargin + 0.002;
constexpr double kJointMargin = 0.005;
constexpr double kRateMarginFraction = 0.005;
constexpr double kTimingMargin = 0.005;
// Violation sizes that cost one unit of penalty.
constexpr double kClearanceScale = 0.01;
constexpr double kJointScale = 0.01;
constexpr double kRateScaleFraction = 0.01;
constexpr double kTimingScale = 0.005;
// Width of the rounded |turn| in the timing penalty.
constexpr double kTurnSmoothing = 1e-4;

double soft_abs(double x) { return std::sqrt(x * x + kTurnSmoothing * kTurnSmoothing) - kTurnSmoothing; }

// maneuver_time with rounded turns, smooth where a turn vanishes.
double smooth_maneuver_time(const BasePose& from, const BasePose& to, const BaseLimits& limits) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dist = std::hypot(dx, dy);
  if (dist <= 1e-9) return soft_abs(angle_difference(to.h, from.h)) / limits.omega_max;
  const double theta = std::atan2(dy, dx);
  const double turn = soft_abs(angle_difference(theta, from.h)) + soft_abs(angle_difference(to.h, theta));
  return turn / limits.omega_max + dist / limits.v_max;
}

std::vector<int> fixed_indices(const TaskTrajectory& task) {
  std::vector<int> out;
  for (const FixedJoint& f : task.waypoints.front().fixed_joints) out.push_back(f.arm_joint_index);
  return out;
}

// IK at one knot: descend from the reference, else the branch nearest to it.
std::optional<VecX> knot_arm(const IkSolver& solver, const Waypoint& wp, const BasePose& nu, const VecX* reference) {
  if (reference != nullptr) {
    if (auto q = solver.refine(wp.pose(), wp.fixed_joints, nu, *reference, kIkTolerance)) return q->arm;
  }
  const IkSolutionSet set = solver.solve(wp.pose(), wp.fixed_joints, nu);
  if (set.solutions.empty()) return std::nullopt;
  if (reference == nullptr) return set.solutions.front().config.arm;
  const IkSolution* best = &set.solutions.front();
  for (const IkSolution& s : set.solutions)
    if ((s.config.arm - *reference).norm() < (best->config.arm - *reference).norm()) best = &s;
  const auto polished = solver.refine(wp.pose(), wp.fixed_joints, nu, best->config.arm, kIkTolerance);
  return polished ? polished->arm : best->config.arm;
}

std::vector<double> waypoint_times(const TaskTrajectory& task) {
  std::vector<double> t;
  for (const Waypoint& w : task.waypoints) t.push_back(w.t);
  return t;
}

// Two-knot tasks still need a valid cubic: the interpolator handles N = 1.
CubicInterpolator<double> make_interpolator(const TaskTrajectory& task) {
  return CubicInterpolator<double>(waypoint_times(task));
}

struct Variable {
  enum Kind { kX, kY, kH } kind;
  int first;  // knot range sharing the variable
  int last;
};

struct State {
  std::vector<BasePose> nu;
  MatX arm;  // knots x dof
  BaseProfile profile;
  std::vector<BasePose> base;  // per sample
  VecX tv;
  MatX q, v, a;  // samples x dof
  VecX positional;  // per-sample penalty
  std::vector<char> active;
  double tv_integral = 0.0;
  double arm_snv = 0.0;
  double base_snv = 0.0;
  double limit_penalty = 0.0;
  double timing_penalty = 0.0;
  double positional_penalty = 0.0;

  double cost(double sigma) const { return sigma * tv_integral + (1.0 - sigma) * (arm_snv + base_snv); }
  double penalty() const { return limit_penalty + timing_penalty + positional_penalty; }
};

class Problem {
 public:
  Problem(const RobotModel& model, const Scene& scene, const TaskTrajectory& task, const DPSolution& dp,
          const PlannerConfig& config)
      : model_(model),
        scene_(scene),
        task_(task),
        config_(config),
        solver_(model, config.ik, fixed_indices(task)),
        interpolator_(make_interpolator(task)),
        m_(config.smoothing.samples_per_interval) {
    const int knots = static_cast<int>(task.waypoints.size());
    times_ = waypoint_times(task);
    samples_ = sample_times(times_, m_);
    const int count = static_cast<int>(samples_.size());
    weights_ = VecX::Zero(count);
    for (int i = 0; i + 1 < knots; ++i) {
      const VecX w = simpson_weights(m_, (times_[i + 1] - times_[i]) / m_);
      for (int k = 0; k <= m_; ++k) weights_[i * m_ + k] += w[k];
    }
    pos_ = interpolator_.sampling_matrix(samples_, 0);
    vel_ = interpolator_.sampling_matrix(samples_, 1);
    acc_ = interpolator_.sampling_matrix(samples_, 2);
    const int dof = model.arm_dof();
    arm_weights_ = config.snv_weights ? VecX(config.snv_weights->tail(dof)) : VecX::Ones(dof);
    base_weights_ = config.snv_weights ? Vec3(config.snv_weights->head<3>()) : Vec3::Ones();
    for (const JointConfig& q : dp.trajectory.configs) reference_.push_back(q.arm);

    // Knots sharing a base cell in the seed share their (x, y) variables, so
    // turn-in-place intervals stay turns in place.
    const auto& seed = dp.trajectory.configs;
    int start = 0;
    for (int i = 1; i <= knots; ++i) {
      if (i < knots && seed[i].base.x == seed[start].base.x && seed[i].base.y == seed[start].base.y) continue;
      variables_.push_back({Variable::kX, start, i - 1});
      variables_.push_back({Variable::kY, start, i - 1});
      start = i;
    }
    for (int i = 0; i < knots; ++i) variables_.push_back({Variable::kH, i, i});
  }

  int size() const { return static_cast<int>(variables_.size()); }
  double sigma() const { return config_.sigma; }

  VecX pack(const std::vector<BasePose>& nu) const {
    VecX z(size());
    for (int k = 0; k < size(); ++k) {
      const Variable& v = variables_[k];
      const BasePose& p = nu[v.first];
      z[k] = v.kind == Variable::kX ? p.x : v.kind == Variable::kY ? p.y : p.h;
    }
    return z;
  }

  std::vector<BasePose> unpack(const double* z) const {
    std::vector<BasePose> nu(times_.size());
    for (int k = 0; k < size(); ++k) {
      const Variable& v = variables_[k];
      for (int i = v.first; i <= v.last; ++i) {
        if (v.kind == Variable::kX) nu[i].x = z[k];
        if (v.kind == Variable::kY) nu[i].y = z[k];
        if (v.kind == Variable::kH) nu[i].h = normalize_angle(z[k]);
      }
    }
    return nu;
  }

  /// Arm knot values for the given base knots; empty when IK fails.
  std::optional<MatX> arms_for(const std::vector<BasePose>& nu) const {
    MatX arm(nu.size(), model_.arm_dof());
    for (std::size_t i = 0; i < nu.size(); ++i) {
      const auto q = knot_arm(solver_, task_.waypoints[i], nu[i], &reference_[i]);
      if (!q) return std::nullopt;
      arm.row(static_cast<Eigen::Index>(i)) = q->transpose();
    }
    return arm;
  }

  bool evaluate(const std::vector<BasePose>& nu, State& s) const {
    auto arm = arms_for(nu);
    if (!arm) return false;
    s.nu = nu;
    s.arm = std::move(*arm);
    s.profile = BaseProfile::build(times_, nu, model_.base_limits);
    const int count = static_cast<int>(samples_.size());
    s.base.resize(count);
    s.tv.resize(count);
    for (int k = 0; k < count; ++k) {
      s.base[k] = s.profile.evaluate(samples_[k]).pose;
      s.tv[k] = tv_cost(model_, s.base[k], scene_.target_position);
    }
    s.q = pos_ * s.arm;
    s.v = vel_ * s.arm;
    s.a = acc_ * s.arm;
    s.tv_integral = weights_.dot(s.tv);
    s.arm_snv = arm_energy(s.v);
    s.base_snv = s.profile.squared_rate_integral(base_weights_[0], base_weights_[1], base_weights_[2]);
    s.limit_penalty = limit_penalty(s.q, s.v, s.a);
    s.timing_penalty = timing_penalty(nu);
    s.positional.resize(count);
    s.active.assign(count, 0);
    s.positional_penalty = 0.0;
    for (int k = 0; k < count; ++k) {
      bool active = false;
      s.positional[k] = positional_penalty(k, s.q.row(k).transpose(), s.base[k], active);
      s.active[k] = active;
      s.positional_penalty += s.positional[k];
    }
    return true;
  }

  /// Penalised objective after nudging variable `index` by `step` from the
  /// evaluated state `s`. Only quantities the variable can reach are redone.
  bool perturbed(const State& s, int index, double step, double mu, double& value) const {
    const Variable& var = variables_[index];
    std::vector<BasePose> nu = s.nu;
    for (int i = var.first; i <= var.last; ++i) {
      if (var.kind == Variable::kX) nu[i].x += step;
      if (var.kind == Variable::kY) nu[i].y += step;
      if (var.kind == Variable::kH) nu[i].h = normalize_angle(nu[i].h + step);
    }
    const int rows = var.last - var.first + 1;
    MatX delta(rows, model_.arm_dof());
    for (int i = var.first; i <= var.last; ++i) {
      const VecX seed = s.arm.row(i).transpose();
      const auto q = solver_.refine(task_.waypoints[i].pose(), task_.waypoints[i].fixed_joints, nu[i], seed,
                                    kIkTolerance);
      if (!q) return false;
      delta.row(i - var.first) = (q->arm - seed).transpose();
    }
    const BaseProfile profile = BaseProfile::build(times_, nu, model_.base_limits);
    const MatX dq = pos_.middleCols(var.first, rows) * delta;
    const MatX q = s.q + dq;
    const MatX v = s.v + vel_.middleCols(var.first, rows) * delta;
    const MatX a = s.a + acc_.middleCols(var.first, rows) * delta;

    const int count = static_cast<int>(samples_.size());
    const int lo = std::max(var.first - 1, 0) * m_;
    const int hi = std::min(var.last * m_ + m_, count - 1);
    double tv_integral = s.tv_integral;
    double positional = s.positional_penalty;
    for (int k = 0; k < count; ++k) {
      const bool base_moved = k >= lo && k <= hi;
      BasePose base = s.base[k];
      if (base_moved) {
        base = profile.evaluate(samples_[k]).pose;
        tv_integral += weights_[k] * (tv_cost(model_, base, scene_.target_position) - s.tv[k]);
      }
      if (!s.active[k]) continue;
      if (!base_moved && dq.row(k).cwiseAbs().maxCoeff() < 1e-15) continue;
      bool unused = false;
      positional += positional_penalty(k, q.row(k).transpose(), base, unused) - s.positional[k];
    }
    const double arm_snv = arm_energy(v);
    const double base_snv = profile.squared_rate_integral(base_weights_[0], base_weights_[1], base_weights_[2]);
    const double cost = sigma() * tv_integral + (1.0 - sigma()) * (arm_snv + base_snv);
    value = cost + mu * (limit_penalty(q, v, a) + timing_penalty(nu) + positional);
    return true;
  }

  bool gradient(const State& s, double mu, double* grad) const {
    const double f0 = s.cost(sigma()) + mu * s.penalty();
    for (int k = 0; k < size(); ++k) {
      double fp = 0.0;
      double fm = 0.0;
      const bool up = perturbed(s, k, kFdStep, mu, fp);
      const bool down = perturbed(s, k, -kFdStep, mu, fm);
      if (up && down) {
        grad[k] = (fp - fm) / (2.0 * kFdStep);
      } else if (up) {
        grad[k] = (fp - f0) / kFdStep;
      } else if (down) {
        grad[k] = (f0 - fm) / kFdStep;
      } else {
        return false;
      }
    }
    return true;
  }

  SplineTrajectory trajectory(const State& s) const {
    SplineTrajectory traj;
    traj.base = s.profile;
    traj.arm = interpolator_.interpolate(s.arm.transpose());
    return traj;
  }

 private:
  double arm_energy(const MatX& v) const {
    return weights_.dot((v.array().square().matrix() * arm_weights_));
  }

  double limit_penalty(const MatX& q, const MatX& v, const MatX& a) const {
    double p = 0.0;
    for (int k = 0; k < model_.arm_dof(); ++k) {
      const ArmJoint& j = model_.arm_joints[k];
      const double mid = 0.5 * (j.pos_min + j.pos_max);
      const double half = 0.5 * (j.pos_max - j.pos_min) - kJointMargin;
      const double vm = j.vel_max * (1.0 - kRateMarginFraction);
      const double am = j.acc_max * (1.0 - kRateMarginFraction);
      for (Eigen::Index s = 0; s < q.rows(); ++s) {
        const double ep = (std::abs(q(s, k) - mid) - half) / kJointScale;
        const double ev = (std::abs(v(s, k)) - vm) / (kRateScaleFraction * j.vel_max);
        const double ea = (std::abs(a(s, k)) - am) / (kRateScaleFraction * j.acc_max);
        if (ep > 0.0) p += ep * ep;
        if (ev > 0.0) p += ev * ev;
        if (ea > 0.0) p += ea * ea;
      }
    }
    return p;
  }

  double timing_penalty(const std::vector<BasePose>& nu) const {
    double p = 0.0;
    for (std::size_t i = 0; i + 1 < nu.size(); ++i) {
      const double e =
          (smooth_maneuver_time(nu[i], nu[i + 1], model_.base_limits) - (times_[i + 1] - times_[i] - kTimingMargin)) /
          kTimingScale;
      if (e > 0.0) p += e * e;
    }
    return p;
  }

  double positional_penalty(int k, const VecX& arm, const BasePose& base, bool& active) const {
    const bool is_final = k + 1 == static_cast<int>(samples_.size());
    const JointConfig q(base, arm);
    ConstraintReport r = check_base_placement(model_, scene_, q.base, is_final, kActiveRadius);
    r.append(check_arm_placement(model_, scene_, q, is_final, kActiveRadius));
    active = !r.feasible();
    double p = 0.0;
    for (const Violation& v : r.violations) {
      const double e = (v.magnitude - (kActiveRadius - kClearanceMargin)) / kClearanceScale;
      if (e > 0.0) p += e * e;
    }
    return p;
  }

  const RobotModel& model_;
  const Scene& scene_;
  const TaskTrajectory& task_;
  const PlannerConfig& config_;
  IkSolver solver_;
  CubicInterpolator<double> interpolator_;
  int m_;
  std::vector<double> times_;
  std::vector<double> samples_;
  VecX weights_;
  MatX pos_, vel_, acc_;
  VecX arm_weights_;
  Vec3 base_weights_;
  std::vector<VecX> reference_;
  std::vector<Variable> variables_;
};

class PenalisedObjective : public ceres::FirstOrderFunction {
 public:
  PenalisedObjective(const Problem& problem, double mu, int& evaluations)
      : problem_(problem), mu_(mu), evaluations_(evaluations) {}

  int NumParameters() const override { return problem_.size(); }

  bool Evaluate(const double* z, double* cost, double* gradient) const override {
    ++evaluations_;
    State s;
    if (!problem_.evaluate(problem_.unpack(z), s)) return false;
    *cost = s.cost(problem_.sigma()) + mu_ * s.penalty();
    if (!std::isfinite(*cost)) return false;
    if (gradient != nullptr) return problem_.gradient(s, mu_, gradient);
    return true;
  }

 private:
  const Problem& problem_;
  double mu_;
  int& evaluations_;
};

JointTrajectory wrap(SplineTrajectory traj) {
  JointTrajectory out;
  out.representation = std::move(traj);
  return out;
}

}  // namespace

SmoothingError::SmoothingError(const std::string& what, std::optional<JointTrajectory> best_effort,
                               ConstraintReport report)
    : std::runtime_error(what), best_effort_(std::move(best_effort)), report_(std::move(report)) {}

JointTrajectory interpolate_seed(const RobotModel& model, const TaskTrajectory& task,
                                 const std::vector<BasePose>& nu_knots, const PlannerConfig& config,
                                 const std::vector<VecX>* reference_arms) {
  const std::size_t knots = task.waypoints.size();
  if (nu_knots.size() != knots) throw std::invalid_argument("interpolate_seed: need one base knot per waypoint");
  if (knots < 2) throw std::invalid_argument("interpolate_seed: need at least two waypoints");
  if (reference_arms != nullptr && reference_arms->size() != knots)
    throw std::invalid_argument("interpolate_seed: need one reference arm per waypoint");
  const IkSolver solver(model, config.ik, fixed_indices(task));
  MatX values(model.arm_dof(), knots);
  std::optional<VecX> previous;
  for (std::size_t i = 0; i < knots; ++i) {
    const VecX* reference = reference_arms != nullptr ? &(*reference_arms)[i] : (previous ? &*previous : nullptr);
    const auto arm = knot_arm(solver, task.waypoints[i], nu_knots[i], reference);
    if (!arm) throw SmoothingError("interpolate_seed: no IK solution at waypoint " + std::to_string(i));
    values.col(static_cast<Eigen::Index>(i)) = *arm;
    previous = *arm;
  }
  SplineTrajectory traj;
  traj.base = BaseProfile::build(waypoint_times(task), nu_knots, model.base_limits);
  const auto& excess = traj.base.timing_excess();
  for (std::size_t i = 0; i < excess.size(); ++i)
    if (excess[i] > 1e-9)
      throw SmoothingError("interpolate_seed: base segment " + std::to_string(i) + " needs " +
                           std::to_string(excess[i]) + " s more than its interval at the base limits");
  traj.arm = make_interpolator(task).interpolate(values);
  return wrap(std::move(traj));
}

double task_deviation(const RobotModel& model, const TaskTrajectory& task, const SplineTrajectory& traj,
                      int samples_per_interval) {
  double worst = 0.0;
  const auto& wps = task.waypoints;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    for (int k = 0; k <= samples_per_interval; ++k) {
      const double s = static_cast<double>(k) / samples_per_interval;
      const double t = wps[i].t + s * (wps[i + 1].t - wps[i].t);
      const Vec3 expected = (1.0 - s) * wps[i].position + s * wps[i + 1].position;
      const JointConfig q = eval_trajectory(traj, t).q;
      worst = std::max(worst, (forward_kinematics(model, q).translation - expected).norm());
    }
  }
  return worst;
}

SmoothingResult smooth_optimize(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                const DPSolution& dp_solution, const PlannerConfig& config) {
  if (task.waypoints.size() < 2) throw std::invalid_argument("smooth_optimize: need at least two waypoints");
  const int m = config.smoothing.samples_per_interval;
  const double tol = config.heading_tolerance();
  const VecX* weights = config.snv_weights ? &*config.snv_weights : nullptr;
  const Problem problem(model, scene, task, dp_solution, config);

  std::vector<BasePose> seed_nu;
  for (const JointConfig& q : dp_solution.trajectory.configs) seed_nu.push_back(q.base);
  State seed;
  if (!problem.evaluate(seed_nu, seed))
    throw SmoothingError("smooth_optimize: the DP seed has no IK solution at some waypoint");
  const JointTrajectory seed_traj = wrap(problem.trajectory(seed));

  const auto assess = [&](const JointTrajectory& traj) {
    return check_trajectory(model, scene, traj, 2 * m, tol);
  };
  SmoothingResult result;
  result.seed_cost = trajectory_cost(model, scene, seed_traj, config.sigma, m, weights);
  const ConstraintReport seed_report = assess(seed_traj);
  bool have_best = seed_report.feasible();
  result.stats.seed_violations = static_cast<int>(seed_report.violations.size());
  result.trajectory = seed_traj;
  result.knots = seed_nu;
  result.cost = result.seed_cost;
  ConstraintReport best_report = seed_report;

  VecX z = problem.pack(seed_nu);
  double mu = config.smoothing.initial_penalty;
  for (int round = 0; round < config.smoothing.max_outer_rounds && config.smoothing.max_iterations > 0; ++round) {
    ++result.stats.rounds;
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::BFGS;
    options.max_num_iterations = config.smoothing.max_iterations;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    options.function_tolerance = 1e-10;
    options.gradient_tolerance = 1e-10;
    options.parameter_tolerance = 1e-10;
    ceres::GradientProblem gp(new PenalisedObjective(problem, mu, result.stats.evaluations));
    ceres::GradientProblemSolver::Summary summary;
    VecX trial = z;
    ceres::Solve(options, gp, trial.data(), &summary);
    result.stats.iterations += static_cast<int>(summary.iterations.size());

    State s;
    const std::vector<BasePose> nu = problem.unpack(trial.data());
    if (!problem.evaluate(nu, s)) break;
    z = trial;
    const JointTrajectory traj = wrap(problem.trajectory(s));
    const ConstraintReport report = assess(traj);
    const CostBreakdown cost = trajectory_cost(model, scene, traj, config.sigma, m, weights);
    if (report.feasible()) {
      const bool improved = !have_best || cost.total < result.cost.total - 1e-9;
      if (!have_best || cost.total <= result.cost.total) {
        result.trajectory = traj;
        result.knots = nu;
        result.cost = cost;
        best_report = report;
        have_best = true;
      }
      // Restart the quasi-Newton solve from a feasible iterate while it still pays.
      if (!improved) break;
      continue;
    }
    if (!have_best) best_report = report;
    mu *= 2.0;
  }

  if (!have_best)
    throw SmoothingError("smooth_optimize: no feasible smoothed trajectory found", result.trajectory, best_report);
  result.stats.converged = result.cost.total <= result.seed_cost.total + 1e-9;
  result.stats.max_violation = best_report.max_magnitude();
  result.stats.max_task_deviation =
      task_deviation(model, task, std::get<SplineTrajectory>(result.trajectory.representation), m);
  result.trajectory.cost_report = result.cost;
  return result;
}

}  // namespace optiwb

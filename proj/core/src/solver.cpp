#include <kplateau/solver.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <memory>

namespace kp {

void PenaltyWeights::validate() const {
  for (double w : {closure, margin, overlap, gap}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidInput, "penalty weights must be finite and >= 0");
  }
  if (!(margin_slack >= 0.0 && margin_slack < 1.0)) throw Error(ErrorKind::InvalidInput, "margin slack must lie in [0, 1)");
}

PenaltyWeights PenaltyWeights::scaled(double factor) const {
  PenaltyWeights w = *this;
  w.closure *= factor;
  w.margin *= factor;
  w.overlap *= factor;
  w.gap *= factor;
  return w;
}

namespace {

double square(double x) { return x * x; }

// Least-squares solve discarding singular values below rel * largest: the tangent mismatch rows
// of the closure Jacobian are rank deficient up to finite-difference noise.
VecX truncated_solve(const Eigen::MatrixXd& A, const VecX& b, double rel) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel);
  return svd.solve(b);
}

PenaltyTerms penalty_terms(const LinkConfig& link, const std::vector<FramedCurve>& curves, const PenaltyWeights& w,
                           const ConstraintOptions& copts, bool with_overlap) {
  PenaltyTerms p;
  for (int r = 0; r < link.rod_count(); ++r) {
    const RodSpec& rod = link.rods[r];
    const ClosureResidual cr = closure_residual(curves[r]);
    // Dead zone at half the admissibility tolerance, so admissible closures with some room cost nothing.
    const double pos_room = 0.5 * copts.closure_tolerance * rod.density.length;
    const double tan_room = 0.5 * copts.closure_tolerance;
    p.closure += w.closure * (square(std::max(0.0, cr.position - pos_room)) + square(std::max(0.0, cr.tangent - tan_room)));
    const double margin = local_injectivity_margin(rod.density, rod.section);
    p.margin += w.margin * square(std::max(0.0, margin - (1.0 - w.margin_slack)));
    if (with_overlap && w.overlap > 0.0) {
      const double voxel = copts.voxel_fraction * rod.section.radius;
      const double res = ciarlet_necas_residual(curves[r], rod.density, rod.section, voxel);
      const double tol = ciarlet_necas_tolerance(rod.density, rod.section, voxel);
      const double volume = kPi * square(rod.section.radius) * rod.density.length;
      p.overlap += w.overlap * square(std::max(0.0, -(res + tol) / volume));
    }
  }
  if (link.rod_count() == 2) {
    const double gap = tube_disjointness(curves[0], curves[1], link.rods[0].section.radius, link.rods[1].section.radius);
    p.gap += w.gap * square(std::max(0.0, -gap));
  }
  return p;
}

}  // namespace

PenaltyTerms penalty_terms(const LinkConfig& link, const PenaltyWeights& weights, const ConstraintOptions& copts,
                           bool with_overlap) {
  link.validate();
  weights.validate();
  return penalty_terms(link, link.realize(), weights, copts, with_overlap);
}

double penalty_energy(const LinkConfig& link, const PenaltyWeights& weights, const ConstraintOptions& copts) {
  return penalty_terms(link, weights, copts, true).total();
}

void SolveOptions::validate() const {
  weights.validate();
  if (outer_iters < 0 || film_steps_per_outer < 0 || final_film_steps < 0) {
    throw Error(ErrorKind::InvalidInput, "iteration counts must be >= 0");
  }
  if (!(penalty_growth >= 1.0)) throw Error(ErrorKind::InvalidInput, "penalty growth factor must be >= 1");
  if (growth_rounds < 0) throw Error(ErrorKind::InvalidInput, "growth rounds must be >= 0");
  if (step_clamp == 0.0 || std::isnan(step_clamp)) throw Error(ErrorKind::InvalidInput, "step clamp must be positive (or < 0 for automatic)");
  if (!(tolerance >= 0.0) || !(gradient_tolerance >= 0.0) || !(closure_tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "tolerances must be >= 0 (closure > 0)");
  }
  if (stall_iters < 1) throw Error(ErrorKind::InvalidInput, "stall iterations must be >= 1");
  if (harmonics < 0) throw Error(ErrorKind::InvalidInput, "harmonics must be >= 0");
}

namespace {

class Solver {
 public:
  Solver(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2, double sigma,
         const SolveOptions& opts, bool with_film)
      : ed1_(ed1), ed2_(ed2), sigma_(sigma), opts_(opts), with_film_(with_film), weights_(opts.weights) {
    opts_.validate();
    ed1_.validate();
    ed2_.validate();
    link.validate();
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidInput, "sigma must be finite and >= 0");

    const auto curves = link.realize();
    const InvariantRecord inv = compute_invariants(link, curves, opts_.constraints.self_link_offset);
    if (link.rod_count() == 2 && inv.lk12 != opts_.lk12) {
      throw Error(ErrorKind::InitInadmissible, "initial linking number " + std::to_string(inv.lk12) +
                                                   " differs from the required " + std::to_string(opts_.lk12));
    }
    targets_.lk12 = inv.lk12;
    targets_.n1 = inv.n1;
    if (link.rod_count() == 2) targets_.n2 = inv.n2;
    const ConstraintReport rep = admissibility(link, ed1_, ed2_, targets_, opts_.energy_bound, opts_.constraints);
    if (!rep.admissible) {
      std::ostringstream os;
      os << "initial configuration is not admissible:";
      for (const auto& v : rep.violations) os << " [" << v << "]";
      throw Error(ErrorKind::InitInadmissible, os.str());
    }

    map_ = ParameterMap(link, opts_.harmonics);
    map_.shape_free[0] = opts_.shape_free[0];
    map_.shape_free[1] = opts_.shape_free[1];
    map_.placement_free = opts_.placement_free;
    x_ = map_.zero();
    build_metric();

    if (with_film_) {
      const TubeSet tubes = link.tubes();
      FilmOptions fo = opts_.film;
      fo.probes.seed = opts_.seed;
      probe_options_ = fo.probes;
      set_film(init_spanning_mesh(tubes, fo));
      target_edge_ = fo.target_edge > 0 ? fo.target_edge : mean_edge_length(film_);
      relax(tubes, opts_.film_steps_per_outer);
    }
  }

  SolveResult run(SolveTrace* partial) {
    SolveResult out;
    SolveTrace& trace = out.trace;
    double scale = 1.0;
    int growth = 0;
    record(trace, 0, scale, nullptr);
    double objective = evaluate(x_, true).objective;
    int stall = 0;
    bool stopped = false;

    reset_curvature();
    VecX prev_x, prev_g;
    Eigen::MatrixXd prev_J;
    for (int iter = 1; iter <= opts_.outer_iters && !stopped; ++iter) {
      const VecX g = smooth_gradient();
      const Eigen::MatrixXd J = closure_jacobian(x_);
      if (prev_x.size() == x_.size()) {
        const VecX mu = multipliers(g, J);
        update_curvature(x_ - prev_x, (g - J.transpose() * mu) - (prev_g - prev_J.transpose() * mu));
      }
      const VecX d = projected_direction(g, J);
      const double decrease = -g.dot(d);
      std::string reason;
      bool moved = false;
      if (!(decrease > square(opts_.gradient_tolerance))) {
        reason = "projected gradient below tolerance";
      } else {
        const StepResult step = line_search(d, g, objective);
        if (step.accepted) {
          moved = true;
        } else if (step.invariant_rejections > 0 && step.invariant_rejections == step.tries) {
          if (partial) *partial = trace;
          throw Error(ErrorKind::InvariantBroken, "every trial step changed a topological invariant");
        } else {
          reason = "line search found no descent";
        }
      }

      if (moved) {
        prev_x = x_before_;
        prev_g = g;
        prev_J = J;
        const TriMesh before = film_;
        if (with_film_) relax(link().tubes(), opts_.film_steps_per_outer);
        const double next = evaluate(x_, true).objective;
        record(trace, iter, scale, &before);
        stall = (objective - next <= opts_.tolerance * std::max(1.0, std::abs(objective))) ? stall + 1 : 0;
        objective = next;
        if (stall >= opts_.stall_iters) reason = "objective stalled";
      }
      if (reason.empty()) continue;

      // Stationary at the current weights: grow them if a constraint is still violated.
      const bool violated = trace.rows.back().penalties.total() > 0.0;
      if (violated && opts_.penalty_growth > 1.0 && growth < opts_.growth_rounds) {
        ++growth;
        scale *= opts_.penalty_growth;
        weights_ = opts_.weights.scaled(scale);
        objective = evaluate(x_, true).objective;
        stall = 0;
        reset_curvature();
        prev_x.resize(0);
        record(trace, iter, scale, nullptr);
        continue;
      }
      trace.stop_reason = reason;
      trace.converged = true;
      stopped = true;
    }
    if (!stopped) trace.stop_reason = "iteration budget";

    if (with_film_ && opts_.final_film_steps > 0) {
      const TriMesh before = film_;
      relax(link().tubes(), opts_.final_film_steps);
      record(trace, static_cast<int>(trace.rows.size()), scale, &before);
    }
    out.link = link();
    out.film = film_;
    out.parameters = x_;
    return out;
  }

 private:
  struct Evaluation {
    LinkConfig link;
    std::vector<FramedCurve> curves;
    EnergyReport energy;
    PenaltyTerms penalties;
    double objective = kInfiniteEnergy;
  };

  struct StepResult {
    bool accepted = false;
    int tries = 0;
    int invariant_rejections = 0;
  };

  LinkConfig link() const { return map_.apply(x_); }

  Evaluation evaluate(const VecX& x, bool with_overlap) const {
    Evaluation e;
    e.link = map_.apply(x);
    e.curves = e.link.realize();
    TriMesh moved;
    if (with_film_) moved = transport_->apply(tubes_of(e.link, e.curves));
    e.energy = total_energy(e.link, ed1_, ed2_, moved, with_film_ ? sigma_ : 0.0);
    e.penalties = penalty_terms(e.link, e.curves, weights_, opts_.constraints, with_overlap);
    e.objective = e.energy.e_total + e.penalties.total();
    if (!std::isfinite(e.objective)) e.objective = kInfiniteEnergy;
    return e;
  }

  static TubeSet tubes_of(const LinkConfig& link, const std::vector<FramedCurve>& curves) {
    TubeSet tubes;
    for (int r = 0; r < link.rod_count(); ++r) tubes.push_back(Tube{curves[r], link.rods[r].section});
    return tubes;
  }

  // The overlap penalty is evaluated at trial points only: its voxel estimate is too coarse
  // for finite differences.
  VecX smooth_gradient() const {
    return finite_difference_gradient([&](const VecX& p) { return evaluate(p, false).objective; }, x_);
  }

  // Position and tangent mismatch at the seam of every rod whose shape is free.
  VecX closure_vector(const VecX& x) const {
    const LinkConfig l = map_.apply(x);
    VecX c(6 * closed_rods());
    int row = 0;
    for (int r = 0; r < l.rod_count(); ++r) {
      if (map_.shape_size(r) == 0) continue;
      const FramedCurve fc = integrate_frame(l.rods[r].density, l.rods[r].placement);
      c.segment<3>(row) = fc.r.back() - fc.r.front();
      c.segment<3>(row + 3) = fc.frames.back().w - fc.frames.front().w;
      row += 6;
    }
    return c;
  }

  int closed_rods() const {
    int n = 0;
    for (int r = 0; r < map_.base.rod_count(); ++r) n += map_.shape_size(r) > 0;
    return n;
  }

  Eigen::MatrixXd closure_jacobian(const VecX& x) const {
    const int m = 6 * closed_rods();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, x.size());
    if (m == 0) return J;
    for (int r = 0; r < map_.base.rod_count(); ++r) {
      for (int i = map_.shape_offset(r); i < map_.shape_offset(r) + map_.shape_size(r); ++i) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
        VecX xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        J.col(i) = (closure_vector(xp) - closure_vector(xm)) / (2 * h);
      }
    }
    return J;
  }

  // Gauss-Newton on the closure mismatch; succeeds once it is below tolerance or no worse than
  // `reference`.
  bool restore_closure(VecX& x, double reference) const {
    if (closed_rods() == 0) return true;
    const double goal = std::max(opts_.closure_tolerance, reference);
    VecX c = closure_vector(x);
    for (int it = 0; it < 20 && c.norm() > opts_.closure_tolerance; ++it) {
      const VecX dx = truncated_solve(closure_jacobian(x), c, 1e-6);
      VecX next = x - dx;
      VecX cn = closure_vector(next);
      for (int half = 0; half < 8 && !(cn.norm() < c.norm()); ++half) {
        next = x - std::ldexp(1.0, -half - 1) * dx;
        cn = closure_vector(next);
      }
      if (!(cn.norm() < c.norm())) break;
      x = next;
      c = cn;
    }
    return c.norm() <= goal * (1.0 + 1e-9);
  }

  // Diagonal metric: the elastic Hessian of each Fourier coefficient, and for rod 2's placement
  // the cost of the equivalent midline motion measured in the same units.
  void build_metric() {
    metric_ = VecX::Ones(map_.size());
    for (int r = 0; r < map_.base.rod_count(); ++r) {
      if (map_.shape_size(r) == 0) continue;
      const ElasticDensity& ed = r == 0 ? ed1_ : ed2_;
      const double L = map_.base.rods[r].density.length;
      const double stiff[3] = {ed.a1, ed.a2, ed.a3};
      const int nc = map_.coefficients_per_field();
      for (int f = 0; f < 3; ++f) {
        for (int j = 0; j < nc; ++j) {
          metric_[map_.shape_offset(r) + f * nc + j] = std::max(stiff[f], 1e-12) * L * (j == 0 ? 1.0 : 0.5);
        }
      }
    }
    if (map_.has_placement()) {
      const ElasticDensity& ed = ed2_;
      const double a = std::max(std::min({ed.a1, ed.a2, ed.a3}), 1e-12);
      const double L = map_.base.rods[1].density.length;
      const int off = map_.placement_offset();
      for (int k = 0; k < 3; ++k) {
        metric_[off + k] = a / (L * L * L);
        metric_[off + 3 + k] = a / L;
      }
    }
  }

  // Inverse-Hessian estimate, started from the diagonal metric and refined by BFGS updates on
  // the gradient of the closure Lagrangian.
  void reset_curvature() { H_ = metric_.cwiseInverse().asDiagonal(); }

  void update_curvature(const VecX& s, const VecX& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-10 * s.norm() * y.norm())) return;
    const double rho = 1.0 / sy;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(s.size(), s.size());
    H_ = (I - rho * s * y.transpose()) * H_ * (I - rho * y * s.transpose()) + rho * s * s.transpose();
  }

  VecX multipliers(const VecX& g, const Eigen::MatrixXd& J) const {
    if (J.rows() == 0) return VecX::Zero(0);
    return truncated_solve(J * H_ * J.transpose(), J * (H_ * g), 1e-12);
  }

  // -H g with the component that would change the closure mismatch removed (in the H metric).
  VecX projected_direction(const VecX& g, const Eigen::MatrixXd& J) const {
    const VecX Hg = H_ * g;
    if (J.rows() == 0) return -Hg;
    return -Hg + H_ * (J.transpose() * multipliers(g, J));
  }

  double step_clamp(const std::vector<FramedCurve>& curves, const LinkConfig& l) const {
    if (opts_.step_clamp > 0) return opts_.step_clamp;
    if (l.rod_count() == 2) {
      const double a1 = l.rods[0].section.radius;
      const double a2 = l.rods[1].section.radius;
      const double gap = tube_disjointness(curves[0], curves[1], a1, a2);
      // In contact the tube gap says nothing about crossing; half the midline distance does.
      return 0.25 * std::max(gap, 0.5 * (gap + a1 + a2));
    }
    return 0.1 * l.rods[0].density.length / kTwoPi;
  }

  static double displacement(const std::vector<FramedCurve>& a, const std::vector<FramedCurve>& b) {
    double worst = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
      for (std::size_t i = 0; i < a[r].r.size(); ++i) worst = std::max(worst, (a[r].r[i] - b[r].r[i]).norm());
    }
    return worst;
  }

  StepResult line_search(const VecX& d, const VecX& g, double objective) {
    StepResult res;
    const LinkConfig current = link();
    const auto curves = current.realize();
    const double clamp = step_clamp(curves, current);
    const double reference = closure_vector(x_).norm();
    double t = 1.0;
    for (; res.tries < 40; ++res.tries, t *= 0.5) {
      VecX trial = x_ + t * d;
      if (!restore_closure(trial, reference)) continue;
      Evaluation e = evaluate(trial, false);
      const double moved = displacement(curves, e.curves);
      if (moved > clamp) {
        t *= std::max(0.5 * clamp / moved, 1e-3) / 0.5;  // jump close to the clamp, then halve as usual
        continue;
      }
      if (!std::isfinite(e.objective)) continue;
      const InvariantRecord inv = compute_invariants(e.link, e.curves, opts_.constraints.self_link_offset);
      if (inv.lk12 != targets_.lk12 || inv.n1 != *targets_.n1 || (targets_.n2 && inv.n2 != *targets_.n2)) {
        ++res.invariant_rejections;
        continue;
      }
      e = evaluate(trial, true);
      if (!(e.objective <= objective + 1e-4 * g.dot(trial - x_))) continue;
      TriMesh moved_film;
      if (with_film_) {
        moved_film = transport_->apply(tubes_of(e.link, e.curves));
        if (!spanning_certificate(moved_film, probes(e.link.tubes())).pass) continue;
      }
      x_before_ = x_;
      x_ = std::move(trial);
      if (with_film_) set_film(std::move(moved_film));
      res.accepted = true;
      ++res.tries;
      return res;
    }
    return res;
  }

  ProbeFamily probes(const TubeSet& tubes) const { return make_probe_family(tubes, probe_options_); }

  void relax(const TubeSet& tubes, int steps) {
    if (steps <= 0) return;
    const ProbeFamily pf = probes(tubes);
    RelaxOptions ro;
    ro.steps = steps;
    ro.probes = &pf;
    ro.target_edge = target_edge_;
    set_film(relax_area(film_, tubes, ro));
  }

  void set_film(TriMesh mesh) {
    film_ = std::move(mesh);
    transport_ = std::make_unique<FilmTransport>(film_);
  }

  void record(SolveTrace& trace, int iter, double scale, const TriMesh* previous) const {
    const Evaluation e = evaluate(x_, true);
    TraceRow row;
    row.iter = iter;
    row.energy = e.energy;
    row.penalties = e.penalties;
    row.penalty_scale = scale;
    row.objective = e.objective;
    row.constraints = admissibility(e.link, ed1_, ed2_, targets_, opts_.energy_bound, opts_.constraints);
    row.invariants = row.constraints.invariants;
    if (with_film_) {
      row.area = area(film_);
      row.certified = spanning_certificate(film_, probes(e.link.tubes())).pass;
      if (previous) row.hausdorff_step = hausdorff_distance(previous->vertices, film_.vertices);
    }
    trace.rows.push_back(std::move(row));
  }

  ElasticDensity ed1_, ed2_;
  double sigma_;
  SolveOptions opts_;
  bool with_film_;
  PenaltyWeights weights_;
  InvariantTargets targets_;
  ParameterMap map_;
  VecX x_;
  VecX metric_;
  Eigen::MatrixXd H_;
  VecX x_before_;
  TriMesh film_;
  std::unique_ptr<FilmTransport> transport_;
  double target_edge_ = 0.0;
  ProbeOptions probe_options_;
};

}  // namespace

SolveResult solve_kirchhoff_plateau(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                                    double sigma, const SolveOptions& opts, SolveTrace* partial) {
  Solver solver(link, ed1, ed2, sigma, opts, true);
  return solver.run(partial);
}

SolveResult minimize_loop_only(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                               const SolveOptions& opts, SolveTrace* partial) {
  Solver solver(link, ed1, ed2, 0.0, opts, false);
  return solver.run(partial);
}

}  // namespace kp

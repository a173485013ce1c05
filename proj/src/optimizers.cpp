#include "precopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "precopt/flops.hpp"

namespace precopt {

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::RSD:
      return "rsd";
    case SolverKind::RCG:
      return "rcg";
    case SolverKind::RTR:
      return "rtr";
  }
  throw std::logic_error("unreachable solver kind");
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "rsd") return SolverKind::RSD;
  if (s == "rcg") return SolverKind::RCG;
  if (s == "rtr") return SolverKind::RTR;
  throw ParseError("unknown solver '" + s + "' (expected rsd|rcg|rtr)");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance:
      return "gradient_tolerance";
    case StopReason::ObjectiveStall:
      return "objective_stall";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::StalledLineSearch:
      return "stalled_line_search";
    case StopReason::RadiusCollapse:
      return "radius_collapse";
  }
  throw std::logic_error("unreachable stop reason");
}

namespace {

// Quadratic expansion of one power group along the search line:
// ||p + a*e||^2 = pp + 2a*pe + a^2*ee, with the group's power target.
struct PowerLine {
  double pp = 0.0;
  double pe = 0.0;
  double ee = 0.0;
  double target = 0.0;
};

std::vector<PowerLine> power_lines(const SystemConfig& cfg, ConstraintKind kind,
                                   const PrecoderStack& p, const TangentStack& e) {
  std::vector<PowerLine> lines;
  switch (kind) {
    case ConstraintKind::TPC: {
      PowerLine l;
      l.target = cfg.total_power;
      for (size_t i = 0; i < p.blocks.size(); ++i) {
        l.pp += p.blocks[i].squaredNorm();
        l.pe += p.blocks[i].cwiseProduct(e.blocks[i].conjugate()).real().sum();
        l.ee += e.blocks[i].squaredNorm();
      }
      lines.push_back(l);
      break;
    }
    case ConstraintKind::PUPC: {
      for (size_t i = 0; i < p.blocks.size(); ++i) {
        PowerLine l;
        l.target = cfg.per_user_power[i];
        l.pp = p.blocks[i].squaredNorm();
        l.pe = p.blocks[i].cwiseProduct(e.blocks[i].conjugate()).real().sum();
        l.ee = e.blocks[i].squaredNorm();
        lines.push_back(l);
      }
      break;
    }
    case ConstraintKind::PAPC: {
      lines.resize(cfg.num_bs_antennas);
      for (int j = 0; j < cfg.num_bs_antennas; ++j) {
        lines[j].target = cfg.per_antenna_power[j];
      }
      for (size_t i = 0; i < p.blocks.size(); ++i) {
        for (int j = 0; j < cfg.num_bs_antennas; ++j) {
          lines[j].pp += p.blocks[i].row(j).squaredNorm();
          lines[j].pe +=
              p.blocks[i].row(j).cwiseProduct(e.blocks[i].row(j).conjugate()).real().sum();
          lines[j].ee += e.blocks[i].row(j).squaredNorm();
        }
      }
      break;
    }
  }
  return lines;
}

// Feasibility rescalings at p + alpha*e, or nullopt-like failure via `ok`.
bool scalings_at(const std::vector<PowerLine>& lines, double alpha, CacheScalings& out) {
  out.factors.clear();
  out.factors.reserve(lines.size());
  for (const PowerLine& l : lines) {
    const double n2 = l.pp + 2.0 * alpha * l.pe + alpha * alpha * l.ee;
    if (!(n2 > 1e-28 * l.target)) return false;
    out.factors.push_back(std::sqrt(l.target / n2));
  }
  return true;
}

double resolve_grad_tol(const StopCriteria& stop, const SystemConfig& cfg) {
  if (stop.grad_norm_tol < 0) return 1e-6 * std::sqrt(static_cast<double>(cfg.num_users));
  return stop.grad_norm_tol;
}

void require_start_feasible(const ManifoldPoint& pt, const SystemConfig& cfg) {
  const double resid = feasibility_residual(pt, cfg);
  if (resid > 1e-8) {
    throw PreconditionError("initial point violates the power constraint (residual " +
                            std::to_string(resid) + "); normalize it first");
  }
}

SolveResult descent_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                          const PrecoderStack& p0, const LineSearchParams& ls,
                          const StopCriteria& stop, bool use_cg, bool force_beta_zero) {
  cfg.validate();
  ch.validate(cfg);
  p0.validate(cfg);
  ManifoldPoint pt{p0, kind};
  require_start_feasible(pt, cfg);

  const double gtol = resolve_grad_tol(stop, cfg);
  SolveResult out;
  out.trace.counting_enabled = opcount::enabled();
  const std::uint64_t flops0 = opcount::multiplies();

  EffectiveChannelCache cache = make_cache(cfg, ch, pt.p);
  double f = objective_from_cache(cfg, cache);
  TangentStack rgrad = project_tangent(pt, euclidean_gradient_from_cache(cfg, ch, cache), cfg);
  double gnorm = stack_norm(rgrad);

  TangentStack prev_grad;
  TangentStack prev_dir;
  bool have_prev = false;
  int stall_count = 0;
  out.reason = StopReason::MaxIterations;

  for (int k = 1; k <= stop.max_outer; ++k) {
    if (gtol > 0 && gnorm <= gtol) {
      out.reason = StopReason::GradientTolerance;
      break;
    }

    TangentStack dir = scaled(rgrad, -1.0);
    bool reset = false;
    if (use_cg && have_prev) {
      const double beta = force_beta_zero ? 0.0 : fletcher_reeves_beta(rgrad, prev_grad);
      if (beta != 0.0) {
        dir = add_scaled(dir, beta, project_tangent(pt, prev_dir, cfg));
        if (frobenius_inner(rgrad, dir) >= -1e-14) {
          dir = scaled(rgrad, -1.0);
          reset = true;
        }
      }
    }

    ArmijoResult step;
    try {
      SolverState state{pt, cache, f, rgrad};
      step = armijo_search(cfg, ch, state, dir, ls);
    } catch (const StalledLineSearchError&) {
      out.reason = StopReason::StalledLineSearch;
      break;
    }

    prev_grad = rgrad;
    prev_dir = std::move(dir);
    have_prev = true;

    pt = step.point;
    cache = std::move(step.cache);
    const double f_new = step.objective;
    rgrad = project_tangent(pt, euclidean_gradient_from_cache(cfg, ch, cache), cfg);
    gnorm = stack_norm(rgrad);

    IterationRecord rec;
    rec.k = k;
    rec.objective = f_new;
    rec.grad_norm = gnorm;
    rec.step = step.step;
    rec.feasibility = feasibility_residual(pt, cfg);
    rec.n_in = step.n_in;
    rec.multiplies = opcount::multiplies() - flops0;
    rec.direction_reset = reset;
    out.trace.records.push_back(rec);

    if (stop.rel_obj_tol > 0) {
      if (std::abs(f - f_new) <= stop.rel_obj_tol * (1.0 + std::abs(f))) {
        ++stall_count;
      } else {
        stall_count = 0;
      }
      if (stall_count >= 3) {
        f = f_new;
        out.reason = StopReason::ObjectiveStall;
        break;
      }
    }
    f = f_new;
  }

  out.point = std::move(pt);
  out.objective = f;
  out.grad_norm = gnorm;
  return out;
}

}  // namespace

ArmijoResult armijo_search(const SystemConfig& cfg, const ChannelSet& ch,
                           const SolverState& state, const TangentStack& direction,
                           const LineSearchParams& params) {
  if (!(params.alpha0 > 0)) throw PreconditionError("line search needs alpha0 > 0");
  if (!(params.r > 0 && params.r < 1)) throw PreconditionError("line search needs r in (0,1)");
  if (!(params.c > 0 && params.c < 1)) throw PreconditionError("line search needs c in (0,1)");
  if (params.max_backtracks < 1) throw PreconditionError("line search needs max_backtracks >= 1");

  const double slope = frobenius_inner(state.rgrad, direction);
  if (!(slope < 0)) {
    throw PreconditionError("line search direction is not a descent direction (slope " +
                            std::to_string(slope) + ")");
  }

  EffectiveChannelCache cache = state.cache;
  cache_set_direction(cache, ch, direction);
  const std::vector<PowerLine> lines =
      power_lines(cfg, state.point.kind, state.point.p, direction);

  double best_alpha = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  CacheScalings scalings;
  for (int n = 0; n <= params.max_backtracks; ++n) {
    const double alpha = params.alpha0 * std::pow(params.r, n);
    if (!scalings_at(lines, alpha, scalings)) continue;
    EffectiveChannelCache trial =
        cache_advance(cfg, ch, cache, state.point.kind, alpha, scalings);
    const double obj = objective_from_cache(cfg, trial);
    if (obj < best_obj) {
      best_obj = obj;
      best_alpha = alpha;
    }
    if (obj - state.objective < params.c * alpha * slope) {
      ArmijoResult out;
      out.step = alpha;
      out.point = ManifoldPoint{trial.point, state.point.kind};
      out.cache = std::move(trial);
      out.objective = obj;
      out.n_in = n;
      return out;
    }
  }
  throw StalledLineSearchError("line search exhausted " +
                                   std::to_string(params.max_backtracks) +
                                   " backtracks without sufficient decrease",
                               best_alpha);
}

double fletcher_reeves_beta(const TangentStack& grad_now, const TangentStack& grad_prev) {
  const double denom = frobenius_inner(grad_prev, grad_prev);
  if (denom == 0.0) return 0.0;
  return frobenius_inner(grad_now, grad_now) / denom;
}

SolveResult rsd_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const LineSearchParams& ls,
                      const StopCriteria& stop) {
  return descent_solve(cfg, ch, kind, p0, ls, stop, false, false);
}

SolveResult rcg_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const LineSearchParams& ls,
                      const StopCriteria& stop, bool force_beta_zero) {
  return descent_solve(cfg, ch, kind, p0, ls, stop, true, force_beta_zero);
}

TcgResult tcg_subproblem(const TangentStack& grad, const HessianApplyFn& hess, double delta,
                         int n_sub) {
  if (!(delta > 0)) throw PreconditionError("tCG needs a positive radius");
  if (n_sub < 1) throw PreconditionError("tCG needs at least one inner iteration");

  TcgResult out;
  out.direction = zeros_like(grad);
  const double rr0 = frobenius_inner(grad, grad);
  if (rr0 == 0.0) return out;

  TangentStack r = grad;
  TangentStack d = scaled(grad, -1.0);
  double rr = rr0;
  double ee = 0.0;  // ||eta||^2, maintained incrementally
  double model = 0.0;

  for (int j = 0; j < n_sub; ++j) {
    if (rr <= rr0 * 1e-24) break;
    const TangentStack hd = hess(d);
    const double dhd = frobenius_inner(d, hd);
    const double ed = frobenius_inner(out.direction, d);
    const double dd = frobenius_inner(d, d);
    const double alpha = dhd > 0 ? rr / dhd : 0.0;
    const bool negative_curvature = !(dhd > 0);
    const bool leaves_region =
        !negative_curvature && ee + 2.0 * alpha * ed + alpha * alpha * dd >= delta * delta;

    if (negative_curvature || leaves_region) {
      // Step to the boundary of the radius sphere along d.
      const double disc = ed * ed + dd * (delta * delta - ee);
      const double t = dd > 0 ? (-ed + std::sqrt(std::max(disc, 0.0))) / dd : 0.0;
      out.direction = add_scaled(out.direction, t, d);
      model += t * frobenius_inner(r, d) + 0.5 * t * t * dhd;
      out.boundary_hit = true;
      ++out.iterations;
      out.decrease_history.push_back(-model);
      break;
    }

    out.direction = add_scaled(out.direction, alpha, d);
    ee += 2.0 * alpha * ed + alpha * alpha * dd;
    r = add_scaled(r, alpha, hd);
    model -= 0.5 * alpha * rr;
    ++out.iterations;
    out.decrease_history.push_back(-model);

    const double rr_next = frobenius_inner(r, r);
    const double beta = rr_next / rr;
    d = add_scaled(scaled(r, -1.0), beta, d);
    rr = rr_next;
  }

  out.model_decrease = -model;
  return out;
}

SolveResult rtr_core(const TrustRegionProblem& prob, const PrecoderStack& p0,
                     const TrustRegionParams& tr, const StopCriteria& stop) {
  const double scale = prob.scale > 0 ? prob.scale : 1.0;
  const double delta_max = tr.delta_max > 0 ? tr.delta_max : scale;
  double delta = tr.delta0 > 0 ? tr.delta0 : 0.1 * scale;
  if (!(delta > 0) || !(delta <= delta_max)) {
    throw PreconditionError("trust region needs 0 < delta0 <= delta_max");
  }
  const double gtol = std::max(stop.grad_norm_tol, 0.0);

  SolveResult out;
  out.trace.counting_enabled = opcount::enabled();
  const std::uint64_t flops0 = opcount::multiplies();
  out.reason = StopReason::MaxIterations;

  PrecoderStack p = p0;
  double f = prob.value(p);
  TangentStack g = prob.gradient(p);
  double gnorm = stack_norm(g);
  int stall_count = 0;

  for (int k = 1; k <= stop.max_outer; ++k) {
    if (gtol > 0 && gnorm <= gtol) {
      out.reason = StopReason::GradientTolerance;
      break;
    }

    const HessianApplyFn hess = prob.hessian_at(p);
    const TcgResult sub = tcg_subproblem(g, hess, delta, tr.n_sub);
    const PrecoderStack trial = prob.retract_point(p, sub.direction);
    const double f_trial = prob.value(trial);

    double rho;
    if (sub.model_decrease > 1e-14 * (1.0 + std::abs(f))) {
      rho = (f - f_trial) / sub.model_decrease;
    } else {
      rho = -std::numeric_limits<double>::infinity();
    }
    const bool accepted = rho > tr.rho_threshold;
    const double delta_used = delta;

    if (rho < 0.25) {
      delta *= 0.25;
    } else if (rho > 0.75 && sub.boundary_hit) {
      delta = std::min(2.0 * delta, delta_max);
    }

    double f_new = f;
    if (accepted) {
      p = trial;
      f_new = f_trial;
      g = prob.gradient(p);
      gnorm = stack_norm(g);
    }

    IterationRecord rec;
    rec.k = k;
    rec.objective = f_new;
    rec.grad_norm = gnorm;
    rec.step = delta_used;
    rec.rho = rho;
    rec.feasibility = prob.feasibility(p);
    rec.n_in = sub.iterations;
    rec.multiplies = opcount::multiplies() - flops0;
    out.trace.records.push_back(rec);

    if (accepted) {
      if (stop.rel_obj_tol > 0) {
        if (std::abs(f - f_new) <= stop.rel_obj_tol * (1.0 + std::abs(f))) {
          ++stall_count;
        } else {
          stall_count = 0;
        }
        if (stall_count >= 3) {
          f = f_new;
          out.reason = StopReason::ObjectiveStall;
          break;
        }
      }
      f = f_new;
    }

    if (delta < 1e-14 * scale) {
      out.reason = StopReason::RadiusCollapse;
      break;
    }
  }

  out.point = ManifoldPoint{std::move(p), prob.kind};
  out.objective = f;
  out.grad_norm = gnorm;
  return out;
}

SolveResult rtr_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const TrustRegionParams& tr,
                      const StopCriteria& stop) {
  cfg.validate();
  ch.validate(cfg);
  p0.validate(cfg);
  require_start_feasible(ManifoldPoint{p0, kind}, cfg);

  StopCriteria resolved = stop;
  resolved.grad_norm_tol = resolve_grad_tol(stop, cfg);

  TrustRegionProblem prob;
  prob.value = [&cfg, &ch](const PrecoderStack& p) { return wsr_objective(cfg, ch, p); };
  prob.gradient = [&cfg, &ch, kind](const PrecoderStack& p) {
    const ManifoldPoint pt{p, kind};
    return project_tangent(pt, euclidean_gradient(cfg, ch, p), cfg);
  };
  prob.hessian_at = [&cfg, &ch, kind](const PrecoderStack& p) -> HessianApplyFn {
    auto op = std::make_shared<HessianOperator>(
        make_hessian_operator(cfg, ch, ManifoldPoint{p, kind}));
    return [&cfg, &ch, op](const TangentStack& xi) { return hessian_apply(cfg, ch, *op, xi); };
  };
  prob.retract_point = [&cfg, kind](const PrecoderStack& p, const TangentStack& xi) {
    return retract(ManifoldPoint{p, kind}, xi, cfg).p;
  };
  prob.feasibility = [&cfg, kind](const PrecoderStack& p) {
    return feasibility_residual(ManifoldPoint{p, kind}, cfg);
  };
  prob.scale = std::sqrt(cfg.total_power);
  prob.kind = kind;
  return rtr_core(prob, p0, tr, resolved);
}

ComplexitySummary flop_counter_report(const IterationTrace& trace, const SystemConfig& cfg,
                                      ConstraintKind kind, SolverKind solver, int n_sub) {
  if (!trace.counting_enabled) {
    throw UnavailableError("operation counting was disabled during the solve");
  }
  ComplexitySummary out;
  if (trace.records.empty()) return out;

  const double n = static_cast<double>(trace.records.size());
  out.total_multiplies = trace.records.back().multiplies;
  out.per_iteration = static_cast<double>(out.total_multiplies) / n;
  double inner = 0.0;
  for (const IterationRecord& rec : trace.records) inner += rec.n_in;
  out.mean_inner = inner / n;

  const double mt = cfg.num_bs_antennas;
  const double nr = cfg.total_rx_antennas();
  const double nd = cfg.total_streams();
  const bool papc = kind == ConstraintKind::PAPC;
  if (solver == SolverKind::RTR) {
    out.model_per_iteration = (papc ? 8.0 : 4.0) * n_sub * mt * nr * nd;
  } else if (papc) {
    out.model_per_iteration = (out.mean_inner + 1.0) * mt * nr * nd + mt * nd * nd;
  } else {
    out.model_per_iteration = mt * nr * nd + mt * nd * nd;
  }
  out.ratio = out.per_iteration / out.model_per_iteration;
  return out;
}

}  // namespace precopt

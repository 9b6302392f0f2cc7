// Student solvers: Dykstra projections (tsallis2) and iterative scaling (shannon).

#include "musrover/student.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "musrover/error.h"

namespace musrover {

namespace {

constexpr int kStallWindow = 100;
constexpr double kStallRatio = 0.999;
constexpr double kStallFloor = 1e3;  // in units of tol

// A constraint restricted to the free coordinates.
struct ReducedConstraint {
  std::vector<std::int32_t> cell_of;
  std::vector<double> target;
  std::vector<double> inv_size;  // 1 / free cell size, 0 for empty cells
};

std::vector<double> cellMasses(std::span<const double> x, std::span<const std::int32_t> cell_of,
                               std::size_t cells) {
  std::vector<double> m(cells, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) m[cell_of[i]] += x[i];
  return m;
}

void projectAffineInPlace(std::vector<double>& x, const ReducedConstraint& c) {
  std::vector<double> shift = cellMasses(x, c.cell_of, c.target.size());
  for (std::size_t k = 0; k < shift.size(); ++k) shift[k] = (c.target[k] - shift[k]) * c.inv_size[k];
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += shift[c.cell_of[i]];
}

double reducedViolation(std::span<const double> x, const std::vector<ReducedConstraint>& cs) {
  double worst = 0.0;
  for (const auto& c : cs) {
    auto m = cellMasses(x, c.cell_of, c.target.size());
    for (std::size_t k = 0; k < m.size(); ++k) worst = std::max(worst, std::abs(m[k] - c.target[k]));
  }
  return worst;
}

void simplexProjectInto(std::span<const double> v, std::vector<double>& out,
                        std::vector<double>& scratch) {
  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    cumulative += scratch[i];
    double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (scratch[i] - t > 0.0) theta = t;
  }
  out.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
}

}  // namespace

std::string_view objectiveName(Objective objective) {
  return objective == Objective::kTsallis2 ? "tsallis2" : "shannon";
}

Objective parseObjective(std::string_view name) {
  if (name == "tsallis2") return Objective::kTsallis2;
  if (name == "shannon") return Objective::kShannon;
  throw DataError(fmt::format("unknown objective '{}'", name));
}

std::vector<double> projectOntoPartitionConstraint(std::span<const double> p,
                                                   const CellConstraint& constraint) {
  const std::size_t cells = constraint.target.size();
  std::vector<std::size_t> sizes(cells, 0);
  for (std::int32_t c : constraint.cell_of) ++sizes[c];
  std::vector<double> shift = cellMasses(p, constraint.cell_of, cells);
  for (std::size_t k = 0; k < cells; ++k) {
    if (sizes[k] == 0) {
      if (constraint.target[k] > 0.0) {
        throw InfeasibleConstraintError(
            fmt::format("target mass {} on empty cell {}", constraint.target[k], k));
      }
      shift[k] = 0.0;
      continue;
    }
    shift[k] = (constraint.target[k] - shift[k]) / static_cast<double>(sizes[k]);
  }
  std::vector<double> out(p.begin(), p.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += shift[constraint.cell_of[i]];
  return out;
}

std::vector<double> projectOntoSimplex(std::span<const double> v) {
  double sum = 0.0;
  bool nonnegative = true;
  for (double x : v) {
    sum += x;
    nonnegative = nonnegative && x >= 0.0;
  }
  if (nonnegative && std::abs(sum - 1.0) <= 1e-15) return {v.begin(), v.end()};
  std::vector<double> out;
  std::vector<double> scratch;
  simplexProjectInto(v, out, scratch);
  return out;
}

double maxViolation(std::span<const double> p, std::span<const CellConstraint> constraints) {
  double worst = 0.0;
  for (const auto& c : constraints) {
    auto m = cellMasses(p, c.cell_of, c.target.size());
    for (std::size_t k = 0; k < m.size(); ++k) worst = std::max(worst, std::abs(m[k] - c.target[k]));
  }
  return worst;
}

SolveResult solveConstrained(std::size_t n, std::span<const CellConstraint> constraints,
                             const SolverOptions& options, std::span<const double> start,
                             bool stop_on_stall) {
  if (n == 0) throw InfeasibleConstraintError("empty raw alphabet");
  if (!start.empty() && start.size() != n) throw DataError("solver start has the wrong size");

  std::vector<bool> pinned(n, false);
  for (const auto& c : constraints) {
    if (c.cell_of.size() != n) throw DataError("constraint does not cover the raw alphabet");
    for (std::size_t x = 0; x < n; ++x) {
      if (c.target[c.cell_of[x]] <= 0.0) pinned[x] = true;
    }
  }
  std::vector<std::size_t> free;
  for (std::size_t x = 0; x < n; ++x) {
    if (!pinned[x]) free.push_back(x);
  }
  if (free.empty()) throw InfeasibleConstraintError("every raw state is excluded by a zero target");

  std::vector<ReducedConstraint> reduced(constraints.size());
  for (std::size_t r = 0; r < constraints.size(); ++r) {
    const auto& c = constraints[r];
    auto& rc = reduced[r];
    rc.target.assign(c.target.begin(), c.target.end());
    rc.cell_of.resize(free.size());
    std::vector<std::size_t> sizes(rc.target.size(), 0);
    for (std::size_t i = 0; i < free.size(); ++i) {
      rc.cell_of[i] = c.cell_of[free[i]];
      ++sizes[rc.cell_of[i]];
    }
    rc.inv_size.assign(sizes.size(), 0.0);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (sizes[k] > 0) {
        rc.inv_size[k] = 1.0 / static_cast<double>(sizes[k]);
      } else if (rc.target[k] > 0.0) {
        throw InfeasibleConstraintError(fmt::format(
            "constraint {} puts mass {} on a cell with no admissible states", r, rc.target[k]));
      }
    }
  }

  std::vector<double> x(free.size(), 0.0);
  if (!start.empty()) {
    for (std::size_t i = 0; i < free.size(); ++i) x[i] = start[free[i]];
  }

  SolveResult result;
  result.converged = false;
  double stall_reference = kInfinity;

  if (options.objective == Objective::kTsallis2) {
    std::vector<double> correction(x.size(), 0.0);
    std::vector<double> y(x.size());
    std::vector<double> previous;
    std::vector<double> scratch;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
      previous = x;
      // Affine sets need no Dykstra correction: their increments are normal to the set.
      for (const auto& c : reduced) projectAffineInPlace(x, c);
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + correction[i];
      simplexProjectInto(y, x, scratch);
      for (std::size_t i = 0; i < x.size(); ++i) correction[i] = y[i] - x[i];

      double delta = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) delta = std::max(delta, std::abs(x[i] - previous[i]));
      result.residual = reducedViolation(x, reduced);
      result.sweeps = sweep;
      if (result.residual < options.tol && delta < options.tol) {
        result.converged = true;
        break;
      }
      if (stop_on_stall && sweep % kStallWindow == 0) {
        if (result.residual > kStallFloor * options.tol &&
            result.residual > kStallRatio * stall_reference) {
          break;
        }
        stall_reference = result.residual;
      }
    }
  } else {
    double total = 0.0;
    for (double v : x) total += std::max(v, 0.0);
    if (start.empty() || total <= 0.0) {
      std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(x.size()));
    } else {
      for (double& v : x) v = std::max(v, 0.0) / total;
    }
    for (const auto& c : reduced) {
      auto m = cellMasses(x, c.cell_of, c.target.size());
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (c.target[k] > 0.0 && m[k] <= 0.0) {
          throw InfeasibleConstraintError("start point has no mass on a cell with positive target");
        }
      }
    }
    result.residual = reducedViolation(x, reduced);
    if (result.residual < options.tol) result.converged = true;
    std::vector<double> factor;
    for (int sweep = 1; sweep <= options.max_sweeps && !result.converged; ++sweep) {
      for (const auto& c : reduced) {
        factor = cellMasses(x, c.cell_of, c.target.size());
        for (std::size_t k = 0; k < factor.size(); ++k) {
          factor[k] = factor[k] > 0.0 ? c.target[k] / factor[k] : 0.0;
        }
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= factor[c.cell_of[i]];
      }
      result.residual = reducedViolation(x, reduced);
      result.sweeps = sweep;
      if (result.residual < options.tol) {
        result.converged = true;
        break;
      }
      if (stop_on_stall && sweep % kStallWindow == 0) {
        if (result.residual > kStallFloor * options.tol &&
            result.residual > kStallRatio * stall_reference) {
          break;
        }
        stall_reference = result.residual;
      }
    }
  }

  result.p.assign(n, 0.0);
  for (std::size_t i = 0; i < free.size(); ++i) result.p[free[i]] = x[i];
  result.residual = maxViolation(result.p, constraints);
  return result;
}

PrioritizedSolve solvePrioritized(std::size_t n, std::span<const CellConstraint> constraints,
                                  const SolverOptions& options, std::span<const double> start) {
  auto attempt = [&](std::span<const CellConstraint> subset) -> std::optional<SolveResult> {
    try {
      SolveResult r = solveConstrained(n, subset, options, start, /*stop_on_stall=*/true);
      if (r.converged) return r;
    } catch (const InfeasibleConstraintError&) {
    }
    return std::nullopt;
  };

  PrioritizedSolve out;
  if (auto all = attempt(constraints)) {
    out.result = std::move(*all);
    out.accepted.assign(constraints.size(), true);
    return out;
  }

  std::vector<CellConstraint> admitted;
  out.accepted.assign(constraints.size(), false);
  out.result = solveConstrained(n, {}, options, start);
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    admitted.push_back(constraints[j]);
    if (auto r = attempt(admitted)) {
      out.result = std::move(*r);
      out.accepted[j] = true;
    } else {
      admitted.pop_back();
    }
  }
  return out;
}

std::span<const double> StudentModel::conditional(std::size_t context) const {
  if (kind == Kind::kUnigram) return p;
  auto it = std::lower_bound(context_group.begin(), context_group.end(),
                             std::pair<std::size_t, std::size_t>{context, 0});
  if (it == context_group.end() || it->first != context) return p;
  return group_p[it->second];
}

namespace {

CellConstraint ruleConstraint(const FeatureSpace& space, const Feature& feature,
                              std::span<const double> target) {
  std::size_t index = featureIndex(feature);
  if (target.size() != space.partition(index).cellCount()) {
    throw DataError("rule target for '" + feature.str() + "' does not match its partition");
  }
  return {space.cellsOf(index), target};
}

}  // namespace

StudentModel solveStudentUnigram(const FeatureSpace& space, const std::vector<Rule>& rules,
                                 const SolverOptions& options) {
  std::vector<CellConstraint> constraints;
  for (const Rule& r : rules) {
    if (r.feature.isRaw()) throw DataError("the raw feature cannot be a rule");
    if (r.target.alphabet != space.partition(r.feature).values()) {
      throw DataError("rule target alphabet for '" + r.feature.str() + "' is misaligned");
    }
    constraints.push_back(ruleConstraint(space, r.feature, r.target.mass));
  }
  SolveResult solved = solveConstrained(space.omega().size(), constraints, options);
  StudentModel model;
  model.kind = StudentModel::Kind::kUnigram;
  model.omega = space.omega();
  model.options = options;
  model.p = std::move(solved.p);
  model.residual = solved.residual;
  model.sweeps = solved.sweeps;
  model.converged = solved.converged;
  return model;
}

StudentModel solveStudentBigram(const FeatureSpace& space,
                                const std::vector<std::size_t>& contexts,
                                const std::vector<BigramRule>& bigram_rules,
                                const std::vector<Rule>& unigram_rules,
                                const StudentModel& init, const SolverOptions& options) {
  const Omega& omega = space.omega();
  StudentModel model;
  model.kind = StudentModel::Kind::kBigram;
  model.omega = omega;
  model.options = options;
  model.p = init.p;
  model.residual = init.residual;
  model.converged = init.converged;

  std::vector<const Rule*> surviving;
  for (const Rule& r : unigram_rules) {
    bool overwritten = std::any_of(bigram_rules.begin(), bigram_rules.end(),
                                   [&](const BigramRule& b) { return b.feature == r.feature; });
    if (!overwritten) surviving.push_back(&r);
  }

  // Contexts sharing the same bigram rows face the same problem; solve once per group.
  std::map<std::vector<std::size_t>, std::size_t> groups;
  std::vector<std::vector<std::size_t>> signatures;
  for (std::size_t c : contexts) {
    std::vector<std::size_t> signature;
    const Sonority s = omega.decode(c);
    for (const BigramRule& b : bigram_rules) {
      FeatureValue v = applyFeature(b.feature, s);
      auto it = std::lower_bound(b.target.contexts.begin(), b.target.contexts.end(), v);
      if (it == b.target.contexts.end() || *it != v) {
        throw DataError("bigram rule '" + b.feature.str() + "' has no row for context '" +
                        valueLabel(v) + "'");
      }
      signature.push_back(static_cast<std::size_t>(it - b.target.contexts.begin()));
    }
    auto [it, inserted] = groups.emplace(signature, signatures.size());
    if (inserted) signatures.push_back(signature);
    model.context_group.emplace_back(c, it->second);
  }
  std::sort(model.context_group.begin(), model.context_group.end());

  model.group_p.resize(signatures.size());
  for (std::size_t g = 0; g < signatures.size(); ++g) {
    if (bigram_rules.empty()) {
      model.group_p[g] = init.p;
      continue;
    }
    std::vector<CellConstraint> constraints;
    for (std::size_t j = 0; j < bigram_rules.size(); ++j) {
      const BigramRule& b = bigram_rules[j];
      constraints.push_back(ruleConstraint(space, b.feature, b.target.rows[signatures[g][j]]));
    }
    for (const Rule* r : surviving) {
      constraints.push_back(ruleConstraint(space, r->feature, r->target.mass));
    }
    PrioritizedSolve solved = solvePrioritized(omega.size(), constraints, options, init.p);
    model.dropped_constraints +=
        static_cast<std::size_t>(std::count(solved.accepted.begin(), solved.accepted.end(), false));
    model.residual = std::max(model.residual, solved.result.residual);
    model.sweeps = std::max(model.sweeps, solved.result.sweeps);
    model.group_p[g] = std::move(solved.result.p);
  }
  return model;
}

namespace {

class Sampler {
 public:
  explicit Sampler(std::span<const double> p) : cdf_(p.size()) {
    double running = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      running += std::max(p[i], 0.0);
      cdf_[i] = running;
    }
  }

  std::size_t draw(std::mt19937_64& rng) const {
    // 53 random bits -> uniform in [0, 1).
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) it = std::lower_bound(cdf_.begin(), cdf_.end(), cdf_.back());
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::vector<Sonority> sampleSequence(const StudentModel& model, std::size_t length,
                                     std::uint64_t seed) {
  if (length == 0) throw DataError("sample length must be positive");
  if (model.p.empty()) throw DataError("student model is empty");
  std::mt19937_64 rng(seed);
  Sampler marginal(model.p);
  std::map<std::size_t, Sampler> by_group;

  std::vector<Sonority> out;
  out.reserve(length);
  std::size_t x = marginal.draw(rng);
  out.push_back(model.omega.decode(x));
  for (std::size_t t = 1; t < length; ++t) {
    if (model.kind == StudentModel::Kind::kUnigram) {
      x = marginal.draw(rng);
    } else {
      auto it = std::lower_bound(model.context_group.begin(), model.context_group.end(),
                                 std::pair<std::size_t, std::size_t>{x, 0});
      if (it == model.context_group.end() || it->first != x) {
        x = marginal.draw(rng);
      } else {
        auto [s, inserted] = by_group.try_emplace(it->second, model.group_p[it->second]);
        x = s->second.draw(rng);
      }
    }
    out.push_back(model.omega.decode(x));
  }
  return out;
}

}  // namespace musrover

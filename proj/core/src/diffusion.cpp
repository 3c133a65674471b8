#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <limits>

#include "stefan/cutcell.hpp"

namespace stefan {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct System {
  std::vector<int> unknown;  // cell -> row, -1 for covered cells
  std::vector<std::size_t> cell_of;
  SpMat A;           // full operator, interface coupling included
  SpMat A_local;     // operator without the interface gradient terms
  SpMat W;           // interface gradient terms only
  Vec b;
  Vec x0;
  StencilCounters stencils;
};

System assemble(const PhaseProblem& p, double dt) {
  const CutGeometry& g = p.geometry;
  const Grid& grid = g.grid;
  const int n = grid.n();
  const double dx = grid.dx();
  const double D = p.diffusivity;
  const double k_face = D / (dx * dx);

  System s;
  s.unknown.assign(grid.cell_count(), -1);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (g.volume[c] > kVolumeMin) {
      s.unknown[c] = static_cast<int>(s.cell_of.size());
      s.cell_of.push_back(c);
    }
  }
  const int m = static_cast<int>(s.cell_of.size());
  s.b = Vec::Zero(m);
  s.x0 = Vec::Zero(m);

  std::vector<Eigen::Triplet<double>> local, coupling;
  local.reserve(static_cast<std::size_t>(m) * 5);

  const auto& bc = p.field.boundaries();
  using Kind = BoundaryRule::Kind;

  for (int r = 0; r < m; ++r) {
    const std::size_t c = s.cell_of[r];
    const auto [i, j] = grid.unflatten(c);
    const double told = p.field(i, j);
    if (!std::isfinite(told))
      throw Error("diffuse_implicit: undefined value in active cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
    const double V = g.volume[c];
    double diag = V / dt;
    s.b[r] = V / dt * told;
    s.x0[r] = told;

    // Faces: (neighbour offset, face fraction, wall side when outside).
    struct Face {
      int di, dj;
      double alpha;
      Side side;
    };
    const std::array<Face, 4> faces = {Face{-1, 0, g.ax(i, j), Side::Left}, Face{1, 0, g.ax(i + 1, j), Side::Right},
                                       Face{0, -1, g.ay(i, j), Side::Bottom}, Face{0, 1, g.ay(i, j + 1), Side::Top}};
    for (const auto& f : faces) {
      if (f.alpha <= 0.0) continue;
      int ni = i + f.di;
      int nj = j + f.dj;
      if (!grid.inside(ni, nj)) {
        const auto& rule = bc[static_cast<int>(f.side)];
        if (rule.kind == Kind::Dirichlet) {
          const double v = rule.value_at(f.di != 0 ? j : i);
          diag += 2.0 * k_face * f.alpha;
          s.b[r] += 2.0 * k_face * f.alpha * v;
          continue;
        }
        if (rule.kind != Kind::Periodic) continue;
        ni = (ni + n) % n;
        nj = (nj + n) % n;
      }
      const int q = s.unknown[grid.index(ni, nj)];
      if (q < 0) continue;
      diag += k_face * f.alpha;
      local.emplace_back(r, q, -k_face * f.alpha);
    }

    if (g.cut[c] && g.alpha_gamma[c] > 0.0) {
      const auto st = try_gradient_stencil(g, i, j);
      if (!st) {
        ++s.stencils.missing;
      } else {
        s.stencils.count(st->order);
        const double scale = D / dx * g.alpha_gamma[c];
        s.b[r] -= scale * st->gamma_weight * p.t_gamma.at(c);
        for (const auto& [cell, w] : st->terms) coupling.emplace_back(r, s.unknown[cell], scale * w);
      }
    }
    local.emplace_back(r, r, diag);
  }

  s.A_local.resize(m, m);
  s.A_local.setFromTriplets(local.begin(), local.end());
  s.W.resize(m, m);
  s.W.setFromTriplets(coupling.begin(), coupling.end());
  s.A = s.A_local + s.W;
  return s;
}

double relative_residual(const SpMat& A, const Vec& x, const Vec& b) {
  const double bn = b.norm();
  const double rn = (b - A * x).norm();
  return bn > 0.0 ? rn / bn : rn;
}

Vec krylov_solve(const SpMat& A, const Vec& b, const Vec& guess, const DiffusionOptions& o, DiffusionReport& rep) {
  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setMaxIterations(o.max_iterations);
  solver.setTolerance(1e-3 * o.tolerance);
  solver.compute(A);
  Vec x = solver.solveWithGuess(b, guess);
  rep.iterations += static_cast<int>(solver.iterations());
  if (x.allFinite() && relative_residual(A, x, b) <= o.tolerance) return x;

  Eigen::SparseMatrix<double> Ac = A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(Ac);
  lu.factorize(Ac);
  if (lu.info() == Eigen::Success) {
    rep.direct_fallback = true;
    x = lu.solve(b);
  }
  return x;
}

/// Preconditioner applying the factorized local operator.
struct LocalCorrection {
  const Eigen::SparseLU<Eigen::SparseMatrix<double>>* lu = nullptr;
  LocalCorrection() = default;
  template <class M>
  explicit LocalCorrection(const M&) {}
  template <class M>
  LocalCorrection& analyzePattern(const M&) { return *this; }
  template <class M>
  LocalCorrection& factorize(const M&) { return *this; }
  template <class M>
  LocalCorrection& compute(const M&) { return *this; }
  template <class R>
  Vec solve(const R& r) const { return lu ? Vec(lu->solve(Vec(r))) : Vec(r); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }
};

}  // namespace

ScalarField diffuse_implicit(const PhaseProblem& p, double dt, const DiffusionOptions& options,
                             DiffusionReport* report) {
  if (!(dt > 0.0)) throw Error("diffuse_implicit: dt must be positive");
  DiffusionReport local_report;
  DiffusionReport& rep = report ? *report : local_report;
  rep = {};

  System s = assemble(p, dt);
  rep.stencils = s.stencils;
  Vec x = s.x0;
  if (s.cell_of.empty()) {
    ScalarField out = p.field;
    for (int j = 0; j < out.grid().n(); ++j)
      for (int i = 0; i < out.grid().n(); ++i) out(i, j) = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  if (options.coupling == InterfaceCoupling::Implicit) {
    x = krylov_solve(s.A, s.b, x, options, rep);
  } else {
    // Interface gradient terms only enter through the residual b - A x; each
    // correction solves with the local operator. The plain fixed point diverges
    // once small cells make A_local^-1 W large, so the corrections drive BiCGSTAB.
    Eigen::SparseMatrix<double> Al = s.A_local;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(Al);
    lu.factorize(Al);
    if (lu.info() != Eigen::Success) throw SolverDiverged("diffuse_implicit: local operator is singular");
    Eigen::BiCGSTAB<SpMat, LocalCorrection> solver;
    solver.setMaxIterations(options.max_iterations);
    solver.setTolerance(1e-3 * options.tolerance);
    solver.compute(s.A);
    solver.preconditioner().lu = &lu;
    x = solver.solveWithGuess(s.b, x);
    rep.iterations += static_cast<int>(solver.iterations());
  }
  rep.residual = relative_residual(s.A, x, s.b);
  if (!x.allFinite() || rep.residual > options.tolerance)
    throw SolverDiverged("diffuse_implicit: relative residual " + std::to_string(rep.residual) + " after " +
                         std::to_string(rep.iterations) + " iterations");

  ScalarField out = p.field;
  const Grid& grid = out.grid();
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      const int r = s.unknown[grid.index(i, j)];
      out(i, j) = r >= 0 ? x[r] : std::numeric_limits<double>::quiet_NaN();
    }
  out.apply_bc();
  return out;
}

double diffusion_residual(const PhaseProblem& p, double dt, const ScalarField& candidate) {
  System s = assemble(p, dt);
  Vec x(static_cast<Eigen::Index>(s.cell_of.size()));
  for (std::size_t r = 0; r < s.cell_of.size(); ++r) x[static_cast<Eigen::Index>(r)] = candidate.at(candidate.grid().unflatten(s.cell_of[r]));
  return relative_residual(s.A, x, s.b);
}

}  // namespace stefan

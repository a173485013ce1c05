#include "precopt/flops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace precopt::opcount {

namespace {
thread_local std::uint64_t g_multiplies = 0;
thread_local int g_max_solve_dim = 0;
thread_local bool g_enabled = true;
}  // namespace

void reset() {
  g_multiplies = 0;
  g_max_solve_dim = 0;
}

void set_enabled(bool on) { g_enabled = on; }
bool enabled() { return g_enabled; }
std::uint64_t multiplies() { return g_multiplies; }
int max_solve_dim() { return g_max_solve_dim; }

void add_multiplies(std::uint64_t n) {
  if (g_enabled) g_multiplies += n;
}

void note_solve_dim(int n) {
  if (g_enabled && n > g_max_solve_dim) g_max_solve_dim = n;
}

CMatrix mul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product shape mismatch");
  add_multiplies(static_cast<std::uint64_t>(a.rows()) * a.cols() * b.cols());
  return a * b;
}

CMatrix mul_ah_b(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matrix product shape mismatch");
  add_multiplies(static_cast<std::uint64_t>(a.cols()) * a.rows() * b.cols());
  return a.adjoint() * b;
}

CMatrix mul_a_bh(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matrix product shape mismatch");
  add_multiplies(static_cast<std::uint64_t>(a.rows()) * a.cols() * b.rows());
  return a * b.adjoint();
}

Eigen::LLT<CMatrix> llt_factor(const CMatrix& m, const char* label) {
  const int n = static_cast<int>(m.rows());
  note_solve_dim(n);
  add_multiplies(static_cast<std::uint64_t>(n) * n * n / 6);
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    double cond = std::numeric_limits<double>::infinity();
    if (es.info() == Eigen::Success && es.eigenvalues().size() > 0) {
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (lo > 0) cond = hi / lo;
    }
    throw IllConditionedError(std::string("Cholesky factorization failed for ") + label, cond);
  }
  return llt;
}

CMatrix llt_solve(const Eigen::LLT<CMatrix>& llt, const CMatrix& rhs) {
  const auto n = static_cast<std::uint64_t>(llt.matrixLLT().rows());
  add_multiplies(n * n * static_cast<std::uint64_t>(rhs.cols()));
  return llt.solve(rhs);
}

double llt_logdet(const Eigen::LLT<CMatrix>& llt) {
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

}  // namespace precopt::opcount

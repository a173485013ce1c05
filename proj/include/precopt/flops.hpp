#pragma once

#include <cstdint>

#include <Eigen/Cholesky>

#include "precopt/types.hpp"

namespace precopt::opcount {

/**
 * Thread-local counters for complex multiplies and positive-definite solve
 * sizes. Every hot-path product below feeds the counter so per-iteration
 * costs can be compared against the complexity model, and max_solve_dim()
 * certifies that no large-dimension system is ever factorized.
 */
void reset();
void set_enabled(bool on);
bool enabled();
std::uint64_t multiplies();
int max_solve_dim();
void add_multiplies(std::uint64_t n);
void note_solve_dim(int n);

// a * b, counting rows(a)*cols(a)*cols(b) complex multiplies.
CMatrix mul(const CMatrix& a, const CMatrix& b);
// a^H * b
CMatrix mul_ah_b(const CMatrix& a, const CMatrix& b);
// a * b^H
CMatrix mul_a_bh(const CMatrix& a, const CMatrix& b);

// Cholesky of a Hermitian positive definite matrix; throws IllConditionedError
// (with an eigenvalue-ratio estimate) when the factorization fails.
Eigen::LLT<CMatrix> llt_factor(const CMatrix& m, const char* label);
CMatrix llt_solve(const Eigen::LLT<CMatrix>& llt, const CMatrix& rhs);
double llt_logdet(const Eigen::LLT<CMatrix>& llt);

}  // namespace precopt::opcount

#pragma once

#include <cstddef>

#include "prune24/cell.hpp"

namespace prune24::cell {

// Coordinates at or below this (times max(1, z1)) count as zero when deciding
// whether a case solution has full support.
inline constexpr double kPositiveRelTol = 1e-12;
// GD aborts when the gradient norm grows by more than this relative amount.
inline constexpr double kAbortRelGuard = 1e-12;

namespace detail {

// Gradient of f, or of g (embedded with a zero 4th slot) when k == 3.
Vec4 case_gradient(const Vec4& w, const Vec4& z, double lambda, std::size_t k);
double case_objective(const Vec4& w, const Vec4& z, double lambda, std::size_t k);
bool strictly_positive(const Vec4& w, const Vec4& z, std::size_t k);
std::size_t case_dim(CaseTag which);

}  // namespace detail
}  // namespace prune24::cell
